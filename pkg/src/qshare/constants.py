"""Tolerance hierarchy used across the package.

Construction checks are the tightest, identity checks sit in the middle and
reconstruction residuals are the loosest.  Every module reads from here.
"""
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    norm: float = 1e-10
    hermitian: float = 1e-10
    unitary: float = 1e-10
    clamp: float = 1e-10
    psd_error: float = 1e-8
    identity: float = 1e-9
    reconstruction: float = 1e-8
    distribution: float = 1e-9
    membership: float = 1e-9
    boundary: float = 1e-7
    monogamy_excess: float = 1e-8


TOL = Tolerances()

# M**N cap on amplitude-vector length.
MAX_AMPLITUDES = 2**22

JACOBI_MAX_SWEEPS = 50

# Exact factorial arithmetic is supported up to this party count.
MAX_EXACT_PARTIES = 20
