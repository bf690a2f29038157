"""N-party pure states, named families, Haar sampling and partial traces.

Basis convention: the flat amplitude index encodes the local levels
``(s_1, ..., s_N)`` with party 1 most significant, i.e.
``b = sum_j s_j * M**(N - j)``.  This is numpy's row-major order for an array
of shape ``(M,) * N``, so reshaping is all that is needed to expose a party.

Party indices in the public API are 1-based.
"""
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .constants import MAX_AMPLITUDES, TOL
from .errors import (
    BadPartyIndex,
    LengthMismatch,
    NotNormalized,
    NotUnitary,
    QShareError,
    SameParty,
    TooLarge,
    WrongDimension,
    ZeroVector,
)
from .smallmat import is_unitary


@dataclass(frozen=True)
class PureState:
    n_parties: int
    local_dim: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.local_dim**self.n_parties

    def tensor(self) -> np.ndarray:
        """Amplitudes as an ``(M,) * N`` array, axis ``j - 1`` for party ``j``."""
        return self.amplitudes.reshape((self.local_dim,) * self.n_parties)

    def __eq__(self, other):
        if not isinstance(other, PureState):
            return NotImplemented
        return (self.n_parties == other.n_parties and self.local_dim == other.local_dim
                and np.array_equal(self.amplitudes, other.amplitudes))

    def __hash__(self):
        return hash((self.n_parties, self.local_dim, self.amplitudes.tobytes()))


def _check_size(n_parties, local_dim):
    if n_parties < 1:
        raise QShareError(f"n_parties must be >= 1, got {n_parties}")
    if local_dim < 2:
        raise QShareError(f"local_dim must be >= 2, got {local_dim}")
    if local_dim**n_parties > MAX_AMPLITUDES:
        raise TooLarge(f"{local_dim}**{n_parties} amplitudes exceeds cap {MAX_AMPLITUDES}")


def _check_party(j, n_parties):
    if not (isinstance(j, (int, np.integer)) and 1 <= j <= n_parties):
        raise BadPartyIndex(f"party index {j!r} not in 1..{n_parties}")


def from_amplitudes(raw, n_parties, local_dim=2, normalize=False) -> PureState:
    """Build a state from a flat amplitude sequence in the package basis order."""
    _check_size(n_parties, local_dim)
    amps = np.asarray(raw, dtype=complex).reshape(-1)
    expected = local_dim**n_parties
    if amps.size != expected:
        raise LengthMismatch(f"got {amps.size} amplitudes, expected {local_dim}**{n_parties} = {expected}")
    if not np.all(np.isfinite(amps)):
        raise QShareError("amplitudes must be finite")
    norm = np.linalg.norm(amps)
    if norm == 0:
        raise ZeroVector("amplitude vector is zero")
    if normalize:
        amps = amps / norm
    elif abs(norm - 1.0) > TOL.norm:
        raise NotNormalized(f"norm {norm!r} deviates from 1 by more than {TOL.norm:g}")
    return PureState(n_parties, local_dim, amps)


def product(levels, local_dim=2) -> PureState:
    """Computational-basis product state, e.g. ``product("010")``."""
    digits = [int(ch) for ch in levels] if isinstance(levels, str) else [int(x) for x in levels]
    if not digits:
        raise QShareError("product state needs at least one party")
    if any(not 0 <= s < local_dim for s in digits):
        raise QShareError(f"product levels {digits} out of range for local_dim {local_dim}")
    n = len(digits)
    _check_size(n, local_dim)
    amps = np.zeros(local_dim**n, dtype=complex)
    amps[int(np.ravel_multi_index(digits, (local_dim,) * n))] = 1.0
    return PureState(n, local_dim, amps)


def ghz(theta, n_parties=3) -> PureState:
    """cos(theta)|0...0> + sin(theta)|1...1>."""
    _check_size(n_parties, 2)
    amps = np.zeros(2**n_parties, dtype=complex)
    amps[0] = np.cos(theta)
    amps[-1] = np.sin(theta)
    return PureState(n_parties, 2, amps)


def w_state(alpha, beta, gamma) -> PureState:
    """alpha|100> + beta|010> + gamma|001>, normalised."""
    coeffs = np.array([alpha, beta, gamma], dtype=complex)
    norm = np.linalg.norm(coeffs)
    if norm == 0:
        raise ZeroVector("W coefficients are all zero")
    coeffs = coeffs / norm
    amps = np.zeros(8, dtype=complex)
    amps[0b100], amps[0b010], amps[0b001] = coeffs
    return PureState(3, 2, amps)


def bell() -> PureState:
    return PureState(2, 2, np.array([1, 0, 0, 1]) / np.sqrt(2))


def haar_batch(n_parties, local_dim, count, rng) -> np.ndarray:
    """``count`` Haar-random amplitude vectors as a ``(count, M**N)`` array.

    Real and imaginary parts are i.i.d. standard normals followed by
    normalisation, which is invariant under every global unitary.
    """
    _check_size(n_parties, local_dim)
    dim = local_dim**n_parties
    g = rng.standard_normal((count, dim, 2))
    psi = g[..., 0] + 1j * g[..., 1]
    return psi / np.linalg.norm(psi, axis=-1, keepdims=True)


def haar_random(n_parties, local_dim, rng) -> PureState:
    return PureState(n_parties, local_dim, haar_batch(n_parties, local_dim, 1, rng)[0])


def haar_unitary(m, rng, size=()):
    """Haar-distributed ``m x m`` unitaries (QR of a Ginibre matrix, phase fixed)."""
    shape = tuple(np.atleast_1d(size)) if size != () else ()
    z = (rng.standard_normal(shape + (m, m)) + 1j * rng.standard_normal(shape + (m, m))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (diag / np.abs(diag))[..., None, :]


# -- array-level kernels (leading batch axes allowed) -------------------------

def _split(psi, n_parties, local_dim, j):
    batch = psi.shape[:-1]
    return psi.reshape(batch + (local_dim ** (j - 1), local_dim, local_dim ** (n_parties - j)))


def single_party_rdm(psi, n_parties, local_dim, j):
    """Reduced density matrix of party ``j`` for amplitudes of shape ``(..., M**N)``."""
    t = _split(psi, n_parties, local_dim, j)
    return np.einsum("...aib,...ajb->...ij", t, np.conj(t))


def pair_rdm(psi, n_parties, local_dim, j, k):
    """Reduced density matrix of parties ``(j, k)``; ``j`` is the leading factor."""
    batch = psi.shape[:-1]
    nb = len(batch)
    t = psi.reshape(batch + (local_dim,) * n_parties)
    t = np.moveaxis(t, (nb + j - 1, nb + k - 1), (-2, -1))
    t = t.reshape(batch + (-1, local_dim * local_dim))
    return np.einsum("...ri,...rj->...ij", t, np.conj(t))


def apply_local_array(psi, n_parties, local_dim, j, u):
    """Apply ``u`` (shape ``(..., M, M)``) on party ``j`` of a batch of amplitudes."""
    t = _split(psi, n_parties, local_dim, j)
    out = np.einsum("...ij,...ajb->...aib", u, t)
    return out.reshape(psi.shape)


# -- state-level operations ----------------------------------------------------

def apply_local_unitary(state: PureState, j, u) -> PureState:
    _check_party(j, state.n_parties)
    u = np.asarray(u, dtype=complex)
    if u.shape != (state.local_dim, state.local_dim):
        raise WrongDimension(f"unitary must be {state.local_dim}x{state.local_dim}, got {u.shape}")
    if not is_unitary(u, TOL.unitary):
        raise NotUnitary("matrix is not unitary within tolerance")
    return PureState(state.n_parties, state.local_dim,
                     apply_local_array(state.amplitudes, state.n_parties, state.local_dim, j, u))


def reduced_density_single(state: PureState, j) -> np.ndarray:
    _check_party(j, state.n_parties)
    return single_party_rdm(state.amplitudes, state.n_parties, state.local_dim, j)


def reduced_density_pair(state: PureState, j, k) -> np.ndarray:
    _check_party(j, state.n_parties)
    _check_party(k, state.n_parties)
    if j == k:
        raise SameParty(f"pair reduction needs two distinct parties, got {j} twice")
    return pair_rdm(state.amplitudes, state.n_parties, state.local_dim, j, k)


# -- family specifications -----------------------------------------------------

FAMILIES = ("amplitudes", "ghz", "w", "bell", "product", "haar")


@dataclass(frozen=True)
class StateSpec:
    """A state described by family name plus named parameters.

    ``amplitudes`` takes ``n_parties``, ``local_dim`` and ``amplitudes``
    (list of ``[re, im]``); ``ghz`` takes ``theta`` and optional
    ``n_parties``; ``w`` takes ``alpha``, ``beta``, ``gamma``; ``product``
    takes ``bits`` and optional ``local_dim``; ``haar`` takes ``n_parties``,
    optional ``local_dim`` and ``seed``.
    """

    family: str
    params: dict[str, Any] = field(default_factory=dict)

    def build(self) -> PureState:
        p = self.params
        try:
            if self.family == "amplitudes":
                pairs = np.asarray(p["amplitudes"], dtype=float)
                if pairs.ndim != 2 or pairs.shape[1] != 2:
                    raise QShareError("field 'amplitudes' must be a list of [re, im] pairs")
                return from_amplitudes(pairs[:, 0] + 1j * pairs[:, 1],
                                       int(p["n_parties"]), int(p.get("local_dim", 2)))
            if self.family == "ghz":
                return ghz(float(p["theta"]), int(p.get("n_parties", 3)))
            if self.family == "w":
                return w_state(complex(p["alpha"]), complex(p["beta"]), complex(p["gamma"]))
            if self.family == "bell":
                return bell()
            if self.family == "product":
                return product(str(p["bits"]), int(p.get("local_dim", 2)))
            if self.family == "haar":
                rng = np.random.default_rng(int(p["seed"]))
                return haar_random(int(p["n_parties"]), int(p.get("local_dim", 2)), rng)
        except KeyError as exc:
            raise QShareError(f"family {self.family!r} is missing field {exc.args[0]!r}") from None
        raise QShareError(f"unknown family {self.family!r}; expected one of {', '.join(FAMILIES)}")
