"""Batch property suites and figure datasets.

Every suite walks a grid of ``(N, block)`` pairs.  Each block draws from its
own generator derived from ``(seed, suite, N, block)``, so results do not
depend on how many worker threads run the blocks; per-block outputs are
concatenated in block order before any statistic is taken.

Violations are data: a failing sample becomes a counterexample record with
enough information (seed, N, block, offset, amplitudes) to rebuild it.
"""
import json
import os
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import geometry
from .constants import MAX_AMPLITUDES, TOL
from .errors import QShareError, TooLarge
from .monotones import (
    bounds_batch,
    marginal_spectra_batch,
    qudit_y_batch,
    schmidt_reconstruct,
    schmidt_vectors_batch,
    y_vectors_batch,
)
from .states import apply_local_array, ghz, haar_batch, haar_unitary, product, w_state

BLOCK_SIZE = 2000
MAX_COUNTEREXAMPLES = 10
GHZ_GRID = 181


def substream(seed, *key):
    """Independent generator for ``key`` under master ``seed``.

    String key parts are hashed with CRC-32 so names map to stable integers.
    """
    parts = tuple(zlib.crc32(k.encode()) if isinstance(k, str) else int(k) for k in key)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=parts)))


def worker_count(threads=None):
    if threads is None:
        threads = int(os.environ.get("QSHARE_THREADS", "0") or 0)
    return threads if threads > 0 else (os.cpu_count() or 1)


def _blocks(samples, block_size=BLOCK_SIZE):
    full, rest = divmod(samples, block_size)
    return [block_size] * full + ([rest] if rest else [])


def _run_blocks(fn, sizes, threads):
    """Apply ``fn(index, size)`` to every block; results come back in block order."""
    jobs = list(enumerate(sizes))
    workers = min(worker_count(threads), max(len(jobs), 1))
    if workers == 1:
        return [fn(i, n) for i, n in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


def _concat(parts, key):
    return np.concatenate([p[key] for p in parts])


@dataclass
class SuiteConfig:
    counts: tuple = tuple(range(2, 9))
    samples: int = 10_000
    seed: int = 0
    local_dim: int = 2
    tol: float = TOL.identity
    recon_tol: float = TOL.reconstruction
    boundary_tol: float = TOL.boundary
    inject: tuple = ()
    threads: Optional[int] = None

    def __post_init__(self):
        if self.samples < 1:
            raise QShareError(f"samples must be >= 1, got {self.samples}")
        if not self.counts or min(self.counts) < 1:
            raise QShareError(f"party counts must be >= 1, got {self.counts}")


@dataclass
class CheckResult:
    name: str
    samples: int
    violations: int
    worst_margin: float
    percentiles: dict
    tolerance: float
    passed: bool
    counterexamples: list = field(default_factory=list)


@dataclass
class VerificationReport:
    suite: str
    seed: int
    checks: list
    label: str = ""

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self):
        return {"suite": self.suite, "label": self.label, "seed": self.seed,
                "passed": self.passed, "checks": [asdict(c) for c in self.checks]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def summary(self) -> str:
        head = f"[{self.label}] " if self.label else ""
        lines = [f"{head}suite {self.suite}  seed {self.seed}  "
                 f"{'PASS' if self.passed else 'FAIL'}"]
        width = max([len(c.name) for c in self.checks] + [5])
        lines.append(f"  {'check':<{width}}  {'samples':>8}  {'viol':>5}  {'worst':>12}  "
                     f"{'p1':>12}  {'p50':>12}  {'p99':>12}  result")
        for c in self.checks:
            p = c.percentiles
            lines.append(f"  {c.name:<{width}}  {c.samples:>8}  {c.violations:>5}  "
                         f"{c.worst_margin:>12.6g}  {p['p1']:>12.6g}  {p['p50']:>12.6g}  "
                         f"{p['p99']:>12.6g}  {'pass' if c.passed else 'FAIL'}")
        return "\n".join(lines)


def check(name, margins, tol, describe=None, violated=None):
    """Summarise per-sample margins; a margin below ``-tol`` is a violation.

    ``violated`` overrides the threshold rule with an explicit boolean mask
    when the pass criterion is categorical rather than metric.
    """
    margins = np.asarray(margins, dtype=float).reshape(-1)
    if violated is None:
        violated = margins < -tol
    bad = np.flatnonzero(violated)
    if margins.size:
        p1, p50, p99 = (float(v) for v in np.percentile(margins, [1, 50, 99]))
        worst = float(margins.min())
    else:
        p1 = p50 = p99 = worst = 0.0
    records = []
    if describe is not None:
        records = [dict(describe(int(i)), margin=float(margins[i]))
                   for i in bad[:MAX_COUNTEREXAMPLES]]
    return CheckResult(name, int(margins.size), int(bad.size), worst,
                       {"p1": p1, "p50": p50, "p99": p99}, tol, bad.size == 0, records)


def _amp_pairs(psi):
    return [[float(z.real), float(z.imag)] for z in psi]


def _haar_describer(seed, suite, n, m, block_size=BLOCK_SIZE):
    def describe(i):
        block, offset = divmod(i, block_size)
        psi = haar_batch(n, m, block_size, substream(seed, suite, n, block))[offset]
        return {"seed": seed, "suite": suite, "n_parties": n, "local_dim": m,
                "block": block, "offset": offset, "amplitudes": _amp_pairs(psi)}
    return describe


def _haar_block(seed, suite, n, m):
    def draw(block, size):
        # always draw a full block so a record's (block, offset) replays exactly
        psi = haar_batch(n, m, BLOCK_SIZE, substream(seed, suite, n, block))
        return psi[:size]
    return draw


def margin_evaluator(y_vectors):
    """Minimum sharing margin per Y vector (negative means outside the polytope)."""
    y = np.atleast_2d(np.asarray(y_vectors, dtype=float))
    return np.min(geometry.inequality_margins(y), axis=-1)


# -- suites --------------------------------------------------------------------

def run_inequality_sweep(config: SuiteConfig) -> VerificationReport:
    suite = "inequality"
    checks = []
    for n in config.counts:
        draw = _haar_block(config.seed, suite, n, 2)

        def block(i, size, n=n, draw=draw):
            y = y_vectors_batch(draw(i, size), n)
            return {"y": y}

        y = _concat(_run_blocks(block, _blocks(config.samples), config.threads), "y")
        describe = _haar_describer(config.seed, suite, n, 2)
        margins = margin_evaluator(y)
        checks.append(check(f"sharing N={n}", margins, config.tol, describe))
        half = y.sum(axis=-1) - 2 * y.max(axis=-1)
        checks.append(check(f"half_total N={n}", half, config.tol, describe))
        if n == 2:
            checks.append(check("collapse N=2", -np.abs(y[:, 0] - y[:, 1]), config.tol, describe))
    if config.inject:
        injected = [np.asarray(v, dtype=float) for v in config.inject]
        margins = np.array([margin_evaluator(v)[0] for v in injected])
        checks.append(check("injected", margins, config.tol,
                            lambda i: {"y": injected[i].tolist()}))
    return VerificationReport(suite, config.seed, checks)


def run_bound_sandwich(config: SuiteConfig) -> VerificationReport:
    suite = "bounds"
    checks = []
    for n in (c for c in config.counts if c >= 2):
        draw = _haar_block(config.seed, suite, n, 2)

        def block(i, size, n=n, draw=draw):
            b = bounds_batch(draw(i, size), n)
            return {
                "lower": np.min(b["lower_margin"], axis=-1),
                "upper": np.min(b["upper"] - b["value"], axis=-1),
                "monogamy": np.min(b["monogamy"], axis=-1),
            }

        parts = _run_blocks(block, _blocks(config.samples), config.threads)
        describe = _haar_describer(config.seed, suite, n, 2)
        for key in ("lower", "upper", "monogamy"):
            checks.append(check(f"{key} N={n}", _concat(parts, key), config.tol, describe))

    w = bounds_batch(w_state(1, 1, 1).amplitudes, 3)
    checks.append(check("w_lower_tight", -np.abs(w["lower"] - w["value"]), config.tol))
    g = bounds_batch(ghz(np.pi / 4).amplitudes, 3)
    checks.append(check("ghz_bounds",
                        -np.concatenate([np.abs(g["lower"]), np.abs(g["upper"] - 1.0)]),
                        config.tol))
    return VerificationReport(suite, config.seed, checks)


def run_identity_checks(config: SuiteConfig) -> VerificationReport:
    suite = "identities"
    checks = []
    for n in (c for c in config.counts if c >= 2):
        draw = _haar_block(config.seed, suite, n, 2)

        def block(i, size, n=n, draw=draw):
            psi = draw(i, size)
            spectra = marginal_spectra_batch(psi, n, 2)
            y = np.clip(2.0 * spectra[..., 0], 0.0, 1.0)
            c_direct = 2.0 * np.sqrt(spectra[..., 0] * spectra[..., 1])
            cy = np.max(np.abs(c_direct**2 - y * (2.0 - y)), axis=-1)

            rng = substream(config.seed, suite + "/unitaries", n, i)
            rotated = psi
            for j in range(1, n + 1):
                rotated = apply_local_array(rotated, n, 2, j, haar_unitary(2, rng, size))
            drift = np.max(np.abs(y_vectors_batch(rotated, n) - y), axis=-1)

            resid = np.zeros(size)
            for j in range(1, n + 1):
                lam, f, g = schmidt_vectors_batch(psi, n, j)
                rebuilt = schmidt_reconstruct(lam, f, g, n, j)
                resid = np.maximum(resid, np.max(np.abs(rebuilt - psi), axis=-1))
            return {"cy": cy, "drift": drift, "resid": resid}

        parts = _run_blocks(block, _blocks(config.samples), config.threads)
        describe = _haar_describer(config.seed, suite, n, 2)
        checks.append(check(f"c_y_identity N={n}", -_concat(parts, "cy"), config.tol, describe))
        checks.append(check(f"local_unitary N={n}", -_concat(parts, "drift"), config.tol, describe))
        checks.append(check(f"schmidt_rebuild N={n}", -_concat(parts, "resid"),
                            config.recon_tol, describe))
    return VerificationReport(suite, config.seed, checks)


def w_batch(count, rng):
    """Random W coefficients: magnitudes uniform on the positive octant, uniform phases.

    Returns ``(coeffs, amplitudes)`` with shapes ``(count, 3)`` and ``(count, 8)``.
    """
    mags = np.abs(rng.standard_normal((count, 3)))
    mags /= np.linalg.norm(mags, axis=-1, keepdims=True)
    coeffs = mags * np.exp(2j * np.pi * rng.random((count, 3)))
    amps = np.zeros((count, 8), dtype=complex)
    amps[:, 0b100], amps[:, 0b010], amps[:, 0b001] = coeffs.T
    return coeffs, amps


def run_family_checks(config: SuiteConfig) -> VerificationReport:
    suite = "families"
    checks = []

    thetas = np.linspace(0.0, np.pi, GHZ_GRID)
    ghz_amps = np.stack([ghz(t).amplitudes for t in thetas])
    ghz_y = y_vectors_batch(ghz_amps, 3)
    expected = 1.0 - np.abs(np.cos(2 * thetas))
    checks.append(check("ghz_diagonal", -np.max(np.abs(ghz_y - expected[:, None]), axis=-1),
                        config.tol, lambda i: {"theta": float(thetas[i])}))

    def block(i, size):
        coeffs, amps = w_batch(size, substream(config.seed, suite, 3, i))
        y = y_vectors_batch(amps, 3)
        y_real = y_vectors_batch(np.abs(amps).astype(complex), 3)
        return {"coeffs": coeffs, "y": y, "phase": np.max(np.abs(y - y_real), axis=-1)}

    parts = _run_blocks(block, _blocks(config.samples), config.threads)
    coeffs, y = _concat(parts, "coeffs"), _concat(parts, "y")

    def describe(i):
        return {"seed": config.seed, "coeffs": [[float(c.real), float(c.imag)] for c in coeffs[i]],
                "y": y[i].tolist()}

    # margin: minus the distance to the nearest tetrahedron face; pass/fail by label
    labels = [geometry.classify_face(v, config.boundary_tol) for v in y]
    off_surface = np.array([lab in ("interior", "exterior") for lab in labels])
    margins = geometry.inequality_margins(y)
    distance = np.minimum(np.abs(y.sum(axis=-1) - 2), np.min(np.abs(margins), axis=-1))
    checks.append(check("w_on_surface", -distance, config.boundary_tol, describe,
                        violated=off_surface))

    balanced = np.max(np.abs(coeffs) ** 2, axis=-1) <= 0.5
    idx = np.flatnonzero(balanced)
    checks.append(check("w_balanced_on_ABC", -np.abs(y[idx].sum(axis=-1) - 2.0), config.tol,
                        lambda i: describe(int(idx[i]))))
    checks.append(check("w_phase_free", -_concat(parts, "phase"), config.tol, describe))

    sym = y_vectors_batch(w_state(1, 1, 1).amplitudes, 3)
    checks.append(check("w_symmetric", -np.abs(sym - 2.0 / 3.0), config.tol))
    return VerificationReport(suite, config.seed, checks)


def run_qudit_speculation(local_dim, n_parties, samples, seed, threads=None,
                          tol=TOL.identity) -> VerificationReport:
    """Exploratory test of the sharing inequality for M-level parties.

    Nothing here is a theorem: a violation is reported as a counterexample
    candidate, never raised.
    """
    if local_dim < 3:
        raise QShareError(f"qudit suite needs local_dim >= 3, got {local_dim}")
    if local_dim**n_parties > MAX_AMPLITUDES:
        raise TooLarge(f"{local_dim}**{n_parties} amplitudes exceeds cap {MAX_AMPLITUDES}")
    suite = "qudit"
    draw = _haar_block(seed, suite, n_parties, local_dim)

    def block(i, size):
        spectra = marginal_spectra_batch(draw(i, size), n_parties, local_dim)
        return {"y": qudit_y_batch(spectra, local_dim)}

    y = _concat(_run_blocks(block, _blocks(samples), threads), "y")
    describe = _haar_describer(seed, suite, n_parties, local_dim)
    tag = f"M={local_dim} N={n_parties}"
    checks = [check(f"qudit_sharing {tag}", margin_evaluator(y), tol, describe)]
    if n_parties == 2:
        checks.append(check(f"qudit_collapse {tag}", -np.abs(y[:, 0] - y[:, 1]), tol, describe))
    prod = product("0" * n_parties, local_dim)
    y_prod = qudit_y_batch(marginal_spectra_batch(prod.amplitudes, n_parties, local_dim), local_dim)
    checks.append(check(f"qudit_product {tag}",
                        np.concatenate([-np.abs(y_prod), margin_evaluator(y_prod)]), tol))
    return VerificationReport(suite, seed, checks, label="SPECULATIVE")


# -- figure datasets ------------------------------------------------------------

FIG1_COLUMNS = ("state_id", "Y_1", "upper_raw", "upper_clamped", "lower")
FIG4_COLUMNS = ("Y_T", "A_exact", "A_mc", "mc_std_error")


def figure1_dataset(samples=100, seed=0):
    """Bound sandwich for party 1 of random three-qubit states, in sample order."""
    psi = haar_batch(3, 2, samples, substream(seed, "fig1"))
    b = bounds_batch(psi, 3)
    return [(i, float(b["value"][i, 0]), float(b["upper_raw"][i, 0]),
             float(b["upper"][i, 0]), float(b["lower"][i, 0])) for i in range(samples)]


def figure4_dataset(grid=61, samples=100_000, seed=0):
    """Cross-section area against ``Y_T`` for three parties: exact and Monte Carlo."""
    if grid < 2:
        raise QShareError(f"grid needs at least 2 points, got {grid}")
    rows = []
    for i, yt in enumerate(np.linspace(0.0, 3.0, grid)):
        yt = float(yt)
        exact = geometry.additivity_n3(yt)
        if 0 < yt < 3:
            cs = geometry.additivity_mc(3, yt, samples, substream(seed, "fig4", i))
            rows.append((yt, exact, cs.hyperarea, cs.standard_error))
        else:
            rows.append((yt, exact, 0.0, 0.0))
    return rows


def polytope_mesh_export():
    return geometry.polytope_mesh()


SUITES = {
    "inequality": run_inequality_sweep,
    "bounds": run_bound_sandwich,
    "identities": run_identity_checks,
    "families": run_family_checks,
}
