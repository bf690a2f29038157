"""One-vs-rest entanglement quantities of pure N-party states.

For each party ``j`` the state splits as a single qubit against the other
``N - 1`` parties.  The two Schmidt eigenvalues ``lambda_min <= lambda_max``
give the Schmidt weight ``K = 1 / sum(lambda**2)`` and the normalised monotone

    Y = 1 - sqrt(2/K - 1) = 2 * lambda_min,

which lives in ``[0, 1]``.  Pairwise Wootters concurrences feed the monogamy
residual and the lower bound ``Y_j >= 1 - sqrt(1 - sum_k C_jk**2)``; the
sharing inequality supplies the upper bound ``Y_j <= sum_{k != j} Y_k``.

Array-level helpers (``*_batch``) take amplitude stacks of shape
``(..., M**N)`` and are what the verification suites call.
"""
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .constants import TOL
from .errors import BadDistribution, MonogamyViolation, QShareError
from .smallmat import hermitian_eigen, psd_sqrt, spin_flip_conjugate
from .states import PureState, _check_party, pair_rdm, reduced_density_pair, single_party_rdm

# relative threshold under which a Wootters eigenvalue is treated as zero
WOOTTERS_ZERO_FLOOR = 1e-14


def _require_qubits(state):
    if state.local_dim != 2:
        raise QShareError(f"operation defined for qubits only, got local_dim={state.local_dim}")


def _clamp_spectrum(evals):
    """Clip rounding noise into [0, 1] and renormalise when the drift is tiny."""
    evals = np.clip(evals, 0.0, 1.0)
    total = evals.sum(axis=-1, keepdims=True)
    drift = np.abs(total - 1.0)
    return np.where(drift <= TOL.distribution, evals / np.where(total > 0, total, 1.0), evals)


def _check_distribution(lambdas):
    lam = np.asarray(lambdas, dtype=float)
    if lam.ndim != 1 or lam.size == 0:
        raise BadDistribution("expected a non-empty 1-D sequence of probabilities")
    if np.any(lam < -TOL.clamp) or abs(lam.sum() - 1.0) > TOL.distribution:
        raise BadDistribution(f"{lam.tolist()} is not a probability distribution")
    return np.clip(lam, 0.0, None)


# -- batch kernels ---------------------------------------------------------

def marginal_spectra_batch(psi, n_parties, local_dim=2):
    """Ascending single-party eigenvalues, shape ``(..., N, M)``."""
    rhos = np.stack([single_party_rdm(psi, n_parties, local_dim, j)
                     for j in range(1, n_parties + 1)], axis=-3)
    return _clamp_spectrum(hermitian_eigen(rhos)[0])


def y_vectors_batch(psi, n_parties):
    """Y vectors for a stack of qubit states, shape ``(..., N)``."""
    if n_parties == 1:
        return np.zeros(psi.shape[:-1] + (1,))
    spectra = marginal_spectra_batch(psi, n_parties, 2)
    return np.clip(2.0 * spectra[..., 0], 0.0, 1.0)


def wootters_concurrence(rho):
    """Concurrence of two-qubit density matrices, shape ``(..., 4, 4)``.

    Uses the Hermitian ``sqrt(rho) rho~ sqrt(rho)``, whose spectrum equals that
    of ``rho rho~``.
    """
    root = psd_sqrt(rho)
    r = root @ spin_flip_conjugate(rho) @ root
    evals = hermitian_eigen(r)[0]
    # Eigenvalues at rounding level (~eps * largest) would surface as ~1e-8 in
    # their square roots and bias C low; treat them as exact zeros.
    floor = WOOTTERS_ZERO_FLOOR * np.maximum(evals[..., -1:], 0.0)
    evals = np.where(evals <= floor, 0.0, evals)
    mu = np.sqrt(evals)[..., ::-1]
    c = mu[..., 0] - mu[..., 1] - mu[..., 2] - mu[..., 3]
    return np.clip(c, 0.0, 1.0)


def concurrence_table_batch(psi, n_parties):
    """Symmetric ``(..., N, N)`` table of pairwise concurrences, zero diagonal."""
    pairs = list(combinations(range(1, n_parties + 1), 2))
    table = np.zeros(psi.shape[:-1] + (n_parties, n_parties))
    if not pairs:
        return table
    rhos = np.stack([pair_rdm(psi, n_parties, 2, j, k) for j, k in pairs], axis=-3)
    conc = wootters_concurrence(rhos)
    for idx, (j, k) in enumerate(pairs):
        table[..., j - 1, k - 1] = conc[..., idx]
        table[..., k - 1, j - 1] = conc[..., idx]
    return table


def bounds_batch(psi, n_parties):
    """Per-party bound sandwich for a stack of qubit states.

    Returns a dict of ``(..., N)`` arrays: ``lower``, ``value``, ``upper_raw``,
    ``upper``, ``lower_margin``, ``upper_margin``, ``c_rest_sq``,
    ``pair_sq_sum`` and ``monogamy``.
    """
    y = y_vectors_batch(psi, n_parties)
    table = concurrence_table_batch(psi, n_parties)
    pair_sq = np.sum(table**2, axis=-1)
    lower = 1.0 - np.sqrt(np.clip(1.0 - pair_sq, 0.0, None))
    upper_raw = y.sum(axis=-1, keepdims=True) - y
    c_rest_sq = y * (2.0 - y)
    return {
        "lower": lower,
        "value": y,
        "upper_raw": upper_raw,
        "upper": np.minimum(1.0, upper_raw),
        "lower_margin": y - lower,
        "upper_margin": upper_raw - y,
        "c_rest_sq": c_rest_sq,
        "pair_sq_sum": pair_sq,
        "monogamy": c_rest_sq - pair_sq,
    }


# -- scalar formulas -------------------------------------------------------

def schmidt_weight(lambdas) -> float:
    lam = _check_distribution(lambdas)
    return float(1.0 / np.sum(lam**2))


def y_from_weight(k) -> float:
    """Y = 1 - sqrt(2/K - 1) for a qubit marginal."""
    return float(np.clip(1.0 - np.sqrt(max(2.0 / k - 1.0, 0.0)), 0.0, 1.0))


def y_monotone(lambdas) -> float:
    """Y for a qubit marginal: twice the smaller Schmidt eigenvalue."""
    lam = _check_distribution(lambdas)
    if lam.size != 2:
        raise BadDistribution(f"qubit monotone needs two eigenvalues, got {lam.size}")
    return float(np.clip(2.0 * lam.min(), 0.0, 1.0))


def qudit_y_monotone(lambdas, local_dim) -> float:
    """Speculative M-level analogue ``1 - sqrt((M/K - 1) / (M - 1))``.

    Whether the sharing inequality survives for ``M > 2`` is an open
    conjecture; callers should treat any result as exploratory.
    """
    if local_dim < 2:
        raise BadDistribution(f"local_dim must be >= 2, got {local_dim}")
    lam = _check_distribution(lambdas)
    if lam.size != local_dim:
        raise BadDistribution(f"expected {local_dim} eigenvalues, got {lam.size}")
    inv_k = np.sum(lam**2)
    inner = max((local_dim * inv_k - 1.0) / (local_dim - 1), 0.0)
    return float(np.clip(1.0 - np.sqrt(inner), 0.0, 1.0))


def qudit_y_batch(spectra, local_dim):
    inv_k = np.sum(spectra**2, axis=-1)
    inner = np.clip((local_dim * inv_k - 1.0) / (local_dim - 1), 0.0, None)
    return np.clip(1.0 - np.sqrt(inner), 0.0, 1.0)


# -- state-level API -------------------------------------------------------

@dataclass(frozen=True)
class QubitMarginal:
    party: int
    lambda_min: float
    lambda_max: float
    K: float
    Y: float
    C_rest: float


@dataclass(frozen=True)
class EntanglementProfile:
    marginals: tuple
    y: np.ndarray

    @property
    def y_total(self) -> float:
        return float(np.sum(self.y))

    @property
    def n_parties(self) -> int:
        return len(self.marginals)


@dataclass(frozen=True)
class BoundsReport:
    lower: np.ndarray
    value: np.ndarray
    upper_raw: np.ndarray
    upper: np.ndarray
    lower_margin: np.ndarray
    upper_margin: np.ndarray


@dataclass(frozen=True)
class SchmidtDecomposition:
    """``state = sum_n sqrt(lambdas[n]) * f[n] (x) g[n]`` with ``lambdas`` descending.

    ``f`` holds local vectors of party ``j``; ``g`` holds complement vectors
    over the remaining parties in their original relative order.
    """

    lambdas: np.ndarray
    f: np.ndarray
    g: np.ndarray


def schmidt_coefficients(state: PureState, j):
    """Schmidt eigenvalues of party ``j``, largest first.

    Returns ``(lambda_max, lambda_min)`` for qubits and the full descending
    array for ``M > 2``.
    """
    _check_party(j, state.n_parties)
    rho = single_party_rdm(state.amplitudes, state.n_parties, state.local_dim, j)
    evals = _clamp_spectrum(hermitian_eigen(rho)[0])[::-1]
    if state.local_dim == 2:
        return float(evals[0]), float(evals[1])
    return evals


def _bipartite_matrix(psi, n_parties, local_dim, j):
    batch = psi.shape[:-1]
    nb = len(batch)
    t = psi.reshape(batch + (local_dim,) * n_parties)
    t = np.moveaxis(t, nb + j - 1, nb)
    return t.reshape(batch + (local_dim, -1))


def schmidt_vectors_batch(psi, n_parties, j):
    """Schmidt data across ``j | rest`` for a stack of qubit states.

    Returns ``(lambdas, f, g)`` with shapes ``(..., 2)``, ``(..., 2, 2)`` and
    ``(..., 2, 2**(N-1))``; index ``n`` on axis ``-2`` picks the term.
    """
    mat = _bipartite_matrix(psi, n_parties, 2, j)
    rho = mat @ np.conj(np.swapaxes(mat, -1, -2))
    evals, vecs = hermitian_eigen(rho, want_vectors=True)
    lambdas = np.clip(evals[..., ::-1], 0.0, 1.0)
    f = np.swapaxes(vecs[..., :, ::-1], -1, -2)          # rows are f_n
    proj = np.conj(f) @ mat                              # rows are sqrt(lambda_n) g_n
    norms = np.linalg.norm(proj, axis=-1)
    g = proj / np.where(norms > 0, norms, 1.0)[..., None]
    # a vanishing Schmidt term still needs a unit partner orthogonal to g_0
    weak = norms[..., 1] <= 1e-12
    if np.any(weak):
        g0 = g[..., 0, :]
        basis = np.zeros_like(g0)
        pick = np.argmin(np.abs(g0), axis=-1)
        np.put_along_axis(basis, pick[..., None], 1.0, axis=-1)
        fill = basis - np.sum(np.conj(g0) * basis, axis=-1, keepdims=True) * g0
        fill /= np.linalg.norm(fill, axis=-1, keepdims=True)
        g[..., 1, :] = np.where(weak[..., None], fill, g[..., 1, :])
    return lambdas, f, g


def schmidt_reconstruct(lambdas, f, g, n_parties, j):
    """Rebuild flat amplitudes from ``schmidt_vectors_batch`` output."""
    mat = np.einsum("...n,...ni,...nr->...ir", np.sqrt(lambdas), f, g)
    batch = mat.shape[:-2]
    nb = len(batch)
    t = mat.reshape(batch + (2,) * n_parties)
    t = np.moveaxis(t, nb, nb + j - 1)
    return t.reshape(batch + (-1,))


def schmidt_vectors(state: PureState, j) -> SchmidtDecomposition:
    _require_qubits(state)
    _check_party(j, state.n_parties)
    lambdas, f, g = schmidt_vectors_batch(state.amplitudes, state.n_parties, j)
    return SchmidtDecomposition(lambdas, f, g)


def entanglement_profile(state: PureState) -> EntanglementProfile:
    _require_qubits(state)
    n = state.n_parties
    marginals = []
    if n == 1:
        marginals.append(QubitMarginal(1, 0.0, 1.0, 1.0, 0.0, 0.0))
    else:
        spectra = marginal_spectra_batch(state.amplitudes, n, 2)
        for j in range(1, n + 1):
            lo, hi = (float(x) for x in spectra[j - 1])
            y = y_monotone((lo, hi))
            marginals.append(QubitMarginal(j, lo, hi, schmidt_weight((lo, hi)), y,
                                           float(np.sqrt(max(y * (2.0 - y), 0.0)))))
    y = np.array([m.Y for m in marginals])
    y.setflags(write=False)
    return EntanglementProfile(tuple(marginals), y)


def concurrence_one_vs_rest(state: PureState, j) -> float:
    """Concurrence of party ``j`` against the rest, ``sqrt(Y (2 - Y))``.

    Cross-checked against ``2 sqrt(lambda_1 lambda_2)``.
    """
    _require_qubits(state)
    hi, lo = schmidt_coefficients(state, j)
    y = 0.0 if state.n_parties == 1 else y_monotone((lo, hi))
    c = np.sqrt(max(y * (2.0 - y), 0.0))
    direct = 0.0 if state.n_parties == 1 else 2.0 * np.sqrt(lo * hi)
    if abs(c - direct) > TOL.identity:
        raise QShareError(f"concurrence routes disagree: {c!r} vs {direct!r}")
    return float(c)


def pairwise_concurrence(state: PureState, j, k) -> float:
    _require_qubits(state)
    return float(wootters_concurrence(reduced_density_pair(state, j, k)))


def concurrence_table(state: PureState) -> np.ndarray:
    _require_qubits(state)
    return concurrence_table_batch(state.amplitudes, state.n_parties)


def monogamy_residual(state: PureState, j) -> float:
    """C_{j|rest}**2 - sum_{k != j} C_jk**2; non-negative for every pure state."""
    _check_party(j, state.n_parties)
    c_rest = concurrence_one_vs_rest(state, j)
    table = concurrence_table(state)
    return float(c_rest**2 - np.sum(table[j - 1] ** 2))


def bounds_report(state: PureState) -> BoundsReport:
    _require_qubits(state)
    if state.n_parties < 2:
        raise QShareError("bounds need at least two parties")
    b = bounds_batch(state.amplitudes, state.n_parties)
    worst = np.max(b["pair_sq_sum"])
    if worst > 1.0 + TOL.monogamy_excess:
        raise MonogamyViolation(f"sum of squared pair concurrences {worst!r} exceeds 1")
    return BoundsReport(*(b[name] for name in
                          ("lower", "value", "upper_raw", "upper", "lower_margin", "upper_margin")))
