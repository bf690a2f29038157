import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qshare import states
from qshare.errors import (
    BadPartyIndex,
    LengthMismatch,
    NotNormalized,
    NotUnitary,
    SameParty,
    TooLarge,
    ZeroVector,
)
from qshare.monotones import entanglement_profile
from qshare.states import (
    apply_local_unitary,
    from_amplitudes,
    ghz,
    haar_random,
    haar_unitary,
    reduced_density_pair,
    reduced_density_single,
    w_state,
)


def brute_force_rdm(amps, n, m, keep):
    """Partial trace by explicit summation over basis labels."""
    keep = list(keep)
    d = m ** len(keep)
    rho = np.zeros((d, d), dtype=complex)
    labels = list(itertools.product(range(m), repeat=n))
    index = {lab: i for i, lab in enumerate(labels)}
    for a in labels:
        for b in labels:
            if any(a[p] != b[p] for p in range(n) if p not in keep):
                continue
            ia = int(np.ravel_multi_index([a[p] for p in keep], (m,) * len(keep)))
            ib = int(np.ravel_multi_index([b[p] for p in keep], (m,) * len(keep)))
            rho[ia, ib] += amps[index[a]] * np.conj(amps[index[b]])
    return rho


def test_from_amplitudes_product():
    s = from_amplitudes([1, 0, 0, 0, 0, 0, 0, 0], 3)
    assert s.n_parties == 3 and s.local_dim == 2
    np.testing.assert_array_equal(entanglement_profile(s).y, [0, 0, 0])


def test_from_amplitudes_bell_and_normalize():
    s = from_amplitudes(np.array([1, 0, 0, 1]) / np.sqrt(2), 2)
    np.testing.assert_allclose(entanglement_profile(s).y, [1, 1])
    t = from_amplitudes([2, 0, 0, 2], 2, normalize=True)
    np.testing.assert_allclose(t.amplitudes, np.array([1, 0, 0, 1]) / np.sqrt(2))


def test_from_amplitudes_errors():
    with pytest.raises(LengthMismatch):
        from_amplitudes([1, 0, 0], 2)
    with pytest.raises(NotNormalized):
        from_amplitudes([2, 0, 0, 2], 2)
    with pytest.raises(ZeroVector):
        from_amplitudes([0, 0, 0, 0], 2, normalize=True)


def test_basis_convention_party_one_most_significant():
    s = states.product("100")
    assert np.flatnonzero(s.amplitudes).tolist() == [4]
    s = states.product("21", local_dim=3)
    assert np.flatnonzero(s.amplitudes).tolist() == [2 * 3 + 1]


def test_state_is_immutable():
    s = ghz(0.3)
    with pytest.raises(ValueError):
        s.amplitudes[0] = 0


def test_ghz_examples():
    np.testing.assert_allclose(entanglement_profile(ghz(np.pi / 4)).y, [1, 1, 1], atol=1e-12)
    np.testing.assert_array_equal(entanglement_profile(ghz(0.0)).y, [0, 0, 0])
    np.testing.assert_allclose(entanglement_profile(ghz(np.pi / 6)).y, [0.5] * 3, atol=1e-12)


def test_w_examples():
    np.testing.assert_allclose(entanglement_profile(w_state(1, 1, 1)).y, [2 / 3] * 3, atol=1e-12)
    np.testing.assert_array_equal(entanglement_profile(w_state(1, 0, 0)).y, [0, 0, 0])
    np.testing.assert_allclose(entanglement_profile(w_state(1, 1, 0)).y, [1, 1, 0], atol=1e-12)
    with pytest.raises(ZeroVector):
        w_state(0, 0, 0)


def test_haar_norm_and_determinism():
    a = haar_random(4, 2, np.random.default_rng(5))
    b = haar_random(4, 2, np.random.default_rng(5))
    assert abs(np.linalg.norm(a.amplitudes) - 1) <= 1e-12
    assert a == b


def test_haar_single_qubit_marginal():
    # |c_0|^2 of a Haar qubit is uniform on [0, 1]: mean 1/2, variance 1/12
    psi = states.haar_batch(1, 2, 10_000, np.random.default_rng(11))
    p0 = np.abs(psi[:, 0]) ** 2
    se = np.sqrt(1 / 12 / p0.size)
    assert abs(p0.mean() - 0.5) <= 5 * se


def test_haar_too_large():
    with pytest.raises(TooLarge):
        haar_random(23, 2, np.random.default_rng(0))


def test_apply_local_unitary_examples(rng):
    s = states.product("000")
    assert apply_local_unitary(s, 1, np.eye(2)) == s
    flipped = apply_local_unitary(s, 3, np.array([[0, 1], [1, 0]]))
    assert flipped == states.product("001")
    r = haar_random(3, 2, rng)
    u = haar_unitary(2, rng)
    moved = apply_local_unitary(r, 2, u)
    assert abs(np.linalg.norm(moved.amplitudes) - 1) <= 1e-12
    np.testing.assert_allclose(entanglement_profile(moved).y, entanglement_profile(r).y, atol=1e-9)


def test_apply_local_unitary_errors():
    s = states.product("00")
    with pytest.raises(NotUnitary):
        apply_local_unitary(s, 1, np.array([[1, 1], [0, 1]]))
    with pytest.raises(BadPartyIndex):
        apply_local_unitary(s, 3, np.eye(2))


def test_reduced_density_single_examples():
    np.testing.assert_allclose(reduced_density_single(states.product("000"), 1), np.diag([1, 0]))
    np.testing.assert_allclose(reduced_density_single(states.bell(), 1), np.eye(2) / 2, atol=1e-15)
    evals = np.linalg.eigvalsh(reduced_density_single(w_state(1, 1, 1), 1))
    np.testing.assert_allclose(evals, [1 / 3, 2 / 3], atol=1e-12)


def test_reduced_density_pair_examples():
    proj00 = np.zeros((4, 4)); proj00[0, 0] = 1
    np.testing.assert_allclose(reduced_density_pair(states.product("000"), 1, 2), proj00)
    expected = np.zeros((4, 4)); expected[0, 0] = expected[3, 3] = 0.5
    np.testing.assert_allclose(reduced_density_pair(ghz(np.pi / 4), 1, 2), expected, atol=1e-15)
    bell0 = w_state(1, 1, 0)   # (|10> + |01>)/sqrt2 on parties 1,2, then |0>
    v = np.array([0, 1, 1, 0]) / np.sqrt(2)
    np.testing.assert_allclose(reduced_density_pair(bell0, 1, 2), np.outer(v, v), atol=1e-15)
    with pytest.raises(SameParty):
        reduced_density_pair(bell0, 2, 2)
    with pytest.raises(BadPartyIndex):
        reduced_density_single(bell0, 0)


@pytest.mark.parametrize("n,m", [(3, 2), (4, 2), (3, 3)])
def test_partial_traces_match_brute_force(rng, n, m):
    s = haar_random(n, m, rng)
    for j in range(1, n + 1):
        np.testing.assert_allclose(reduced_density_single(s, j),
                                   brute_force_rdm(s.amplitudes, n, m, [j - 1]), atol=1e-12)
    for j, k in [(1, 2), (1, n), (n, 1), (2, 3)]:
        np.testing.assert_allclose(reduced_density_pair(s, j, k),
                                   brute_force_rdm(s.amplitudes, n, m, [j - 1, k - 1]), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 6), seed=st.integers(0, 2**32 - 1), data=st.data())
def test_pair_trace_consistency(n, seed, data):
    j = data.draw(st.integers(1, n))
    k = data.draw(st.integers(1, n).filter(lambda x: x != j))
    s = haar_random(n, 2, np.random.default_rng(seed))
    pair = reduced_density_pair(s, j, k).reshape(2, 2, 2, 2)
    single = np.einsum("ikjk->ij", pair)
    assert np.max(np.abs(single - reduced_density_single(s, j))) <= 1e-10
    evals = np.linalg.eigvalsh(reduced_density_single(s, j))
    assert abs(evals.sum() - 1) <= 1e-10 and evals.min() >= -1e-12


def test_state_spec_families():
    assert states.StateSpec("ghz", {"theta": 0.4}).build() == ghz(0.4)
    assert states.StateSpec("w", {"alpha": 1, "beta": "1j", "gamma": 0}).build() == w_state(1, 1j, 0)
    assert states.StateSpec("haar", {"n_parties": 3, "seed": 4}).build() == \
        haar_random(3, 2, np.random.default_rng(4))
