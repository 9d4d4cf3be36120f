import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import zero_crf
from crfhmc.chains.crf import (
    CrfModel,
    crf_log_normalizer,
    crf_log_score,
    crf_mpm_decode,
    crf_posterior_marginals,
)
from crfhmc.errors import (
    DegenerateModelError,
    InvalidModelError,
    InvalidTableError,
    LengthMismatchError,
)
from crfhmc.services import oracle
from crfhmc.services.generator import random_crf
from crfhmc.tables import LOG_ZERO, Alphabet, log_sum_exp


def naive_score(model: CrfModel, x, y) -> float:
    """逐项查表再求和"""
    terms = [model.U[n][x[n]][y[n]] for n in range(model.n)]
    terms += [model.V[n][x[n]][x[n + 1]] for n in range(model.n - 1)]
    return math.fsum(float(t) for t in terms)


def test_zero_potentials_score_is_zero():
    model = zero_crf(3, hidden=2, obs=2)
    for x in itertools.product(range(2), repeat=3):
        assert crf_log_score(model, x, (0, 1, 1)) == 0.0


def test_single_position_score_is_unary():
    model = CrfModel(Alphabet(("a", "b")), Alphabet(("u",)), 1, [], [[[0.0], [math.log(3)]]])
    assert crf_log_score(model, [1], [0]) == pytest.approx(math.log(3), abs=1e-15)


def test_seeded_score_matches_naive_sum():
    model = random_crf(3, 3, 2, seed=11)
    x, y = (2, 0, 1), (1, 1, 0)
    assert crf_log_score(model, x, y) == pytest.approx(naive_score(model, x, y), abs=1e-12)


def test_score_rejects_length_mismatch():
    model = zero_crf(3)
    with pytest.raises(LengthMismatchError):
        crf_log_score(model, (0, 1), (0, 0, 0))


# ====================
# 归一化常数
# ====================

def test_normalizer_of_zero_potentials():
    assert crf_log_normalizer(zero_crf(2), (0, 0)) == pytest.approx(math.log(4), abs=1e-15)


def test_normalizer_single_position():
    model = CrfModel(Alphabet(("a", "b")), Alphabet(("u", "v")), 1, [], [[[0.0, 5.0], [math.log(3), 1.0]]])
    assert crf_log_normalizer(model, (0,)) == pytest.approx(math.log(4), abs=1e-15)


def test_normalizer_matches_brute_force_sum():
    model = random_crf(4, 3, 2, seed=3)
    y = (1, 0, 0, 1)
    scores = [naive_score(model, x, y) for x in itertools.product(range(3), repeat=4)]
    assert len(scores) == 81
    assert crf_log_normalizer(model, y) == pytest.approx(log_sum_exp(scores), abs=1e-10)


def test_normalizer_degenerate_in_generalized_mode():
    U = [[0.0, LOG_ZERO], [0.0, LOG_ZERO]]
    model = CrfModel.tiled(Alphabet(("a", "b")), Alphabet(("u", "v")), 2, np.zeros((2, 2)), U, mode="generalized")
    with pytest.raises(DegenerateModelError):
        crf_log_normalizer(model, (0, 1))
    with pytest.raises(DegenerateModelError):
        crf_posterior_marginals(model, (1, 0))
    assert crf_log_normalizer(model, (0, 0)) == pytest.approx(math.log(4))


# ====================
# 后验边缘与 MPM
# ====================

def test_zero_potentials_marginals_are_uniform():
    marginals = crf_posterior_marginals(zero_crf(4, hidden=3), (0, 0, 0, 0))
    np.testing.assert_allclose(marginals.probabilities(), np.full((4, 3), 1 / 3), atol=1e-15)


def test_diagonal_coupling_keeps_label_swap_symmetry():
    V = [[math.log(9), 0.0], [0.0, math.log(9)]]
    model = CrfModel.tiled(Alphabet(("a", "b")), Alphabet(("u",)), 2, V, np.zeros((2, 1)))
    np.testing.assert_allclose(crf_posterior_marginals(model, (0, 0)).probabilities(), 0.5, atol=1e-15)


@pytest.mark.parametrize("seed", range(5))
def test_marginals_match_enumeration(seed):
    model = random_crf(5, 3, 2, seed=seed)
    for y in itertools.product(range(2), repeat=5):
        fast = crf_posterior_marginals(model, y).probabilities()
        exact = oracle.enumerate_crf_posterior(model, y).marginals()
        assert np.max(np.abs(fast - exact)) <= 1e-10


@pytest.mark.parametrize("seed", range(5))
def test_mpm_decode_matches_enumeration_argmax(seed):
    model = random_crf(5, 3, 2, seed=100 + seed)
    for y in itertools.product(range(2), repeat=5):
        exact = oracle.enumerate_crf_posterior(model, y).marginals()
        assert crf_mpm_decode(model, y) == tuple(int(np.argmax(row)) for row in exact)


def test_mpm_decode_forced_and_tied():
    # 单位置模型上的 U 直接给出边缘分布
    hidden, obs = Alphabet(("a", "b")), Alphabet(("u", "v"))
    U = np.log([[0.6, 0.3], [0.4, 0.7]])
    model = CrfModel(hidden, obs, 1, [], [U])
    assert crf_mpm_decode(model, (0,)) == (0,)
    assert crf_mpm_decode(model, (1,)) == (1,)
    assert crf_mpm_decode(zero_crf(3), (0, 0, 0)) == (0, 0, 0)


@given(
    seed=st.integers(0, 2**32 - 1),
    n=st.integers(1, 6),
    hidden=st.integers(2, 4),
    obs=st.integers(2, 3),
)
@settings(max_examples=40, deadline=None)
def test_enumerated_posterior_sums_to_one(seed, n, hidden, obs):
    model = random_crf(n, hidden, obs, seed=seed)
    y = tuple(int(v) for v in np.random.default_rng(seed).integers(0, obs, size=n))
    log_z = crf_log_normalizer(model, y)
    total = math.fsum(
        math.exp(crf_log_score(model, x, y) - log_z) for x in itertools.product(range(hidden), repeat=n)
    )
    assert total == pytest.approx(1.0, abs=1e-10)


@given(seed=st.integers(0, 2**32 - 1), shift=st.floats(-20.0, 20.0), table=st.integers(0, 6))
@settings(max_examples=40, deadline=None)
def test_marginals_are_shift_invariant(seed, shift, table):
    model = random_crf(4, 3, 2, seed=seed)
    V, U = [np.array(v) for v in model.V], [np.array(u) for u in model.U]
    if table < len(V):
        V[table] = V[table] + shift
    else:
        U[table - len(V)] = U[table - len(V)] + shift
    shifted = CrfModel(model.hidden, model.obs, model.n, V, U)
    y = (0, 1, 1, 0)
    before = crf_posterior_marginals(model, y).probabilities()
    after = crf_posterior_marginals(shifted, y).probabilities()
    assert np.max(np.abs(before - after)) <= 1e-10


def test_later_unary_term_changes_earlier_marginal():
    hidden, obs = Alphabet(("a", "b")), Alphabet(("u",))
    V = [[[math.log(9), 0.0], [0.0, math.log(9)]]]
    flat = CrfModel(hidden, obs, 2, V, [np.zeros((2, 1)), np.zeros((2, 1))])
    pulled = CrfModel(hidden, obs, 2, V, [np.zeros((2, 1)), [[0.0], [math.log(4)]]])
    before = crf_posterior_marginals(flat, (0, 0)).row(0)
    after = crf_posterior_marginals(pulled, (0, 0)).row(0)
    assert np.exp(after[1]) > np.exp(before[1]) + 0.1


def test_long_chain_with_large_potentials_stays_normalized():
    model = random_crf(100, 4, 3, seed=5, low=-50.0, high=50.0)
    y = tuple(int(v) for v in np.random.default_rng(5).integers(0, 3, size=100))
    probs = crf_posterior_marginals(model, y).probabilities()
    assert not np.isnan(probs).any()
    np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-9)
    assert math.isfinite(crf_log_normalizer(model, y))


# ====================
# 构造与平铺
# ====================

def test_strict_mode_rejects_negative_infinity():
    with pytest.raises(InvalidTableError):
        CrfModel.tiled(Alphabet(("a", "b")), Alphabet(("u",)), 2, [[0.0, LOG_ZERO], [0.0, 0.0]], np.zeros((2, 1)))


def test_constructor_checks_table_counts():
    hidden, obs = Alphabet(("a", "b")), Alphabet(("u",))
    with pytest.raises(InvalidModelError):
        CrfModel(hidden, obs, 3, [np.zeros((2, 2))], [np.zeros((2, 1))] * 3)
    with pytest.raises(InvalidModelError):
        CrfModel(hidden, obs, 0, [], [])
    with pytest.raises(InvalidModelError):
        CrfModel(hidden, obs, 1, [], [np.zeros((2, 1))], mode="lenient")


def test_tile_reuses_homogeneous_tables():
    model = zero_crf(3, hidden=2, obs=2)
    longer = model.tile(6)
    assert longer.n == 6
    assert longer.is_homogeneous()
    np.testing.assert_allclose(crf_posterior_marginals(longer, (0,) * 6).probabilities(), 0.5)


def test_tile_rejects_time_varying_model():
    with pytest.raises(InvalidModelError):
        random_crf(3, 2, 2, seed=0).tile(5)


def test_document_round_trip_is_exact():
    model = random_crf(3, 3, 2, seed=9, mode="generalized")
    again = CrfModel.from_document(model.to_document())
    for a, b in zip(model.V + model.U, again.V + again.U):
        np.testing.assert_array_equal(a, b)
    assert again.mode == "generalized"


# ====================
# 期望损失
# ====================

@pytest.mark.parametrize("seed", range(3))
def test_mpm_decode_minimises_expected_hamming_loss(seed):
    model = random_crf(4, 3, 2, seed=seed)
    y = (0, 1, 1, 0)
    posterior = oracle.enumerate_crf_posterior(model, y).entries
    losses = {}
    for x in itertools.product(range(3), repeat=4):
        risk = math.fsum(p * sum(a != b for a, b in zip(x, z)) for z, p in posterior.items())
        assert model.expected_loss(x, y) == pytest.approx(risk, abs=1e-10)
        losses[x] = risk
    best = min(losses.values())
    assert losses[crf_mpm_decode(model, y)] == pytest.approx(best, abs=1e-12)


def test_log_posterior_matches_enumeration(seeded_crf):
    y = (1, 0, 0, 1, 1)
    for x, p in oracle.enumerate_crf_posterior(seeded_crf, y).entries.items():
        assert seeded_crf.log_posterior(x, y) == pytest.approx(math.log(p), abs=1e-10)


def test_factory_dispatches_on_kind():
    from crfhmc.chains.factory import build_model, get_model_class
    from crfhmc.errors import UnsupportedKindError

    assert get_model_class("CRF") is CrfModel
    model = build_model(zero_crf(2).to_document())
    assert isinstance(model, CrfModel)
    with pytest.raises(UnsupportedKindError):
        get_model_class("pmc")
