import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_raw_model
from oracles import least_squares_error, literal_value, stagewise_means
from hdmr_adp.errors import DomainError, EmptyAccumulatorError, PreconditionError
from hdmr_adp.hdmr import (GridDomain, HdmrModel, MarginalAccumulator, accumulate, evaluate,
                           finalize, model_from_function, rebalance, stagewise_components,
                           weighted_error)

XOR = {(0, 0): 0.0, (0, 1): 1.0, (1, 0): 1.0, (1, 1): 0.0}


def xor_model():
    return HdmrModel(GridDomain((2, 2)), 0.5, (np.zeros(2), np.zeros(2)),
                     {(0, 1): np.array([[-0.5, 0.5], [0.5, -0.5]])})


# ---- GridDomain

def test_domain_basics():
    d = GridDomain((3, 4, 2))
    assert d.ndim == 3 and d.cardinality == 24 and d.fits_int64()
    assert d.pairs() == [(0, 1), (0, 2), (1, 2)]
    pts = d.iter_points()
    assert pts.shape == (24, 3)
    assert [tuple(p) for p in pts] == list(itertools.product(range(3), range(4), range(2)))


def test_domain_rejects_bad_sizes():
    with pytest.raises(PreconditionError):
        GridDomain(())
    with pytest.raises(PreconditionError):
        GridDomain((3, 0))


def test_huge_domain_reports_overflow():
    d = GridDomain((1000,) * 8)
    assert d.cardinality == 1000 ** 8
    assert not d.fits_int64()


# ---- evaluate

def test_constant_model():
    m = HdmrModel.zeros(GridDomain((3, 2)), g0=7.5)
    assert evaluate(m, (2, 1)) == 7.5


def test_xor_value():
    assert evaluate(xor_model(), (0, 1)) == 1.0
    for x, v in XOR.items():
        assert evaluate(xor_model(), x) == v


def test_evaluate_matches_literal(rng):
    m = random_raw_model(rng, (3, 4))
    assert evaluate(m, (2, 1)) == pytest.approx(literal_value(m, (2, 1)), abs=1e-14)
    m3 = random_raw_model(rng, (3, 4, 2, 3))
    for x in m3.domain.iter_points():
        assert m3.evaluate(x) == pytest.approx(literal_value(m3, tuple(x)), abs=1e-12)
    np.testing.assert_allclose(m3.evaluate_many(m3.domain.iter_points()),
                               [literal_value(m3, tuple(x)) for x in m3.domain.iter_points()], atol=1e-12)


def test_domain_error_names_axis():
    m = xor_model()
    with pytest.raises(DomainError) as exc:
        evaluate(m, (0, 2))
    assert exc.value.axis == 1 and "axis 2" in str(exc.value)


def test_symmetric_lookup(rng):
    m = random_raw_model(rng, (3, 4))
    for i in range(3):
        for j in range(4):
            assert m.second(1, 0, j, i) == m.second(0, 1, i, j)
    np.testing.assert_array_equal(m.pair_table(1, 0), m.pair_table(0, 1).T)
    assert m.second(1, 1, 0, 2) == 0.0


def test_model_tables_read_only(rng):
    m = random_raw_model(rng, (2, 3))
    with pytest.raises(ValueError):
        m.first_order[0][0] = 1.0


# ---- accumulate

def test_accumulate_single_and_repeat():
    acc = MarginalAccumulator(GridDomain((2, 2)))
    accumulate(acc, (0, 0), 3.0)
    assert acc.sum0 == 3.0 and acc.count0 == 1
    acc = MarginalAccumulator(GridDomain((2, 2)))
    acc.accumulate((1, 1), 1.0).accumulate((1, 1), 2.0)
    assert acc.sum0 == 3.0 and acc.count0 == 2


def test_accumulate_xor_marginals():
    acc = MarginalAccumulator(GridDomain((2, 2)))
    for x, v in XOR.items():
        acc.accumulate(x, v)
    assert acc.sum0 == 2.0
    assert acc.first(0)[0][0] == 1.0
    assert acc.pair(0, 1)[0][0, 1] == 1.0
    np.testing.assert_array_equal(acc.pair(1, 0)[1], acc.pair(0, 1)[1].T)


def test_accumulate_domain_error():
    acc = MarginalAccumulator(GridDomain((2, 2)))
    with pytest.raises(DomainError):
        acc.accumulate((2, 0), 1.0)
    with pytest.raises(PreconditionError):
        acc.accumulate_batch([[0, 0]], [np.nan])


@given(st.integers(0, 2**32 - 1), st.integers(1, 40))
def test_count_invariants(seed, n):
    rng = np.random.default_rng(seed)
    dom = GridDomain((3, 2, 4))
    pts = np.column_stack([rng.integers(0, s, n) for s in dom.axis_sizes])
    acc = MarginalAccumulator(dom).accumulate_batch(pts, rng.standard_normal(n))
    for m in range(3):
        assert acc.first(m)[1].sum() == acc.count0
    for m, k in dom.pairs():
        assert acc.pair(m, k)[1].sum() == acc.count0
    assert acc.first_counts.min() >= 0


@given(st.integers(0, 2**32 - 1), st.integers(2, 60), st.booleans())
def test_merge_matches_single_pass(seed, n, compensated):
    rng = np.random.default_rng(seed)
    dom = GridDomain((3, 3, 2))
    pts = np.column_stack([rng.integers(0, s, n) for s in dom.axis_sizes])
    vals = rng.standard_normal(n)
    whole = MarginalAccumulator(dom, compensated).accumulate_batch(pts, vals)
    cut = int(rng.integers(1, n))
    a = MarginalAccumulator(dom, compensated).accumulate_batch(pts[:cut], vals[:cut])
    b = MarginalAccumulator(dom, compensated).accumulate_batch(pts[cut:], vals[cut:])
    for merged in (a + b, b + a):
        assert merged.count0 == whole.count0
        np.testing.assert_array_equal(merged.first_counts, whole.first_counts)
        np.testing.assert_array_equal(merged.pair_counts, whole.pair_counts)
        np.testing.assert_allclose(merged._total(merged.pair_sums, "_cp"),
                                   whole._total(whole.pair_sums, "_cp"), rtol=1e-12, atol=1e-12)
        assert merged.total() == pytest.approx(whole.total(), rel=1e-12, abs=1e-12)
    perm = rng.permutation(n)
    shuffled = MarginalAccumulator(dom, compensated).accumulate_batch(pts[perm], vals[perm])
    np.testing.assert_array_equal(shuffled.pair_counts, whole.pair_counts)
    np.testing.assert_allclose(shuffled.first_sums, whole.first_sums, rtol=1e-12, atol=1e-12)


def test_merge_domain_mismatch():
    with pytest.raises(PreconditionError):
        MarginalAccumulator(GridDomain((2,))) + MarginalAccumulator(GridDomain((3,)))


# ---- finalize

def test_finalize_empty():
    with pytest.raises(EmptyAccumulatorError):
        finalize(MarginalAccumulator(GridDomain((2, 2))))


def test_finalize_constant():
    m = model_from_function(GridDomain((2, 2)), lambda x: 4.25)
    assert m.g0 == 4.25
    assert all(not t.any() for t in m.first_order)
    assert all(not t.any() for t in m.second_order.values())


def test_finalize_xor():
    m = model_from_function(GridDomain((2, 2)), lambda x: XOR[x])
    assert m.g0 == 0.5
    assert all(not t.any() for t in m.first_order)
    np.testing.assert_array_equal(m.second_order[(0, 1)], [[-0.5, 0.5], [0.5, -0.5]])


def test_finalize_restricted_xor_three_points():
    pts = [(0, 0), (0, 1), (1, 0)]
    acc = MarginalAccumulator(GridDomain((2, 2)))
    for p in pts:
        acc.accumulate(p, XOR[p])
    g0, first, second = stagewise_components(acc)
    # hand computation: g0 = 2/3; g_1 = (1/2 - 2/3, 1 - 2/3); g_2 likewise
    assert g0 == pytest.approx(2 / 3)
    np.testing.assert_allclose(first[0], [-1 / 6, 1 / 3])
    np.testing.assert_allclose(first[1], [-1 / 6, 1 / 3])
    np.testing.assert_allclose(second[(0, 1)], [[-1 / 3, 1 / 6], [1 / 6, 0.0]])
    o0, o1, o2 = stagewise_means((2, 2), [(p, XOR[p]) for p in pts])
    assert g0 == pytest.approx(o0)
    model = finalize(acc)
    assert weighted_error(model, [(p, XOR[p]) for p in pts]) == pytest.approx(0.0, abs=1e-24)


@given(st.integers(0, 2**32 - 1))
def test_stagewise_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    sizes = tuple(int(s) for s in rng.integers(1, 4, size=3))
    dom = GridDomain(sizes)
    n = int(rng.integers(1, 30))
    samples = [(tuple(int(rng.integers(0, s)) for s in sizes), float(rng.standard_normal())) for _ in range(n)]
    acc = MarginalAccumulator(dom)
    for x, v in samples:
        acc.accumulate(x, v)
    g0, first, second = stagewise_components(acc)
    o0, of, osec = stagewise_means(sizes, samples)
    assert g0 == pytest.approx(o0, abs=1e-12)
    for a, b in zip(first, of):
        np.testing.assert_allclose(a, b, atol=1e-12)
    for k in second:
        np.testing.assert_allclose(second[k], osec[k], atol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_hierarchical_optimality_restricted(seed):
    rng = np.random.default_rng(seed)
    dom = GridDomain((3, 3, 2))
    pts = dom.iter_points()
    keep = pts[rng.random(len(pts)) < 0.6]
    vals = rng.standard_normal(len(keep))
    acc = MarginalAccumulator(dom).accumulate_batch(keep, vals)
    g0, first, second = stagewise_components(acc)
    err0 = lambda c: np.sum((vals - c) ** 2)  # noqa: E731
    for eps in (1e-3, -1e-3, 0.5):
        assert err0(g0 + eps) > err0(g0)
    r1 = vals - g0
    for m in range(3):
        base = np.sum((r1 - first[m][keep[:, m]]) ** 2)
        for _ in range(20):
            t = first[m].copy()
            i = rng.integers(0, len(t))
            if not np.any(keep[:, m] == i):
                continue
            t[i] += rng.standard_normal() * 0.1
            assert np.sum((r1 - t[keep[:, m]]) ** 2) > base
    for (m, k), tab in second.items():
        r2 = vals - g0 - first[m][keep[:, m]] - first[k][keep[:, k]]
        base = np.sum((r2 - tab[keep[:, m], keep[:, k]]) ** 2)
        for _ in range(20):
            t = tab.copy()
            i, j = keep[rng.integers(0, len(keep))][[m, k]]
            t[i, j] += rng.standard_normal() * 0.1
            assert np.sum((r2 - t[keep[:, m], keep[:, k]]) ** 2) > base


# ---- rebalance

def test_rebalance_fixed_point():
    m = xor_model()
    assert rebalance(m).equals(m)


def test_rebalance_constant_first_order():
    dom = GridDomain((4, 2))
    m = HdmrModel(dom, 0.0, (np.ones(4), np.zeros(2)), {})
    r = rebalance(m)
    assert r.g0 == 1.0 and not r.first_order[0].any()
    for x in dom.iter_points():
        assert r.evaluate(x) == m.evaluate(x)


@given(st.integers(0, 2**32 - 1))
def test_rebalance_preserves_values(seed):
    rng = np.random.default_rng(seed)
    m = random_raw_model(rng, (3, 3, 3), scale=3.0)
    r = rebalance(m)
    assert r.is_balanced(rtol=1e-12)
    for t in (*r.first_order, *r.second_order.values()):
        assert abs(t.sum()) <= 1e-12 * t.size * np.abs(t).max()
    pts = m.domain.iter_points()
    np.testing.assert_allclose(r.evaluate_many(pts), m.evaluate_many(pts), atol=1e-12, rtol=0)


# ---- weighted error and optimality

def test_weighted_error_self_fit(rng):
    m = random_raw_model(rng, (3, 2))
    samples = [(tuple(x), m.evaluate(x)) for x in m.domain.iter_points()]
    assert weighted_error(m, samples) == 0.0


def test_weighted_error_constant_model():
    vals = [1.0, 2.0, 6.0]
    samples = [((i,), v) for i, v in enumerate(vals)]
    err = lambda c: weighted_error(HdmrModel.zeros(GridDomain((3,)), c), samples)  # noqa: E731
    assert err(0.0) == sum(v * v for v in vals)
    mean = sum(vals) / 3
    assert all(err(mean) < err(mean + d) for d in (1e-3, -1e-3, 1.0))


def test_weighted_error_domain_error():
    with pytest.raises(DomainError):
        weighted_error(xor_model(), [((0, 5), 1.0)])


def test_anova_beats_perturbations(rng):
    dom = GridDomain((3, 4, 2))
    pts = dom.iter_points()
    vals = rng.standard_normal(len(pts))
    samples = [(tuple(p), v) for p, v in zip(pts, vals)]
    m = finalize(MarginalAccumulator(dom).accumulate_batch(pts, vals))
    base = weighted_error(m, samples)
    keys = ["g0"] + [("f", k) for k in range(3)] + [("s", k) for k in m.second_order]
    for _ in range(1000):
        key = keys[rng.integers(len(keys))]
        g0, first, second = m.g0, list(m.first_order), dict(m.second_order)
        if key == "g0":
            g0 += rng.standard_normal()
        elif key[0] == "f":
            first[key[1]] = first[key[1]] + rng.standard_normal(first[key[1]].shape)
        else:
            second[key[1]] = second[key[1]] + rng.standard_normal(second[key[1]].shape)
        assert weighted_error(HdmrModel(dom, g0, tuple(first), second), samples) >= base


@pytest.mark.parametrize("seed", range(6))
def test_projection_optimal(seed):
    rng = np.random.default_rng(seed)
    sizes = tuple(int(s) for s in rng.integers(2, 5, size=3))
    dom = GridDomain(sizes)
    pts = dom.iter_points()
    vals = rng.standard_normal(len(pts))
    m = finalize(MarginalAccumulator(dom).accumulate_batch(pts, vals))
    err = weighted_error(m, list(zip(map(tuple, pts), vals)))
    assert err == pytest.approx(least_squares_error(sizes, pts, vals), abs=1e-9)


@given(st.integers(0, 2**32 - 1))
def test_exact_on_second_order_functions(seed):
    rng = np.random.default_rng(seed)
    truth = random_raw_model(rng, tuple(int(s) for s in rng.integers(1, 5, size=4)))
    m = model_from_function(truth.domain, truth.evaluate)
    pts = truth.domain.iter_points()
    np.testing.assert_allclose(m.evaluate_many(pts), truth.evaluate_many(pts), atol=1e-9, rtol=0)
    assert m.is_balanced()


def test_partial_evaluate_subset(rng):
    m = random_raw_model(rng, (2, 3, 2))
    x = (1, 2, 0)
    sub = m.partial_evaluate([0, 2], [[x[0], x[2]]])[0]
    expect = m.g0 + m.first_order[0][1] + m.first_order[2][0] + m.second_order[(0, 2)][1, 0]
    assert sub == pytest.approx(expect, abs=1e-15)
