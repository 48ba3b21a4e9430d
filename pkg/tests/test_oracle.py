"""Exact-generator oracle: structure, invariance, and frozen reference values."""

import math

import numpy as np
import pytest

from treesep.cayley_tree import ROOT, busemann
from treesep.kernel import RateKernel, simple_exclusion_kernel
from treesep.oracle import (
    TooManyVerticesError,
    build_exclusion_generator,
    build_finite_graph,
    build_tagged_generator,
    check_detailed_balance,
    check_invariance,
    expected_horodistance_exact,
    palm_tagged_distribution,
    product_measure,
    semigroup_marginals,
    tagged_marginals,
    tagged_states,
)

SEP3 = simple_exclusion_kernel(3)
LONG = RateKernel(((1, 0.2), (2, 0.1)))


@pytest.fixture(scope="module")
def ball1():
    return build_finite_graph(3, 1, SEP3)


@pytest.fixture(scope="module")
def q_plain(ball1):
    return build_exclusion_generator(ball1)


# graph construction -------------------------------------------------------


def test_finite_graph_shapes(ball1):
    assert len(ball1.vertices) == 4
    assert ball1.vertices[0] == ROOT
    assert len(ball1.pair_rates) == 3  # root-leaf edges only under SEP
    long_graph = build_finite_graph(3, 1, LONG)
    assert len(long_graph.pair_rates) == 6  # 3 edges plus 3 leaf pairs at distance 2


def test_pair_rates_match_kernel(ball1):
    assert all(rate == pytest.approx(1.0 / 3.0) for _, _, rate in ball1.pair_rates)


# plain generator ----------------------------------------------------------


def test_generator_size_and_hand_row(ball1, q_plain):
    assert q_plain.shape == (16, 16)
    # root occupied, leaves vacant: bit 0 set (vertices[0] is the root)
    s = 1 << ball1.vertices.index(ROOT)
    row = q_plain[s]
    off = {j: row[j] for j in range(16) if j != s and row[j] != 0.0}
    assert len(off) == 3
    assert all(v == pytest.approx(1.0 / 3.0) for v in off.values())
    assert row[s] == pytest.approx(-1.0)


def test_empty_and_full_rows_are_zero(q_plain):
    assert np.all(q_plain[0] == 0.0)
    assert np.all(q_plain[15] == 0.0)


def test_generator_row_sums_and_signs(q_plain):
    assert np.max(np.abs(q_plain.sum(axis=1))) < 1e-12
    off_diag = q_plain - np.diag(np.diag(q_plain))
    assert np.min(off_diag) >= 0.0


def test_particle_count_is_block_conserved(q_plain):
    pop = np.array([bin(s).count("1") for s in range(16)])
    mism = q_plain[pop[:, None] != pop[None, :]]
    assert np.all(mism == 0.0)


def test_vertex_cap_enforced():
    with pytest.raises(TooManyVerticesError):
        build_exclusion_generator(build_finite_graph(3, 3, SEP3))  # 22 vertices


# invariance and reversibility ---------------------------------------------


@pytest.mark.parametrize("kernel", [SEP3, LONG], ids=["sep", "range2"])
@pytest.mark.parametrize("radius", [1, 2])
@pytest.mark.parametrize("rho", [0.2, 0.5, 0.8])
def test_product_measure_invariance_and_balance(kernel, radius, rho):
    q = build_exclusion_generator(build_finite_graph(3, radius, kernel))
    assert check_invariance(q, rho) < 1e-10
    assert check_detailed_balance(q, rho) < 1e-10


def test_invariance_degenerate_densities(q_plain):
    assert check_invariance(q_plain, 0.0) == 0.0
    assert check_detailed_balance(q_plain, 1.0) == 0.0


def test_point_mass_is_not_invariant(q_plain):
    # a lone movable particle concentrated on one configuration must leak
    point = np.zeros(16)
    point[1] = 1.0
    assert np.abs(point @ q_plain).max() > 0.1


def test_perturbed_matrix_breaks_detailed_balance(q_plain):
    nu = product_measure(4, 0.5)
    q = q_plain.copy()
    q[1, 2] += 0.05  # one-sided rate bump
    resid = np.abs(nu[:, None] * q - (nu[:, None] * q).T).max()
    assert resid > 1e-3


# semigroup ----------------------------------------------------------------


def test_semigroup_identity_at_zero(q_plain):
    init = product_measure(4, 0.5)
    out = semigroup_marginals(q_plain, init, 0.0)
    assert np.allclose(out, init)


def test_semigroup_rejects_negative_time(q_plain):
    with pytest.raises(ValueError):
        semigroup_marginals(q_plain, product_measure(4, 0.5), -1.0)


def test_semigroup_is_stochastic(q_plain):
    init = np.zeros(16)
    init[1] = 1.0
    for t in (0.3, 1.0, 4.0):
        out = semigroup_marginals(q_plain, init, t)
        assert abs(out.sum() - 1.0) < 1e-10
        assert out.min() > -1e-12


def test_single_particle_root_return_probability(ball1, q_plain):
    # birth-death lumping: leave the root at rate 1, return at rate 1/3,
    # so P(root occupied at t) = 1/4 + (3/4) exp(-4t/3)
    root_bit = 1 << ball1.vertices.index(ROOT)
    init = np.zeros(16)
    init[root_bit] = 1.0
    out = semigroup_marginals(q_plain, init, 1.0)
    p_root = sum(out[s] for s in range(16) if s & root_bit)
    assert p_root == pytest.approx(0.25 + 0.75 * math.exp(-4.0 / 3.0), abs=1e-10)


def test_long_time_limit_uniform_on_sector(q_plain):
    init = np.zeros(16)
    init[1] = 1.0  # one particle
    out = semigroup_marginals(q_plain, init, 60.0)
    singles = [1 << k for k in range(4)]
    for s in singles:
        assert out[s] == pytest.approx(0.25, abs=1e-8)


# tagged chain -------------------------------------------------------------


def test_tagged_states_have_tag_occupied(ball1):
    for k, mask in tagged_states(ball1):
        assert (mask >> k) & 1 == 1


def test_tagged_generator_lone_particle_row(ball1):
    q = build_tagged_generator(ball1)
    states = tagged_states(ball1)
    index = {s: i for i, s in enumerate(states)}
    root = ball1.vertices.index(ROOT)
    i = index[(root, 1 << root)]
    row = q[i]
    targets = {j: row[j] for j in range(len(states)) if j != i and row[j] != 0.0}
    assert len(targets) == 3
    assert all(v == pytest.approx(1.0 / 3.0) for v in targets.values())
    # every target is a lone tagged particle on a leaf
    for j in targets:
        k, mask = states[j]
        assert k != root and mask == 1 << k


def test_tagged_generator_full_state_frozen(ball1):
    q = build_tagged_generator(ball1)
    states = tagged_states(ball1)
    full = (1 << 4) - 1
    for i, (k, mask) in enumerate(states):
        if mask == full:
            assert np.all(q[i] == 0.0)


def test_tagged_generator_row_sums(ball1):
    q = build_tagged_generator(ball1)
    assert np.max(np.abs(q.sum(axis=1))) < 1e-12


def test_tagged_cap_enforced():
    with pytest.raises(TooManyVerticesError):
        build_tagged_generator(build_finite_graph(4, 2, simple_exclusion_kernel(4)))


def test_palm_distribution_is_probability(ball1):
    for rho in (0.0, 0.3, 1.0):
        dist = palm_tagged_distribution(ball1, rho)
        assert abs(dist.sum() - 1.0) < 1e-12
        states = tagged_states(ball1)
        root = ball1.vertices.index(ROOT)
        support = [states[i] for i in np.nonzero(dist)[0]]
        assert all(k == root for k, _ in support)


def test_palm_weights_are_bernoulli(ball1):
    dist = palm_tagged_distribution(ball1, 0.25)
    states = tagged_states(ball1)
    root = ball1.vertices.index(ROOT)
    i = {s: i for i, s in enumerate(states)}[(root, 1 << root)]
    assert dist[i] == pytest.approx(0.75**3)


def test_expected_horodistance_zero_at_zero(ball1):
    assert expected_horodistance_exact(ball1, 0.5, 0.0) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("rho", [0.0, 0.5, 0.8])
def test_expected_horodistance_initial_slope(ball1, rho):
    # three in-graph targets with increments -1, +1, +1 at rate 1/3 each
    h = 1e-4
    slope = expected_horodistance_exact(ball1, rho, h) / h
    assert slope == pytest.approx((1.0 - rho) / 3.0, abs=5e-4)


def test_tagged_marginals_match_horo_reduction(ball1):
    dist = tagged_marginals(ball1, 0.5, 0.7)
    states = tagged_states(ball1)
    manual = sum(p * busemann(ball1.vertices[k]) for p, (k, _) in zip(dist, states))
    assert expected_horodistance_exact(ball1, 0.5, 0.7) == pytest.approx(manual, abs=1e-12)
