import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lrplab.kernel import (DisplacementKernel, canonical_class,
                           edge_probability, enumerate_classes,
                           expected_degree, kernel_integral,
                           kernel_integrals_d1, tail_radius)

from oracles import kernel_closed_d1, kernel_quad_oracle


def test_d1_k2_closed_form():
    assert kernel_integral((2,), 1) == pytest.approx(math.log(4 / 3),
                                                     rel=1e-12)


def test_d1_far_limit():
    # I(k) * k^2 -> 1 by dominated convergence
    m = 10 ** 4
    assert kernel_integral((m,), 1) * m * m == pytest.approx(1.0, abs=1e-3)


def test_d2_matches_adaptive_oracle_tight():
    val = kernel_integral((3, 0), 2)
    assert val == pytest.approx(kernel_quad_oracle((3, 0), 2), rel=1e-9)


@pytest.mark.parametrize("k,d", [((2,), 1), ((7,), 1), ((40,), 1),
                                 ((2, 0), 2), ((2, 2), 2), ((5, 3), 2),
                                 ((9, 9), 2), ((60, 1), 2)])
def test_quad_vs_oracle(k, d):
    assert kernel_integral(k, d) == pytest.approx(kernel_quad_oracle(k, d),
                                                  rel=1e-6)


def test_d1_vectorized_matches_scalar():
    ks = np.array([2, 3, 10, 31, 200, 5000])
    vec = kernel_integrals_d1(ks.astype(float))
    for k, v in zip(ks, vec):
        assert v == pytest.approx(kernel_integral((int(k),), 1), rel=1e-12)
        assert v == pytest.approx(kernel_closed_d1(int(k)), rel=1e-6)


@given(st.lists(st.integers(min_value=-9, max_value=9), min_size=2,
                max_size=2).filter(lambda k: max(abs(c) for c in k) >= 2),
       st.permutations([0, 1]),
       st.tuples(st.sampled_from([-1, 1]), st.sampled_from([-1, 1])))
def test_symmetry_exact(k, perm, signs):
    image = tuple(signs[m] * k[perm[m]] for m in range(2))
    # identical canonical class means identical table value, bit for bit
    assert canonical_class(k) == canonical_class(image)
    assert kernel_integral(k, 2) == kernel_integral(image, 2)


def test_rejects_nearest_neighbor_and_zero():
    for bad in [(1,), (0,), (1, 0), (1, 1), (0, 0)]:
        with pytest.raises(ValueError):
            kernel_integral(bad, len(bad))


def test_monotone_decreasing_along_axis():
    vals = [kernel_integral((k, 0), 2) for k in range(2, 12)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_edge_probability_quarter():
    assert edge_probability((2,), beta=1.0) == pytest.approx(0.25, abs=1e-10)


def test_edge_probability_nearest_neighbor_sure():
    assert edge_probability((1,), beta=0.3) == 1.0
    assert edge_probability((1, -1), beta=2.0) == 1.0
    assert edge_probability((0, 1), beta=2.0) == 1.0


def test_edge_probability_vanishes_with_beta():
    p = edge_probability((4, 2), beta=1e-14)
    assert 0 < p < 1e-12


def test_edge_probability_open_interval():
    for k in [(2,), (300,)]:
        p = edge_probability(k, beta=5.0)
        assert 0 < p < 1


def test_table_identity_machine_precision():
    table = DisplacementKernel.build(2, beta=1.7, max_norm=5)
    for klass, (I, p) in table.entries.items():
        assert p == -math.expm1(-1.7 * I)
        assert 0 < p < 1


def test_tail_radius_certified():
    # the closed tail form must meet the tolerance where it takes over
    for d in (1, 2):
        r = int(math.ceil(tail_radius(d, 1e-6)))
        k = (r,) if d == 1 else (r, 0)
        assert kernel_integral(k, d) == pytest.approx(
            kernel_quad_oracle(k, d), rel=1e-6)


def test_enumerate_classes_complete():
    classes = list(enumerate_classes(2, 4))
    assert all(c[0] >= c[1] >= 0 and 2 <= c[0] <= 4 for c in classes)
    assert len(set(classes)) == len(classes)
    assert canonical_class((-3, 2)) in classes


def test_expected_degree_nearest_neighbors_only():
    mu, tail = expected_degree(beta=1e-13, d=1, cutoff=100)
    assert mu == pytest.approx(2.0, abs=1e-10)
    assert tail < 1e-11


def test_expected_degree_cutoff_self_consistency():
    mu4, tail4 = expected_degree(beta=1.0, d=1, cutoff=10 ** 4)
    mu5, tail5 = expected_degree(beta=1.0, d=1, cutoff=10 ** 5)
    assert abs(mu5 - mu4) <= tail4
    assert tail5 < tail4


def test_expected_degree_monotone_in_beta():
    mus = [expected_degree(beta=b, d=1, cutoff=200)[0]
           for b in (0.5, 1.0, 2.0)]
    assert mus[0] < mus[1] < mus[2]
