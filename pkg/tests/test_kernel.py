"""Rate-kernel validation and the closed-form model quantities."""

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from treesep.cayley_tree import InvalidGeneratorError
from treesep.kernel import (
    KernelValidationError,
    ModelParams,
    RateKernel,
    simple_exclusion_kernel,
    speed,
    total_rate_per_site,
)


def test_simple_exclusion_kernel_examples():
    assert simple_exclusion_kernel(3).rates == ((1, 1.0 / 3.0),)
    assert simple_exclusion_kernel(2).rates == ((1, 0.5),)
    assert simple_exclusion_kernel(10).rates == ((1, 0.1),)


def test_simple_exclusion_kernel_rejects_bad_degree():
    with pytest.raises(InvalidGeneratorError):
        simple_exclusion_kernel(1)


def test_kernel_validation():
    assert RateKernel(((1, 1.0 / 3.0),)).range == 1
    with pytest.raises(KernelValidationError):
        RateKernel(())
    with pytest.raises(KernelValidationError):
        RateKernel(((1, -0.1),))
    with pytest.raises(KernelValidationError):
        RateKernel(((2, 0.5),))  # no distance-1 rate
    with pytest.raises(KernelValidationError):
        RateKernel(((0, 0.5), (1, 0.5)))  # self-jumps forbidden
    with pytest.raises(KernelValidationError):
        RateKernel(((1, 0.2), (1, 0.3)))  # duplicate support point
    with pytest.raises(KernelValidationError):
        RateKernel(((1, 0.0),))  # zero rate entry


def test_kernel_sorted_and_accessors():
    k = RateKernel(((2, 0.1), (1, 0.2)))
    assert k.rates == ((1, 0.2), (2, 0.1))
    assert k.range == 2
    assert k.rate(1) == 0.2
    assert k.rate(2) == 0.1
    assert k.rate(3) == 0.0
    assert k.mean_length() == pytest.approx(1 * 0.2 + 2 * 0.1)
    assert RateKernel.from_dict({1: 0.2, 2: 0.1}) == k


def test_speed_examples():
    assert speed(ModelParams(3, 0.5)) == pytest.approx(1.0 / 6.0, abs=1e-15)
    assert speed(ModelParams(4, 1.0)) == 0.0
    assert speed(ModelParams(2, 0.3)) == 0.0


def test_speed_closed_form_by_degree():
    for d in range(2, 7):
        for rho in (0.0, 0.25, 0.5, 0.9, 1.0):
            expected = (1.0 - rho) * (d - 2) / d
            assert speed(ModelParams(d, rho)) == pytest.approx(expected, abs=1e-15)


@given(st.floats(0.0, 1.0, allow_nan=False))
def test_speed_linear_in_vacancy(rho):
    kernel = RateKernel(((1, 0.2), (3, 0.05)))
    full = speed(ModelParams(5, 0.0, kernel))
    assert speed(ModelParams(5, rho, kernel)) == pytest.approx((1.0 - rho) * full, rel=1e-12)


def test_total_rate_examples():
    assert total_rate_per_site(simple_exclusion_kernel(3), 3) == pytest.approx(1.0)
    assert total_rate_per_site(RateKernel(((1, 0.25), (2, 0.5))), 3) == pytest.approx(
        3 * 0.25 + 6 * 0.5
    )
    assert total_rate_per_site(simple_exclusion_kernel(2), 2) == pytest.approx(1.0)


def test_total_rate_monotone_in_entries():
    base = total_rate_per_site(RateKernel(((1, 0.2), (2, 0.1))), 3)
    assert total_rate_per_site(RateKernel(((1, 0.3), (2, 0.1))), 3) > base
    assert total_rate_per_site(RateKernel(((1, 0.2), (2, 0.2))), 3) > base


def test_model_params_validation():
    with pytest.raises(ValueError):
        ModelParams(3, -0.01)
    with pytest.raises(ValueError):
        ModelParams(3, 1.01)
    with pytest.raises(InvalidGeneratorError):
        ModelParams(1, 0.5)
    with pytest.raises(KernelValidationError):
        ModelParams(3, 0.5, kernel="sep")  # type: ignore[arg-type]
    params = ModelParams(3, 0.5)
    assert params.kernel == simple_exclusion_kernel(3)


def test_rate_by_distance_table():
    k = RateKernel(((1, 0.2), (3, 0.1)))
    assert k.rate_by_distance() == [0.0, 0.2, 0.0, 0.1]
    assert math.isclose(sum(k.rate_by_distance()), 0.3)
