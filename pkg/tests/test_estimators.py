import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from unidim.errors import DomainError
from unidim.estimators import (
    DimensionReport, alpha_grid, agree_check, cross_checks, decay_fit, exact_one_ended, growth_from_counts,
    hausdorff_lower_bound, hausdorff_measure_zero, line_process_dim, octave_grid, ordering_check,
    subspace_measure_check,
)
from unidim.experiments import finite_measure, lattice_measure, mixture_sizes

R = 2.0 ** np.arange(1, 9)


@given(st.floats(0.1, 4.0), st.floats(0.01, 100.0))
def test_decay_fit_recovers_power_laws_exactly(d, c):
    fit = decay_fit(R, c * R ** -d)
    assert fit.point == pytest.approx(d, abs=1e-9)
    assert fit.lower == pytest.approx(d, abs=1e-9) and fit.upper == pytest.approx(d, abs=1e-9)
    top = R[R >= np.median(R)]
    ratios = d - math.log(c) / np.log(top)
    assert fit.ratio_lower == pytest.approx(ratios.min()) and fit.ratio_upper == pytest.approx(ratios.max())
    assert not fit.superpoly


@given(st.floats(0.1, 3.0))
def test_growth_mode_flips_sign(d):
    fit = decay_fit(R, R ** d, mode="growth")
    assert fit.point == pytest.approx(d, abs=1e-9)


def test_decay_fit_interval_brackets_a_wobbling_curve():
    v = R ** -1.0 * (1 + 0.3 * np.sin(np.log2(R)))
    fit = decay_fit(R, v)
    assert fit.lower < 1.0 < fit.upper
    assert fit.lower <= fit.point <= fit.upper


def test_superpoly_flag_on_exponential_decay():
    r = 2.0 ** np.arange(1, 8)
    fit = decay_fit(r, np.exp(-r))
    assert fit.superpoly and math.isinf(fit.value)
    assert not decay_fit(r, r ** -3.0).superpoly


def test_decay_fit_rejects_bad_input():
    with pytest.raises(DomainError):
        decay_fit(R[:3], R[:3] ** -1.0)
    with pytest.raises(DomainError):
        decay_fit(R, np.r_[0.0, R[1:] ** -1.0])
    with pytest.raises(DomainError):
        decay_fit(R[::-1], R ** -1.0)


def test_octave_grid_is_dyadic():
    g = octave_grid(1, 100)
    assert g[0] == 1 and np.all(g[1:] / g[:-1] == 2) and g[-1] <= 100


def test_exact_one_ended_adds_one():
    n = 2.0 ** np.arange(0, 12)
    assert exact_one_ended(n, 1.0 / n).point == pytest.approx(2.0, abs=1e-9)
    assert exact_one_ended(n, n ** -0.5).point == pytest.approx(1.5, abs=1e-9)


def test_line_process_from_a_survival_table():
    # P(gap > s) = (1 + s)^(-1/2) has a running average ~ 2 r^(-1/2)
    s = np.linspace(0, 1e6, 2_000_001)
    radii = 2.0 ** np.arange(8, 19)
    iv = line_process_dim(table=(s, (1 + s) ** -0.5), radii=radii)
    assert iv.point == pytest.approx(0.5, abs=0.02)
    iv = line_process_dim(table=(s, (s < 3).astype(float)), radii=radii)
    assert iv.point == pytest.approx(1.0, abs=1e-6)


def test_growth_from_counts_on_squares():
    r = 2.0 ** np.arange(3, 10)
    g = growth_from_counts(r, np.vstack([(2 * r + 1) ** 2, (r + 1) ** 2]))
    assert g.exponent == pytest.approx(2.0, abs=0.05)
    assert g.max_counts[0] == 17 ** 2 and g.mean_counts[0] == (17 ** 2 + 81) / 2


def test_hausdorff_lower_bound_on_synthetic_contents():
    # contents M^(alpha - d) decrease exactly for alpha < d
    d = 0.63
    M = 2.0 ** np.arange(0, 7)
    contents = {float(a): [(m ** (a - d), 1e-9) for m in M] for a in alpha_grid(0.4, 0.9)}
    hl = hausdorff_lower_bound(M, contents)
    assert d - 0.02 - 1e-9 <= hl.alpha < d


def test_measure_zero_exact_values():
    assert hausdorff_measure_zero([5] * 10).value == pytest.approx(5.0)
    assert finite_measure([5]).value == pytest.approx(5.0)
    # the root sees sizes 2 and 4 equally often, so E[1/|D|] = 3/8
    e = hausdorff_measure_zero(mixture_sizes([2, 4], [0.5, 0.5], n=200_000, seed=3))
    assert e.value == pytest.approx(8 / 3, rel=0.02)
    assert hausdorff_measure_zero([3, math.inf]).kind == "infinite"


@pytest.mark.parametrize("delta", [1.0, 2.0])
def test_lattice_measure_scales_with_spacing(delta):
    m = lattice_measure(delta, n=20_000, seed=1)
    assert m.kind == "finite"
    assert m.value == pytest.approx(2.0 / delta, rel=0.05)


def _rep(lo, hi, h, ci=0.01):
    return DimensionReport("m", "d", lo, hi, ci, haus_upper=h, haus_upper_ci=ci)


def test_ordering_check():
    assert ordering_check(_rep(1.9, 2.0, 2.1)).ok
    assert ordering_check(_rep(1.9, 2.0, math.inf)).ok
    assert not ordering_check(_rep(2.5, 2.0, 2.1)).ok
    assert not ordering_check(_rep(1.0, 2.0, 1.5)).ok


def test_subspace_and_agreement_checks():
    whole = finite_measure([4])
    sub = finite_measure([2])
    assert subspace_measure_check(sub, whole, 0.5).ok
    assert not subspace_measure_check(sub, whole, 0.3).ok
    assert agree_check("a", 2.0, 0.02, 2.01, 0.02).ok
    assert not agree_check("a", 2.0, 0.001, 2.2, 0.001).ok
    audit = cross_checks([_rep(1.9, 2.0, 2.1)], [("c", 1.0, 0.1, 1.0, 0.1)], [(sub, whole, 0.5)])
    assert not audit.red
    assert cross_checks([_rep(3.0, 2.0, 2.1)]).red
