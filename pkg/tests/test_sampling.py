import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from unidim.errors import CapExceededError, DomainError
from unidim.sampling import (RootedSampler, TransportFunction, bias_sampler, finite_space_sampler, g_catalog,
                             mean_ci, mtp_check_exact, mtp_check_statistical, proportion, replicate_rng,
                             uniform_root)
from unidim.space import RootedSample

spaces = st.lists(st.integers(-20, 20), min_size=1, max_size=9, unique=True).map(
    lambda xs: RootedSample.from_coords(np.array(xs, dtype=float)))


def test_replicate_streams_are_reproducible_and_distinct():
    a = replicate_rng(7, 3).random(4)
    assert np.array_equal(a, replicate_rng(7, 3).random(4))
    assert not np.array_equal(a, replicate_rng(7, 4).random(4))
    assert not np.array_equal(a, replicate_rng(8, 3).random(4))
    # auxiliary streams accept negative indices
    assert not np.array_equal(replicate_rng(7, -1).random(4), a)


def test_proportion_and_mean_bands():
    p = proportion([True] * 30 + [False] * 70)
    assert p.estimate == pytest.approx(0.3)
    assert p.ci == pytest.approx(1.959963984540054 * np.sqrt(0.3 * 0.7 / 100))
    m = mean_ci([1.0, 2.0, 3.0])
    assert m.estimate == 2.0 and m.ci == pytest.approx(1.959963984540054 * 1.0 / np.sqrt(3))
    with pytest.raises(DomainError):
        proportion([])


@given(spaces, st.sampled_from(sorted(g_catalog())))
def test_exact_mtp_holds_for_catalog_functions(space, name):
    g = g_catalog()[name]
    if name in ("degree", "up"):
        return  # need graph or level data
    rep = mtp_check_exact(space, g)
    assert abs(rep.out_mass - rep.in_mass) <= 1e-12 * max(1.0, rep.out_mass)


@given(st.integers(1, 8), st.data())
def test_exact_mtp_holds_for_arbitrary_matrices(n, data):
    vals = data.draw(st.lists(st.floats(0, 10), min_size=n * n, max_size=n * n))
    G = np.array(vals).reshape(n, n)
    space = RootedSample.from_coords(np.arange(n, dtype=float))
    rep = mtp_check_exact(space, lambda s, u, v: G[u, v])
    assert rep.z == 0.0


def test_negative_transport_is_rejected():
    s = RootedSample.from_coords([0.0, 1.0])
    with pytest.raises(DomainError):
        mtp_check_exact(s, lambda s, u, v: -1.0)


RIGHT = TransportFunction("right", lambda s, u, v: float(s.coords[v, 0] == s.coords[u, 0] + 1), 1.0)


def test_statistical_mtp_accepts_uniform_roots_and_rejects_a_fixed_end():
    line = RootedSample.from_coords([0.0, 1.0, 2.0])
    fair = finite_space_sampler([line], [1.0], seed=1)
    assert not mtp_check_statistical(fair, [RIGHT], 2000)[0].rejected
    pinned = RootedSampler("pinned", lambda rng: line, 1)
    assert mtp_check_statistical(pinned, [RIGHT], 200)[0].rejected


def test_uniform_root_needs_a_finite_space(rng):
    s = RootedSample.from_coords([0.0, 1.0], margin=[1.0, np.inf])
    with pytest.raises(DomainError):
        uniform_root(s, rng)


def test_mixture_roots_uniformly():
    a = RootedSample.from_coords([0.0, 1.0])
    b = RootedSample.from_coords([0.0, 1.0, 2.0, 3.0])
    S = finite_space_sampler([a, b], [0.5, 0.5], seed=2)
    sizes = np.array([S.draw(i).size for i in range(4000)])
    assert abs((sizes == 2).mean() - 0.5) < 0.04


def test_bias_sampler_reweights_and_enforces_its_cap():
    a = RootedSample.from_coords([0.0, 1.0])
    b = RootedSample.from_coords([0.0, 1.0, 2.0, 3.0])
    S = finite_space_sampler([a, b], [0.5, 0.5], seed=3)
    B = bias_sampler(S, lambda s: 1.0 / s.size, 0.5)
    sizes = np.array([B.draw(i).size for i in range(4000)])
    # biasing by 1/|D| gives weights 1/2 : 1/4, so P(|D| = 2) = 2/3
    assert abs((sizes == 2).mean() - 2 / 3) < 0.04
    with pytest.raises(CapExceededError):
        bias_sampler(S, lambda s: 1.0, 0.5).draw(0)
