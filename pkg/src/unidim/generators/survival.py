"""Empirical survival tables of the root height."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from unidim.errors import DomainError, WindowTooSmallError
from unidim.sampling import Z95, RootedSampler, replicate_rng

MAX_CENSORED = 0.01


@dataclass(frozen=True)
class SurvivalTable:
    """``P̂(h(o) >= n)`` for ``n = 0..nmax`` with 95% half-widths."""

    n: np.ndarray
    p: np.ndarray
    ci: np.ndarray
    reps: int
    censored: float

    def at(self, n: int) -> float:
        return float(self.p[n])

    @property
    def point_mass(self) -> np.ndarray:
        """``P̂(h(o) = n)`` for ``n = 0..nmax-1``."""
        return self.p[:-1] - self.p[1:]


def survival_from_heights(h, nmax: int, censored: float = 0.0) -> SurvivalTable:
    h = np.asarray(h, dtype=np.int64)
    if h.size == 0:
        raise DomainError("no heights")
    n = np.arange(nmax + 1)
    counts = np.bincount(np.minimum(h, nmax), minlength=nmax + 1)
    p = counts[::-1].cumsum()[::-1] / h.size
    ci = Z95 * np.sqrt(p * (1 - p) / h.size)
    return SurvivalTable(n, p, ci, int(h.size), float(censored))


def height_survival(sampler: RootedSampler, nmax: int, reps: int, seed: int | None = None,
                    max_censored: float = MAX_CENSORED) -> SurvivalTable:
    """Survival table of ``h(o)`` from a batch height path or from tree windows.

    A window root whose height is uncertain and observed below ``nmax`` is
    censored; runs with more than ``max_censored`` of them are rejected.
    """
    if nmax < 1 or reps < 1:
        raise DomainError("nmax and reps must be positive")
    if sampler.batch_fn is not None:
        h = np.asarray(sampler.batch_fn(replicate_rng(sampler.seed if seed is None else seed, -1), reps))
        return survival_from_heights(h, nmax)
    h = np.empty(reps, dtype=np.int64)
    bad = 0
    for i in range(reps):
        t = sampler.draw(i)
        h[i] = t.height[t.root]
        if not t.height_certain[t.root] and h[i] < nmax:
            bad += 1
    rate = bad / reps
    if rate > max_censored:
        raise WindowTooSmallError(f"{rate:.1%} of roots censored below nmax={nmax}")
    return survival_from_heights(h, nmax, rate)
