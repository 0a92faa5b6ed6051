"""Weibull failure-intensity helpers for a minimally repaired machine.

Under minimal repair the failure process is a non-homogeneous Poisson
process whose intensity is the hazard of the lifetime distribution, so the
expected number of failures over an age window is the integrated hazard.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

__all__ = [
    "WeibullParams",
    "FailureTable",
    "hazard",
    "cumulative_hazard",
    "expected_failures",
    "expected_failures_quad",
    "failure_table",
    "expected_repair_cost",
    "expected_repair_time",
    "simulate_nhpp",
]


@dataclass(frozen=True)
class WeibullParams:
    """Two-parameter Weibull lifetime.

    Parameters
    ----------
    shape : float
        Shape parameter ``k`` (``k > 1`` means wear-out).
    scale : float
        Scale parameter ``s`` in periods.
    """

    shape: float
    scale: float

    def __post_init__(self):
        if not (self.shape > 0 and self.scale > 0):
            raise ValueError(
                f"Weibull shape and scale must be positive, got "
                f"shape={self.shape!r}, scale={self.scale!r}"
            )

    def pdf(self, u: float) -> float:
        k, s = self.shape, self.scale
        return (k / s) * (u / s) ** (k - 1) * math.exp(-((u / s) ** k))

    def cdf(self, u: float) -> float:
        return -math.expm1(-((u / self.scale) ** self.shape))


@dataclass(frozen=True)
class FailureTable:
    """Expected failures per period, indexed by start age.

    ``entries[l - 1]`` is the expected failure count of a period that the
    machine starts at age ``l - 1``.
    """

    entries: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(float(e) for e in self.entries))
        if not self.entries:
            raise ValueError("failure table must have at least one entry")
        if any(not (e >= 0 and math.isfinite(e)) for e in self.entries):
            raise ValueError("failure table entries must be finite and nonnegative")

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def __iter__(self):
        return iter(self.entries)


def _check_interval(a, b):
    if a < 0:
        raise ValueError(f"start age must be nonnegative, got {a!r}")
    if a > b:
        raise ValueError(f"start age {a!r} exceeds end age {b!r}")


def hazard(params: WeibullParams, u: float) -> float:
    """Failure intensity ``f(u) / (1 - F(u))`` at age ``u``."""
    if u < 0:
        raise ValueError(f"age must be nonnegative, got {u!r}")
    k, s = params.shape, params.scale
    if u == 0:
        # k < 1 has an integrable singularity at the origin
        if k < 1:
            return math.inf
        return 1.0 / s if k == 1 else 0.0
    return (k / s) * (u / s) ** (k - 1)


def cumulative_hazard(params: WeibullParams, u: float) -> float:
    return (u / params.scale) ** params.shape


def expected_failures(params: WeibullParams, a: float, b: float) -> float:
    """Expected failure count while the machine ages from ``a`` to ``b``.

    Closed form of the integrated Weibull hazard,
    ``(b/s)**k - (a/s)**k``.
    """
    _check_interval(a, b)
    if a == b:
        return 0.0
    return cumulative_hazard(params, b) - cumulative_hazard(params, a)


def expected_failures_quad(
    rate: Callable[[float], float], a: float, b: float, tol: float = 1e-10
) -> float:
    """Integrate an arbitrary hazard ``rate`` over ``[a, b]``.

    Adaptive Gauss-Kronrod; used for hazards that are not Weibull.
    """
    _check_interval(a, b)
    if a == b:
        return 0.0
    value, _ = integrate.quad(rate, a, b, epsabs=tol, epsrel=tol, limit=200)
    return float(value)


def failure_table(params: WeibullParams, T: int) -> FailureTable:
    """Per-period expected failures for start ages ``0 .. T-1``."""
    if T < 1:
        raise ValueError(f"horizon must be at least one period, got {T!r}")
    return FailureTable(tuple(expected_failures(params, l - 1, l) for l in range(1, T + 1)))


def expected_repair_cost(E: float, RC: float) -> float:
    if E < 0 or RC < 0:
        raise ValueError("expected failures and repair cost must be nonnegative")
    return E * RC


def expected_repair_time(E: float, RT: float) -> float:
    if E < 0 or RT < 0:
        raise ValueError("expected failures and repair time must be nonnegative")
    return E * RT


def simulate_nhpp(
    params: WeibullParams, a: float, b: float, runs: int, seed: int
) -> tuple[float, float]:
    """Monte-Carlo failure counts of a minimally repaired machine.

    Event ages are generated by inverting the cumulative intensity: unit
    rate Poisson arrivals ``G`` after ``Lambda(a)`` map to ages
    ``s * (Lambda(a) + G) ** (1/k)``. Events at ages up to ``b`` are
    counted.

    Returns
    -------
    mean, stderr : float
        Sample mean of the count and its standard error.
    """
    _check_interval(a, b)
    if runs < 1:
        raise ValueError(f"runs must be >= 1, got {runs!r}")
    rng = np.random.default_rng(seed)
    counts = np.zeros(runs, dtype=np.int64)
    if a == b:
        return 0.0, 0.0
    k, s = params.shape, params.scale
    base = cumulative_hazard(params, a)
    arrival = np.zeros(runs)
    active = np.arange(runs)
    while active.size:
        arrival[active] += rng.standard_exponential(active.size)
        ages = s * (base + arrival[active]) ** (1.0 / k)
        hit = ages <= b
        counts[active[hit]] += 1
        active = active[hit]
    mean = float(counts.mean())
    stderr = float(counts.std(ddof=1) / math.sqrt(runs)) if runs > 1 else 0.0
    return mean, stderr
