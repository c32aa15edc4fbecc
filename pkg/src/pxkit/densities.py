"""Scalar probability densities with evaluation, log-evaluation and seeded sampling.

Every density here is a plain value object: an interval of support plus
vectorized ``pdf`` / ``logpdf`` callables and a ``sample(n, seed)`` callable.
Samplers are stateless; the seed fully determines the draw.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.special import gammaln

_SQRT_2PI = math.sqrt(2.0 * math.pi)


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator (Philox) for a non-negative integer seed."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed) % (1 << 64))))


@dataclass(frozen=True)
class Interval:
    """Support interval; either endpoint may be infinite."""

    lower: float
    upper: float

    def __post_init__(self) -> None:
        if math.isnan(self.lower) or math.isnan(self.upper):
            raise ValueError("interval endpoints must not be NaN")
        if not self.lower < self.upper:
            raise ValueError(f"empty interval [{self.lower}, {self.upper}]")

    def intersect(self, other: "Interval") -> "Interval | None":
        lo = max(self.lower, other.lower)
        hi = min(self.upper, other.upper)
        if lo >= hi:
            return None
        return Interval(lo, hi)


@dataclass(frozen=True)
class ScalarDensity:
    """A one-dimensional density.

    ``pdf`` and ``logpdf`` accept scalars or numpy arrays and return 0 /
    -inf outside ``support``.  ``sample(n, seed)`` returns ``n`` draws,
    bit-reproducible for a given seed.  ``center`` and ``scale`` are
    location/spread hints used to parameterize variable transformations
    when integrating over infinite supports; they carry no probabilistic
    meaning of their own.
    """

    support: Interval
    pdf: Callable[[np.ndarray | float], np.ndarray]
    logpdf: Callable[[np.ndarray | float], np.ndarray]
    sample: Callable[[int, int], np.ndarray]
    center: float = 0.0
    scale: float = 1.0


def normal_density(mean: float, sd: float) -> ScalarDensity:
    """Normal density with the given mean and standard deviation."""
    if not sd > 0:
        raise ValueError(f"standard deviation must be positive, got {sd}")
    mean = float(mean)
    sd = float(sd)
    log_norm = math.log(sd * _SQRT_2PI)

    def logpdf(x):
        z = (np.asarray(x, dtype=float) - mean) / sd
        return -0.5 * z * z - log_norm

    def pdf(x):
        return np.exp(logpdf(x))

    def sample(n: int, seed: int) -> np.ndarray:
        return make_rng(seed).normal(mean, sd, size=int(n))

    return ScalarDensity(
        support=Interval(-math.inf, math.inf),
        pdf=pdf,
        logpdf=logpdf,
        sample=sample,
        center=mean,
        scale=sd,
    )


def exponential_density(rate: float) -> ScalarDensity:
    """Exponential density with the given rate on [0, inf)."""
    if not rate > 0:
        raise ValueError(f"rate must be positive, got {rate}")
    rate = float(rate)
    log_rate = math.log(rate)

    def logpdf(x):
        x = np.asarray(x, dtype=float)
        inside = x >= 0.0
        safe = np.where(inside, x, 0.0)
        return np.where(inside, log_rate - rate * safe, -math.inf)

    def pdf(x):
        x = np.asarray(x, dtype=float)
        inside = x >= 0.0
        safe = np.where(inside, x, 0.0)
        return np.where(inside, rate * np.exp(-rate * safe), 0.0)

    def sample(n: int, seed: int) -> np.ndarray:
        return make_rng(seed).exponential(1.0 / rate, size=int(n))

    return ScalarDensity(
        support=Interval(0.0, math.inf),
        pdf=pdf,
        logpdf=logpdf,
        sample=sample,
        center=1.0 / rate,
        scale=1.0 / rate,
    )


def gamma_density(shape: float, scale: float) -> ScalarDensity:
    """Gamma density (shape/scale parameterization) on (0, inf)."""
    if not shape > 0 or not scale > 0:
        raise ValueError(f"shape and scale must be positive, got ({shape}, {scale})")
    shape = float(shape)
    scale = float(scale)
    log_norm = gammaln(shape) + shape * math.log(scale)

    def logpdf(x):
        x = np.asarray(x, dtype=float)
        inside = (x > 0.0) & np.isfinite(x)
        safe = np.where(inside, x, 1.0)
        out = (shape - 1.0) * np.log(safe) - safe / scale - log_norm
        return np.where(inside, out, -math.inf)

    def pdf(x):
        out = logpdf(x)
        return np.exp(out)

    def sample(n: int, seed: int) -> np.ndarray:
        return make_rng(seed).gamma(shape, scale, size=int(n))

    return ScalarDensity(
        support=Interval(0.0, math.inf),
        pdf=pdf,
        logpdf=logpdf,
        sample=sample,
        center=shape * scale,
        scale=math.sqrt(shape) * scale,
    )


def tabulated_density(grid, values) -> ScalarDensity:
    """Piecewise-linear density from (grid, values) pairs.

    The grid must be strictly ascending with at least two points; values
    must be nonnegative with positive total mass.  Values are renormalized
    so the trapezoid integral over [grid[0], grid[-1]] is exactly 1.
    """
    grid = np.asarray(grid, dtype=float)
    values = np.asarray(values, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise ValueError("grid must hold at least two points")
    if values.shape != grid.shape:
        raise ValueError("grid and values must have the same length")
    if not np.all(np.isfinite(grid)) or not np.all(np.isfinite(values)):
        raise ValueError("grid and values must be finite")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly ascending")
    if np.any(values < 0):
        raise ValueError("values must be nonnegative")
    mass = np.trapezoid(values, grid)
    if mass <= 0:
        raise ValueError("values must carry positive total mass")
    values = values / mass

    lo, hi = float(grid[0]), float(grid[-1])
    dx = np.diff(grid)
    seg_mass = 0.5 * (values[:-1] + values[1:]) * dx
    cum = np.concatenate(([0.0], np.cumsum(seg_mass)))
    total = cum[-1]
    slopes = np.diff(values) / dx

    def pdf(x):
        x = np.asarray(x, dtype=float)
        inside = (x >= lo) & (x <= hi)
        safe = np.where(inside, x, lo)
        return np.where(inside, np.interp(safe, grid, values), 0.0)

    def logpdf(x):
        p = pdf(x)
        with np.errstate(divide="ignore"):
            return np.log(p)

    def sample(n: int, seed: int) -> np.ndarray:
        # Inverse CDF: the cumulative mass is quadratic on each segment.
        u = make_rng(seed).random(int(n)) * total
        idx = np.clip(np.searchsorted(cum, u, side="right") - 1, 0, len(dx) - 1)
        rem = u - cum[idx]
        a = values[idx]
        b = slopes[idx]
        with np.errstate(divide="ignore", invalid="ignore"):
            disc = np.sqrt(np.maximum(a * a + 2.0 * b * rem, 0.0))
            quad = (disc - a) / b
        lin = rem / np.where(a > 0, a, 1.0)
        d = np.where(np.abs(b) > 1e-300, quad, lin)
        d = np.clip(d, 0.0, dx[idx])
        return grid[idx] + d

    return ScalarDensity(
        support=Interval(lo, hi),
        pdf=pdf,
        logpdf=logpdf,
        sample=sample,
        center=0.5 * (lo + hi),
        scale=0.5 * (hi - lo),
    )


def load_tabulated_csv(path: str | Path) -> ScalarDensity:
    """Read a two-column (grid, value) CSV, header row optional."""
    grid: list[float] = []
    values: list[float] = []
    with open(path, newline="", encoding="utf-8") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) < 2:
                raise ValueError(f"{path}: line {i + 1}: expected two columns, got {len(row)}")
            try:
                g, v = float(row[0]), float(row[1])
            except ValueError:
                if i == 0:
                    continue  # header row
                raise ValueError(f"{path}: line {i + 1}: non-numeric entry") from None
            grid.append(g)
            values.append(v)
    if len(grid) < 2:
        raise ValueError(f"{path}: need at least two data rows")
    return tabulated_density(grid, values)
