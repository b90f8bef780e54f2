"""Weight distributions for the marks on Poisson points.

Each law is an immutable value object.  Besides sampling, a law knows its
CDF, the tail functional ``int_0^inf sqrt(1 - F(x)) dx`` in closed form and
whether it has a finite exponential moment.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# continuous laws sample on the dyadic grid GRID * Z (see on_grid)
GRID_BITS = 32
GRID = 2.0 ** -GRID_BITS


class LawError(ValueError):
    """Invalid weight-law parameters."""


@dataclass(frozen=True)
class WeightLaw:
    kind = "abstract"
    param_names = ()

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError

    def cdf(self, x):
        raise NotImplementedError

    def survival(self, x):
        return 1.0 - self.cdf(x)

    def sqrt_tail_integral(self) -> float:
        raise NotImplementedError

    def exponential_moment(self) -> tuple[bool, float]:
        # bounded support: every a > 0 works
        return True, 1.0

    @property
    def bounded(self) -> bool:
        return True

    @property
    def is_atomic(self) -> bool:
        return False

    def params(self) -> dict:
        return {name: getattr(self, name) for name in self.param_names}


@dataclass(frozen=True)
class Dirac(WeightLaw):
    value: float = 1.0
    kind = "dirac"
    param_names = ("value",)

    def __post_init__(self):
        if not (math.isfinite(self.value) and self.value > 0):
            raise LawError(f"dirac value must be > 0, got {self.value!r}")

    def sample(self, rng, size):
        return np.full(size, float(self.value))

    def cdf(self, x):
        return np.where(np.asarray(x, dtype=float) >= self.value, 1.0, 0.0)

    def sqrt_tail_integral(self):
        return float(self.value)

    @property
    def is_atomic(self):
        return True


@dataclass(frozen=True)
class Bernoulli(WeightLaw):
    """Weight 1 with probability ``p``, else 0."""

    p: float = 0.5
    kind = "bernoulli"
    param_names = ("p",)

    def __post_init__(self):
        if not (0.0 <= self.p <= 1.0):
            raise LawError(f"bernoulli p must lie in [0, 1], got {self.p!r}")

    def sample(self, rng, size):
        return (rng.random(size) < self.p).astype(float)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 1.0, 1.0, np.where(x >= 0.0, 1.0 - self.p, 0.0))

    def sqrt_tail_integral(self):
        return math.sqrt(self.p)

    @property
    def is_atomic(self):
        return True


@dataclass(frozen=True)
class Exponential(WeightLaw):
    rate: float = 1.0
    kind = "exponential"
    param_names = ("rate",)

    def __post_init__(self):
        if not (math.isfinite(self.rate) and self.rate > 0):
            raise LawError(f"exponential rate must be > 0, got {self.rate!r}")

    def sample(self, rng, size):
        return on_grid(rng.standard_exponential(size) / self.rate)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x > 0, -np.expm1(-self.rate * np.maximum(x, 0.0)), 0.0)

    def survival(self, x):
        x = np.asarray(x, dtype=float)
        return np.exp(-self.rate * np.maximum(x, 0.0))

    def sqrt_tail_integral(self):
        return 2.0 / self.rate

    def exponential_moment(self):
        return True, self.rate / 2.0

    @property
    def bounded(self):
        return False


@dataclass(frozen=True)
class UniformInterval(WeightLaw):
    lo: float = 0.0
    hi: float = 1.0
    kind = "uniform"
    param_names = ("lo", "hi")

    def __post_init__(self):
        if not (0.0 <= self.lo < self.hi and math.isfinite(self.hi)):
            raise LawError(f"uniform needs 0 <= lo < hi, got lo={self.lo!r} hi={self.hi!r}")

    def sample(self, rng, size):
        w = on_grid(rng.uniform(self.lo, self.hi, size))
        # keep grid values inside [lo, hi] when the endpoints are off the grid
        w = np.where(w < self.lo, w + GRID, w)
        return np.where(w > self.hi, w - GRID, w)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.clip((x - self.lo) / (self.hi - self.lo), 0.0, 1.0)

    def sqrt_tail_integral(self):
        # 1 on [0, lo), then sqrt((hi - x) / (hi - lo)) on [lo, hi)
        return self.lo + 2.0 * (self.hi - self.lo) / 3.0


@dataclass(frozen=True)
class Empirical(WeightLaw):
    """Uniform draw from a fixed finite sample of nonnegative reals."""

    sample_values: tuple = field(default=(1.0,))
    kind = "empirical"
    param_names = ("sample_values",)

    def __post_init__(self):
        values = tuple(sorted(float(v) for v in self.sample_values))
        if not values:
            raise LawError("empirical law needs at least one value")
        if values[0] < 0 or not all(math.isfinite(v) for v in values):
            raise LawError("empirical values must be finite and >= 0")
        object.__setattr__(self, "sample_values", values)

    def sample(self, rng, size):
        values = np.asarray(self.sample_values)
        return values[rng.integers(0, len(values), size)]

    def cdf(self, x):
        values = np.asarray(self.sample_values)
        return np.searchsorted(values, np.asarray(x, dtype=float), side="right") / len(values)

    def sqrt_tail_integral(self):
        values = self.sample_values
        m = len(values)
        total = values[0]
        for k in range(1, m):
            total += math.sqrt((m - k) / m) * (values[k] - values[k - 1])
        return total

    @property
    def is_atomic(self):
        return True


LAWS: dict[str, type[WeightLaw]] = {
    cls.kind: cls for cls in (Dirac, Bernoulli, Exponential, UniformInterval, Empirical)
}


def make_law(kind: str, **params) -> WeightLaw:
    """Build a law from its registered name and keyword parameters."""
    try:
        cls = LAWS[kind]
    except KeyError:
        raise LawError(f"unknown weight law {kind!r}; known: {', '.join(sorted(LAWS))}") from None
    missing = [name for name in cls.param_names if name not in params]
    if missing:
        raise LawError(f"law {kind!r} is missing parameter(s): {', '.join(missing)}")
    extra = set(params) - set(cls.param_names)
    if extra:
        raise LawError(f"law {kind!r} got unexpected parameter(s): {', '.join(sorted(extra))}")
    return cls(**params)


def on_grid(w):
    """Round to the nearest multiple of ``GRID``.

    Sums of grid values below ``2**21`` are exact in float64, so chain
    weights do not depend on the order of addition and last-passage values
    satisfy superadditivity bit for bit.  The rounding moves each draw by at
    most ``2**-33``.
    """
    return np.ldexp(np.rint(np.ldexp(w, GRID_BITS)), -GRID_BITS)


def sample_weight(law: WeightLaw, rng: np.random.Generator) -> float:
    return float(law.sample(rng, 1)[0])


def sample_weights(law: WeightLaw, rng: np.random.Generator, size: int) -> np.ndarray:
    return law.sample(rng, size)


def sqrt_tail_integral(law: WeightLaw) -> float:
    return law.sqrt_tail_integral()


def has_exponential_moment(law: WeightLaw) -> tuple[bool, float]:
    """Return ``(True, a)`` with ``E exp(a w) < inf`` for the returned ``a``."""
    return law.exponential_moment()


def kolmogorov_distance(law: WeightLaw, draws) -> float:
    """Sup distance between the empirical CDF of ``draws`` and ``law.cdf``.

    Both one-sided limits are checked at every sample point, so atoms in
    ``law`` are handled exactly.
    """
    draws = np.sort(np.asarray(draws, dtype=float))
    n = draws.size
    if n == 0:
        raise ValueError("need at least one draw")
    support = np.unique(draws)
    ecdf_right = np.searchsorted(draws, support, side="right") / n
    ecdf_left = np.searchsorted(draws, support, side="left") / n
    f_right = law.cdf(support)
    f_left = law.cdf(np.nextafter(support, -np.inf))
    dist = max(np.max(np.abs(ecdf_right - f_right)), np.max(np.abs(ecdf_left - f_left)))
    return float(dist)
