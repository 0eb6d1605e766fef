"""Known noise distributions (CDF, density, sampling)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class NoiseModel:
    """Base class for a scalar noise family.

    ``loc`` exists only so that a mis-centred configuration can be expressed
    and rejected by validation; every estimator assumes ``cdf(0) == 0.5``.
    """

    loc: float = 0.0

    family = "abstract"

    def cdf(self, x: float) -> float:
        raise NotImplementedError

    def pdf(self, x: float) -> float:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size: int | None = None):
        raise NotImplementedError

    def density_infimum(self, radius: float) -> float:
        """Infimum of the density over ``|x| <= radius``.

        Both shipped families are symmetric and unimodal about ``loc``, so
        the infimum over the interval is attained at one of its endpoints.
        """
        if not math.isfinite(radius):
            raise ValueError("radius must be finite")
        r = abs(radius)
        return min(self.pdf(r), self.pdf(-r))

    def to_dict(self) -> dict[str, Any]:
        raise NotImplementedError


@dataclass(frozen=True)
class GaussianNoise(NoiseModel):
    sigma: float = 1.0

    family = "gaussian"

    def __post_init__(self):
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise ValueError("gaussian sigma must be positive and finite")

    def cdf(self, x: float) -> float:
        return 0.5 * math.erfc(-(x - self.loc) / (self.sigma * _SQRT2))

    def pdf(self, x: float) -> float:
        z = (x - self.loc) / self.sigma
        return math.exp(-0.5 * z * z) / (self.sigma * _SQRT2PI)

    def sample(self, rng, size=None):
        return rng.normal(self.loc, self.sigma, size)

    def to_dict(self):
        d = {"type": "gaussian", "sigma": self.sigma}
        if self.loc:
            d["loc"] = self.loc
        return d


@dataclass(frozen=True)
class LogisticNoise(NoiseModel):
    scale: float = 1.0

    family = "logistic"

    def __post_init__(self):
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise ValueError("logistic scale must be positive and finite")

    def cdf(self, x: float) -> float:
        z = (x - self.loc) / self.scale
        if z >= 0:
            return 1.0 / (1.0 + math.exp(-z))
        e = math.exp(z)
        return e / (1.0 + e)

    def pdf(self, x: float) -> float:
        e = math.exp(-abs(x - self.loc) / self.scale)
        return e / (self.scale * (1.0 + e) ** 2)

    def sample(self, rng, size=None):
        return rng.logistic(self.loc, self.scale, size)

    def to_dict(self):
        d = {"type": "logistic", "scale": self.scale}
        if self.loc:
            d["loc"] = self.loc
        return d


def noise_from_dict(spec: dict[str, Any]) -> NoiseModel:
    kind = spec.get("type")
    loc = float(spec.get("loc", 0.0))
    if kind == "gaussian":
        return GaussianNoise(loc=loc, sigma=float(spec["sigma"]))
    if kind == "logistic":
        return LogisticNoise(loc=loc, scale=float(spec["scale"]))
    raise ValueError(f"unknown noise type {kind!r}")
