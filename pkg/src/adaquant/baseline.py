"""l2 comparator: projected quasi-Newton fit of the expected level.

This is *not* a reproduction of any published two-step quasi-Newton method.
It reuses the exact rank-one step and projection of the l1 estimator and only
swaps the innovation and gain, so that a comparison between the two isolates
the effect of the loss function.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .estimator import AdaConfig, Observation, layer_update
from .noise import NoiseModel
from .quantizer import QuantizerSpec

SLOPE_FLOOR = 1e-12


@dataclass(eq=False)
class L2State:
    theta: np.ndarray
    P: np.ndarray
    P_inv: np.ndarray
    info: np.ndarray
    k: int = 0

    @classmethod
    def initial(cls, d: int, theta0=None, p0: float = 1.0) -> "L2State":
        theta0 = np.zeros(d) if theta0 is None else np.asarray(theta0, dtype=float).copy()
        eye = np.eye(d)
        return cls(theta0, p0 * eye, eye / p0, eye / p0)

    @property
    def dim(self) -> int:
        return self.theta.size


def expected_level(s: float, quantizer: QuantizerSpec, noise: NoiseModel) -> float:
    """``E[y | phi' theta = s] = (m + 1) - sum_i F(c_i - s)``."""
    ts = quantizer.thresholds
    return len(ts) + 1 - sum(noise.cdf(c - s) for c in ts)


def expected_level_slope(s: float, quantizer: QuantizerSpec, noise: NoiseModel) -> float:
    return sum(noise.pdf(c - s) for c in quantizer.thresholds)


def l2_update(state: L2State, obs: Observation, config: AdaConfig) -> tuple[L2State, float, float]:
    """One step; returns the new state, the innovation and the gain used."""
    phi = np.asarray(obs.phi, dtype=float)
    s = float(phi @ state.theta)
    e = obs.y - expected_level(s, obs.quantizer, config.noise)
    g = max(expected_level_slope(s, obs.quantizer, config.noise), SLOPE_FLOOR)
    up = layer_update(state.theta, state.P, state.P_inv, phi, g, config.mu, e, config.domain)
    new = L2State(up.theta, up.P, up.P_inv, state.info + phi[:, None] * phi, state.k + 1)
    return new, e, g
