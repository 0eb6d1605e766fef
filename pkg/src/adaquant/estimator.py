"""Two-layer l1 adaptive estimator for quantized observations.

The preliminary layer (``theta_bar``) uses the conservative gain
``beta_bar = inf f`` over the reachable range and is globally convergent on
its own. The accelerated layer (``theta``) uses a secant gain built from the
gap between the two layers. Both layers share the same rank-one
quasi-Newton step followed by a projection onto the parameter box in the
metric of the updated inverse covariance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .geometry import BoxDomain, project_weighted, support_bound
from .noise import NoiseModel
from .quantizer import QuantizerSpec, cell_index, quantize

SPD_FLOOR = 1e-14


class NumericalFailure(RuntimeError):
    """Raised when a covariance recursion leaves the SPD cone."""


@dataclass(frozen=True)
class AdaConfig:
    noise: NoiseModel
    domain: BoxDomain
    mu_bar: float = 1.0
    mu: float = 1.0
    # relative: |Delta| < tol * (1 + |phi'theta_bar| + |phi'theta|) counts as zero
    delta_zero_tol: float = 1e-8

    def __post_init__(self):
        for name in ("mu_bar", "mu", "delta_zero_tol"):
            val = getattr(self, name)
            if not (val > 0 and math.isfinite(val)):
                raise ValueError(f"{name} must be positive and finite, got {val}")


@dataclass(frozen=True)
class Observation:
    phi: np.ndarray
    y: int
    quantizer: QuantizerSpec

    def __post_init__(self):
        if not 1 <= self.y <= self.quantizer.levels:
            raise ValueError(f"observation level {self.y} outside 1..{self.quantizer.levels}")


class StepDiagnostics(NamedTuple):
    v_bar: float
    v: float
    beta_bar: float
    beta: float
    a_bar: float
    a: float
    delta_k: float
    projected_bar: bool
    projected: bool


@dataclass(eq=False)
class AdaState:
    """Both estimator layers plus the unweighted information matrix.

    Treated as immutable: ``update`` always returns a fresh instance.
    """

    theta_bar: np.ndarray
    P_bar: np.ndarray
    P_bar_inv: np.ndarray
    theta: np.ndarray
    P: np.ndarray
    P_inv: np.ndarray
    info: np.ndarray
    k: int = 0

    @classmethod
    def initial(cls, d: int, theta0=None, p0: float = 1.0) -> "AdaState":
        """Start both layers at ``theta0`` (zero by default) with ``P0 = p0 * I``."""
        theta0 = np.zeros(d) if theta0 is None else np.asarray(theta0, dtype=float).copy()
        eye = np.eye(d)
        return cls(
            theta_bar=theta0.copy(),
            P_bar=p0 * eye,
            P_bar_inv=eye / p0,
            theta=theta0,
            P=p0 * eye,
            P_inv=eye / p0,
            info=eye / p0,
        )

    @property
    def dim(self) -> int:
        return self.theta.size


class LayerUpdate(NamedTuple):
    theta: np.ndarray
    P: np.ndarray
    P_inv: np.ndarray
    a: float
    projected: bool


def _innovation(s: float, y: int, q: QuantizerSpec, noise: NoiseModel) -> float:
    ts = q.thresholds
    cell = cell_index(s, q)
    sgn = (y > cell) - (y < cell)
    if cell == 1:
        corr = noise.cdf(ts[0] - s) - 1.0
    elif cell == len(ts) + 1:
        corr = noise.cdf(ts[-1] - s)
    else:
        corr = noise.cdf(ts[cell - 2] - s) - (1.0 - noise.cdf(ts[cell - 1] - s))
    return sgn + corr


def _active_thresholds(s: float, q: QuantizerSpec) -> tuple[float, ...]:
    # thresholds bounding the cell containing s
    ts = q.thresholds
    cell = cell_index(s, q)
    if cell == 1:
        return (ts[0],)
    if cell == len(ts) + 1:
        return (ts[-1],)
    return (ts[cell - 2], ts[cell - 1])


def compute_v_bar(phi, theta_bar, y: int, quantizer: QuantizerSpec, noise: NoiseModel) -> float:
    """Innovation of the preliminary layer; bounded by 2 in absolute value."""
    return _innovation(float(np.dot(phi, theta_bar)), y, quantizer, noise)


def compute_v(phi, theta, y: int, quantizer: QuantizerSpec, noise: NoiseModel) -> float:
    return _innovation(float(np.dot(phi, theta)), y, quantizer, noise)


def compute_beta_bar(phi, quantizer: QuantizerSpec, domain: BoxDomain, noise: NoiseModel) -> float:
    g = support_bound(phi, domain)
    ts = quantizer.thresholds
    radius = max(g + ts[-1], g - ts[0], 0.0)
    return noise.density_infimum(radius)


def _beta(s: float, s_bar: float, q: QuantizerSpec, noise: NoiseModel, tol: float) -> tuple[float, float]:
    delta = s_bar - s
    active = _active_thresholds(s, q)
    if abs(delta) >= tol * (1.0 + abs(s_bar) + abs(s)):
        # c - s and c - s_bar differ by exactly delta, so each quotient is >= 0
        beta = sum((noise.cdf(c - s) - noise.cdf(c - s_bar)) / delta for c in active)
    else:
        beta = sum(noise.pdf(c - s) for c in active)
    return max(beta, 0.0), delta


def compute_beta(phi, theta, theta_bar, quantizer: QuantizerSpec, noise: NoiseModel,
                 delta_zero_tol: float = 1e-8) -> float:
    """Secant gain of the accelerated layer.

    Divided differences of the CDF between the two layers' offsets for the
    thresholds bounding the current cell; density fallback when the layers
    agree along ``phi``.
    """
    s = float(np.dot(phi, theta))
    s_bar = float(np.dot(phi, theta_bar))
    return _beta(s, s_bar, quantizer, noise, delta_zero_tol)[0]


def layer_update(theta, P, P_inv, phi, beta: float, mu: float, innovation: float,
                 domain: BoxDomain) -> LayerUpdate:
    """One rank-one quasi-Newton step followed by the weighted projection.

    ``P`` and ``P_inv`` are advanced together so that their product stays the
    identity without ever inverting a matrix.
    """
    Pphi = P @ phi
    a = 1.0 / (mu + beta * float(phi @ Pphi))
    P_new = P - (a * beta) * (Pphi[:, None] * Pphi)
    P_inv_new = P_inv + (beta / mu) * (phi[:, None] * phi)
    if not (P_new.diagonal().min() >= SPD_FLOOR and math.isfinite(a)):
        raise NumericalFailure("covariance recursion lost positive definiteness")
    candidate = theta + (a * innovation) * Pphi
    # exact sign of a difference gives an exact containment test
    if min((candidate - domain.lower).min(), (domain.upper - candidate).min()) >= 0.0:
        return LayerUpdate(candidate, P_new, P_inv_new, a, False)
    return LayerUpdate(project_weighted(candidate, P_inv_new, domain, check=False),
                       P_new, P_inv_new, a, True)


def step1_update(state: AdaState, obs: Observation, config: AdaConfig):
    """Preliminary layer update; returns ``(theta_bar, P_bar, P_bar_inv, diagnostics)``."""
    phi = np.asarray(obs.phi, dtype=float)
    v_bar = compute_v_bar(phi, state.theta_bar, obs.y, obs.quantizer, config.noise)
    beta_bar = compute_beta_bar(phi, obs.quantizer, config.domain, config.noise)
    up = layer_update(state.theta_bar, state.P_bar, state.P_bar_inv, phi, beta_bar,
                      config.mu_bar, v_bar, config.domain)
    return up.theta, up.P, up.P_inv, {"v_bar": v_bar, "beta_bar": beta_bar,
                                      "a_bar": up.a, "projected_bar": up.projected}


def step2_update(state: AdaState, obs: Observation, config: AdaConfig):
    """Accelerated layer update from the pre-update ``theta_bar`` of the same tick."""
    phi = np.asarray(obs.phi, dtype=float)
    s = float(phi @ state.theta)
    s_bar = float(phi @ state.theta_bar)
    v = _innovation(s, obs.y, obs.quantizer, config.noise)
    beta, delta = _beta(s, s_bar, obs.quantizer, config.noise, config.delta_zero_tol)
    up = layer_update(state.theta, state.P, state.P_inv, phi, beta, config.mu, v, config.domain)
    return up.theta, up.P, up.P_inv, {"v": v, "beta": beta, "a": up.a,
                                      "delta_k": delta, "projected": up.projected}


def update(state: AdaState, obs: Observation, config: AdaConfig) -> tuple[AdaState, StepDiagnostics]:
    """Advance both layers by one observation.

    Every right-hand quantity is taken from the state at time k, so the two
    layers are independent within the tick and are committed together.
    """
    phi = np.asarray(obs.phi, dtype=float)
    q, noise, dom = obs.quantizer, config.noise, config.domain
    s_bar = float(phi @ state.theta_bar)
    s = float(phi @ state.theta)
    v_bar = _innovation(s_bar, obs.y, q, noise)
    beta_bar = compute_beta_bar(phi, q, dom, noise)
    v = _innovation(s, obs.y, q, noise)
    beta, delta = _beta(s, s_bar, q, noise, config.delta_zero_tol)
    up1 = layer_update(state.theta_bar, state.P_bar, state.P_bar_inv, phi, beta_bar,
                       config.mu_bar, v_bar, dom)
    up2 = layer_update(state.theta, state.P, state.P_inv, phi, beta, config.mu, v, dom)
    new = AdaState(up1.theta, up1.P, up1.P_inv, up2.theta, up2.P, up2.P_inv,
                   state.info + phi[:, None] * phi, state.k + 1)
    return new, StepDiagnostics(v_bar, v, beta_bar, beta, up1.a, up2.a, delta,
                                up1.projected, up2.projected)


def predict(state: AdaState, phi, quantizer: QuantizerSpec) -> int:
    """Adaptive predictor ``S(phi' theta_k)`` using the accelerated layer."""
    return quantize(float(np.dot(phi, state.theta)), quantizer)


def psi_oracle(theta_est, theta_true, phi, quantizer: QuantizerSpec, noise: NoiseModel) -> float:
    """Closed-form conditional mean of the innovation at ``theta_est``.

    Sum over the thresholds bounding the cell of ``phi' theta_est`` of
    ``F(c - phi' theta_est) - F(c - phi' theta_true)``. Reference value for
    Monte-Carlo checks; not used by the recursion.
    """
    s_est = float(np.dot(phi, theta_est))
    s_true = float(np.dot(phi, theta_true))
    return sum(noise.cdf(c - s_est) - noise.cdf(c - s_true)
               for c in _active_thresholds(s_est, quantizer))
