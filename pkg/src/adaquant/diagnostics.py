"""Monte-Carlo and algebraic self-checks run by ``adaquant diagnose``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .estimator import (AdaConfig, AdaState, Observation, compute_beta, compute_v, psi_oracle,
                        update)
from .geometry import BoxDomain, contains, project_weighted
from .noise import NoiseModel
from .quantizer import QuantizerSpec


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class Tolerances:
    z_score: float = 5.0
    vi_rel: float = 1e-8
    inverse: float = 1e-6
    bracket: float = 1e-9

    @classmethod
    def strict(cls) -> "Tolerances":
        return cls(z_score=4.0, vi_rel=1e-10, inverse=1e-8, bracket=1e-11)


def _random_point(rng, box: BoxDomain) -> np.ndarray:
    return rng.uniform(box.lower, box.upper)


def innovation_mean(theta_est, theta_true, phi, quantizer: QuantizerSpec, noise: NoiseModel,
                    n: int, rng: np.random.Generator) -> tuple[float, float]:
    """Sample mean and standard deviation of the innovation over ``n`` noise draws.

    The innovation depends on the draw only through the observed level, so
    it is evaluated once per level and weighted by the sampled level counts.
    """
    s_true = float(np.dot(phi, theta_true))
    eps = noise.sample(rng, n)
    ys = np.searchsorted(np.asarray(quantizer.thresholds), s_true + eps, side="left") + 1
    counts = np.bincount(ys, minlength=quantizer.levels + 1)[1:]
    vals = np.array([compute_v(phi, theta_est, y, quantizer, noise)
                     for y in range(1, quantizer.levels + 1)])
    mean = float(counts @ vals) / n
    var = float(counts @ (vals - mean) ** 2) / (n - 1)
    return mean, math.sqrt(var)


def check_innovation_mean(quantizer, noise, box, rng, tol: Tolerances, tuples=50, n=100_000):
    worst = 0.0
    for _ in range(tuples):
        phi = rng.uniform(-1, 1, box.dim)
        theta_est, theta_true = _random_point(rng, box), _random_point(rng, box)
        mean, sd = innovation_mean(theta_est, theta_true, phi, quantizer, noise, n, rng)
        psi = psi_oracle(theta_est, theta_true, phi, quantizer, noise)
        # floor covers tuples where one level has probability ~1 and sd is 0
        bound = max(tol.z_score * sd / math.sqrt(n), 1e-12)
        worst = max(worst, abs(mean - psi) / bound)
    return CheckResult("innovation mean vs psi", worst <= 1.0,
                       f"worst |mean - psi| / ({tol.z_score:g} sd/sqrt(n)) = {worst:.3f}")


def _pdf_range(noise: NoiseModel, a: float, b: float) -> tuple[float, float]:
    lo, hi = min(a, b), max(a, b)
    grid = np.linspace(lo, hi, 2001)
    if lo < 0.0 < hi:
        grid = np.append(grid, 0.0)
    vals = [noise.pdf(x) for x in grid]
    return min(vals), max(vals)


def check_divided_difference(quantizer, noise, box, rng, tol: Tolerances, trials=500):
    bad = 0
    for _ in range(trials):
        phi = rng.uniform(-1, 1, box.dim)
        theta, theta_bar = _random_point(rng, box), _random_point(rng, box)
        beta = compute_beta(phi, theta, theta_bar, quantizer, noise)
        s, s_bar = float(phi @ theta), float(phi @ theta_bar)
        ts = quantizer.thresholds
        cell = int(np.searchsorted(ts, s, side="left")) + 1
        active = [ts[j] for j in (cell - 2, cell - 1) if 0 <= j < len(ts)]
        lo = hi = 0.0
        for c in active:
            a, b = _pdf_range(noise, c - s, c - s_bar)
            lo, hi = lo + a, hi + b
        slack = tol.bracket * max(hi, 1.0)
        if not lo - slack <= beta <= hi + slack:
            bad += 1
    return CheckResult("divided-difference bracketing", bad == 0, f"{bad}/{trials} outside")


def check_projection(box, rng, tol: Tolerances, trials=100, probes=100):
    d = box.dim
    worst = -math.inf
    outside = 0
    for _ in range(trials):
        M = rng.normal(size=(d, d))
        A = M @ M.T + 0.1 * np.eye(d)
        width = box.upper - box.lower
        x = rng.uniform(box.lower - width, box.upper + width)
        y = project_weighted(x, A, box)
        outside += not contains(y, box)
        z = rng.uniform(box.lower, box.upper, (probes, d))
        vi = (z - y) @ (A @ (x - y))
        scale = 1.0 + np.linalg.norm(x) * np.linalg.norm(A, 2)
        worst = max(worst, float(vi.max()) / scale)
    ok = outside == 0 and worst <= tol.vi_rel
    return CheckResult("projection variational inequality", ok,
                       f"max (x-y)'A(z-y)/scale = {worst:.2e}, outside={outside}")


def check_inverse_consistency(quantizer, config: AdaConfig, rng, tol: Tolerances, steps=1000):
    d = config.domain.dim
    state = AdaState.initial(d)
    theta_true = _random_point(rng, config.domain) * 0.9
    worst = 0.0
    eye = np.eye(d)
    ts = np.asarray(quantizer.thresholds)
    for _ in range(steps):
        phi = rng.uniform(-1, 1, d)
        y = int(np.searchsorted(ts, phi @ theta_true + config.noise.sample(rng), side="left")) + 1
        state, _ = update(state, Observation(phi, y, quantizer), config)
        worst = max(worst, np.abs(state.P @ state.P_inv - eye).max(),
                    np.abs(state.P_bar @ state.P_bar_inv - eye).max())
    return CheckResult("covariance inverse consistency", worst <= tol.inverse,
                       f"max |P P^-1 - I| = {worst:.2e}")


def run_all(quantizer: QuantizerSpec, config: AdaConfig, seed: int = 0,
            strict: bool = False) -> list[CheckResult]:
    tol = Tolerances.strict() if strict else Tolerances()
    rng = np.random.default_rng(seed)
    box = config.domain
    return [
        check_innovation_mean(quantizer, config.noise, box, rng, tol),
        check_divided_difference(quantizer, config.noise, box, rng, tol),
        check_projection(box, rng, tol),
        check_inverse_consistency(quantizer, config, rng, tol),
    ]
