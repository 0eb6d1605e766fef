"""Scenario generation, prequential trajectory runs and their metrics."""

from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .baseline import L2State, l2_update
from .estimator import AdaConfig, AdaState, NumericalFailure, Observation, predict, update
from .quantizer import QuantizerSpec, quantize

logger = logging.getLogger(__name__)

SCENARIO_KINDS = ("iid_uniform", "decaying_excitation", "feedback")
ALGORITHMS = ("ada", "l2")

CSV_COLUMNS = ("k", "err_sq", "err_sq_bar", "lambda_min", "lambda_max",
               "avg_regret", "accuracy", "beta", "beta_bar")


@dataclass(frozen=True, eq=False)
class ScenarioSpec:
    kind: str
    d: int
    steps: int
    theta_true: np.ndarray
    seed: int = 0
    amplitude: float = 1.0
    alpha: float = 0.25

    def __post_init__(self):
        object.__setattr__(self, "theta_true", np.asarray(self.theta_true, dtype=float).reshape(-1))
        if self.kind not in SCENARIO_KINDS:
            raise ValueError(f"unknown scenario kind {self.kind!r}")
        if self.d < 1 or self.theta_true.size != self.d:
            raise ValueError("theta_true length must equal d >= 1")
        if self.steps < 0:
            raise ValueError("steps must be non-negative")
        if self.kind == "iid_uniform" and not (0 < self.amplitude < math.inf):
            raise ValueError("amplitude must be positive and finite")
        if self.kind == "decaying_excitation":
            if not 0 < self.alpha < 0.5:
                raise ValueError("alpha must lie in (0, 0.5)")
            if self.d < 2:
                raise ValueError("decaying_excitation needs d >= 2")
        if self.kind == "feedback" and self.d < 2:
            raise ValueError("feedback needs d >= 2")


def generate_regressor(spec: ScenarioSpec, k: int, rng: np.random.Generator,
                       prev_prediction: int = 1, levels: int = 2) -> np.ndarray:
    """Regressor ``phi_k`` for step ``k`` (0-based).

    ``feedback`` places the previous adaptive prediction, rescaled from
    ``1..levels`` onto ``[-1, 1]``, in the first component; the remaining
    components are exogenous uniforms on ``[-1, 1]``.
    """
    if spec.kind == "iid_uniform":
        return rng.uniform(-spec.amplitude, spec.amplitude, spec.d)
    if spec.kind == "decaying_excitation":
        phi = np.empty(spec.d)
        phi[0] = 1.0
        phi[1:] = (k + 1) ** (-spec.alpha) * rng.uniform(-1.0, 1.0, spec.d - 1)
        return phi
    phi = np.empty(spec.d)
    phi[0] = 2.0 * (prev_prediction - 1) / (levels - 1) - 1.0
    phi[1:] = rng.uniform(-1.0, 1.0, spec.d - 1)
    return phi


def best_predictor(phi, theta_true, quantizer: QuantizerSpec) -> int:
    return quantize(float(np.dot(phi, theta_true)), quantizer)


def regret(phi, theta_true, state, quantizer: QuantizerSpec) -> int:
    return abs(best_predictor(phi, theta_true, quantizer) - predict(state, phi, quantizer))


def eigen_extremes(info, tol: float = 1e-12) -> tuple[float, float]:
    info = np.asarray(info, dtype=float)
    scale = max(np.abs(info).max(), 1.0)
    if np.abs(info - info.T).max() > tol * scale:
        raise ValueError("matrix is not symmetric")
    w = np.linalg.eigvalsh(info)
    return float(w[0]), float(w[-1])


def log_schedule(steps: int, per_decade: int = 20) -> np.ndarray:
    """Log-spaced 1-based step indices in ``[1, steps]``, always including ``steps``."""
    if steps <= 0:
        return np.zeros(0, dtype=int)
    n = max(2, int(math.ceil(math.log10(max(steps, 10)) * per_decade)) + 1)
    ks = np.unique(np.round(np.logspace(0, math.log10(steps), n)).astype(int))
    return ks[(ks >= 1) & (ks <= steps)]


@dataclass
class TrajectoryMetrics:
    """Per-step records of one prequential run (row ``i`` is step ``k = i + 1``)."""

    algorithm: str
    seed: int
    steps: int
    err_sq: np.ndarray
    err_sq_bar: np.ndarray
    avg_regret: np.ndarray
    accuracy: np.ndarray
    beta: np.ndarray
    beta_bar: np.ndarray
    lambda_min: np.ndarray
    lambda_max: np.ndarray
    final_theta: np.ndarray
    failed: bool = False
    failure: str = ""
    threshold_hits: int = 0
    projections: int = 0
    extras: dict = field(default_factory=dict)

    @property
    def k(self) -> np.ndarray:
        return np.arange(1, self.err_sq.size + 1)

    def rate_slope(self, k_lo: int = 1000, k_hi: int | None = None) -> float:
        return rate_slope(self.err_sq, k_lo, k_hi)

    def summary(self) -> dict:
        n = self.err_sq.size
        out = {
            "final_theta": self.final_theta.tolist(),
            "final_accuracy": float(self.accuracy[-1]) if n else None,
            "seed": self.seed,
            "steps": self.steps,
            "algorithm": self.algorithm,
        }
        if np.isfinite(self.err_sq).any():
            out["final_err_sq"] = float(self.err_sq[-1]) if n else None
            out["final_avg_regret"] = float(self.avg_regret[-1]) if n else None
            if n >= 10:
                out["rate_slope"] = self.rate_slope(min(1000, max(1, n // 100)), n)
        if self.failed:
            out["failed"] = True
            out["failure"] = self.failure
        out["threshold_hits"] = self.threshold_hits
        return out


def rate_slope(err_sq: np.ndarray, k_lo: int = 1000, k_hi: int | None = None,
               points: int = 60) -> float:
    """Least-squares slope of ``log err_sq`` against ``log k`` on log-spaced k."""
    n = err_sq.size
    k_hi = n if k_hi is None else min(k_hi, n)
    ks = np.unique(np.round(np.logspace(math.log10(k_lo), math.log10(k_hi), points)).astype(int))
    e = err_sq[ks - 1]
    keep = e > 0
    x, yv = np.log(ks[keep]), np.log(e[keep])
    return float(np.polyfit(x, yv, 1)[0])


def run_trajectory(scenario: ScenarioSpec, quantizer: QuantizerSpec, config: AdaConfig,
                   algorithm: str = "ada", schedule: Sequence[int] | None = None) -> TrajectoryMetrics:
    """Simulate ``y = S(phi' theta + eps)`` and run an estimator prequentially.

    Prediction, regret and accuracy at each step use the state before the
    observation is absorbed. Deterministic for a fixed ``scenario.seed``.
    """
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    n, d = scenario.steps, scenario.d
    theta_true = scenario.theta_true
    if not config.domain.interior(theta_true):
        raise ValueError("theta_true must lie strictly inside the domain")
    phi_rng, noise_rng = (np.random.default_rng(s)
                          for s in np.random.SeedSequence(scenario.seed).spawn(2))
    noise = config.noise.sample(noise_rng, n) if n else np.zeros(0)
    sched = set(log_schedule(n) if schedule is None else schedule)

    state = AdaState.initial(d) if algorithm == "ada" else L2State.initial(d)
    nan = np.full(n, np.nan)
    err_sq, err_sq_bar = nan.copy(), nan.copy()
    beta, beta_bar = nan.copy(), nan.copy()
    lam_min, lam_max = nan.copy(), nan.copy()
    regrets = np.zeros(n)
    hits = np.zeros(n)
    ts = quantizer.thresholds
    levels = quantizer.levels
    prev_pred = 1
    hit_count = projections = 0
    failed, failure = False, ""
    done = 0
    for i in range(n):
        phi = generate_regressor(scenario, i, phi_rng, prev_pred, levels)
        s_true = float(phi @ theta_true)
        if s_true in ts:
            hit_count += 1
        y = quantize(s_true + noise[i], quantizer)
        best = quantize(s_true, quantizer)
        y_hat = quantize(float(phi @ state.theta), quantizer)
        regrets[i] = abs(best - y_hat)
        hits[i] = y == y_hat
        prev_pred = y_hat
        obs = Observation(phi, y, quantizer)
        try:
            if algorithm == "ada":
                state, diag = update(state, obs, config)
                beta[i], beta_bar[i] = diag.beta, diag.beta_bar
                projections += diag.projected
                diff = theta_true - state.theta_bar
                err_sq_bar[i] = diff @ diff
            else:
                state, _, beta[i] = l2_update(state, obs, config)
        except NumericalFailure as exc:
            failed, failure = True, str(exc)
            logger.error("seed %d aborted at step %d: %s", scenario.seed, i + 1, exc)
            break
        diff = theta_true - state.theta
        err_sq[i] = diff @ diff
        if (i + 1) in sched:
            lam_min[i], lam_max[i] = eigen_extremes(state.info)
        done = i + 1

    k = np.arange(1, n + 1)
    trim = slice(0, done)
    return TrajectoryMetrics(
        algorithm=algorithm, seed=scenario.seed, steps=n,
        err_sq=err_sq[trim], err_sq_bar=err_sq_bar[trim],
        avg_regret=(np.cumsum(regrets) / k)[trim], accuracy=(np.cumsum(hits) / k)[trim],
        beta=beta[trim], beta_bar=beta_bar[trim],
        lambda_min=lam_min[trim], lambda_max=lam_max[trim],
        final_theta=state.theta.copy(), failed=failed, failure=failure,
        threshold_hits=hit_count, projections=projections,
    )


def _run_one(args):
    return run_trajectory(*args)


def run_sweep(scenario: ScenarioSpec, seeds: Sequence[int], quantizer: QuantizerSpec,
              config: AdaConfig, algorithm: str = "ada", jobs: int = 1) -> list[TrajectoryMetrics]:
    """Run one trajectory per seed; results are returned in seed order."""
    tasks = [(_reseed(scenario, s), quantizer, config, algorithm) for s in seeds]
    if jobs <= 1 or len(tasks) <= 1:
        return [_run_one(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_one, tasks))


def _reseed(scenario: ScenarioSpec, seed: int) -> ScenarioSpec:
    return ScenarioSpec(scenario.kind, scenario.d, scenario.steps, scenario.theta_true,
                        seed, scenario.amplitude, scenario.alpha)


def _fmt(x: float) -> str:
    return "" if not np.isfinite(x) else repr(float(x))


def write_metrics_csv(metrics: TrajectoryMetrics, path) -> None:
    cols = (metrics.k, metrics.err_sq, metrics.err_sq_bar, metrics.lambda_min, metrics.lambda_max,
            metrics.avg_regret, metrics.accuracy, metrics.beta, metrics.beta_bar)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in zip(*cols):
            w.writerow([str(int(row[0]))] + [_fmt(v) for v in row[1:]])


def write_summary_json(summary: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


@dataclass
class FitResult:
    """Prequential fit over a labelled stream (no ground-truth parameter)."""

    algorithm: str
    accuracy: np.ndarray
    beta: np.ndarray
    beta_bar: np.ndarray
    final_theta: np.ndarray

    @property
    def steps(self) -> int:
        return self.accuracy.size


def fit_stream(rows, quantizer: QuantizerSpec, config: AdaConfig, algorithm: str = "ada") -> FitResult:
    """Predict each ``(features, label)`` row, then absorb it.

    ``rows`` is any iterable of objects with ``features`` and ``label``;
    it is consumed once, in order.
    """
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    state = None
    hits, betas, beta_bars = [], [], []
    for row in rows:
        phi = row.features
        if state is None:
            d = phi.size
            state = AdaState.initial(d) if algorithm == "ada" else L2State.initial(d)
        hits.append(quantize(float(phi @ state.theta), quantizer) == row.label)
        obs = Observation(phi, row.label, quantizer)
        if algorithm == "ada":
            state, diag = update(state, obs, config)
            betas.append(diag.beta)
            beta_bars.append(diag.beta_bar)
        else:
            state, _, g = l2_update(state, obs, config)
            betas.append(g)
            beta_bars.append(math.nan)
    n = len(hits)
    theta = state.theta.copy() if state is not None else np.zeros(config.domain.dim)
    return FitResult(algorithm, np.cumsum(hits) / np.arange(1, n + 1),
                     np.array(betas), np.array(beta_bars), theta)


def write_fit_csv(result: FitResult, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("k", "accuracy", "beta", "beta_bar"))
        for k, row in enumerate(zip(result.accuracy, result.beta, result.beta_bar), start=1):
            w.writerow([str(k)] + [_fmt(v) for v in row])
