"""JSON run configuration: parsing, validation and round-trip serialization.

Schema (all keys except ``dimension``, ``thresholds`` and ``noise`` optional)::

    {
      "dimension": 5,
      "box": 1.0,                         # or {"lower": [...], "upper": [...]}
      "thresholds": [0.5],
      "threshold_bound": null,            # optional Lambda_c
      "noise": {"type": "gaussian", "sigma": 5.0},   # or logistic/scale
      "mu_bar": 1.0, "mu": 1.0, "delta_zero_tol": 1e-8,
      "algorithm": "ada",                 # or "l2"
      "scenario": {"kind": "iid_uniform", "amplitude": 1.0},
      "theta_true": [...],
      "steps": 10000, "seed": 0, "seeds": 1,
      "output_dir": "out"
    }
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .estimator import AdaConfig
from .geometry import BoxDomain
from .noise import NoiseModel, noise_from_dict
from .quantizer import QuantizerSpec
from .simulation import ALGORITHMS, SCENARIO_KINDS, ScenarioSpec


class ConfigError(ValueError):
    """Configuration could not be parsed or failed validation.

    ``errors`` lists every problem as ``"<field path>: <message>"``.
    """

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.errors))


@dataclass(frozen=True)
class RunConfig:
    dimension: int
    box_lower: tuple[float, ...]
    box_upper: tuple[float, ...]
    thresholds: tuple[float, ...]
    noise: dict
    mu_bar: float = 1.0
    mu: float = 1.0
    delta_zero_tol: float = 1e-8
    algorithm: str = "ada"
    scenario: dict | None = None
    theta_true: tuple[float, ...] | None = None
    steps: int = 0
    seed: int = 0
    seeds: int = 1
    threshold_bound: float | None = None
    output_dir: str | None = None

    def quantizer(self) -> QuantizerSpec:
        return QuantizerSpec(self.thresholds)

    def noise_model(self) -> NoiseModel:
        return noise_from_dict(self.noise)

    def domain(self) -> BoxDomain:
        return BoxDomain(np.array(self.box_lower), np.array(self.box_upper))

    def ada_config(self) -> AdaConfig:
        return AdaConfig(self.noise_model(), self.domain(), self.mu_bar, self.mu, self.delta_zero_tol)

    def scenario_spec(self, seed: int | None = None) -> ScenarioSpec:
        if self.scenario is None or self.theta_true is None:
            raise ConfigError(["scenario: simulation needs 'scenario' and 'theta_true'"])
        sc = self.scenario
        return ScenarioSpec(
            kind=sc["kind"], d=self.dimension, steps=self.steps,
            theta_true=np.array(self.theta_true), seed=self.seed if seed is None else seed,
            amplitude=float(sc.get("amplitude", 1.0)), alpha=float(sc.get("alpha", 0.25)),
        )

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["box"] = {"lower": list(d.pop("box_lower")), "upper": list(d.pop("box_upper"))}
        d["thresholds"] = list(self.thresholds)
        if self.theta_true is not None:
            d["theta_true"] = list(self.theta_true)
        return {k: v for k, v in d.items() if v is not None}


def _finite(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _floats(value, path: str, errors: list[str]) -> tuple[float, ...] | None:
    if not isinstance(value, list) or not all(_finite(v) for v in value):
        errors.append(f"{path}: expected a list of finite numbers")
        return None
    return tuple(float(v) for v in value)


def _positive(raw: dict, key: str, default, errors: list[str], path: str | None = None):
    val = raw.get(key, default)
    if not _finite(val) or val <= 0:
        errors.append(f"{path or key}: must be a positive finite number, got {val!r}")
        return default
    return float(val)


def parse_config(raw: Any) -> RunConfig:
    """Validate a decoded JSON document; collects all failures before raising."""
    if not isinstance(raw, dict):
        raise ConfigError(["<root>: expected a JSON object"])
    errors: list[str] = []

    d = raw.get("dimension")
    if not isinstance(d, int) or isinstance(d, bool) or d < 1:
        errors.append(f"dimension: must be an integer >= 1, got {d!r}")
        d = None

    lower = upper = None
    box = raw.get("box", 1.0)
    if _finite(box):
        if box <= 0:
            errors.append("box: uniform half-width must be positive")
        elif d is not None:
            lower, upper = (-float(box),) * d, (float(box),) * d
    elif isinstance(box, dict):
        lower = _floats(box.get("lower"), "box.lower", errors)
        upper = _floats(box.get("upper"), "box.upper", errors)
        if lower is not None and upper is not None:
            if len(lower) != len(upper) or (d is not None and len(lower) != d):
                errors.append("box: lower/upper must both have length 'dimension'")
            elif any(lo >= hi for lo, hi in zip(lower, upper)):
                errors.append("box: every lower bound must be below its upper bound")
    else:
        errors.append("box: expected a positive number or {lower, upper}")

    thresholds = _floats(raw.get("thresholds"), "thresholds", errors)
    if thresholds is not None:
        if not thresholds:
            errors.append("thresholds: at least one threshold is required")
        elif any(a > b for a, b in zip(thresholds, thresholds[1:])):
            errors.append("thresholds: thresholds not sorted")
    bound = raw.get("threshold_bound")
    if bound is not None:
        if not _finite(bound) or bound < 0:
            errors.append("threshold_bound: must be a non-negative finite number")
        elif thresholds and max(thresholds[-1], -thresholds[0]) > bound:
            errors.append(f"thresholds: max(c_m, -c_1) exceeds threshold_bound {bound}")

    noise = raw.get("noise")
    if not isinstance(noise, dict):
        errors.append("noise: expected an object with a 'type'")
        noise = None
    else:
        kind = noise.get("type")
        param = {"gaussian": "sigma", "logistic": "scale"}.get(kind)
        if param is None:
            errors.append(f"noise.type: unknown family {kind!r}")
            noise = None
        else:
            _positive(noise, param, None, errors, f"noise.{param}")
            if not _finite(noise.get("loc", 0.0)):
                errors.append("noise.loc: must be finite")
            if not any(e.startswith("noise.") for e in errors):
                model = noise_from_dict(noise)
                if model.cdf(0.0) != 0.5:
                    errors.append("noise: cdf(0) must equal 1/2 (zero-median noise)")
                noise = model.to_dict()
            else:
                noise = None

    mu_bar = _positive(raw, "mu_bar", 1.0, errors)
    mu = _positive(raw, "mu", 1.0, errors)
    tol = _positive(raw, "delta_zero_tol", 1e-8, errors)

    algorithm = raw.get("algorithm", "ada")
    if algorithm not in ALGORITHMS:
        errors.append(f"algorithm: must be one of {ALGORITHMS}, got {algorithm!r}")

    scenario = raw.get("scenario")
    if scenario is not None:
        if not isinstance(scenario, dict) or scenario.get("kind") not in SCENARIO_KINDS:
            errors.append(f"scenario.kind: must be one of {SCENARIO_KINDS}")
        else:
            scenario = dict(scenario)
            kind = scenario["kind"]
            if kind == "iid_uniform":
                scenario["amplitude"] = _positive(scenario, "amplitude", 1.0, errors, "scenario.amplitude")
            if kind == "decaying_excitation":
                a = scenario.get("alpha", 0.25)
                if not _finite(a) or not 0 < a < 0.5:
                    errors.append("scenario.alpha: must lie in (0, 0.5)")
                scenario["alpha"] = a
            if kind != "iid_uniform" and d is not None and d < 2:
                errors.append(f"scenario.kind: {kind} needs dimension >= 2")

    theta_true = raw.get("theta_true")
    if theta_true is not None:
        theta_true = _floats(theta_true, "theta_true", errors)
        if theta_true is not None:
            if d is not None and len(theta_true) != d:
                errors.append("theta_true: length must equal 'dimension'")
            elif lower is not None and upper is not None and len(lower) == len(theta_true) and \
                    not all(lo < t < hi for lo, t, hi in zip(lower, theta_true, upper)):
                errors.append("theta_true: must lie strictly inside the box")
    if scenario is not None and theta_true is None:
        errors.append("theta_true: required when a scenario is given")

    ints = {}
    for key, default, lo in (("steps", 0, 0), ("seed", 0, 0), ("seeds", 1, 1)):
        val = raw.get(key, default)
        if not isinstance(val, int) or isinstance(val, bool) or val < lo:
            errors.append(f"{key}: must be an integer >= {lo}, got {val!r}")
            val = default
        ints[key] = val

    out = raw.get("output_dir")
    if out is not None and not isinstance(out, str):
        errors.append("output_dir: must be a string")

    known = {"dimension", "box", "thresholds", "threshold_bound", "noise", "mu_bar", "mu",
             "delta_zero_tol", "algorithm", "scenario", "theta_true", "steps", "seed", "seeds",
             "output_dir"}
    errors.extend(f"{k}: unknown key" for k in sorted(set(raw) - known))

    if errors:
        raise ConfigError(errors)
    return RunConfig(
        dimension=d, box_lower=lower, box_upper=upper, thresholds=thresholds, noise=noise,
        mu_bar=mu_bar, mu=mu, delta_zero_tol=tol, algorithm=algorithm, scenario=scenario,
        theta_true=theta_true, steps=ints["steps"], seed=ints["seed"], seeds=ints["seeds"],
        threshold_bound=None if bound is None else float(bound), output_dir=out,
    )


def load_config(path) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError([f"<file>: parse error: {exc}"]) from None
    return parse_config(raw)


def save_config(config: RunConfig, path) -> None:
    Path(path).write_text(json.dumps(config.to_dict(), indent=2) + "\n")
