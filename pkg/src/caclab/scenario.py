"""Scenario documents: JSON in, domain objects out.

A scenario file is a single JSON object with up to four sections:
``system`` (required), ``sim``, ``traffic`` and ``sweep``. Unknown keys
anywhere are rejected. Structural problems (bad JSON, wrong types,
unknown keys) raise :class:`ScenarioError`; domain-invariant violations
surface as :class:`ConfigError` from the constructed objects.

Class indices are 1-based in files and on the command line, matching
the type1/type2/type3 naming of the traffic classes; the library uses
0-based indices internally.
"""

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError, ScenarioError
from .model import SystemConfig, TrafficClassSpec
from .simulate import SimParams
from .traffic import (
    BiPareto,
    Constant,
    DistributionSpec,
    Exponential,
    Lognormal,
    MixtureComponent,
    MmppParams,
    RateFunction,
    RenewalProcess,
    TrafficMixtureSpec,
    Weibull,
)


@dataclass(frozen=True)
class SweepSettings:
    """Sweep section of a scenario; ``swept_class`` is 0-based here."""

    swept_class: int
    grid: tuple[float, ...]
    modes: tuple[str, ...]


@dataclass(frozen=True)
class Scenario:
    system: SystemConfig
    sim: SimParams | None = None
    traffic: TrafficMixtureSpec | None = None
    sweep: SweepSettings | None = None


def _require_mapping(obj, where: str) -> dict:
    if not isinstance(obj, dict):
        raise ScenarioError(f"{where} must be an object, got {type(obj).__name__}")
    return obj


def _check_keys(d: dict, allowed: set[str], required: set[str], where: str):
    unknown = sorted(set(d) - allowed)
    if unknown:
        raise ScenarioError(f"unknown key(s) {unknown} in {where}")
    missing = sorted(required - set(d))
    if missing:
        raise ScenarioError(f"missing required key(s) {missing} in {where}")


def _number(d: dict, key: str, where: str) -> float:
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioError(f"{where}.{key} must be a number, got {v!r}")
    return float(v)


def _integer(d: dict, key: str, where: str) -> int:
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ScenarioError(f"{where}.{key} must be an integer, got {v!r}")
    return v


def _parse_distribution(obj, where: str) -> DistributionSpec:
    d = _require_mapping(obj, where)
    kind = d.get("kind")
    fields = {
        "exponential": ("rate",),
        "lognormal": ("log_mean", "log_stdev"),
        "weibull": ("shape", "scale"),
        "bipareto": ("alpha", "beta", "breakpoint", "minimum"),
        "constant": ("value",),
    }
    if kind not in fields:
        raise ScenarioError(
            f"{where}.kind must be one of {sorted(fields)}, got {kind!r}"
        )
    names = fields[kind]
    _check_keys(d, {"kind", *names}, {"kind", *names}, where)
    args = [_number(d, k, where) for k in names]
    cls = {
        "exponential": Exponential,
        "lognormal": Lognormal,
        "weibull": Weibull,
        "bipareto": BiPareto,
        "constant": Constant,
    }[kind]
    try:
        return cls(*args)
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _parse_segments(obj, where: str) -> RateFunction:
    if not isinstance(obj, list) or not all(
        isinstance(s, list) and len(s) == 2 for s in obj
    ):
        raise ScenarioError(f"{where} must be a list of [start, value] pairs")
    try:
        return RateFunction(tuple((float(s), float(r)) for s, r in obj))
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _parse_process(obj, where: str):
    d = _require_mapping(obj, where)
    kind = d.get("kind")
    if kind == "poisson":
        if "segments" in d:
            _check_keys(d, {"kind", "segments"}, {"kind", "segments"}, where)
            return _parse_segments(d["segments"], f"{where}.segments")
        _check_keys(d, {"kind", "rate"}, {"kind", "rate"}, where)
        return RateFunction.constant(_number(d, "rate", where))
    if kind == "mmpp":
        names = ("rate_state1", "rate_state2", "switch_12", "switch_21")
        _check_keys(d, {"kind", *names}, {"kind", *names}, where)
        try:
            return MmppParams(*(_number(d, k, where) for k in names))
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}") from exc
    if kind == "renewal":
        _check_keys(d, {"kind", "interarrival"}, {"kind", "interarrival"}, where)
        return RenewalProcess(_parse_distribution(d["interarrival"], f"{where}.interarrival"))
    raise ScenarioError(
        f"{where}.kind must be one of ['mmpp', 'poisson', 'renewal'], got {kind!r}"
    )


def _parse_system(obj) -> SystemConfig:
    d = _require_mapping(obj, "system")
    _check_keys(d, {"capacity", "classes", "rat_labels"}, {"capacity", "classes"}, "system")
    capacity = _integer(d, "capacity", "system")
    if not isinstance(d["classes"], list):
        raise ScenarioError("system.classes must be a list")
    classes = []
    for i, cd in enumerate(d["classes"]):
        where = f"system.classes[{i}]"
        cd = _require_mapping(cd, where)
        allowed = {"name", "arrival_rate", "service_rate", "bandwidth", "admission_threshold"}
        _check_keys(cd, allowed, {"arrival_rate", "service_rate"}, where)
        name = cd.get("name", f"class{i + 1}")
        if not isinstance(name, str):
            raise ScenarioError(f"{where}.name must be a string")
        classes.append(
            TrafficClassSpec(
                name=name,
                arrival_rate=_number(cd, "arrival_rate", where),
                service_rate=_number(cd, "service_rate", where),
                bandwidth=_integer(cd, "bandwidth", where) if "bandwidth" in cd else 1,
                admission_threshold=(
                    _integer(cd, "admission_threshold", where)
                    if "admission_threshold" in cd
                    else 1
                ),
            )
        )
    rat_labels = None
    if "rat_labels" in d:
        if not isinstance(d["rat_labels"], list) or not all(
            isinstance(x, str) for x in d["rat_labels"]
        ):
            raise ScenarioError("system.rat_labels must be a list of strings")
        rat_labels = tuple(d["rat_labels"])
    return SystemConfig(capacity=capacity, classes=tuple(classes), rat_labels=rat_labels)


def _parse_sim(obj, num_classes: int) -> SimParams:
    d = _require_mapping(obj, "sim")
    allowed = {"horizon", "warmup", "replications", "seed", "service_model", "holding"}
    _check_keys(d, allowed, {"horizon"}, "sim")
    holding = None
    if "holding" in d:
        if not isinstance(d["holding"], list):
            raise ScenarioError("sim.holding must be a list of distributions")
        holding = tuple(
            _parse_distribution(h, f"sim.holding[{i}]") for i, h in enumerate(d["holding"])
        )
        if len(holding) != num_classes:
            raise ConfigError(
                f"sim.holding needs one distribution per class ({num_classes}), "
                f"got {len(holding)}"
            )
    service_model = d.get("service_model", "markovian")
    if not isinstance(service_model, str):
        raise ScenarioError("sim.service_model must be a string")
    return SimParams(
        horizon=_number(d, "horizon", "sim"),
        warmup=_number(d, "warmup", "sim") if "warmup" in d else None,
        replications=_integer(d, "replications", "sim") if "replications" in d else 1,
        seed=_integer(d, "seed", "sim") if "seed" in d else 0,
        service_model=service_model,
        holding=holding,
    )


def _parse_traffic(obj, num_classes: int) -> TrafficMixtureSpec:
    d = _require_mapping(obj, "traffic")
    _check_keys(d, {"components"}, {"components"}, "traffic")
    if not isinstance(d["components"], list) or not d["components"]:
        raise ScenarioError("traffic.components must be a non-empty list")
    components = []
    for i, cd in enumerate(d["components"]):
        where = f"traffic.components[{i}]"
        cd = _require_mapping(cd, where)
        _check_keys(cd, {"weight", "class", "process"}, {"weight", "process"}, where)
        w = cd["weight"]
        if isinstance(w, dict):
            _check_keys(w, {"segments"}, {"segments"}, f"{where}.weight")
            weight = _parse_segments(w["segments"], f"{where}.weight.segments")
        elif isinstance(w, bool) or not isinstance(w, (int, float)):
            raise ScenarioError(f"{where}.weight must be a number or segment object")
        else:
            weight = float(w)
        class_index = None
        if "class" in cd:
            one_based = _integer(cd, "class", where)
            if not 1 <= one_based <= num_classes:
                raise ConfigError(
                    f"{where}.class must be in 1..{num_classes}, got {one_based}"
                )
            class_index = one_based - 1
        components.append(
            MixtureComponent(
                weight=weight,
                process=_parse_process(cd["process"], f"{where}.process"),
                class_index=class_index,
            )
        )
    return TrafficMixtureSpec(tuple(components))


def _parse_sweep(obj, num_classes: int) -> SweepSettings:
    d = _require_mapping(obj, "sweep")
    _check_keys(d, {"class", "grid", "modes"}, {"class", "grid"}, "sweep")
    one_based = _integer(d, "class", "sweep")
    if not 1 <= one_based <= num_classes:
        raise ConfigError(f"sweep.class must be in 1..{num_classes}, got {one_based}")
    if not isinstance(d["grid"], list):
        raise ScenarioError("sweep.grid must be a list of numbers")
    grid = []
    for g in d["grid"]:
        if isinstance(g, bool) or not isinstance(g, (int, float)):
            raise ScenarioError("sweep.grid must be a list of numbers")
        grid.append(float(g))
    modes = ("ctmc",)
    if "modes" in d:
        if not isinstance(d["modes"], list) or not all(
            isinstance(m, str) for m in d["modes"]
        ):
            raise ScenarioError("sweep.modes must be a list of strings")
        modes = tuple(d["modes"])
    return SweepSettings(swept_class=one_based - 1, grid=tuple(grid), modes=modes)


def parse_scenario(doc) -> Scenario:
    d = _require_mapping(doc, "scenario")
    _check_keys(d, {"system", "sim", "traffic", "sweep"}, {"system"}, "scenario")
    system = _parse_system(d["system"])
    num_classes = system.num_classes
    sim = _parse_sim(d["sim"], num_classes) if "sim" in d else None
    traffic = _parse_traffic(d["traffic"], num_classes) if "traffic" in d else None
    sweep = _parse_sweep(d["sweep"], num_classes) if "sweep" in d else None
    return Scenario(system=system, sim=sim, traffic=traffic, sweep=sweep)


def load_scenario(path) -> Scenario:
    """Parse the scenario file at ``path``."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON: {exc}") from exc
    return parse_scenario(doc)


def config_to_dict(cfg: SystemConfig) -> dict:
    """JSON-ready image of a system config (round-trips through
    ``parse_scenario``)."""
    out = {
        "capacity": cfg.capacity,
        "classes": [
            {
                "name": c.name,
                "arrival_rate": c.arrival_rate,
                "service_rate": c.service_rate,
                "bandwidth": c.bandwidth,
                "admission_threshold": c.admission_threshold,
            }
            for c in cfg.classes
        ],
    }
    if cfg.rat_labels is not None:
        out["rat_labels"] = list(cfg.rat_labels)
    return out


def simparams_to_dict(params: SimParams) -> dict:
    out = {
        "horizon": params.horizon,
        "warmup": params.effective_warmup,
        "replications": params.replications,
        "seed": params.seed,
        "service_model": params.service_model,
    }
    if params.holding is not None:
        out["holding"] = [distribution_to_dict(h) for h in params.holding]
    return out


def distribution_to_dict(spec: DistributionSpec) -> dict:
    if isinstance(spec, Exponential):
        return {"kind": "exponential", "rate": spec.rate}
    if isinstance(spec, Lognormal):
        return {"kind": "lognormal", "log_mean": spec.log_mean, "log_stdev": spec.log_stdev}
    if isinstance(spec, Weibull):
        return {"kind": "weibull", "shape": spec.shape, "scale": spec.scale}
    if isinstance(spec, BiPareto):
        return {
            "kind": "bipareto",
            "alpha": spec.alpha,
            "beta": spec.beta,
            "breakpoint": spec.breakpoint,
            "minimum": spec.minimum,
        }
    if isinstance(spec, Constant):
        return {"kind": "constant", "value": spec.value}
    raise TypeError(f"unknown distribution spec {type(spec).__name__}")
