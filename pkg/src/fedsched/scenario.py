"""Scenario and experiment-plan files (JSON)."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .constellation import ConstellationConfig, GroundSite, make_site
from .errors import ScenarioError
from .fl_task import Client, FLTask, ModelSpec, lookup_model
from .scheduler import ChannelModel, Policy, ScheduleOptions
from .temporal_graph import PATH_METRICS

FORMAT_MAJOR = 1
FORMAT_VERSION = "1.0"


def check_format_version(doc: dict, what: str):
    version = str(doc.get("format_version", FORMAT_VERSION))
    try:
        major = int(version.split(".")[0])
    except ValueError:
        raise ScenarioError(f"unparseable format_version {version!r}", f"{what}.format_version") from None
    if major != FORMAT_MAJOR:
        raise ScenarioError(f"unsupported format_version {version!r} (this reader handles {FORMAT_MAJOR}.x)",
                            f"{what}.format_version")


def canonical_hash(doc) -> str:
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class TaskTemplate:
    model: ModelSpec
    server_site: str
    client_sites: tuple[str, ...]
    multipliers: dict = field(default_factory=dict, hash=False)

    def build(self, node_of, num_clients: int | None = None, model: ModelSpec | None = None) -> FLTask:
        """Materialise an :class:`FLTask`; ``node_of`` maps a site name to its node id."""
        names = self.client_sites if num_clients is None else self.client_sites[:num_clients]
        if num_clients is not None and num_clients > len(self.client_sites):
            raise ScenarioError(f"asked for {num_clients} clients but only {len(self.client_sites)} are listed",
                                "task.client_sites")
        clients = [Client(name, node_of(name), float(self.multipliers.get(name, 1.0))) for name in names]
        return FLTask(node_of(self.server_site), clients, model or self.model)


@dataclass(frozen=True)
class SchedulingConfig:
    channel: str = ChannelModel.PER_DIRECTION.value
    path_metric: str = "widest"
    window_length_s: float = 10.0
    horizon_windows: int = 200
    include_propagation_delay: bool = False
    strict_windows: bool = False

    @property
    def options(self) -> ScheduleOptions:
        return ScheduleOptions(self.path_metric, self.include_propagation_delay, self.strict_windows)


@dataclass(frozen=True)
class Scenario:
    constellation: ConstellationConfig | None
    sites: tuple[GroundSite, ...]
    task: TaskTemplate | None
    scheduling: SchedulingConfig
    source: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    @property
    def config_hash(self) -> str:
        return canonical_hash(self.source)

    def site_node(self, name: str) -> str:
        for s in self.sites:
            if s.name == name or s.id == name:
                return s.id
        raise ScenarioError(f"unknown site {name!r}", "task")


def _req(doc, key, where):
    if not isinstance(doc, dict) or key not in doc:
        raise ScenarioError("required field missing", f"{where}.{key}")
    return doc[key]


def _num(value, where, cast=float):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"expected a number, got {value!r}", where)
    if cast is int and int(value) != value:
        raise ScenarioError(f"expected an integer, got {value!r}", where)
    return cast(value)


def parse_constellation(doc: dict, where="constellation") -> ConstellationConfig:
    if not isinstance(doc, dict):
        raise ScenarioError("expected an object", where)
    bw = doc.get("bandwidth_dist", {})
    kwargs = dict(
        num_satellites=_num(_req(doc, "num_satellites", where), f"{where}.num_satellites", int),
        num_planes=_num(_req(doc, "num_planes", where), f"{where}.num_planes", int),
        altitude_km=_num(doc.get("altitude_km", 550.0), f"{where}.altitude_km"),
        inclination_deg=_num(doc.get("inclination_deg", 53.0), f"{where}.inclination_deg"),
        isl_pattern=doc.get("isl_pattern", "grid_plus"),
        elevation_mask_deg=_num(doc.get("elevation_mask_deg", 25.0), f"{where}.elevation_mask_deg"),
        min_mbps=_num(bw.get("min_mbps", 10.0), f"{where}.bandwidth_dist.min_mbps"),
        max_mbps=_num(bw.get("max_mbps", 30.0), f"{where}.bandwidth_dist.max_mbps"),
        rng_seed=_num(doc.get("rng_seed", 0), f"{where}.rng_seed", int),
        phase_factor=_num(doc.get("phase_factor", 1), f"{where}.phase_factor", int),
    )
    if not 300.0 <= kwargs["altitude_km"] <= 2000.0:
        raise ScenarioError("altitude must lie in [300, 2000] km", f"{where}.altitude_km")
    try:
        return ConstellationConfig(**kwargs)
    except ValueError as exc:
        raise ScenarioError(str(exc), where) from None


def constellation_to_dict(cfg: ConstellationConfig) -> dict:
    return {
        "num_satellites": cfg.num_satellites,
        "num_planes": cfg.num_planes,
        "altitude_km": cfg.altitude_km,
        "inclination_deg": cfg.inclination_deg,
        "isl_pattern": cfg.isl_pattern,
        "elevation_mask_deg": cfg.elevation_mask_deg,
        "bandwidth_dist": {"min_mbps": cfg.min_mbps, "max_mbps": cfg.max_mbps},
        "rng_seed": cfg.rng_seed,
        "phase_factor": cfg.phase_factor,
    }


def parse_sites(items, where="sites") -> tuple[GroundSite, ...]:
    if not isinstance(items, list):
        raise ScenarioError("expected an array", where)
    sites = []
    for i, item in enumerate(items):
        w = f"{where}[{i}]"
        try:
            sites.append(make_site(str(_req(item, "name", w)),
                                   _num(_req(item, "lat", w), f"{w}.lat"),
                                   _num(_req(item, "lon", w), f"{w}.lon"),
                                   item.get("role", "client")))
        except ValueError as exc:
            if isinstance(exc, ScenarioError):
                raise
            raise ScenarioError(str(exc), w) from None
    ids = [s.id for s in sites]
    if len(set(ids)) != len(ids):
        raise ScenarioError("site names must be unique", where)
    if sites and sum(s.role == "server" for s in sites) != 1:
        raise ScenarioError("exactly one site must have role 'server'", where)
    return tuple(sites)


def parse_model(value, where="task.model") -> ModelSpec:
    if isinstance(value, str):
        try:
            return lookup_model(value)
        except KeyError as exc:
            raise ScenarioError(str(exc.args[0]), where) from None
    if isinstance(value, dict):
        try:
            return ModelSpec(str(value.get("name", "custom")),
                             _num(_req(value, "size_mb", where), f"{where}.size_mb"),
                             _num(_req(value, "training_time_s", where), f"{where}.training_time_s"))
        except ValueError as exc:
            if isinstance(exc, ScenarioError):
                raise
            raise ScenarioError(str(exc), where) from None
    raise ScenarioError("expected a catalog name or {size_mb, training_time_s}", where)


def parse_task(doc, where="task") -> TaskTemplate:
    if not isinstance(doc, dict):
        raise ScenarioError("expected an object", where)
    clients = _req(doc, "client_sites", where)
    if not isinstance(clients, list) or not clients:
        raise ScenarioError("expected a non-empty array of site names", f"{where}.client_sites")
    mult = doc.get("multipliers") or {}
    if not isinstance(mult, dict):
        raise ScenarioError("expected an object mapping site name to multiplier", f"{where}.multipliers")
    for k, v in mult.items():
        if _num(v, f"{where}.multipliers.{k}") < 0:
            raise ScenarioError("multipliers must be non-negative", f"{where}.multipliers.{k}")
    return TaskTemplate(
        model=parse_model(_req(doc, "model", where), f"{where}.model"),
        server_site=str(_req(doc, "server_site", where)),
        client_sites=tuple(str(c) for c in clients),
        multipliers=dict(mult),
    )


def parse_scheduling(doc, where="scheduling") -> SchedulingConfig:
    doc = doc or {}
    if not isinstance(doc, dict):
        raise ScenarioError("expected an object", where)
    channel = doc.get("channel", ChannelModel.PER_DIRECTION.value)
    if channel not in {c.value for c in ChannelModel}:
        raise ScenarioError(f"unknown channel mode {channel!r}", f"{where}.channel")
    metric = doc.get("path_metric", "widest")
    if metric not in PATH_METRICS:
        raise ScenarioError(f"unknown path metric {metric!r}", f"{where}.path_metric")
    wl = _num(doc.get("window_length_s", 10.0), f"{where}.window_length_s")
    if wl <= 0:
        raise ScenarioError("must be positive", f"{where}.window_length_s")
    horizon = _num(doc.get("horizon_windows", 200), f"{where}.horizon_windows", int)
    if horizon < 1:
        raise ScenarioError("must be >= 1", f"{where}.horizon_windows")
    return SchedulingConfig(channel, metric, wl, horizon,
                            bool(doc.get("include_propagation_delay", False)),
                            bool(doc.get("strict_windows", False)))


def parse_scenario(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError("scenario must be a JSON object", "scenario")
    check_format_version(doc, "scenario")
    constellation = parse_constellation(doc["constellation"]) if "constellation" in doc else None
    sites = parse_sites(doc.get("sites", []))
    task = parse_task(doc["task"]) if "task" in doc else None
    scenario = Scenario(constellation, sites, task, parse_scheduling(doc.get("scheduling")), source=doc)
    if task is not None and sites:
        for name in (task.server_site, *task.client_sites):
            scenario.site_node(name)
    return scenario


def read_json(path, what="file") -> dict:
    text = Path(path).read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON: {exc.msg} at line {exc.lineno}", what) from None


def load_scenario(path) -> Scenario:
    return parse_scenario(read_json(path, "scenario"))


@dataclass(frozen=True)
class ExperimentPlan:
    scenario: Scenario
    sweep_kind: str  # "client_count" | "model"
    sweep_values: tuple
    policies: tuple[str, ...]
    seeds: tuple[int, ...]
    channel: str
    source: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        if not self.seeds or len(set(self.seeds)) != len(self.seeds):
            raise ScenarioError("seeds must be non-empty and distinct", "plan.seeds")
        if not self.sweep_values:
            raise ScenarioError("sweep values must be non-empty", "plan.sweep")

    @property
    def plan_hash(self) -> str:
        return canonical_hash(self.source)


def parse_plan(doc: dict) -> ExperimentPlan:
    if not isinstance(doc, dict):
        raise ScenarioError("plan must be a JSON object", "plan")
    check_format_version(doc, "plan")
    scenario = parse_scenario(_req(doc, "scenario", "plan"))
    if scenario.constellation is None or not scenario.sites or scenario.task is None:
        raise ScenarioError("plan scenario needs constellation, sites and task", "plan.scenario")
    sweep = _req(doc, "sweep", "plan")
    if not isinstance(sweep, dict) or len(sweep) != 1:
        raise ScenarioError("expected exactly one of client_count or model", "plan.sweep")
    (kind, values), = sweep.items()
    if kind == "client_count":
        values = tuple(_num(v, "plan.sweep.client_count", int) for v in values)
        for v in values:
            if not 1 <= v <= len(scenario.task.client_sites):
                raise ScenarioError(f"client count {v} outside 1..{len(scenario.task.client_sites)}",
                                    "plan.sweep.client_count")
    elif kind == "model":
        values = tuple(parse_model(v, "plan.sweep.model").name for v in values)
    else:
        raise ScenarioError(f"unknown sweep kind {kind!r}", "plan.sweep")
    policies = tuple(doc.get("policies", [Policy.ON_DEMAND.value, Policy.STATISTICAL_MULTIPLEXING.value]))
    for p in policies:
        if p not in {q.value for q in Policy}:
            raise ScenarioError(f"unknown policy {p!r}", "plan.policies")
    seeds = tuple(_num(s, "plan.seeds", int) for s in _req(doc, "seeds", "plan"))
    channel = doc.get("channel", scenario.scheduling.channel)
    if channel not in {c.value for c in ChannelModel}:
        raise ScenarioError(f"unknown channel mode {channel!r}", "plan.channel")
    return ExperimentPlan(scenario, kind, values, policies, seeds, channel, source=doc)


def load_plan(path) -> ExperimentPlan:
    return parse_plan(read_json(path, "plan"))


def bundled_plan_path(name: str) -> Path:
    """Path of a plan shipped with the package, e.g. ``fig5`` or ``fig5.json``."""
    if not name.endswith(".json"):
        name += ".json"
    return Path(str(resources.files("fedsched") / "data" / name))


def load_bundled_plan(name: str) -> ExperimentPlan:
    return load_plan(bundled_plan_path(name))
