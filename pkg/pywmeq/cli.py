# SPDX-License-Identifier: MIT
"""
Command-line front end.

Every subcommand reads an experiment configuration (a single JSON document),
runs one task and writes a schema-versioned ``result.json`` and, optionally,
a ``table.csv`` of (pairId, statKind, n, num, den, approx) rows.

Exit codes: 0 success, 1 failed verification, 2 configuration error,
3 violated internal invariant.
"""

import argparse
from concurrent.futures import ProcessPoolExecutor
import csv
from dataclasses import dataclass, field, replace
from datetime import datetime
from enum_tools.documentation import document_enum
from fractions import Fraction
import json
import logging
from pathlib import Path
import sys
from typing import Any, Dict, List, Optional, Sequence, Tuple

import pytz

try:  # Python >= 3.11
    from enum import StrEnum
except ImportError:
    from strenum import StrEnum  # type: ignore

if sys.version_info >= (3, 11):
    from typing import Self
else:
    from typing_extensions import Self

from . import VERSION, classify, orbitstats, spaces, systems, verify
from .types import (
    IntegerSetView,
    ObservableMode,
    ProbeConfig,
    ProbeVerdict,
    SegmentStat,
    SensitivityMode,
    StatKind,
    StatePoint,
    SystemDescriptor,
    TupleKind,
    VerifyLevel,
    point_from_payload,
)
from .utils import (
    ConfigError,
    InvariantError,
    approx,
    content_hash,
    derive_seed,
    fraction_payload,
    to_fraction,
    unroll_payload,
)

logger = logging.getLogger(__name__)

#: Version of the ``result.json`` layout.
SCHEMA_VERSION = 1

#: Column order of ``table.csv``.
CSV_COLUMNS = ("pairId", "statKind", "n", "num", "den", "approx")


@document_enum
class Task(StrEnum):
    """Enum for experiment tasks (one per subcommand)."""

    METRIC = "metric"  # doc: Statistic tables over pairs and an n-schedule.
    DENSITY = "density"  # doc: Upper and lower densities of an integer set.
    PROBE = "probe"  # doc: A single classification probe.
    TUPLE_SEARCH = "tuple-search"  # doc: Sensitive tuple search.
    DICHOTOMY = "dichotomy"  # doc: System-level dichotomy report.
    SWEEP = "sweep"  # doc: Dichotomy reports over a grid of systems.
    VERIFY = "verify"  # doc: Built-in invariant suites.


#: One-line help of each subcommand.
TASK_HELP = {
    Task.METRIC: "Statistic tables over point pairs and an n-schedule.",
    Task.DENSITY: "Upper and lower densities of an integer set.",
    Task.PROBE: "Run one classification probe.",
    Task.TUPLE_SEARCH: "Search for mean and density sensitive tuples.",
    Task.DICHOTOMY: "System-level equicontinuity or sensitivity report.",
    Task.SWEEP: "Dichotomy reports over a grid of systems.",
    Task.VERIFY: "Run the built-in invariant suites.",
}


@document_enum
class ProbeKind(StrEnum):
    """Enum for the probes available to the ``probe`` task."""

    WEAK_MEAN_POINT = "weakMeanPoint"
    IN_MEAN_POINT = "inMeanPoint"
    PAIR_IN_BALL = "pairInBall"
    PAIR_IN_BALL_STAR = "pairInBallStar"
    DENSITY_T = "densityT"
    OBSERVABLE = "observable"
    SENSITIVITY = "sensitivity"
    AGREEMENT = "agreement"
    DENSITY_EQUIVALENCE = "densityEquivalence"
    DENSITY_SENSITIVITY = "densitySensitivity"


@document_enum
class OutputFormat(StrEnum):
    """Enum for output file selections."""

    JSON = "json"
    CSV = "csv"
    BOTH = "both"


@dataclass
class ExperimentConfig:
    """An experiment: a system, a task and the task's parameters."""

    #: System under study.
    system: SystemDescriptor
    #: Task to run.
    task: Task
    #: Seed of every sampled point.
    seed: int = 0
    #: n-schedule; None keeps the probe configuration's (or the default) schedule.
    schedule: Optional[List[int]] = None
    #: Tail window of the limit estimates; None keeps the probe configuration's.
    tail_window: Optional[int] = None
    #: Convergence tolerance; None keeps the probe configuration's.
    tolerance: Optional[Fraction] = None
    #: Statistics of the metric task: kind strings or ``{"kind", "epsilon", "observable"}``.
    stats: List[Any] = field(default_factory=lambda: ["weakMean", "besicovitch"])
    #: Point pairs of the metric task; empty means one sampled pair.
    pairs: List[Any] = field(default_factory=list)
    #: Probe configuration.
    probe: ProbeConfig = field(default_factory=ProbeConfig)
    #: Probe run by the probe task.
    probe_kind: ProbeKind = ProbeKind.WEAK_MEAN_POINT
    #: Probed point; None means a sampled point.
    point: Optional[Any] = None
    #: t of the density-t probe.
    t: Fraction = Fraction(1, 2)
    #: Epsilon of the pair-in-ball probes.
    epsilon: Fraction = Fraction(1, 10)
    #: Sensitivity or observable mode.
    mode: Optional[str] = None
    #: Observable of the observable probe (registry name or payload).
    observable: Any = "smoothed_indicator"
    #: Tuple notion of the tuple search.
    tuple_kind: TupleKind = TupleKind.MEAN
    #: Integer set of the density task.
    density: Dict[str, Any] = field(default_factory=lambda: {"set": "even", "horizon": 4096})
    #: Systems of the sweep.
    sweep_systems: List[SystemDescriptor] = field(default_factory=list)
    #: Number of golden-angle convergent rotations added to the sweep.
    sweep_convergents: int = 0
    #: Level of the verify task.
    level: VerifyLevel = VerifyLevel.QUICK
    #: Sweep worker processes.
    threads: int = 1
    #: Output directory; None prints the record to stdout.
    out: Optional[str] = None
    #: Which files to write.
    format: OutputFormat = OutputFormat.JSON

    def __post_init__(self):
        if self.threads < 1:
            raise ValueError("threads must be at least 1")
        if self.sweep_convergents < 0:
            raise ValueError("sweep_convergents must be non-negative")

    @property
    def probe_config(self) -> ProbeConfig:
        """The probe configuration with the experiment-level overrides applied."""
        overrides: Dict[str, Any] = {"seed": self.seed}
        if self.schedule is not None:
            overrides["schedule"] = list(self.schedule)
        if self.tail_window is not None:
            overrides["tail_window"] = self.tail_window
        if self.tolerance is not None:
            overrides["tolerance"] = self.tolerance
        return replace(self.probe, **overrides)

    def to_payload(self) -> dict:
        """Payload covered by the config hash (output options excluded)."""
        return {
            "system": self.system.to_payload(),
            "task": str(self.task),
            "seed": self.seed,
            "probe": self.probe_config.to_payload(),
            "stats": self.stats,
            "pairs": self.pairs,
            "probe_kind": str(self.probe_kind),
            "point": self.point,
            "t": fraction_payload(self.t),
            "epsilon": fraction_payload(self.epsilon),
            "mode": self.mode,
            "observable": self.observable,
            "tuple_kind": str(self.tuple_kind),
            "density": self.density,
            "sweep_systems": [s.to_payload() for s in self.sweep_systems],
            "sweep_convergents": self.sweep_convergents,
            "level": str(self.level),
        }

    @classmethod
    def from_payload(cls, payload: dict) -> Self:
        """
        Convert a JSON payload (provided as a dict) into an ExperimentConfig object.

        :param payload: Dictionary containing the JSON payload.
        :returns: The resulting ExperimentConfig object.
        """
        return unroll_payload(cls, payload)


@dataclass
class ResultRecord:
    """Output of one experiment."""

    #: Content hash of the configuration.
    config_hash: str
    #: Task that produced the record.
    task: Task
    #: Task results.
    payload: Any
    #: Schedule, seed and truncation bounds used.
    provenance: Dict[str, Any]
    #: Plot-ready table rows.
    rows: List[Dict[str, Any]] = field(default_factory=list)
    #: Whether the task itself succeeded (False only for failed verification).
    ok: bool = True
    #: Creation time; not covered by any hash.
    timestamp: datetime = field(default_factory=lambda: datetime.now(pytz.utc))

    def body(self) -> dict:
        """The deterministic part of the record."""
        return {
            "schema_version": SCHEMA_VERSION,
            "tool": "pywmeq",
            "version": VERSION,
            "config_hash": self.config_hash,
            "task": str(self.task),
            "ok": self.ok,
            "provenance": self.provenance,
            "payload": self.payload,
        }

    @property
    def record_hash(self) -> str:  # noqa: D102
        return content_hash(self.body())

    def to_payload(self) -> dict:  # noqa: D102
        return {
            "record": self.body(),
            "record_hash": self.record_hash,
            "timestamp": self.timestamp.isoformat(),
        }


#
# Configuration loading
#


def parse_config(payload: Any, task: Optional[Task] = None) -> ExperimentConfig:
    """
    Validate a configuration payload.

    :param payload: Decoded JSON document.
    :param task: Task implied by the subcommand; filled in when missing.
    :raises ConfigError: On any validation failure.
    """
    if not isinstance(payload, dict):
        raise ConfigError("Configuration must be a JSON object")
    payload = dict(payload)
    if task is not None:
        payload.setdefault("task", str(task))
        if payload["task"] != str(task):
            raise ConfigError(f"task: configuration is for {payload['task']!r}, not {str(task)!r}")
    try:
        return ExperimentConfig.from_payload(payload)
    except (TypeError, ValueError) as e:
        raise ConfigError(str(e)) from e


def load_config(path: Path, task: Optional[Task] = None) -> ExperimentConfig:
    """
    Read and validate a configuration file.

    :raises ConfigError: On unreadable files, JSON syntax errors (reported as
                         ``path:line:column``) and validation failures.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"{path}: {e.strerror or e}") from e
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from e
    try:
        return parse_config(payload, task)
    except ConfigError as e:
        raise ConfigError(f"{path}: {e}") from e


def _point(system: SystemDescriptor, payload: Any, what: str) -> StatePoint:
    try:
        p = point_from_payload(payload)
        spaces.check_point(system.space, p)
    except (TypeError, ValueError, KeyError) as e:
        raise ConfigError(f"{what}: {e}") from e
    return p


def _sampled_point(config: ExperimentConfig, *salt) -> StatePoint:
    strategy = config.probe.center_strategy or systems.default_samplers(config.system)[0]
    return systems.sample_state(config.system, strategy, derive_seed(config.seed, *salt))


def _pairs(config: ExperimentConfig) -> List[Tuple[StatePoint, StatePoint]]:
    if not config.pairs:
        return [(_sampled_point(config, "pair", 0), _sampled_point(config, "pair", 1))]
    ret = []
    for i, pair in enumerate(config.pairs):
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise ConfigError(f"pairs[{i}]: expected a list of two points")
        ret.append(
            (
                _point(config.system, pair[0], f"pairs[{i}][0]"),
                _point(config.system, pair[1], f"pairs[{i}][1]"),
            )
        )
    return ret


def _stat(config: ExperimentConfig, payload: Any, index: int) -> SegmentStat:
    try:
        if isinstance(payload, str):
            return SegmentStat(StatKind(payload))
        kind = StatKind(payload["kind"])
        epsilon = to_fraction(payload["epsilon"]) if "epsilon" in payload else None
        f = (
            orbitstats.make_observable(config.system.space, payload["observable"])
            if "observable" in payload
            else None
        )
        return SegmentStat(kind, epsilon, f)
    except (TypeError, ValueError, KeyError) as e:
        raise ConfigError(f"stats[{index}]: {e}") from e


def _schedule(config: ExperimentConfig) -> List[int]:
    return list(config.schedule) if config.schedule is not None else list(config.probe.schedule)


def _provenance(config: ExperimentConfig, schedule: Optional[Sequence[int]] = None) -> dict:
    probe = config.probe_config
    return {
        "seed": config.seed,
        "schedule": list(schedule if schedule is not None else probe.schedule),
        "tail_window": probe.tail_window,
        "tolerance": fraction_payload(probe.tolerance),
        "truncation_bound": fraction_payload(config.system.space.truncation_bound),
    }


def _row(pair_id: str, stat: str, n: int, value: Fraction) -> dict:
    return {
        "pairId": pair_id,
        "statKind": stat,
        "n": n,
        "num": str(value.numerator),
        "den": str(value.denominator),
        "approx": approx(value),
    }


def _witness_rows(verdict: ProbeVerdict, prefix: str = "w") -> List[dict]:
    return [
        _row(f"{prefix}{i}", w.statistic, w.n, w.value) for i, w in enumerate(verdict.witnesses)
    ]


def _record(config: ExperimentConfig, payload: Any, rows: List[dict], **kwargs) -> ResultRecord:
    provenance = kwargs.pop("provenance", None) or _provenance(config)
    return ResultRecord(
        content_hash(config.to_payload()), config.task, payload, provenance, rows, **kwargs
    )


#
# Task drivers
#


def run_metric(config: ExperimentConfig) -> ResultRecord:
    """Evaluate the configured statistics over the pairs and the n-schedule."""
    schedule = _schedule(config)
    probe = config.probe_config
    stats = [_stat(config, s, i) for i, s in enumerate(config.stats)]
    pairs = _pairs(config)
    results = []
    rows = []
    for i, (x, y) in enumerate(pairs):
        seg_x = systems.orbit_segment(config.system, x, schedule[-1])
        seg_y = systems.orbit_segment(config.system, y, schedule[-1])
        entries = []
        for stat in stats:
            estimate = orbitstats.estimate_limit(
                lambda n: orbitstats.segment_stat(seg_x.prefix(n), seg_y.prefix(n), stat),
                schedule,
                probe.tail_window,
                probe.tolerance,
            )
            entries.append({"stat": stat.to_payload(), "estimate": estimate.to_payload()})
            rows += [_row(f"p{i}", stat.label, n, v) for n, v in estimate.samples]
        results.append(
            {"pairId": f"p{i}", "x": x.to_payload(), "y": y.to_payload(), "stats": entries}
        )
    return _record(config, {"pairs": results}, rows, provenance=_provenance(config, schedule))


def _integer_set(described: Dict[str, Any]) -> Tuple[str, IntegerSetView]:
    try:
        horizon = int(described.get("horizon", 4096))
        name = described.get("set", "even")
        if name == "even":
            view = orbitstats.even_numbers(horizon)
        elif name == "four_blocks":
            view = orbitstats.four_blocks(horizon)
        elif name == "intervals":
            view = IntegerSetView.from_intervals([tuple(iv) for iv in described["intervals"]], horizon)
        elif name == "indices":
            view = IntegerSetView.from_indices(described["indices"], horizon)
        else:
            raise ValueError(f"unknown set {name!r}")
        if described.get("complement", False):
            view = view.complement()
    except (TypeError, ValueError, KeyError) as e:
        raise ConfigError(f"density: {e}") from e
    return name, view


def run_density(config: ExperimentConfig) -> ResultRecord:
    """Upper and lower densities of the configured integer set."""
    name, view = _integer_set(config.density)
    schedule = _schedule(config)
    probe = config.probe_config
    try:
        estimate = orbitstats.density_estimate(view, schedule, probe.tail_window, probe.tolerance)
    except ValueError as e:
        raise ConfigError(f"density: {e}") from e
    payload = {
        "set": name,
        "horizon": view.horizon,
        "complement": view.complemented,
        "estimate": estimate.to_payload(),
        "upper_density": fraction_payload(estimate.limsup_estimate),
        "lower_density": fraction_payload(estimate.liminf_estimate),
    }
    rows = [_row(name, "density", n, v) for n, v in estimate.samples]
    return _record(config, payload, rows, provenance=_provenance(config, schedule))


def _mode(enum_cls, value: Optional[str], default):
    if value is None:
        return default
    try:
        return enum_cls(value)
    except ValueError as e:
        raise ConfigError(f"mode: {e}") from e


def run_probe(config: ExperimentConfig) -> ResultRecord:
    """Run the configured classification probe."""
    system = config.system
    probe = config.probe_config
    kind = config.probe_kind
    x = (
        _point(system, config.point, "point")
        if config.point is not None
        else _sampled_point(config, "point")
    )

    if kind == ProbeKind.WEAK_MEAN_POINT:
        result = classify.probe_weak_mean_equicontinuous_point(system, x, probe)
    elif kind == ProbeKind.IN_MEAN_POINT:
        result = classify.probe_equicontinuous_in_mean_point(system, x, probe)
    elif kind in (ProbeKind.PAIR_IN_BALL, ProbeKind.PAIR_IN_BALL_STAR):
        result = classify.probe_pair_in_ball(
            system, x, config.epsilon, probe, star=kind == ProbeKind.PAIR_IN_BALL_STAR
        )
    elif kind == ProbeKind.DENSITY_T:
        result = classify.probe_density_t_equicontinuity(system, x, config.t, probe)
    elif kind == ProbeKind.OBSERVABLE:
        try:
            f = orbitstats.make_observable(system.space, config.observable)
        except (TypeError, ValueError, KeyError) as e:
            raise ConfigError(f"observable: {e}") from e
        mode = _mode(ObservableMode, config.mode, ObservableMode.MEAN)
        result = classify.probe_observable_equicontinuity(system, x, f, probe, mode)
    elif kind == ProbeKind.SENSITIVITY:
        mode = _mode(SensitivityMode, config.mode, SensitivityMode.STRONG_MEAN)
        result = classify.estimate_sensitivity_constant(system, probe, mode)
    elif kind == ProbeKind.AGREEMENT:
        result = classify.check_mean_vs_in_mean_agreement(system, probe)
    elif kind == ProbeKind.DENSITY_EQUIVALENCE:
        result = classify.check_density_equivalence(system, probe)
    else:
        result = classify.probe_density_sensitivity(system, probe)

    rows: List[dict] = []
    if isinstance(result, ProbeVerdict):
        rows = _witness_rows(result)
    elif kind == ProbeKind.AGREEMENT:
        for name in ("strong_mean", "strong_in_mean", "mean_sensitive", "sensitive_in_mean"):
            rows += _witness_rows(getattr(result, name), f"{name}:")
    return _record(config, {"probe": str(kind), "result": result.to_payload()}, rows)


def run_tuple_search(config: ExperimentConfig) -> ResultRecord:
    """Run the sensitive tuple search."""
    try:
        candidates = classify.search_sensitive_tuples(
            config.system, config.probe_config, config.tuple_kind
        )
    except ValueError as e:
        raise ConfigError(f"anchors: {e}") from e
    rows = [
        _row(f"a{i}/{j}", str(c.kind), w.n, w.frequency)
        for i, c in enumerate(candidates)
        for j, w in enumerate(c.witnesses)
    ]
    payload = {"kind": str(config.tuple_kind), "candidates": [c.to_payload() for c in candidates]}
    return _record(config, payload, rows)


def run_dichotomy(config: ExperimentConfig) -> ResultRecord:
    """Run the dichotomy report."""
    report = classify.dichotomy_report(config.system, config.probe_config)
    rows = []
    for name, verdict in report.sensitivity.items():
        rows += _witness_rows(verdict, f"{name}:")
    return _record(config, report.to_payload(), rows)


def _sweep_row(system_payload: dict, probe_payload: dict) -> dict:
    """Worker: one dichotomy row. Takes and returns plain payloads only."""
    system = SystemDescriptor.from_payload(system_payload)
    report = classify.dichotomy_report(system, ProbeConfig.from_payload(probe_payload))
    constant = report.sensitivity[str(SensitivityMode.STRONG_MEAN)].achieved_constant
    return {
        "system": system_payload,
        "side": str(report.side),
        "mean_side": str(report.mean_side),
        "in_mean_side": str(report.in_mean_side),
        "achieved_constant": fraction_payload(constant) if constant is not None else None,
    }


def sweep_systems(config: ExperimentConfig) -> List[SystemDescriptor]:
    """Configured sweep systems, then rotations by the golden-angle convergents."""
    ret = list(config.sweep_systems)
    if config.sweep_convergents:
        depth = config.system.space.truncation_depth
        angles = systems.convergents(systems.continued_fraction(systems.golden_angle()))
        angles = [a for a in angles if a.denominator > 1][: config.sweep_convergents]
        ret += [SystemDescriptor.rotation(a, depth) for a in angles]
    return ret


def run_sweep(config: ExperimentConfig) -> ResultRecord:
    """
    Dichotomy reports over the sweep systems.

    Rows are merged in configuration order whatever the completion order.
    """
    grid = sweep_systems(config)
    probe_payload = config.probe_config.to_payload()
    payloads = [s.to_payload() for s in grid]
    if config.threads > 1 and len(grid) > 1:
        with ProcessPoolExecutor(max_workers=config.threads) as executor:
            rows = list(executor.map(_sweep_row, payloads, [probe_payload] * len(payloads)))
    else:
        rows = [_sweep_row(p, probe_payload) for p in payloads]
    n = config.probe_config.schedule[-1]
    table = [
        _row(f"s{i}", "achievedConstant", n, to_fraction(r["achieved_constant"]))
        for i, r in enumerate(rows)
        if r["achieved_constant"] is not None
    ]
    return _record(config, {"rows": rows}, table)


def run_verify(config: ExperimentConfig) -> ResultRecord:
    """Run the built-in invariant suites."""
    report = verify.run_verify(config.level, config.seed)
    rows = [
        _row(s.name, "failures", s.checks, Fraction(len(s.failures))) for s in report.suites
    ]
    return _record(config, report.to_payload(), rows, ok=report.passed)


#: Task drivers.
DRIVERS = {
    Task.METRIC: run_metric,
    Task.DENSITY: run_density,
    Task.PROBE: run_probe,
    Task.TUPLE_SEARCH: run_tuple_search,
    Task.DICHOTOMY: run_dichotomy,
    Task.SWEEP: run_sweep,
    Task.VERIFY: run_verify,
}


def run(config: ExperimentConfig) -> ResultRecord:
    """Run the configured task."""
    logger.info("Running %s on %s", config.task, config.system.kind)
    return DRIVERS[config.task](config)


#
# Output
#


def write_record(record: ResultRecord, out: Path, fmt: OutputFormat) -> List[Path]:
    """
    Write ``result.json`` and/or ``table.csv`` into ``out``.

    :returns: The written paths.
    """
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt in (OutputFormat.JSON, OutputFormat.BOTH):
        path = out / "result.json"
        path.write_text(json.dumps(record.to_payload(), indent=2, sort_keys=True) + "\n")
        written.append(path)
    if fmt in (OutputFormat.CSV, OutputFormat.BOTH):
        path = out / "table.csv"
        with path.open("w", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=CSV_COLUMNS)
            writer.writeheader()
            writer.writerows(record.rows)
        written.append(path)
    return written


def _schedule_arg(value: str) -> List[int]:
    try:
        return [int(v) for v in value.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"invalid schedule {value!r}") from e


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with one subcommand per task."""
    parser = argparse.ArgumentParser(
        prog="pywmeq",
        description="Weak-mean pseudometric statistics and equicontinuity probes.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)
    for task in Task:
        p = sub.add_parser(str(task), help=TASK_HELP[task])
        p.add_argument(
            "--config",
            type=Path,
            required=task != Task.VERIFY,
            help="Path to the experiment configuration (JSON).",
        )
        p.add_argument("--seed", type=int, default=None, help="Override the configured seed.")
        p.add_argument("--out", type=Path, default=None, help="Output directory.")
        p.add_argument(
            "--format",
            choices=[str(f) for f in OutputFormat],
            default=None,
            help="Files to write (default: json).",
        )
        p.add_argument(
            "--schedule", type=_schedule_arg, default=None, help="Comma-separated n-schedule."
        )
        p.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug.")
        if task == Task.SWEEP:
            p.add_argument("--threads", type=int, default=None, help="Sweep worker processes.")
        if task == Task.VERIFY:
            p.add_argument(
                "--level", choices=[str(v) for v in VerifyLevel], default=None, help="Suite depth."
            )
    return parser


def _configure(args: argparse.Namespace) -> ExperimentConfig:
    task = Task(args.command)
    if args.config is not None:
        config = load_config(args.config, task)
    elif task == Task.VERIFY:
        config = ExperimentConfig(SystemDescriptor.rotation(Fraction(1, 2)), task)
    else:
        raise ConfigError("--config is required")

    overrides: Dict[str, Any] = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.schedule is not None:
        overrides["schedule"] = args.schedule
    if getattr(args, "threads", None) is not None:
        overrides["threads"] = args.threads
    if args.out is not None:
        overrides["out"] = str(args.out)
    if args.format is not None:
        overrides["format"] = OutputFormat(args.format)
    if getattr(args, "level", None) is not None:
        overrides["level"] = VerifyLevel(args.level)
    try:
        config = replace(config, **overrides)
        config.probe_config  # validates the schedule override
    except (TypeError, ValueError) as e:
        raise ConfigError(str(e)) from e
    return config


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Entry point of the ``pywmeq`` command.

    :returns: The exit code.
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=[logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)],
        format="%(levelname)s %(name)s: %(message)s",
    )

    try:
        config = _configure(args)
        record = run(config)
    except (ConfigError, ValueError, TypeError) as e:
        print(f"[error] {e}", file=sys.stderr)
        return 2
    except InvariantError as e:
        print(f"[invariant] {e}", file=sys.stderr)
        return 3

    if config.out is not None:
        for path in write_record(record, Path(config.out), config.format):
            print(f"Wrote {path}")
    else:
        print(json.dumps(record.to_payload(), indent=2, sort_keys=True))

    if not record.ok:
        print(f"[pywmeq {config.task}] FAIL", file=sys.stderr)
        return 1
    logger.info("Record %s", record.record_hash)
    return 0

