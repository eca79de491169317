# SPDX-License-Identifier: MIT
"""
Finite-scale probes for equicontinuity points, sensitivity constants,
sensitive tuples and the equicontinuity/sensitivity dichotomy.

Every "for all eps there is delta" statement is evaluated on the finite
grids of a :class:`ProbeConfig`. Balls are sampled, not enumerated, so a
passing probe is reported as consistent with equicontinuity, never as a
proof. Limit estimates that did not converge make a probe inconclusive.
"""

from dataclasses import dataclass
from fractions import Fraction
import logging
from typing import Callable, Dict, Hashable, List, Optional, Sequence, Tuple

from . import matching, orbitstats, spaces, systems
from .types import (
    AgreementReport,
    DensityEquivalenceReport,
    DichotomyReport,
    DichotomySide,
    LimitEstimate,
    Observable,
    ObservableMode,
    OrbitSegment,
    ProbeConfig,
    ProbeVerdict,
    SamplerStrategy,
    SegmentStat,
    SensitivityMode,
    StatKind,
    StatePoint,
    SystemDescriptor,
    TupleCandidate,
    TupleKind,
    TupleWitness,
    Verdict,
    Witness,
)
from .utils import InvariantError, RationalLike, derive_seed, fraction_payload, to_fraction

logger = logging.getLogger(__name__)

ZERO = Fraction(0)

#: Readings of a limit estimate used by the probes.
LIMSUP = "limsup"
SUP = "sup"
LATE = "late"

Keyed = Tuple[Hashable, StatePoint]


@dataclass(frozen=True)
class _Reading:
    value: Fraction
    bound: Fraction
    n: int
    #: The value may be used to pass a probe.
    settled: bool
    #: The value may be used as a violation witness.
    witnessed: bool


def _read(estimate: LimitEstimate, reading: str, late_n: int) -> Optional[_Reading]:
    """Turn a limit estimate into the single value a probe compares."""
    if reading == LIMSUP:
        n, value = estimate.limsup_sample
        return _Reading(value, estimate.error_bound, n, estimate.converged, estimate.converged)
    if reading == SUP:
        n, value = estimate.sup_sample
        return _Reading(value, estimate.error_bound, n, estimate.converged, True)
    sample = estimate.late_sup_sample(late_n)
    if sample is None:
        return None
    return _Reading(sample[1], estimate.error_bound, sample[0], estimate.converged, True)


def _point_key(key: Hashable) -> str:
    return key if isinstance(key, str) else "/".join(str(k) for k in key)  # type: ignore


class _ProbeRun:
    """Orbit, sample and estimate cache shared by the probes of one configuration."""

    def __init__(self, system: SystemDescriptor, config: ProbeConfig):
        self.system = system
        self.config = config
        self.horizon = config.schedule[-1]
        center, balls = systems.default_samplers(system)
        self.center_strategy: SamplerStrategy = config.center_strategy or center
        self.ball_strategies: List[SamplerStrategy] = config.samplers or balls
        self._segments: Dict[Hashable, OrbitSegment] = {}
        self._estimates: Dict[Hashable, LimitEstimate] = {}
        self._balls: Dict[Hashable, List[Keyed]] = {}
        self._visits: Dict[Hashable, List[int]] = {}
        self._centers: Optional[List[Keyed]] = None

    def centers(self) -> List[Keyed]:
        if self._centers is None:
            self._centers = [
                (
                    ("c", i),
                    systems.sample_state(
                        self.system, self.center_strategy, derive_seed(self.config.seed, "center", i)
                    ),
                )
                for i in range(self.config.centers)
            ]
        return self._centers

    def ball(self, key: Hashable, center: StatePoint, radius: Fraction) -> List[Keyed]:
        """The sampled points of B(center, radius), round-robin over the ball strategies."""
        cache_key = (key, radius)
        if cache_key not in self._balls:
            points = []
            for i in range(self.config.samples_per_ball):
                strategy = self.ball_strategies[i % len(self.ball_strategies)]
                seed = derive_seed(self.config.seed, "ball", _point_key(key), str(radius), i)
                y = systems.sample_state_in_ball(self.system, center, radius, strategy, seed)
                points.append(((key, str(radius), i), y))
            self._balls[cache_key] = points
        return self._balls[cache_key]

    def segment(self, key: Hashable, point: StatePoint) -> OrbitSegment:
        if key not in self._segments:
            self._segments[key] = systems.orbit_segment(self.system, point, self.horizon)
        return self._segments[key]

    def estimate(self, x: Keyed, y: Keyed, stat: SegmentStat) -> LimitEstimate:
        cache_key = (x[0], y[0], stat.kind, stat.epsilon, id(stat.observable))
        if cache_key not in self._estimates:
            seg_x = self.segment(*x)
            seg_y = self.segment(*y)
            self._estimates[cache_key] = orbitstats.estimate_limit(
                lambda n: orbitstats.segment_stat(seg_x.prefix(n), seg_y.prefix(n), stat),
                self.config.schedule,
                self.config.tail_window,
                self.config.tolerance,
            )
        return self._estimates[cache_key]

    def read(self, x: Keyed, y: Keyed, stat: SegmentStat, reading: str) -> Optional[_Reading]:
        return _read(self.estimate(x, y, stat), reading, self.config.late_n)

    def visit_counts(
        self, point: Keyed, anchor: Keyed, epsilon: Fraction
    ) -> List[int]:
        """#{1 <= i <= n : d(T^i point, anchor) < epsilon} for each n of the schedule."""
        cache_key = (point[0], anchor[0], epsilon)
        if cache_key not in self._visits:
            space = self.system.space
            target = anchor[1]
            counts = []
            total = 0
            states = self.segment(*point).states
            schedule = iter(self.config.schedule)
            upcoming = next(schedule)
            for i, state in enumerate(states, start=1):
                if spaces._distance(space, state, target) < epsilon:
                    total += 1
                if i == upcoming:
                    counts.append(total)
                    upcoming = next(schedule, None)
            self._visits[cache_key] = counts
        return self._visits[cache_key]


def _cell_payload(epsilon: Fraction, delta: Fraction, **counts) -> dict:
    return {
        "epsilon": fraction_payload(epsilon),
        "delta": fraction_payload(delta),
        **counts,
    }


#
# Point probes
#


@dataclass(frozen=True)
class _Cell:
    """One epsilon of a point probe: a statistic and the limit it must stay below."""

    epsilon: Fraction
    stat: SegmentStat
    limit: Fraction
    #: Passing means value + bound <= limit rather than < limit.
    inclusive: bool = False

    def passes(self, r: _Reading) -> bool:
        total = r.value + r.bound
        return total <= self.limit if self.inclusive else total < self.limit

    def violated(self, r: _Reading) -> bool:
        return r.value - r.bound > self.limit


def _ball_pairs(
    run: _ProbeRun, key: Hashable, x: StatePoint, delta: Fraction, among_samples: bool
) -> List[Tuple[Keyed, Keyed]]:
    samples = run.ball(key, x, delta)
    if not among_samples:
        return [((key, x), y) for y in samples]
    points = [(key, x)] + samples
    return [(a, b) for i, a in enumerate(points) for b in points[i + 1 :]]


def _probe_point(
    run: _ProbeRun,
    probe: str,
    key: Hashable,
    x: StatePoint,
    cells: Sequence[_Cell],
    reading: str,
    among_samples: bool = False,
) -> ProbeVerdict:
    """
    Search the delta grid for every cell.

    A cell passes at delta when every sampled pair in B(x, delta) passes with
    a settled reading. A cell is violated when every delta of the grid has a
    witnessed pair above the limit.
    """
    spaces.check_point(run.system.space, x)
    config = run.config
    diagnostics: List[dict] = []
    witnesses: List[Witness] = []
    violated: Optional[_Cell] = None
    all_pass = True

    for cell in cells:
        if cell.inclusive and cell.limit >= 1 and cell.stat.kind in (
            StatKind.EXCEEDANCE,
            StatKind.BESICOVITCH_EXCEEDANCE,
        ):
            diagnostics.append({"epsilon": fraction_payload(cell.epsilon), "trivial": True})
            continue

        passing = None
        cell_witnesses = []
        for delta in config.delta_grid:
            pairs = _ball_pairs(run, key, x, delta, among_samples)
            n_pass = n_violate = n_open = 0
            best: Optional[Tuple[Keyed, Keyed, _Reading]] = None
            for a, b in pairs:
                r = run.read(a, b, cell.stat, reading)
                if r is not None and r.settled and cell.passes(r):
                    n_pass += 1
                elif r is not None and r.witnessed and cell.violated(r):
                    n_violate += 1
                    if best is None or r.value - r.bound > best[2].value - best[2].bound:
                        best = (a, b, r)
                else:
                    n_open += 1
            diagnostics.append(
                _cell_payload(
                    cell.epsilon,
                    delta,
                    statistic=cell.stat.label,
                    passing=n_pass,
                    violating=n_violate,
                    open=n_open,
                )
            )
            logger.debug(
                "%s eps=%s delta=%s: %d pass, %d violate, %d open",
                probe,
                cell.epsilon,
                delta,
                n_pass,
                n_violate,
                n_open,
            )
            if pairs and n_pass == len(pairs):
                passing = delta
                break
            if best is not None:
                a, b, r = best
                cell_witnesses.append(
                    Witness(a[1], b[1], r.n, r.value, r.bound, cell.stat.label, delta)
                )

        if passing is None:
            all_pass = False
            if violated is None and len(cell_witnesses) == len(config.delta_grid):
                violated = cell
                witnesses = cell_witnesses

    if violated is not None:
        verdict = ProbeVerdict(
            probe, Verdict.SENSITIVE, witnesses, violated.limit, diagnostics, config
        )
    elif all_pass:
        verdict = ProbeVerdict(probe, Verdict.EQUICONTINUOUS, diagnostics=diagnostics, config=config)
    else:
        verdict = ProbeVerdict(probe, Verdict.INCONCLUSIVE, diagnostics=diagnostics, config=config)
    logger.info("%s: %s", probe, verdict.verdict)
    return verdict


def _weak_mean_cells(config: ProbeConfig) -> List[_Cell]:
    stat = SegmentStat(StatKind.WEAK_MEAN)
    return [_Cell(eps, stat, eps) for eps in config.epsilon_grid]


def probe_weak_mean_equicontinuous_point(
    system: SystemDescriptor, x: StatePoint, config: Optional[ProbeConfig] = None
) -> ProbeVerdict:
    """
    Probe whether x is a weakly mean equicontinuous point.

    For each eps of the grid, look for a delta such that every sampled y in
    B(x, delta) has a converged limsup estimate of F_n(x, y) below eps.

    :param system: System to probe.
    :param x: Candidate point.
    :param config: Probe configuration (defaults when omitted).
    :returns: The verdict with per-cell diagnostics.
    """
    run = _ProbeRun(system, config or ProbeConfig())
    return _probe_point(run, "weakMeanPoint", "x", x, _weak_mean_cells(run.config), LIMSUP)


def probe_equicontinuous_in_mean_point(
    system: SystemDescriptor, x: StatePoint, config: Optional[ProbeConfig] = None
) -> ProbeVerdict:
    """
    Probe whether x is a weakly equicontinuous in the mean point.

    Same as :func:`probe_weak_mean_equicontinuous_point`, with the maximum of
    F_n over the whole schedule in place of the limsup estimate.
    """
    run = _ProbeRun(system, config or ProbeConfig())
    return _probe_point(run, "inMeanPoint", "x", x, _weak_mean_cells(run.config), SUP)


def probe_pair_in_ball(
    system: SystemDescriptor,
    x: StatePoint,
    epsilon: RationalLike,
    config: Optional[ProbeConfig] = None,
    star: bool = False,
) -> ProbeVerdict:
    """
    Probe membership of x in the set of points with a ball where all pairs stay eps-close.

    Pairs y, z are both drawn from B(x, delta), x included. Without ``star``
    the pairs must have limsup F_n(y, z) < eps; with ``star`` the maximum of
    F_n over the schedule must.
    """
    run = _ProbeRun(system, config or ProbeConfig())
    eps = to_fraction(epsilon)
    cells = [_Cell(eps, SegmentStat(StatKind.WEAK_MEAN), eps)]
    probe = "pairInBallStar" if star else "pairInBall"
    return _probe_point(run, probe, "x", x, cells, SUP if star else LIMSUP, among_samples=True)


def _density_cells(config: ProbeConfig, t: Fraction) -> List[_Cell]:
    limit = 1 - t + config.tolerance
    return [
        _Cell(eps, SegmentStat(StatKind.EXCEEDANCE, eps), limit, inclusive=True)
        for eps in config.epsilon_grid
    ]


def probe_density_t_equicontinuity(
    system: SystemDescriptor,
    x: StatePoint,
    t: RationalLike,
    config: Optional[ProbeConfig] = None,
) -> ProbeVerdict:
    """
    Probe weak density-t-equicontinuity at x.

    For each eps, look for a delta such that every sampled y in B(x, delta)
    has a limsup estimate of the eps-exceedance share at most ``1 - t + tolerance``.

    :raises ValueError: If t is outside [0, 1].
    """
    t = to_fraction(t)
    if not 0 <= t <= 1:
        raise ValueError(f"t must lie in [0, 1], got {t}")
    run = _ProbeRun(system, config or ProbeConfig())
    return _probe_point(run, f"densityT({t})", "x", x, _density_cells(run.config, t), LIMSUP)


def _check_contraction(run: _ProbeRun, key: Hashable, x: StatePoint, f: Observable) -> dict:
    """Check d_f^n <= L * F_n on every sampled pair and schedule entry."""
    weak = SegmentStat(StatKind.WEAK_MEAN)
    stat = SegmentStat(StatKind.OBSERVABLE, observable=f)
    checked = 0
    for delta in run.config.delta_grid:
        for a, b in _ball_pairs(run, key, x, delta, False):
            weak_samples = run.estimate(a, b, weak).samples
            f_samples = run.estimate(a, b, stat).samples
            for (n, fv), (_, wv) in zip(f_samples, weak_samples):
                if fv > f.lipschitz * wv:  # type: ignore
                    raise InvariantError(
                        f"Observable {f.name} exceeds {f.lipschitz} * F_n at n = {n}: {fv} > {wv}"
                    )
                checked += 1
    return {"contraction": {"lipschitz": fraction_payload(f.lipschitz), "checked": checked}}  # type: ignore


def _observable_verdict(
    run: _ProbeRun, key: Hashable, x: StatePoint, f: Observable, mode: ObservableMode
) -> ProbeVerdict:
    stat = SegmentStat(StatKind.OBSERVABLE, observable=f)
    cells = [_Cell(eps, stat, eps) for eps in run.config.epsilon_grid]
    reading = LIMSUP if mode == ObservableMode.MEAN else SUP
    return _probe_point(run, f"observable({f.name}, {mode})", key, x, cells, reading)


def _cross_check(run: _ProbeRun, key: Hashable, x: StatePoint, mode: ObservableMode) -> dict:
    """Every Lipschitz observable must pass at a weakly mean equicontinuous point."""
    reading = LIMSUP if mode == ObservableMode.MEAN else SUP
    weak = _probe_point(run, "weakMeanPoint", key, x, _weak_mean_cells(run.config), reading)
    observables: Dict[str, str] = {}
    if weak.verdict == Verdict.EQUICONTINUOUS:
        for g in orbitstats.default_observables(run.system.space):
            if g.lipschitz is not None:
                observables[g.name] = str(_observable_verdict(run, key, x, g, mode).verdict)
    consistent = Verdict.SENSITIVE not in observables.values()
    if not consistent:
        logger.warning("Observable sensitive at a weakly mean equicontinuous point: %s", observables)
    return {
        "crossCheck": {
            "weakMean": str(weak.verdict),
            "observables": observables,
            "consistent": consistent,
        }
    }


def probe_observable_equicontinuity(
    system: SystemDescriptor,
    x: StatePoint,
    f: Observable,
    config: Optional[ProbeConfig] = None,
    mode: ObservableMode = ObservableMode.MEAN,
) -> ProbeVerdict:
    """
    Probe whether x is an f-weakly mean (or in the mean) equicontinuity point.

    The probe uses the observable statistic d_f^n. It then probes x for weak
    mean equicontinuity with the same reading; when that passes, every default
    observable with a Lipschitz bound is probed too, and the outcome is
    recorded as a ``crossCheck`` diagnostic whose ``consistent`` flag is false
    if any of them is sensitive. For f with a declared Lipschitz bound L the
    probe also checks ``d_f^n <= L * F_n`` on every sampled pair.

    :raises InvariantError: If the contraction fails.
    """
    run = _ProbeRun(system, config or ProbeConfig())
    verdict = _observable_verdict(run, "x", x, f, ObservableMode(mode))
    verdict.diagnostics.append(_cross_check(run, "x", x, ObservableMode(mode)))
    if f.lipschitz is not None:
        verdict.diagnostics.append(_check_contraction(run, "x", x, f))
    return verdict


#
# Sensitivity searches
#


#: Statistic and reading for each sensitivity mode.
SENSITIVITY_MODES: Dict[SensitivityMode, Tuple[StatKind, str]] = {
    SensitivityMode.STRONG_MEAN: (StatKind.WEAK_MEAN, LIMSUP),
    SensitivityMode.STRONG_IN_MEAN: (StatKind.WEAK_MEAN, LATE),
    SensitivityMode.MEAN_SENSITIVE: (StatKind.BESICOVITCH, LIMSUP),
    SensitivityMode.SENSITIVE_IN_MEAN: (StatKind.BESICOVITCH, LATE),
}


def _best_in_ball(
    run: _ProbeRun, key: Hashable, center: StatePoint, radius: Fraction, stat: SegmentStat, reading: str
) -> Tuple[Optional[Tuple[Keyed, _Reading]], bool]:
    """
    Best witnessed pair (center, y) of a ball, and whether the whole ball is settled within tolerance.
    """
    best = None
    quiet = True
    for y in run.ball(key, center, radius):
        r = run.read((key, center), y, stat, reading)
        if r is None:
            quiet = False
            continue
        if not (r.settled and r.value + r.bound <= run.config.tolerance):
            quiet = False
        if r.witnessed and (best is None or r.value - r.bound > best[1].value - best[1].bound):
            best = (y, r)
    return best, quiet


def _sensitivity_search(
    run: _ProbeRun, probe: str, stat_for: Callable[[Fraction], SegmentStat], reading: str
) -> ProbeVerdict:
    """
    Largest constant c of the grid such that every probed ball B(center, r) holds a
    witnessed pair with statistic above c.

    The verdict is equicontinuous-consistent when no constant is achieved and
    some probed ball has all its pairs settled within tolerance.
    """
    config = run.config
    centers = run.centers()
    if not centers:
        logger.info("%s: no centres to probe", probe)
        return ProbeVerdict(
            probe, Verdict.INCONCLUSIVE, diagnostics=[{"note": "no centres"}], config=config
        )
    constants = [c for c in config.constant_grid if c > config.tolerance]
    diagnostics: List[dict] = []
    quiet_ball = False

    for constant in constants:
        stat = stat_for(constant)
        witnesses = []
        for key, center in centers:
            for radius in config.delta_grid:
                best, quiet = _best_in_ball(run, key, center, radius, stat, reading)
                quiet_ball = quiet_ball or quiet
                value = best[1].value - best[1].bound if best else None
                diagnostics.append(
                    {
                        "constant": fraction_payload(constant),
                        "center": _point_key(key),
                        "radius": fraction_payload(radius),
                        "best": fraction_payload(value) if value is not None else None,
                        "quiet": quiet,
                    }
                )
                if value is not None and value > constant:
                    y, r = best  # type: ignore
                    witnesses.append(
                        Witness(center, y[1], r.n, r.value, r.bound, stat.label, radius)
                    )
        if len(witnesses) == len(centers) * len(config.delta_grid):
            logger.info("%s: sensitive with constant %s", probe, constant)
            return ProbeVerdict(probe, Verdict.SENSITIVE, witnesses, constant, diagnostics, config)
        logger.debug("%s: constant %s not achieved by every ball", probe, constant)

    verdict = Verdict.EQUICONTINUOUS if quiet_ball else Verdict.INCONCLUSIVE
    logger.info("%s: %s", probe, verdict)
    return ProbeVerdict(probe, verdict, diagnostics=diagnostics, config=config)


def _sensitivity(run: _ProbeRun, mode: SensitivityMode) -> ProbeVerdict:
    kind, reading = SENSITIVITY_MODES[mode]
    stat = SegmentStat(kind)
    return _sensitivity_search(run, str(mode), lambda c: stat, reading)


def estimate_sensitivity_constant(
    system: SystemDescriptor,
    config: Optional[ProbeConfig] = None,
    mode: SensitivityMode = SensitivityMode.STRONG_MEAN,
) -> ProbeVerdict:
    """
    Estimate a sensitivity constant of the system.

    Balls are B(c, r) for sampled centres c and radii r from the delta grid.
    Pairs are (c, y) with y sampled in the ball.

    - strongMean: converged limsup estimate of F_n;
    - strongInMean: largest F_n over schedule entries n >= late_n;
    - meanSensitive and sensitiveInMean: the same with B_n.

    :returns: The verdict; sensitive verdicts carry the achieved constant and one witness per ball.
    """
    run = _ProbeRun(system, config or ProbeConfig())
    return _sensitivity(run, SensitivityMode(mode))


def check_mean_vs_in_mean_agreement(
    system: SystemDescriptor, config: Optional[ProbeConfig] = None
) -> AgreementReport:
    """
    Run the sensitivity search in all four modes on shared samples.

    Disagreement is reported as insufficient resolution, never raised.
    """
    run = _ProbeRun(system, config or ProbeConfig())
    report = AgreementReport(
        strong_mean=_sensitivity(run, SensitivityMode.STRONG_MEAN),
        strong_in_mean=_sensitivity(run, SensitivityMode.STRONG_IN_MEAN),
        mean_sensitive=_sensitivity(run, SensitivityMode.MEAN_SENSITIVE),
        sensitive_in_mean=_sensitivity(run, SensitivityMode.SENSITIVE_IN_MEAN),
    )
    if report.note != "agreement":
        logger.warning("Sensitivity modes disagree on %s: %s", system, report.note)
    return report


def probe_density_sensitivity(
    system: SystemDescriptor, config: Optional[ProbeConfig] = None
) -> ProbeVerdict:
    """
    Search for a density sensitivity constant.

    A constant c is achieved when every probed ball holds a pair whose
    converged limsup estimate of the c-exceedance share is above c.
    """
    run = _ProbeRun(system, config or ProbeConfig())
    return _sensitivity_search(
        run, "densitySensitive", lambda c: SegmentStat(StatKind.EXCEEDANCE, c), LIMSUP
    )


#
# Sensitive tuples
#


def joint_visit_frequency(
    system: SystemDescriptor,
    y1: StatePoint,
    y2: StatePoint,
    anchor: Tuple[StatePoint, StatePoint],
    epsilon: RationalLike,
    n: int,
) -> Tuple[Fraction, Fraction]:
    """
    Joint-visit frequencies of two orbits to the anchors' epsilon-balls.

    With A = {i <= n : T^i y1 in B(x1, eps)} and B likewise for y2 and x2,
    returns the minimum and maximum over permutations of the joint-visit
    count, divided by n.
    """
    eps = to_fraction(epsilon)
    space = system.space
    x1, x2 = anchor
    a = sum(1 for p in systems.orbit_segment(system, y1, n).states if spaces.distance(space, p, x1) < eps)
    b = sum(1 for p in systems.orbit_segment(system, y2, n).states if spaces.distance(space, p, x2) < eps)
    return (
        Fraction(matching.min_joint_visit_count(a, b, n), n),
        Fraction(matching.max_joint_visit_count(a, b, n), n),
    )


def _ball_candidates(
    run: _ProbeRun, key: Hashable, center: StatePoint, radius: Fraction, anchors: Sequence[Keyed]
) -> List[Keyed]:
    """The centre, the pair steered onto the anchors (when possible) and the sampled points."""
    points = [(key, center)]
    steered = []
    for anchor_key, target in anchors:
        found = systems.steer_into(run.system, center, radius, target)
        if found is None:
            break
        steered.append(((key, str(radius), "to", anchor_key), found[0]))
    else:
        points += steered
    return points + run.ball(key, center, radius)


def _best_tuple_pair(
    run: _ProbeRun,
    key: Hashable,
    center: StatePoint,
    radius: Fraction,
    scale: Fraction,
    anchors: Tuple[Keyed, Keyed],
    epsilon: Fraction,
    reading: str,
) -> Optional[TupleWitness]:
    config = run.config
    points = _ball_candidates(run, key, center, scale, anchors)
    first = {p[0]: run.visit_counts(p, anchors[0], epsilon) for p in points}
    second = {p[0]: run.visit_counts(p, anchors[1], epsilon) for p in points}

    best = None
    for p in points:
        for q in points:
            a_counts, b_counts = first[p[0]], second[q[0]]
            samples = tuple(
                (n, Fraction(matching.min_joint_visit_count(a, b, n), n))
                for n, a, b in zip(config.schedule, a_counts, b_counts)
            )
            estimate = LimitEstimate(samples, config.tail_window, config.tolerance)
            r = _read(estimate, reading, config.late_n)
            if r is None or not (r.settled if reading == LIMSUP else r.witnessed):
                continue
            if best is None or r.value > best[2].value:
                best = (p, q, r)
    if best is None:
        return None
    p, q, r = best
    j = config.schedule.index(r.n)
    top = matching.max_joint_visit_count(first[p[0]][j], second[q[0]][j], r.n)
    return TupleWitness(center, radius, p[1], q[1], r.n, r.value, Fraction(top, r.n))


def search_sensitive_tuples(
    system: SystemDescriptor,
    config: Optional[ProbeConfig] = None,
    kind: TupleKind = TupleKind.MEAN,
) -> List[TupleCandidate]:
    """
    Search the anchor grid for sensitive tuples.

    For each anchor (x1, x2) and eps of the grid, every probed ball is
    searched for a pair (y1, y2) whose joint-visit frequency to
    B(x1, eps) and B(x2, eps) is as large as possible.

    - meanTuple: converged limsup estimate above ``tuple_threshold`` in every ball;
    - inMeanTuple: some late n above ``tuple_threshold`` in every ball;
    - weakInMeanTuple: for every closeness scale r some pair with d(y1, y2) < r
      above ``tuple_threshold``, anywhere in the space;
    - densityTuple: converged limsup estimate positive in every ball.

    :returns: The passing anchors, one candidate per (anchor, eps).
    :raises ValueError: On an empty anchor grid.
    """
    config = config or ProbeConfig()
    anchors = config.anchors if config.anchors is not None else systems.anchor_grid(system, config.seed)
    if not anchors:
        raise ValueError("Tuple search needs at least one anchor")
    kind = TupleKind(kind)
    run = _ProbeRun(system, config)
    space = system.space
    centers = run.centers()
    weak = kind == TupleKind.WEAK_IN_MEAN
    threshold = ZERO if kind == TupleKind.DENSITY else config.tuple_threshold
    reading = LIMSUP if kind in (TupleKind.MEAN, TupleKind.DENSITY) else LATE

    ret = []
    for index, (x1, x2) in enumerate(anchors):
        if spaces.distance(space, x1, x2) <= spaces.distance_bound(space, x1, x2):
            logger.debug("Skipping anchor %d: points not separated", index)
            continue
        keyed = ((("anchor", index, 1), x1), (("anchor", index, 2), x2))
        for eps in config.epsilon_grid:
            chosen: List[TupleWitness] = []
            passed = bool(centers)
            for radius in config.delta_grid:
                scale = radius / 2 if weak else radius
                bests = [
                    _best_tuple_pair(run, key, center, radius, scale, keyed, eps, reading)
                    for key, center in centers
                ]
                good = [w for w in bests if w is not None and w.frequency > threshold]
                if weak:
                    if not good:
                        passed = False
                        break
                    chosen.append(max(good, key=lambda w: w.frequency))
                else:
                    if len(good) != len(bests):
                        passed = False
                        break
                    chosen.extend(good)
            logger.debug("Anchor %d at eps=%s: %s", index, eps, "passes" if passed else "fails")
            if passed:
                bound = min(w.frequency for w in chosen)
                ret.append(TupleCandidate(kind, (x1, x2), eps, bound, tuple(chosen)))
    logger.info("%s search: %d candidates", kind, len(ret))
    return ret


#
# Equivalences and the dichotomy
#


def check_density_equivalence(
    system: SystemDescriptor,
    config: Optional[ProbeConfig] = None,
    sampler: Optional[SamplerStrategy] = None,
) -> DensityEquivalenceReport:
    """
    Compare the weak-mean point probe with density-t probes over the t grid.

    Rows disagree when a weak-mean-consistent centre fails some density-t
    probe, or when a weak-mean-sensitive centre passes every density-t probe
    with t < 1.

    :param sampler: Centre strategy overriding the configured one.
    """
    run = _ProbeRun(system, config or ProbeConfig())
    if sampler is not None:
        run.center_strategy = sampler
    report = DensityEquivalenceReport()
    for key, center in run.centers():
        weak = _probe_point(run, "weakMeanPoint", key, center, _weak_mean_cells(run.config), LIMSUP)
        density = {
            t: _probe_point(run, f"densityT({t})", key, center, _density_cells(run.config, t), LIMSUP)
            for t in run.config.t_grid
        }
        row = {
            "center": center.to_payload(),
            "weakMean": str(weak.verdict),
            "density": {str(t): str(v.verdict) for t, v in density.items()},
        }
        report.rows.append(row)
        verdicts = [v.verdict for t, v in density.items() if t < 1]
        if Verdict.INCONCLUSIVE in [weak.verdict, *verdicts]:
            report.inconclusive = True
        if (weak.verdict == Verdict.EQUICONTINUOUS and Verdict.SENSITIVE in verdicts) or (
            weak.verdict == Verdict.SENSITIVE
            and verdicts
            and all(v == Verdict.EQUICONTINUOUS for v in verdicts)
        ):
            report.disagreements.append(row)
    logger.info(
        "Density equivalence: %d rows, %d disagreements", len(report.rows), len(report.disagreements)
    )
    return report


def _side(sensitivity: ProbeVerdict, points: Sequence[ProbeVerdict]) -> DichotomySide:
    sensitive = sensitivity.verdict == Verdict.SENSITIVE
    if sensitive and not any(v.verdict == Verdict.EQUICONTINUOUS for v in points):
        return DichotomySide.SENSITIVE
    if (
        not sensitive
        and points
        and all(v.verdict == Verdict.EQUICONTINUOUS for v in points)
    ):
        return DichotomySide.EQUICONTINUOUS
    return DichotomySide.INCONCLUSIVE


def dichotomy_report(
    system: SystemDescriptor, config: Optional[ProbeConfig] = None
) -> DichotomyReport:
    """
    Aggregate point probes at sampled centres and the sensitivity searches.

    The weak-mean side pairs the weak-mean point probes with strong mean
    sensitivity; the in-the-mean side pairs the in-mean point probes with
    strong sensitivity in the mean. Conflicting sides give an inconclusive
    overall verdict; an inconclusive side defers to the other.
    """
    run = _ProbeRun(system, config or ProbeConfig())
    cells = _weak_mean_cells(run.config)
    mean_points = []
    in_mean_points = []
    evidence = []
    for key, center in run.centers():
        mean_points.append(_probe_point(run, "weakMeanPoint", key, center, cells, LIMSUP))
        in_mean_points.append(_probe_point(run, "inMeanPoint", key, center, cells, SUP))
        for v in (mean_points[-1], in_mean_points[-1]):
            evidence.append(
                {"probe": v.probe, "center": center.to_payload(), "verdict": str(v.verdict)}
            )
    sensitivity = {
        str(mode): _sensitivity(run, mode)
        for mode in (SensitivityMode.STRONG_MEAN, SensitivityMode.STRONG_IN_MEAN)
    }
    for name, v in sensitivity.items():
        evidence.append(
            {
                "probe": name,
                "verdict": str(v.verdict),
                "achieved_constant": (
                    fraction_payload(v.achieved_constant) if v.achieved_constant is not None else None
                ),
            }
        )

    mean_side = _side(sensitivity[str(SensitivityMode.STRONG_MEAN)], mean_points)
    in_mean_side = _side(sensitivity[str(SensitivityMode.STRONG_IN_MEAN)], in_mean_points)
    if mean_side == in_mean_side or in_mean_side == DichotomySide.INCONCLUSIVE:
        side = mean_side
    elif mean_side == DichotomySide.INCONCLUSIVE:
        side = in_mean_side
    else:
        side = DichotomySide.INCONCLUSIVE
    report = DichotomyReport(
        side=side,
        mean_side=mean_side,
        in_mean_side=in_mean_side,
        sensitivity=sensitivity,
        point_verdicts=mean_points + in_mean_points,
        evidence=evidence,
    )
    logger.info("Dichotomy for %s: %s", system, side)
    return report
