# SPDX-License-Identifier: MIT
"""
Per-n statistics on pairs of orbit segments, limit estimates and densities.

Orbit indices run 1..n: a segment of length n holds T^1 x, ..., T^n x.
"""

from fractions import Fraction
import logging
from typing import Callable, Dict, List, Optional, Sequence, Union

from . import matching, spaces, systems
from .types import (
    IntegerSetView,
    LimitEstimate,
    Observable,
    OrbitSegment,
    PairRelationReport,
    RelationVerdict,
    SandwichReport,
    SegmentStat,
    SpaceDescriptor,
    SpaceKind,
    StatKind,
    StatePoint,
    StatValue,
    SymbolPoint,
    SystemDescriptor,
    point_from_payload,
)
from .utils import InvariantError, RationalLike, to_fraction

logger = logging.getLogger(__name__)

ZERO = Fraction(0)


#
# Truncation bounds
#


def _state_error(states: Sequence[StatePoint]) -> Fraction:
    """Largest coordinate error over circle or interval states."""
    return max((p.error for p in states), default=ZERO)  # type: ignore


def segment_bound(space: SpaceDescriptor, xs: Sequence[StatePoint], ys: Sequence[StatePoint]) -> Fraction:
    """
    Bound on the error of any mean of pairwise distances between ``xs`` and ``ys``.

    Every pairwise distance is off by at most this much, so minimum, maximum
    and identity-paired means are too.
    """
    if space.kind == SpaceKind.SYMBOLIC:
        return space.truncation_bound
    if space.kind == SpaceKind.PRODUCT:
        return segment_bound(space.left, [p.left for p in xs], [p.left for p in ys]) + segment_bound(  # type: ignore
            space.right, [p.right for p in xs], [p.right for p in ys]  # type: ignore
        )
    return _state_error(xs) + _state_error(ys)


#
# Statistics
#


def _check_pair(seg_x: OrbitSegment, seg_y: OrbitSegment):
    if seg_x.system != seg_y.system:
        raise ValueError("Segments come from different systems")
    if seg_x.length != seg_y.length:
        raise ValueError(f"Segment lengths differ: {seg_x.length} vs {seg_y.length}")


def pointwise_distances(
    space: SpaceDescriptor, xs: Sequence[StatePoint], ys: Sequence[StatePoint]
) -> List[Fraction]:
    """Distances d(xs[k], ys[k]) for the identity pairing."""
    return [spaces._distance(space, a, b) for a, b in zip(xs, ys)]


def _coordinates(states: Sequence[StatePoint]) -> List[Fraction]:
    return [p.coordinate for p in states]  # type: ignore


def _matched_total(space: SpaceDescriptor, xs, ys, maximize: bool) -> Fraction:
    if space.kind == SpaceKind.CIRCLE:
        return matching.solve_sorted_circle(_coordinates(xs), _coordinates(ys), maximize).total_cost
    if space.kind == SpaceKind.INTERVAL:
        return matching.solve_sorted_line(_coordinates(xs), _coordinates(ys), maximize).total_cost
    cost = spaces.cost_matrix(space, xs, ys)
    if maximize:
        return matching.solve_max_assignment(cost).total_cost
    return matching.solve_min_assignment(cost).total_cost


def _exceedance(space: SpaceDescriptor, xs, ys, epsilon: Fraction) -> int:
    if space.kind == SpaceKind.CIRCLE:
        return matching.circle_exceedance_count(_coordinates(xs), _coordinates(ys), epsilon)
    if space.kind == SpaceKind.INTERVAL:
        return matching.line_exceedance_count(_coordinates(xs), _coordinates(ys), epsilon)
    return matching.min_exceedance_count(spaces.cost_matrix(space, xs, ys), epsilon)


def _observable_bound(f: Observable, space: SpaceDescriptor, xs, ys) -> Fraction:
    if not f.lipschitz:
        return ZERO
    return f.lipschitz * segment_bound(space, xs, ys)


def _exceedance_share(count: Callable[[Fraction], int], epsilon: Fraction, bound: Fraction, n: int) -> StatValue:
    # true distance > eps implies truncated distance > eps - bound
    low = count(epsilon)
    if not bound:
        return StatValue(Fraction(low, n))
    high = count(epsilon - bound) if epsilon >= bound else n
    return StatValue(Fraction(low, n), Fraction(high - low, n))


def segment_stat(seg_x: OrbitSegment, seg_y: OrbitSegment, stat: SegmentStat) -> StatValue:
    """
    Evaluate a per-n statistic on two orbit segments of equal length n.

    - weakMean: min over permutations of the mean matched distance (F_n);
    - besicovitch: mean distance under the identity pairing (B_n);
    - supPerm: max over permutations of the mean matched distance;
    - exceedance(eps): min over permutations of the share of matched distances > eps;
    - besicovitchExceedance(eps): share of identity-paired distances > eps;
    - observable(f): F_n of the values of f (d_f^n);
    - observableExceedance(f, eps): exceedance of the values of f.

    Circle and interval segments go through the sorted fast paths; symbolic
    and product segments use the general solvers. An exceedance share is
    counted on the truncated metric at eps and again at eps minus the
    truncation bound; the value is the first share and the bound is the gap,
    so the true share lies in [value, value + bound].

    :param seg_x: First segment.
    :param seg_y: Second segment.
    :param stat: Statistic to evaluate.
    :returns: Exact value and truncation bound.
    :raises ValueError: If the segments are from different systems or lengths.
    """
    _check_pair(seg_x, seg_y)
    space = seg_x.system.space
    xs, ys = seg_x.states, seg_y.states
    n = seg_x.length
    kind = stat.kind

    if kind in (StatKind.WEAK_MEAN, StatKind.SUP_PERM):
        total = _matched_total(space, xs, ys, kind == StatKind.SUP_PERM)
        return StatValue(total / n, segment_bound(space, xs, ys))
    if kind == StatKind.BESICOVITCH:
        return StatValue(sum(pointwise_distances(space, xs, ys)) / n, segment_bound(space, xs, ys))
    if kind == StatKind.EXCEEDANCE:
        return _exceedance_share(
            lambda t: _exceedance(space, xs, ys, t), stat.epsilon, segment_bound(space, xs, ys), n  # type: ignore
        )
    if kind == StatKind.BESICOVITCH_EXCEEDANCE:
        distances = pointwise_distances(space, xs, ys)
        return _exceedance_share(
            lambda t: sum(1 for d in distances if d > t), stat.epsilon, segment_bound(space, xs, ys), n  # type: ignore
        )

    f = stat.observable
    fx = [f(p) for p in xs]  # type: ignore
    fy = [f(p) for p in ys]  # type: ignore
    if kind == StatKind.OBSERVABLE:
        total = matching.solve_sorted_line(fx, fy).total_cost
        return StatValue(total / n, _observable_bound(f, space, xs, ys))  # type: ignore
    return _exceedance_share(
        lambda t: matching.line_exceedance_count(fx, fy, t), stat.epsilon, _observable_bound(f, space, xs, ys), n  # type: ignore
    )


def weak_mean(seg_x: OrbitSegment, seg_y: OrbitSegment) -> Fraction:
    """F_n of two segments."""
    return segment_stat(seg_x, seg_y, SegmentStat(StatKind.WEAK_MEAN)).value


def besicovitch(seg_x: OrbitSegment, seg_y: OrbitSegment) -> Fraction:
    """B_n of two segments."""
    return segment_stat(seg_x, seg_y, SegmentStat(StatKind.BESICOVITCH)).value


def sup_perm(seg_x: OrbitSegment, seg_y: OrbitSegment) -> Fraction:
    """Max over permutations of the mean matched distance."""
    return segment_stat(seg_x, seg_y, SegmentStat(StatKind.SUP_PERM)).value


def exceedance(seg_x: OrbitSegment, seg_y: OrbitSegment, epsilon: RationalLike) -> Fraction:
    """Min over permutations of the share of matched distances above ``epsilon``."""
    return segment_stat(seg_x, seg_y, SegmentStat(StatKind.EXCEEDANCE, to_fraction(epsilon))).value


#
# Limit estimates
#


def estimate_limit(
    stat_fn: Callable[[int], Union[Fraction, StatValue]],
    schedule: Sequence[int],
    tail_window: int = 3,
    tolerance: RationalLike = Fraction(1, 100),
) -> LimitEstimate:
    """
    Sample ``stat_fn`` on an n-schedule and estimate its limsup and liminf.

    The estimates are the max and min over the last ``tail_window`` samples;
    the estimate is converged iff their difference is at most ``tolerance``.
    Schedules shorter than the tail window give non-converged estimates.

    :param stat_fn: Function of n returning a rational or a :class:`StatValue`.
    :param schedule: Strictly increasing positive n values.
    :param tail_window: Number of trailing samples used.
    :param tolerance: Convergence tolerance.
    :returns: The resulting :class:`LimitEstimate`.
    :raises ValueError: On an empty or non-increasing schedule.
    """
    _check_schedule(schedule)
    samples = []
    bound = ZERO
    for n in schedule:
        value = stat_fn(n)
        if isinstance(value, StatValue):
            bound = max(bound, value.bound)
            value = value.value
        samples.append((n, Fraction(value)))
    return LimitEstimate(tuple(samples), tail_window, to_fraction(tolerance), bound)


def _check_schedule(schedule: Sequence[int]):
    if not schedule:
        raise ValueError("Schedule must be non-empty")
    if schedule[0] < 1 or any(a >= b for a, b in zip(schedule, schedule[1:])):
        raise ValueError("Schedule must be strictly increasing positive integers")


def pair_stat_estimate(
    system: SystemDescriptor,
    x: StatePoint,
    y: StatePoint,
    stat: SegmentStat,
    schedule: Sequence[int],
    tail_window: int = 3,
    tolerance: RationalLike = Fraction(1, 100),
) -> LimitEstimate:
    """
    :func:`estimate_limit` of a statistic of the orbits of x and y.

    The orbits are generated once up to the largest n and reused as prefixes.
    """
    _check_schedule(schedule)
    seg_x = systems.orbit_segment(system, x, schedule[-1])
    seg_y = systems.orbit_segment(system, y, schedule[-1])
    return estimate_limit(
        lambda n: segment_stat(seg_x.prefix(n), seg_y.prefix(n), stat),
        schedule,
        tail_window,
        tolerance,
    )


def _verdict(name: str, estimate: LimitEstimate, value: Fraction, tolerance: Fraction) -> RelationVerdict:
    return RelationVerdict(name, value + estimate.error_bound <= tolerance, estimate)


def pair_relation(
    system: SystemDescriptor,
    x: StatePoint,
    y: StatePoint,
    schedule: Sequence[int],
    tolerance: RationalLike = Fraction(1, 100),
    tail_window: int = 3,
) -> PairRelationReport:
    """
    Relation verdicts for a pair, each with the estimate it rests on.

    - weakMeanAsymptotic: limsup estimate of F_n within tolerance;
    - weakMeanProximal: liminf estimate of F_n within tolerance;
    - strongMeanProximal: liminf estimate of the max-permutation statistic within tolerance;
    - meanAsymptotic: limsup estimate of B_n within tolerance;
    - proximal: the running minimum of d(T^k x, T^k y) over k <= n within tolerance.

    Truncation bounds are added before comparing.
    """
    tolerance = to_fraction(tolerance)
    _check_schedule(schedule)
    seg_x = systems.orbit_segment(system, x, schedule[-1])
    seg_y = systems.orbit_segment(system, y, schedule[-1])
    space = system.space

    def estimate(kind: StatKind) -> LimitEstimate:
        return estimate_limit(
            lambda n: segment_stat(seg_x.prefix(n), seg_y.prefix(n), SegmentStat(kind)),
            schedule,
            tail_window,
            tolerance,
        )

    weak = estimate(StatKind.WEAK_MEAN)
    strong = estimate(StatKind.SUP_PERM)
    mean = estimate(StatKind.BESICOVITCH)

    pointwise = pointwise_distances(space, seg_x.states, seg_y.states)
    running = []
    low = pointwise[0]
    for d in pointwise:
        low = min(low, d)
        running.append(low)
    closest = estimate_limit(
        lambda n: StatValue(running[n - 1], segment_bound(space, seg_x.states[:n], seg_y.states[:n])),
        schedule,
        tail_window,
        tolerance,
    )

    return PairRelationReport(
        weak_mean_asymptotic=_verdict("weakMeanAsymptotic", weak, weak.limsup_estimate, tolerance),
        weak_mean_proximal=_verdict("weakMeanProximal", weak, weak.liminf_estimate, tolerance),
        strong_mean_proximal=_verdict(
            "strongMeanProximal", strong, strong.liminf_estimate, tolerance
        ),
        mean_asymptotic=_verdict("meanAsymptotic", mean, mean.limsup_estimate, tolerance),
        proximal=_verdict("proximal", closest, closest.liminf_estimate, tolerance),
    )


#
# Densities
#


def density_estimate(
    view: IntegerSetView,
    schedule: Sequence[int],
    tail_window: int = 3,
    tolerance: RationalLike = Fraction(1, 100),
) -> LimitEstimate:
    """
    Sample ``#(F intersected with [0, n-1]) / n`` on the schedule.

    The upper density of F is read from ``limsup_estimate`` and the lower
    density from ``liminf_estimate`` of the same estimate.

    :raises ValueError: If the schedule exceeds the view's horizon.
    """
    _check_schedule(schedule)
    if schedule[-1] > view.horizon:
        raise ValueError(f"Schedule reaches {schedule[-1]} beyond the horizon {view.horizon}")
    return estimate_limit(
        lambda n: Fraction(view.count_below(n), n), schedule, tail_window, tolerance
    )


def even_numbers(horizon: int) -> IntegerSetView:
    """The even numbers below ``horizon``."""
    return IntegerSetView.from_predicate(lambda i: i % 2 == 0, horizon)


def four_blocks(horizon: int) -> IntegerSetView:
    """The union of the blocks [4^k, 2*4^k) below ``horizon``."""
    blocks = []
    start = 1
    while start < horizon:
        blocks.append((start, 2 * start))
        start *= 4
    return IntegerSetView.from_intervals(blocks, horizon)


#
# Observables
#


def _symbol_coordinate(p: SymbolPoint, depth: int) -> Fraction:
    k = p.alphabet_size
    value = 0
    for s in p.stream.word(depth):
        value = value * 2 + Fraction(s, k - 1)
    return Fraction(value, 1 << depth)


def constant_observable(value: RationalLike = 0) -> Observable:
    """The observable that is ``value`` everywhere."""
    c = to_fraction(value)
    return Observable("constant", lambda p: c, ZERO, (c, c), {"value": str(c)})


def coordinate_observable(space: SpaceDescriptor) -> Observable:
    """
    The coordinate map.

    On the interval and symbolic spaces (binary-weighted symbol value) it is
    1-Lipschitz. On the circle it jumps at 0, so no Lipschitz bound is declared.

    :raises ValueError: On product spaces.
    """
    if space.kind == SpaceKind.CIRCLE:
        return Observable("coordinate", lambda p: p.coordinate, None, (ZERO, Fraction(1)))
    if space.kind == SpaceKind.INTERVAL:
        return Observable("coordinate", lambda p: p.coordinate, Fraction(1), (ZERO, Fraction(1)))
    if space.kind == SpaceKind.SYMBOLIC:
        depth = space.truncation_depth
        return Observable(
            "coordinate",
            lambda p: _symbol_coordinate(p, depth),
            Fraction(1),
            (ZERO, Fraction(1)),
        )
    raise ValueError("Product spaces have no coordinate observable")


def distance_to_observable(space: SpaceDescriptor, point: StatePoint) -> Observable:
    """``d(., point)``; 1-Lipschitz with range [0, diam]."""
    spaces.check_point(space, point)
    return Observable(
        "distance_to",
        lambda p: spaces._distance(space, p, point),
        Fraction(1),
        (ZERO, space.diameter),
        {"point": point.to_payload()},
    )


def smoothed_indicator_observable(
    space: SpaceDescriptor, point: StatePoint, q: RationalLike = 8
) -> Observable:
    """``min(1, q * d(., point))``; q-Lipschitz with range [0, 1]."""
    spaces.check_point(space, point)
    q = to_fraction(q)
    if q <= 0:
        raise ValueError("Smoothing factor q must be positive")
    return Observable(
        "smoothed_indicator",
        lambda p: min(Fraction(1), q * spaces._distance(space, p, point)),
        q,
        (ZERO, Fraction(1)),
        {"point": point.to_payload(), "q": str(q)},
    )


#: Observable factories by registry name.
OBSERVABLE_REGISTRY: Dict[str, Callable[..., Observable]] = {
    "constant": constant_observable,
    "coordinate": coordinate_observable,
    "distance_to": distance_to_observable,
    "smoothed_indicator": smoothed_indicator_observable,
}


def make_observable(space: SpaceDescriptor, payload: Union[str, dict]) -> Observable:
    """
    Build a registered observable from its payload.

    :param space: Space the observable lives on.
    :param payload: Registry name, or a dict with ``name`` and the parameters
                    (``value``; ``point``; ``point`` and ``q``).
    :returns: The resulting observable.
    :raises ValueError: On unknown names or bad parameters.
    """
    if isinstance(payload, str):
        payload = {"name": payload}
    name = payload.get("name")
    if name not in OBSERVABLE_REGISTRY:
        raise ValueError(f"Unknown observable {name!r}")
    if name == "constant":
        return constant_observable(payload.get("value", 0))
    if name == "coordinate":
        return coordinate_observable(space)
    point = (
        point_from_payload(payload["point"])
        if "point" in payload
        else spaces.fixed_point(space)
    )
    if name == "distance_to":
        return distance_to_observable(space, point)
    return smoothed_indicator_observable(space, point, payload.get("q", 8))


def default_observables(space: SpaceDescriptor) -> List[Observable]:
    """The registered observables with a declared Lipschitz bound on ``space``."""
    ret = [constant_observable()]
    if space.kind in (SpaceKind.INTERVAL, SpaceKind.SYMBOLIC):
        ret.append(coordinate_observable(space))
    origin = spaces.fixed_point(space)
    ret.append(distance_to_observable(space, origin))
    ret.append(smoothed_indicator_observable(space, origin, 8))
    return ret


def stat_sandwich_check(
    seg_x: OrbitSegment, seg_y: OrbitSegment, f: Observable, delta: RationalLike
) -> SandwichReport:
    """
    Evaluate and check ``delta * D <= S <= spread * D + delta * (n - D)``.

    Here S is the minimum over permutations of the summed differences of f,
    D the minimum over permutations of the number of differences above delta,
    and spread the width of f's declared range.

    :returns: The three quantities.
    :raises ValueError: If delta is not positive.
    :raises InvariantError: If either inequality fails.
    """
    _check_pair(seg_x, seg_y)
    delta = to_fraction(delta)
    if delta <= 0:
        raise ValueError("delta must be positive")
    n = seg_x.length
    fx = [f(p) for p in seg_x.states]
    fy = [f(p) for p in seg_y.states]
    count = matching.line_exceedance_count(fx, fy, delta)
    total = matching.solve_sorted_line(fx, fy).total_cost
    report = SandwichReport(
        delta=delta,
        n=n,
        exceedance_count=count,
        matched_sum=total,
        lower=delta * count,
        upper=f.spread * count + delta * (n - count),
    )
    if not report.lower <= total <= report.upper:
        raise InvariantError(
            f"Observable sandwich violated for {f.name}: "
            f"{report.lower} <= {total} <= {report.upper} fails"
        )
    return report


def observable_pseudometric_estimate(
    system: SystemDescriptor,
    x: StatePoint,
    y: StatePoint,
    f: Observable,
    epsilon_grid: Sequence[Fraction],
    schedule: Sequence[int],
    tail_window: int = 3,
    tolerance: RationalLike = Fraction(1, 100),
) -> Optional[Fraction]:
    """
    Grid estimate of ``inf{eps : limsup of the f-exceedance share at eps < eps}``.

    :returns: The least grid value passing, or None if none does.
    """
    _check_schedule(schedule)
    seg_x = systems.orbit_segment(system, x, schedule[-1])
    seg_y = systems.orbit_segment(system, y, schedule[-1])
    passing = None
    for eps in sorted(epsilon_grid, reverse=True):
        stat = SegmentStat(StatKind.OBSERVABLE_EXCEEDANCE, eps, f)
        estimate = estimate_limit(
            lambda n: segment_stat(seg_x.prefix(n), seg_y.prefix(n), stat),
            schedule,
            tail_window,
            tolerance,
        )
        if estimate.limsup_estimate < eps:
            passing = eps
        else:
            logger.debug("Observable exceedance at %s stays at %s", eps, estimate.limsup_estimate)
            break
    return passing
