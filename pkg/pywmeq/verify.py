# SPDX-License-Identifier: MIT
"""
Built-in invariant suites.

Each suite draws random exact instances from a seeded generator and checks
an exact identity or inequality against an independent computation. A
failed check is recorded with the name of the violated property.
"""

from fractions import Fraction
from itertools import permutations
import logging
import random
from typing import Callable, Dict, List, Tuple

from . import matching, orbitstats, systems
from .types import (
    AssignmentMode,
    CostMatrix,
    OrbitSegment,
    SamplerKind,
    SamplerStrategy,
    SegmentStat,
    StatKind,
    StatePoint,
    SuiteResult,
    SystemDescriptor,
    VerifyLevel,
    VerifyReport,
)
from .utils import InvariantError, derive_seed

logger = logging.getLogger(__name__)

#: Random instances per parameter value, by level.
INSTANCES = {VerifyLevel.QUICK: 10, VerifyLevel.FULL: 100}

#: Largest n of the brute-force oracles, by level.
BRUTE_FORCE_N = {VerifyLevel.QUICK: 5, VerifyLevel.FULL: 7}

#: Orbit lengths of the shift-stability suite, by level.
SHIFT_LENGTHS = {VerifyLevel.QUICK: (16, 64), VerifyLevel.FULL: (16, 64, 256)}

#: Sizes of the fast-path suite, by level.
FAST_PATH_SIZES = {VerifyLevel.QUICK: (8, 16), VerifyLevel.FULL: (8, 16, 32, 64)}


def _random_fraction(rng: random.Random, max_den: int = 12) -> Fraction:
    den = rng.randint(1, max_den)
    return Fraction(rng.randrange(0, den), den)


def _random_cost(rng: random.Random, n: int) -> CostMatrix:
    return CostMatrix.from_entries(
        [[Fraction(rng.randint(0, 20), rng.randint(1, 6)) for _ in range(n)] for _ in range(n)]
    )


def _brute_exceedance(cost: CostMatrix, threshold: Fraction) -> int:
    return min(
        sum(1 for i, j in enumerate(perm) if cost.entry(i, j) > threshold)
        for perm in permutations(range(cost.n))
    )


def _check(result: SuiteResult, ok: bool, message: str):
    result.checks += 1
    if not ok:
        result.failures.append(message)


#
# Suites
#


def suite_solver_oracle(level: VerifyLevel, rng: random.Random) -> SuiteResult:
    """General solvers against brute-force enumeration."""
    result = SuiteResult("solver-oracle")
    for n in range(2, BRUTE_FORCE_N[level] + 1):
        for _ in range(INSTANCES[level]):
            cost = _random_cost(rng, n)
            low = matching.brute_force_assignment(cost, AssignmentMode.MIN).total_cost
            high = matching.brute_force_assignment(cost, AssignmentMode.MAX).total_cost
            got = matching.solve_min_assignment(cost).total_cost
            _check(result, got == low, f"min assignment n={n}: {got} != {low}")
            got = matching.solve_max_assignment(cost).total_cost
            _check(result, got == high, f"max assignment n={n}: {got} != {high}")
            entries = sorted({e for row in cost.entries for e in row})
            for threshold in rng.sample(entries, min(5, len(entries))):
                got = matching.min_exceedance_count(cost, threshold)
                want = _brute_exceedance(cost, threshold)
                _check(result, got == want, f"exceedance n={n} at {threshold}: {got} != {want}")
    return result


def _circle_distance(a: Fraction, b: Fraction) -> Fraction:
    d = abs(a - b)
    return min(d, 1 - d)


def suite_fast_paths(level: VerifyLevel, rng: random.Random) -> SuiteResult:
    """Sorted line and circle solvers and threshold counts against the general solvers."""
    result = SuiteResult("fast-path")
    line_cost: Callable = lambda a, b: abs(a - b)
    for n in FAST_PATH_SIZES[level]:
        for _ in range(INSTANCES[level]):
            den = rng.randint(n, 4 * n)
            xs = [Fraction(rng.randrange(den), den) for _ in range(n)]
            ys = [Fraction(rng.randrange(den), den) for _ in range(n)]
            eps = _random_fraction(rng, 8) / 2
            for name, fast, dist, count in (
                ("line", matching.solve_sorted_line, line_cost, matching.line_exceedance_count),
                ("circle", matching.solve_sorted_circle, _circle_distance, matching.circle_exceedance_count),
            ):
                cost = matching.cost_matrix_from_points(xs, ys, dist)
                want = matching.solve_min_assignment(cost).total_cost
                got = fast(xs, ys).total_cost
                _check(result, got == want, f"{name} min n={n}: {got} != {want}")
                want = matching.solve_max_assignment(cost).total_cost
                got = fast(xs, ys, True).total_cost
                _check(result, got == want, f"{name} max n={n}: {got} != {want}")
                want_count = matching.min_exceedance_count(cost, eps)
                got_count = count(xs, ys, eps)
                _check(
                    result,
                    got_count == want_count,
                    f"{name} exceedance n={n} at {eps}: {got_count} != {want_count}",
                )
    return result


def _reference_systems() -> List[SystemDescriptor]:
    return [
        SystemDescriptor.rotation(Fraction(34, 55)),
        SystemDescriptor.tent(),
        SystemDescriptor.full_shift(2, 16),
        SystemDescriptor.product(
            SystemDescriptor.rotation(Fraction(8, 13)), SystemDescriptor.full_shift(2, 16)
        ),
    ]


def _random_state(system: SystemDescriptor, rng: random.Random) -> StatePoint:
    strategy = SamplerStrategy(SamplerKind.UNIFORM)
    return systems.sample_state(system, strategy, rng.getrandbits(32))


def suite_pseudometric(level: VerifyLevel, rng: random.Random) -> SuiteResult:
    """Zero on the diagonal, symmetry and the triangle inequality of F_n, plus F_n <= B_n <= sup."""
    result = SuiteResult("pseudometric")
    for system in _reference_systems():
        for _ in range(max(1, INSTANCES[level] // 2)):
            n = rng.randint(2, 12)
            x, y, z = (systems.orbit_segment(system, _random_state(system, rng), n) for _ in range(3))
            xy = orbitstats.weak_mean(x, y)
            label = f"{system.kind} n={n}"
            _check(result, orbitstats.weak_mean(x, x) == 0, f"zero diagonal {label}")
            _check(result, xy == orbitstats.weak_mean(y, x), f"symmetry {label}")
            xz = orbitstats.weak_mean(x, z)
            yz = orbitstats.weak_mean(y, z)
            _check(result, xz <= xy + yz, f"triangle {label}: {xz} > {xy} + {yz}")
            mean = orbitstats.besicovitch(x, y)
            top = orbitstats.sup_perm(x, y)
            _check(result, xy <= mean <= top, f"ordering {label}: {xy}, {mean}, {top}")
    return result


def suite_exceedance_sandwich(level: VerifyLevel, rng: random.Random) -> SuiteResult:
    """``eps * exceedance <= F_n <= diam * exceedance + eps``."""
    result = SuiteResult("exceedance-sandwich")
    for system in _reference_systems():
        diam = system.space.diameter
        for _ in range(max(1, INSTANCES[level] // 2)):
            n = rng.randint(2, 12)
            x = systems.orbit_segment(system, _random_state(system, rng), n)
            y = systems.orbit_segment(system, _random_state(system, rng), n)
            f = orbitstats.weak_mean(x, y)
            for eps in (Fraction(1, 20), Fraction(1, 8), Fraction(1, 4), Fraction(1, 2), Fraction(1)):
                exc = orbitstats.exceedance(x, y, eps)
                _check(
                    result,
                    eps * exc <= f <= diam * exc + eps,
                    f"sandwich {system.kind} n={n} eps={eps}: {eps * exc} <= {f} <= {diam * exc + eps}",
                )
    return result


def suite_shift_stability(level: VerifyLevel, rng: random.Random) -> SuiteResult:
    """``|F_n(Tx, y) - F_n(x, y)| <= diam / n``."""
    result = SuiteResult("shift-stability")
    system = SystemDescriptor.rotation(Fraction(89, 144))
    diam = system.space.diameter
    for n in SHIFT_LENGTHS[level]:
        for _ in range(INSTANCES[level]):
            long = systems.orbit_segment(system, _random_state(system, rng), n + 1)
            y = systems.orbit_segment(system, _random_state(system, rng), n)
            x = long.prefix(n)
            tx = OrbitSegment(system, long.states[0], long.states[1:])
            diff = abs(orbitstats.weak_mean(tx, y) - orbitstats.weak_mean(x, y))
            _check(result, diff <= diam / n, f"shift n={n}: {diff} > {diam / n}")
    return result


def _brute_joint(a: int, b: int, n: int) -> Tuple[int, int]:
    counts = [sum(1 for i in range(a) if perm[i] < b) for perm in permutations(range(n))]
    return min(counts), max(counts)


def suite_joint_visits(level: VerifyLevel, rng: random.Random) -> SuiteResult:
    """Closed forms of the joint-visit counts, exhaustively for small n."""
    result = SuiteResult("joint-visit")
    for n in range(1, BRUTE_FORCE_N[level] + 1):
        for a in range(n + 1):
            for b in range(n + 1):
                low, high = _brute_joint(a, b, n)
                got = (matching.min_joint_visit_count(a, b, n), matching.max_joint_visit_count(a, b, n))
                _check(result, got == (low, high), f"joint visits ({a}, {b}, {n}): {got} != {(low, high)}")
    return result


def suite_observable_sandwich(level: VerifyLevel, rng: random.Random) -> SuiteResult:
    """Observable sandwich and ``d_f^n <= L * F_n`` for the registered Lipschitz observables."""
    result = SuiteResult("observable-sandwich")
    for system in _reference_systems()[:3]:
        observables = orbitstats.default_observables(system.space)
        for _ in range(max(1, INSTANCES[level] // 2)):
            n = rng.randint(2, 12)
            x = systems.orbit_segment(system, _random_state(system, rng), n)
            y = systems.orbit_segment(system, _random_state(system, rng), n)
            f_n = orbitstats.weak_mean(x, y)
            for f in observables:
                delta = _random_fraction(rng, 10) + Fraction(1, 20)
                try:
                    orbitstats.stat_sandwich_check(x, y, f, delta)
                    _check(result, True, "")
                except InvariantError as e:
                    _check(result, False, str(e))
                if f.lipschitz is not None:
                    d_f = orbitstats.segment_stat(
                        x, y, SegmentStat(StatKind.OBSERVABLE, observable=f)
                    ).value
                    _check(
                        result,
                        d_f <= f.lipschitz * f_n,
                        f"contraction {f.name} {system.kind}: {d_f} > {f.lipschitz} * {f_n}",
                    )
    return result


#: Suites in run order.
SUITES: Dict[str, Callable[[VerifyLevel, random.Random], SuiteResult]] = {
    "solver-oracle": suite_solver_oracle,
    "fast-path": suite_fast_paths,
    "pseudometric": suite_pseudometric,
    "exceedance-sandwich": suite_exceedance_sandwich,
    "shift-stability": suite_shift_stability,
    "joint-visit": suite_joint_visits,
    "observable-sandwich": suite_observable_sandwich,
}


def run_verify(level: VerifyLevel = VerifyLevel.QUICK, seed: int = 0) -> VerifyReport:
    """
    Run every invariant suite.

    Each suite gets its own generator derived from the seed and its name, so
    suites are reproducible independently. An exception inside a suite is
    recorded on that suite.

    :param level: ``quick`` or ``full``.
    :param seed: Seed of the random instances.
    :returns: The per-suite report.
    """
    level = VerifyLevel(level)
    report = VerifyReport(level, seed)
    for name, suite in SUITES.items():
        rng = random.Random(derive_seed(seed, name))
        try:
            result = suite(level, rng)
        except (InvariantError, ValueError, TypeError) as e:
            result = SuiteResult(name, error=f"{type(e).__name__}: {e}")
        logger.info("Suite %s: %d checks, %s", name, result.checks, "ok" if result.passed else "FAILED")
        for failure in result.failures[:5]:
            logger.warning("%s: %s", name, failure)
        report.suites.append(result)
    return report
