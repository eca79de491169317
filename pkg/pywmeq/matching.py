# SPDX-License-Identifier: MIT
"""
Exact solvers for optimization problems over permutations.

All solvers work on Python integers: rational costs are rewritten over a
common denominator first, so results are exact and comparable with ``==``.
"""

from bisect import bisect_left, bisect_right
from fractions import Fraction
from itertools import permutations
from math import floor
import logging
from typing import Callable, List, Optional, Sequence, Tuple, Union

from .types import AssignmentMode, CostMatrix, Matching
from .utils import InvariantError, RationalLike, scale_to_integers, to_fraction

logger = logging.getLogger(__name__)

#: Largest n accepted by :func:`brute_force_assignment`.
BRUTE_FORCE_LIMIT = 9

Range = Tuple[int, int]


def _check_size(cost: CostMatrix):
    if cost.n == 0:
        raise ValueError("Assignment problems need n >= 1")


def _check_lengths(xs: Sequence, ys: Sequence) -> int:
    if len(xs) != len(ys):
        raise ValueError(f"Length mismatch: {len(xs)} vs {len(ys)}")
    if not xs:
        raise ValueError("Point sequences must be non-empty")
    return len(xs)


#
# General assignment
#


def _hungarian(rows: Sequence[Sequence[int]]) -> List[int]:
    """
    O(n^3) shortest augmenting path assignment on an integer matrix.

    :returns: ``assignment[i]``, the column paired with row ``i``.
    """
    n = len(rows)
    inf = float("inf")

    # 1-indexed potentials; p[j] is the row assigned to column j
    u = [0] * (n + 1)
    v = [0] * (n + 1)
    p = [0] * (n + 1)
    way = [0] * (n + 1)

    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [inf] * (n + 1)
        used = [False] * (n + 1)

        while True:
            used[j0] = True
            i0 = p[j0]
            row = rows[i0 - 1]
            delta = inf
            j1 = 0

            for j in range(1, n + 1):
                if not used[j]:
                    cur = row[j - 1] - u[i0] - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j

            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta

            j0 = j1
            if p[j0] == 0:
                break

        # Flip assignments along the augmenting path
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break

    assignment = [-1] * n
    for j in range(1, n + 1):
        assignment[p[j] - 1] = j - 1
    return assignment


def _matching(cost: CostMatrix, assignment: Sequence[int]) -> Matching:
    total = sum(cost.numerators[i][j] for i, j in enumerate(assignment))
    return Matching(tuple(assignment), Fraction(total, cost.denominator))


def solve_min_assignment(cost: CostMatrix) -> Matching:
    """
    Find a permutation of minimum total cost.

    On ties the returned permutation is unspecified; only the total cost is.

    :param cost: Square cost matrix.
    :returns: An optimal :class:`Matching`.
    :raises ValueError: If the matrix is empty.
    """
    _check_size(cost)
    return _matching(cost, _hungarian(cost.numerators))


def solve_max_assignment(cost: CostMatrix) -> Matching:
    """
    Find a permutation of maximum total cost.

    Solved as the minimum assignment of ``max entry - cost``.

    :param cost: Square cost matrix.
    :returns: An optimal :class:`Matching`.
    :raises ValueError: If the matrix is empty.
    """
    _check_size(cost)
    top = max(max(row) for row in cost.numerators)
    flipped = [[top - e for e in row] for row in cost.numerators]
    return _matching(cost, _hungarian(flipped))


def brute_force_assignment(
    cost: CostMatrix, mode: Union[AssignmentMode, str] = AssignmentMode.MIN
) -> Matching:
    """
    Enumerate all n! permutations; the reference oracle for the fast solvers.

    :param cost: Square cost matrix with n <= 9.
    :param mode: ``min`` or ``max``.
    :returns: The first optimal permutation in lexicographic order.
    :raises ValueError: If n is 0 or above the brute-force limit.
    """
    mode = AssignmentMode(mode)
    _check_size(cost)
    if cost.n > BRUTE_FORCE_LIMIT:
        raise ValueError(
            f"Brute force is limited to n <= {BRUTE_FORCE_LIMIT}, got n = {cost.n}"
        )

    rows = cost.numerators
    best: Optional[Tuple[int, ...]] = None
    best_total = 0
    for perm in permutations(range(cost.n)):
        total = sum(rows[i][j] for i, j in enumerate(perm))
        if (
            best is None
            or (mode == AssignmentMode.MIN and total < best_total)
            or (mode == AssignmentMode.MAX and total > best_total)
        ):
            best, best_total = perm, total
    return Matching(best, Fraction(best_total, cost.denominator))  # type: ignore


def cost_matrix_from_points(
    xs: Sequence, ys: Sequence, distance: Callable[[object, object], Fraction]
) -> CostMatrix:
    """Build the matrix ``distance(xs[i], ys[j])``."""
    _check_lengths(xs, ys)
    return CostMatrix.from_entries([[distance(x, y) for y in ys] for x in xs])


#
# One-dimensional fast paths
#


def solve_sorted_line(
    xs: Sequence[RationalLike], ys: Sequence[RationalLike], maximize: bool = False
) -> Matching:
    """
    Optimal assignment for the cost ``|x - y|`` on the line.

    Pairing both sequences by rank is optimal for the minimum; pairing the
    ascending xs with the descending ys is optimal for the maximum.

    :param xs: Row points.
    :param ys: Column points.
    :param maximize: Whether to maximize instead of minimize.
    :returns: An optimal :class:`Matching` (rows are xs, columns are ys).
    :raises ValueError: On length mismatch or empty input.
    """
    n = _check_lengths(xs, ys)
    values, den = scale_to_integers([to_fraction(v) for v in list(xs) + list(ys)])
    a, b = values[:n], values[n:]

    order_a = sorted(range(n), key=a.__getitem__)
    order_b = sorted(range(n), key=b.__getitem__, reverse=maximize)

    perm = [0] * n
    total = 0
    for i, j in zip(order_a, order_b):
        perm[i] = j
        total += abs(a[i] - b[j])
    return Matching(tuple(perm), Fraction(total, den))


def _arc(a: int, b: int, den: int) -> int:
    d = abs(a - b)
    return min(d, den - d)


def _circle_transport_optimum(sa: List[int], sb: List[int], den: int) -> Tuple[int, int]:
    """
    Exact optimal circle transport cost between two equal-size point sets.

    The cost is the integral of ``|H(t) - theta|`` where ``H`` counts points of
    ``sa`` minus points of ``sb`` in [0, t] and ``theta`` is a length-weighted
    median of ``H``.

    :returns: Tuple of (cost numerator over ``den``, theta).
    """
    events = sorted([(p, 1) for p in sa] + [(p, -1) for p in sb])
    segments = []
    h = 0
    prev = 0
    i = 0
    while i < len(events):
        pos = events[i][0]
        if pos > prev:
            segments.append((h, pos - prev))
        while i < len(events) and events[i][0] == pos:
            h += events[i][1]
            i += 1
        prev = pos
    if den > prev:
        segments.append((h, den - prev))

    weight = 0
    theta = 0
    for level, length in sorted(segments):
        weight += length
        if 2 * weight >= den:
            theta = level
            break
    return sum(length * abs(level - theta) for level, length in segments), theta


def _circle_min(a: List[int], b: List[int], den: int) -> Tuple[List[int], int]:
    n = len(a)
    order_a = sorted(range(n), key=a.__getitem__)
    order_b = sorted(range(n), key=b.__getitem__)
    sa = [a[i] for i in order_a]
    sb = [b[j] for j in order_b]

    optimum, theta = _circle_transport_optimum(sa, sb, den)

    def offset_cost(k: int) -> int:
        return sum(_arc(sa[i], sb[(i + k) % n], den) for i in range(n))

    def offset_perm(k: int) -> List[int]:
        perm = [0] * n
        for i in range(n):
            perm[order_a[i]] = order_b[(i + k) % n]
        return perm

    for k in dict.fromkeys((theta % n, -theta % n)):
        if offset_cost(k) == optimum:
            return offset_perm(k), optimum

    logger.debug("Circle offset guess missed the optimum (n=%d); scanning all offsets", n)
    best_k = min(range(n), key=offset_cost)
    best = offset_cost(best_k)
    if best == optimum:
        return offset_perm(best_k), best

    logger.debug("No cyclic offset attains the circle optimum (n=%d); using general solver", n)
    assignment = _hungarian([[_arc(x, y, den) for y in b] for x in a])
    return assignment, sum(_arc(a[i], b[j], den) for i, j in enumerate(assignment))


def solve_sorted_circle(
    xs: Sequence[RationalLike],
    ys: Sequence[RationalLike],
    maximize: bool = False,
    verify: bool = False,
) -> Matching:
    """
    Optimal assignment for the geodesic circle cost ``min(|x - y|, 1 - |x - y|)``.

    Some cyclic offset of the rank pairing is optimal. The optimum itself is
    computed independently as an integral, so the offset pairing is only
    returned once its cost meets that lower bound; otherwise the general
    solver is used. The maximum uses ``d(a, b + 1/2) = 1/2 - d(a, b)``.

    :param xs: Row coordinates in [0, 1).
    :param ys: Column coordinates in [0, 1).
    :param maximize: Whether to maximize instead of minimize.
    :param verify: Re-check the total cost against the general solver.
    :returns: An optimal :class:`Matching`.
    :raises ValueError: On length mismatch, empty input or coordinates outside [0, 1).
    :raises InvariantError: If ``verify`` is set and the general solver disagrees.
    """
    n = _check_lengths(xs, ys)
    coords = [to_fraction(v) for v in list(xs) + list(ys)]
    if any(not 0 <= c < 1 for c in coords):
        raise ValueError("Circle coordinates must lie in [0, 1)")

    values, den = scale_to_integers(coords)
    if maximize and den % 2:
        values, den = [2 * v for v in values], 2 * den
    a, b = values[:n], values[n:]
    if maximize:
        b = [(y + den // 2) % den for y in b]

    perm, total = _circle_min(a, b, den)
    if maximize:
        total = n * (den // 2) - total
    ret = Matching(tuple(perm), Fraction(total, den))

    if verify:
        matrix = CostMatrix(
            tuple(tuple(_arc(x, y, den) for y in values[n:]) for x in values[:n]), den
        )
        check = solve_max_assignment(matrix) if maximize else solve_min_assignment(matrix)
        if check.total_cost != ret.total_cost:
            raise InvariantError(
                f"Circle fast path gave {ret.total_cost}, general solver {check.total_cost}"
            )
    return ret


#
# Threshold matching
#


class _NextAlive:
    """Find the next non-removed index at or after i, with path compression."""

    def __init__(self, size: int):
        self.parent = list(range(size + 1))

    def find(self, i: int) -> int:
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:
            nxt = self.parent[i]
            self.parent[i] = root
            i = nxt
        return root

    def remove(self, i: int):
        self.parent[i] = i + 1


def maximum_matching_size(
    n_left: int, n_right: int, neighbors: Callable[[int], Sequence[Range]]
) -> int:
    """
    Hopcroft-Karp maximum bipartite matching on range-described neighbourhoods.

    The neighbours of left vertex ``u`` are the right vertices in the half-open
    index ranges ``neighbors(u)``. Every right vertex is scanned at most once
    per breadth-first and once per depth-first pass, so a phase costs
    O((n + ranges) log n) regardless of the number of edges.

    :param n_left: Number of left vertices.
    :param n_right: Number of right vertices.
    :param neighbors: Function returning the neighbour ranges of a left vertex.
    :returns: Size of a maximum matching.
    """
    ranges = [
        [(max(lo, 0), min(hi, n_right)) for lo, hi in neighbors(u) if max(lo, 0) < min(hi, n_right)]
        for u in range(n_left)
    ]
    match_l = [-1] * n_left
    match_r = [-1] * n_right

    # Greedy warm start
    free = _NextAlive(n_right)
    size = 0
    for u in range(n_left):
        for lo, hi in ranges[u]:
            v = free.find(lo)
            if v < hi:
                match_l[u], match_r[v] = v, u
                free.remove(v)
                size += 1
                break

    while size < min(n_left, n_right):
        # Breadth-first layering; layers[k] holds the right vertices first
        # reached from left layer k
        unseen = _NextAlive(n_right)
        frontier = [u for u in range(n_left) if match_l[u] == -1]
        layers: List[List[int]] = []
        found = False
        while frontier and not found:
            reached = []
            next_frontier = []
            for u in frontier:
                for lo, hi in ranges[u]:
                    v = unseen.find(lo)
                    while v < hi:
                        unseen.remove(v)
                        reached.append(v)
                        if match_r[v] == -1:
                            found = True
                        else:
                            next_frontier.append(match_r[v])
                        v = unseen.find(v + 1)
            reached.sort()
            layers.append(reached)
            frontier = next_frontier
        if not found:
            break

        # Depth-first augmentation along the layers; explored right vertices
        # are removed, so each is tried once per phase
        last = len(layers) - 1
        alive = [_NextAlive(len(layer)) for layer in layers]
        for root in range(n_left):
            if match_l[root] != -1:
                continue
            stack_u = [root]
            stack_it = [0]
            stack_v: List[int] = []
            while stack_u:
                k = len(stack_u) - 1
                u = stack_u[-1]
                layer = layers[k]
                candidate = -1
                while stack_it[-1] < len(ranges[u]):
                    lo, hi = ranges[u][stack_it[-1]]
                    idx = alive[k].find(bisect_left(layer, lo))
                    if idx < len(layer) and layer[idx] < hi:
                        alive[k].remove(idx)
                        candidate = layer[idx]
                        break
                    stack_it[-1] += 1
                if candidate == -1:
                    stack_u.pop()
                    stack_it.pop()
                    if stack_v:
                        stack_v.pop()
                    continue
                if match_r[candidate] == -1:
                    stack_v.append(candidate)
                    for u_j, v_j in zip(stack_u, stack_v):
                        match_l[u_j] = v_j
                        match_r[v_j] = u_j
                    size += 1
                    break
                if k < last:
                    stack_u.append(match_r[candidate])
                    stack_it.append(0)
                    stack_v.append(candidate)

    return size


def _runs(flags: Sequence[bool]) -> List[Range]:
    ret = []
    start = -1
    for j, flag in enumerate(flags):
        if flag and start < 0:
            start = j
        elif not flag and start >= 0:
            ret.append((start, j))
            start = -1
    if start >= 0:
        ret.append((start, len(flags)))
    return ret


def min_exceedance_count(cost: CostMatrix, threshold: RationalLike) -> int:
    """
    Minimum over permutations of the number of selected entries above ``threshold``.

    Equals ``n - M`` where M is a maximum matching of the graph with an edge
    wherever the cost is at most the threshold.

    :param cost: Square cost matrix.
    :param threshold: Non-negative threshold.
    :returns: The minimum exceedance count.
    :raises ValueError: If the threshold is negative.
    """
    threshold = to_fraction(threshold)
    if threshold < 0:
        raise ValueError("Threshold must be non-negative")
    # entry <= threshold  <=>  numerator <= floor(threshold * denominator)
    limit = floor(threshold * cost.denominator)
    rows = [_runs([e <= limit for e in row]) for row in cost.numerators]
    return cost.n - maximum_matching_size(cost.n, cost.n, rows.__getitem__)


def line_exceedance_count(
    xs: Sequence[RationalLike], ys: Sequence[RationalLike], threshold: RationalLike
) -> int:
    """
    :func:`min_exceedance_count` for the cost ``|x - y|``, by a greedy sweep.

    :raises ValueError: On length mismatch or a negative threshold.
    """
    n = _check_lengths(xs, ys)
    eps = to_fraction(threshold)
    if eps < 0:
        raise ValueError("Threshold must be non-negative")
    a = sorted(to_fraction(x) for x in xs)
    b = sorted(to_fraction(y) for y in ys)

    i = j = matched = 0
    while i < n and j < n:
        if b[j] < a[i] - eps:
            j += 1
        elif b[j] > a[i] + eps:
            i += 1
        else:
            matched += 1
            i += 1
            j += 1
    return n - matched


def circle_exceedance_count(
    xs: Sequence[RationalLike], ys: Sequence[RationalLike], threshold: RationalLike
) -> int:
    """
    :func:`min_exceedance_count` for the geodesic circle cost.

    Each x is adjacent to the ys on the arc [x - threshold, x + threshold],
    which is at most two ranges of the sorted ys.

    :raises ValueError: On length mismatch or a negative threshold.
    """
    n = _check_lengths(xs, ys)
    eps = to_fraction(threshold)
    if eps < 0:
        raise ValueError("Threshold must be non-negative")
    if 2 * eps >= 1:
        return 0

    values, den = scale_to_integers([to_fraction(v) for v in list(xs) + list(ys)] + [eps])
    a, b, t = values[:n], sorted(values[n : 2 * n]), values[-1]

    def arc_ranges(u: int) -> List[Range]:
        lo, hi = a[u] - t, a[u] + t
        if lo < 0:
            return [(0, bisect_right(b, hi)), (bisect_left(b, lo + den), n)]
        if hi >= den:
            return [(bisect_left(b, lo), n), (0, bisect_right(b, hi - den))]
        return [(bisect_left(b, lo), bisect_right(b, hi))]

    return n - maximum_matching_size(n, n, arc_ranges)


#
# Joint visits
#


def _check_counts(a_count: int, b_count: int, n: int):
    if n < 0:
        raise ValueError("n must be non-negative")
    if not (0 <= a_count <= n and 0 <= b_count <= n):
        raise ValueError(f"Visit counts ({a_count}, {b_count}) must lie in [0, {n}]")


def min_joint_visit_count(a_count: int, b_count: int, n: int) -> int:
    """
    Minimum over bijections of {1..n} of #{i in A : sigma(i) in B}.

    :param a_count: |A|.
    :param b_count: |B|.
    :param n: Size of the index set.
    :returns: ``max(0, a_count + b_count - n)``.
    :raises ValueError: If a count is negative or exceeds n.
    """
    _check_counts(a_count, b_count, n)
    return max(0, a_count + b_count - n)


def max_joint_visit_count(a_count: int, b_count: int, n: int) -> int:
    """Maximum counterpart of :func:`min_joint_visit_count`: ``min(a_count, b_count)``."""
    _check_counts(a_count, b_count, n)
    return min(a_count, b_count)
