"""Lattice points on circles |xi|^2 = lambda and exhaustive correlation searches.

The searches behind the correlation, semi-correlation and Lambda(p) conditions
all reduce to one question: which multisets of ``k`` vectors drawn (with
repetition) from a finite set of integer vectors sum to zero, and which of
those are *not* a perfect pairing into ``(v, -v)``. Small searches enumerate
multisets directly; large ones hash half-sums and join them (meet in the
middle).
"""

import logging
import math
from collections import Counter, defaultdict
from collections.abc import Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from itertools import combinations_with_replacement
from typing import Literal

import numpy as np
from scipy.spatial import cKDTree

from nodal_lab.errors import BudgetExceededError, ConsistencyError, InvalidInputError
from nodal_lab.models import (
    Axis,
    CorrelationReport,
    LatticeCircle,
    LatticePoint,
    ScanEntry,
    ScanReport,
)

logger = logging.getLogger(__name__)

DEFAULT_BUDGET = 10**9
MITM_THRESHOLD = 10**8

Resolved = Literal["direct", "meet-in-the-middle"]
Strategy = Literal["auto", "direct", "meet-in-the-middle"]
Vector = tuple[int, ...]


# =============================================================================
# Sums of two squares
# =============================================================================


def factorize(n: int) -> dict[int, int]:
    """Prime factorisation by trial division up to sqrt(n)."""
    if n < 1:
        raise InvalidInputError(f"cannot factorise {n}")
    factors: dict[int, int] = {}
    while n % 2 == 0:
        factors[2] = factors.get(2, 0) + 1
        n //= 2
    p = 3
    while p * p <= n:
        while n % p == 0:
            factors[p] = factors.get(p, 0) + 1
            n //= p
        p += 2
    if n > 1:
        factors[n] = factors.get(n, 0) + 1
    return factors


def is_sum_of_two_squares(n: int) -> bool:
    """True iff every prime = 3 (mod 4) divides n to an even power."""
    if n < 1:
        raise InvalidInputError(f"expected a positive integer, got {n}")
    return all(e % 2 == 0 for p, e in factorize(n).items() if p % 4 == 3)


def divisors(n: int) -> list[int]:
    """All positive divisors of n, ascending."""
    divs = [1]
    for p, e in factorize(n).items():
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def r2_divisor_formula(n: int) -> int:
    """r_2(n) = 4 (d_1(n) - d_3(n))."""
    d1 = d3 = 0
    for d in divisors(n):
        if d % 4 == 1:
            d1 += 1
        elif d % 4 == 3:
            d3 += 1
    return 4 * (d1 - d3)


def _enumerate_points(n: int) -> list[LatticePoint]:
    points: set[LatticePoint] = set()
    for a in range(math.isqrt(n) + 1):
        rest = n - a * a
        b = math.isqrt(rest)
        if b * b == rest:
            for sa in (a, -a):
                for sb in (b, -b):
                    points.add(LatticePoint(sa, sb))
    return sorted(points, key=lambda p: p.angle)


def lattice_points(lam: int) -> LatticeCircle:
    """Exactly {(a, b) in Z^2 : a^2 + b^2 = lam}, sorted by angle in [0, 2pi)."""
    if lam < 1:
        raise InvalidInputError(f"lambda must be >= 1, got {lam}")
    return LatticeCircle(lambda_=lam, points=_enumerate_points(lam))


def multiplicity(lam: int) -> int:
    """N(lambda), from the divisor identity and cross-checked by enumeration."""
    if lam < 1:
        raise InvalidInputError(f"lambda must be >= 1, got {lam}")
    by_formula = r2_divisor_formula(lam)
    by_count = len(_enumerate_points(lam))
    if by_formula != by_count:
        raise ConsistencyError(
            f"r_2({lam}): divisor formula gives {by_formula}, enumeration {by_count}"
        )
    return by_formula


def require_eigenvalue(lam: int) -> LatticeCircle:
    """Lattice circle of lam, or InvalidInputError when lam is not in S."""
    if lam < 1 or not is_sum_of_two_squares(lam):
        raise InvalidInputError(f"{lam} is not a sum of two squares")
    return lattice_points(lam)


# =============================================================================
# Zero-sum multiset search
# =============================================================================


def is_trivial(values: Iterable[Vector]) -> bool:
    """True iff the multiset splits into pairs (v, -v)."""
    counts = Counter(values)
    for v, c in counts.items():
        neg = tuple(-x for x in v)
        if neg == v:
            if c % 2:
                return False
        elif counts.get(neg, 0) != c:
            return False
    return True


def _vsum(vectors: Sequence[Vector], combo: Iterable[int], dim: int) -> Vector:
    acc = [0] * dim
    for i in combo:
        v = vectors[i]
        for j in range(dim):
            acc[j] += v[j]
    return tuple(acc)


def _zero_sum_direct(vectors: Sequence[Vector], k: int) -> set[tuple[int, ...]]:
    dim = len(vectors[0])
    zero = (0,) * dim
    return {
        combo
        for combo in combinations_with_replacement(range(len(vectors)), k)
        if _vsum(vectors, combo, dim) == zero
    }


def _zero_sum_mitm(vectors: Sequence[Vector], k: int) -> set[tuple[int, ...]]:
    dim = len(vectors[0])
    left = k // 2
    right = k - left
    halves: dict[int, dict[Vector, list[tuple[int, ...]]]] = {}
    for size in {left, right}:
        table: dict[Vector, list[tuple[int, ...]]] = defaultdict(list)
        for combo in combinations_with_replacement(range(len(vectors)), size):
            table[_vsum(vectors, combo, dim)].append(combo)
        halves[size] = table
    found: set[tuple[int, ...]] = set()
    for s, combos in halves[left].items():
        partners = halves[right].get(tuple(-x for x in s))
        if not partners:
            continue
        for a in combos:
            for b in partners:
                found.add(tuple(sorted(a + b)))
    return found


def _pick_strategy(raw: int, strategy: Strategy, budget: int) -> Resolved:
    if raw > budget:
        raise BudgetExceededError(raw, budget, what="exhaustive tuple search")
    if raw > MITM_THRESHOLD:
        if strategy == "direct":
            logger.warning(
                "%d raw multisets exceed the direct-search limit %d; using meet-in-the-middle",
                raw,
                MITM_THRESHOLD,
            )
        return "meet-in-the-middle"
    return "direct" if strategy == "auto" else strategy


def _nontrivial_zero_sums(
    vectors: Sequence[Vector], k: int, strategy: Resolved
) -> list[tuple[Vector, ...]]:
    if not vectors:
        return []
    search = _zero_sum_mitm if strategy == "meet-in-the-middle" else _zero_sum_direct
    result = []
    for combo in search(vectors, k):
        tup = tuple(sorted((vectors[i] for i in combo), reverse=True))
        if not is_trivial(tup):
            result.append(tup)
    return sorted(set(result))


def _projected(circle: LatticeCircle, axis: Axis) -> list[Vector]:
    """Distinct projections as 1- or 2-vectors, ascending."""
    if axis is Axis.FIRST:
        return sorted({(p.x1,) for p in circle.points})
    if axis is Axis.SECOND:
        return sorted({(p.x2,) for p in circle.points})
    return sorted({(p.x1, p.x2) for p in circle.points})


def _check_ell(ell: int) -> None:
    if ell < 1:
        raise InvalidInputError(f"ell must be >= 1, got {ell}")


def _as_report_tuple(
    tup: tuple[Vector, ...], axis: Axis
) -> tuple[int, ...] | tuple[LatticePoint, ...]:
    if axis is Axis.FULL:
        return tuple(LatticePoint(*v) for v in tup)
    return tuple(v[0] for v in tup)


def _search(
    lam: int, ell: int, axis: Axis, budget: int, strategy: Strategy
) -> CorrelationReport:
    _check_ell(ell)
    circle = lattice_points(lam)
    raw = circle.multiplicity ** (2 * ell)
    chosen = _pick_strategy(raw, strategy, budget)
    tuples = _nontrivial_zero_sums(_projected(circle, axis), 2 * ell, chosen)
    logger.debug(
        "lambda=%d ell=%d axis=%s: %d nontrivial tuples (%s)",
        lam,
        ell,
        axis.value,
        len(tuples),
        chosen,
    )
    return CorrelationReport(
        lambda_=lam,
        ell=ell,
        axis=axis,
        nontrivial_tuples=[_as_report_tuple(t, axis) for t in tuples],
        strategy=chosen,
        raw_candidates=raw,
    )


def find_correlations(
    lam: int,
    ell: int,
    budget: int = DEFAULT_BUDGET,
    strategy: Strategy = "auto",
) -> CorrelationReport:
    """Nontrivial solutions of xi_1 + ... + xi_{2 ell} = 0 on |xi|^2 = lam."""
    if not is_sum_of_two_squares(lam):
        raise InvalidInputError(f"{lam} is not a sum of two squares")
    return _search(lam, ell, Axis.FULL, budget, strategy)


def find_semi_correlations(
    lam: int,
    ell: int,
    axis: Axis = Axis.FIRST,
    budget: int = DEFAULT_BUDGET,
    strategy: Strategy = "auto",
) -> CorrelationReport:
    """Nontrivial vanishing sums of 2 ell coordinate projections.

    Eigenvalues outside S give an empty report (there are no points to sum).
    """
    if axis is Axis.FULL:
        raise InvalidInputError("semi-correlations use the first or second axis")
    return _search(lam, ell, axis, budget, strategy)


def _half_sums(vectors: Sequence[Vector], size: int) -> np.ndarray:
    dim = len(vectors[0])
    sums = {
        _vsum(vectors, combo, dim)
        for combo in combinations_with_replacement(range(len(vectors)), size)
    }
    return np.array(sorted(sums), dtype=float).reshape(-1, dim)


def _min_nonzero_direct(vectors: Sequence[Vector], k: int) -> float | None:
    dim = len(vectors[0])
    best = math.inf
    for combo in combinations_with_replacement(range(len(vectors)), k):
        s = _vsum(vectors, combo, dim)
        norm = math.hypot(*s) if dim > 1 else abs(s[0])
        if 0 < norm < best:
            best = norm
    return None if best == math.inf else best


def _min_nonzero_mitm(vectors: Sequence[Vector], k: int) -> float | None:
    left = _half_sums(vectors, k // 2)
    right = _half_sums(vectors, k - k // 2)
    if left.shape[1] == 1:
        targets = -left[:, 0]
        pool = right[:, 0]
        idx = np.searchsorted(pool, targets)
        best = np.full(targets.shape, np.inf)
        for shift in (-1, 0, 1):
            j = np.clip(idx + shift, 0, len(pool) - 1)
            gap = np.abs(pool[j] - targets)
            gap[gap == 0] = np.inf
            best = np.minimum(best, gap)
        value = float(best.min())
    else:
        tree = cKDTree(right)
        kk = min(2, len(right))
        dist, _ = tree.query(-left, k=kk)
        dist = np.asarray(dist).reshape(len(left), kk)
        dist[dist == 0] = np.inf
        value = float(dist.min())
    return None if math.isinf(value) else value


def min_quasi_correlation(
    lam: int,
    ell: int,
    axis: Axis = Axis.FIRST,
    delta: float | None = None,
    budget: int = DEFAULT_BUDGET,
    strategy: Strategy = "auto",
) -> CorrelationReport:
    """Smallest nonzero |sum| over all 2 ell-multisets (coordinate or Euclidean)."""
    _check_ell(ell)
    circle = require_eigenvalue(lam)
    raw = circle.multiplicity ** (2 * ell)
    chosen = _pick_strategy(raw, strategy, budget)
    vectors = _projected(circle, axis)
    if chosen == "meet-in-the-middle":
        minimum = _min_nonzero_mitm(vectors, 2 * ell)
    else:
        minimum = _min_nonzero_direct(vectors, 2 * ell)
    if minimum is None:
        raise ConsistencyError(
            f"every {2 * ell}-tuple on lambda={lam} sums to zero along {axis.value}"
        )
    ratio = None if delta is None else minimum / lam ** (-0.5 + delta)
    return CorrelationReport(
        lambda_=lam,
        ell=ell,
        axis=axis,
        min_nonzero_abs=minimum,
        delta=delta,
        ratio_to_bound=ratio,
        strategy=chosen,
        raw_candidates=raw,
    )


# =============================================================================
# Lambda(p)-systems
# =============================================================================


def is_lambda_p_admissible(
    values: Iterable[int],
    p: int,
    budget: int = DEFAULT_BUDGET,
    strategy: Strategy = "auto",
) -> bool:
    """True iff every zero-sum p-multiset of ``values`` is a perfect pairing."""
    if p < 4 or p % 2:
        raise InvalidInputError(f"p must be an even integer >= 4, got {p}")
    distinct = sorted({(int(v),) for v in values})
    if not distinct:
        return True
    chosen = _pick_strategy(len(distinct) ** p, strategy, budget)
    return not _nontrivial_zero_sums(distinct, p, chosen)


def difference_set(values: Iterable[int]) -> list[int]:
    """D(V) = {n_i - n_j : i != j} over the distinct values of V."""
    distinct = sorted(set(values))
    return sorted({a - b for a in distinct for b in distinct if a != b})


def difference_multiplicity(values: Iterable[int]) -> int:
    """R(V): the largest number of ordered pairs sharing one nonzero difference."""
    distinct = sorted(set(values))
    counts = Counter(a - b for a in distinct for b in distinct if a != b)
    return max(counts.values(), default=0)


# =============================================================================
# Eigenvalue scan
# =============================================================================


def _scan_one(lam: int, ell: int, budget: int) -> bool | None:
    try:
        return any(
            find_semi_correlations(lam, ell, axis, budget=budget).has_nontrivial
            for axis in (Axis.FIRST, Axis.SECOND)
        )
    except BudgetExceededError:
        return None


def scan_admissible_eigenvalues(
    x_bound: int,
    ell: int,
    budget: int = DEFAULT_BUDGET,
    workers: int = 1,
) -> ScanReport:
    """Semi-correlation flags for every lambda <= x_bound in S.

    Results are merged in ascending lambda; a budget failure truncates the scan
    at the last completed eigenvalue.
    """
    _check_ell(ell)
    eigenvalues = [n for n in range(1, x_bound + 1) if is_sum_of_two_squares(n)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            flags = list(
                pool.map(
                    _scan_one,
                    eigenvalues,
                    [ell] * len(eigenvalues),
                    [budget] * len(eigenvalues),
                )
            )
    else:
        flags = [_scan_one(lam, ell, budget) for lam in eigenvalues]

    entries: list[ScanEntry] = []
    flagged = 0
    for lam, flag in zip(eigenvalues, flags, strict=True):
        if flag is None:
            logger.warning("scan truncated at lambda=%d: budget exceeded", lam)
            return ScanReport(x_bound=x_bound, ell=ell, entries=entries, truncated=True)
        flagged += flag
        entries.append(
            ScanEntry(
                lambda_=lam,
                has_nontrivial_semi_correlation=flag,
                running_density=flagged / (len(entries) + 1),
            )
        )
    return ScanReport(x_bound=x_bound, ell=ell, entries=entries)
