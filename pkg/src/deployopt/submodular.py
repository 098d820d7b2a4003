"""Set-function maximization core: sequential greedy under cardinality and
partition constraints, an exhaustive oracle, and monotonicity/submodularity
checkers.

Greedy ties are broken toward the lowest candidate index so every run is
reproducible. Function evaluations are memoized per instance since marginal
computations revisit subsets heavily.
"""

from __future__ import annotations

import abc
import heapq
import itertools
import math
import random
from dataclasses import dataclass

from .errors import (
    ElementAlreadyInSet,
    InstanceTooLarge,
    InvalidConstraint,
    InvalidK,
)

PROPERTY_TOL = 1e-9
BRUTE_FORCE_LIMIT = 10**6
GUARANTEE_CARDINALITY = "1-1/e"
GUARANTEE_PARTITION = "1/2"


class SetFunction(abc.ABC):
    """Deterministic set function over an integer ground set.

    Subclasses implement ``_evaluate`` on a frozenset of element ids;
    ``evaluate`` adds memoization and ``marginal`` the discrete derivative
    f(S + s) - f(S).
    """

    def __init__(self):
        self._cache: dict[frozenset, float] = {}
        self.marginal_calls = 0

    @abc.abstractmethod
    def _evaluate(self, subset: frozenset) -> float: ...

    def evaluate(self, subset) -> float:
        key = frozenset(subset)
        if key not in self._cache:
            self._cache[key] = float(self._evaluate(key))
        return self._cache[key]

    def marginal(self, subset, element) -> float:
        s = frozenset(subset)
        if element in s:
            raise ElementAlreadyInSet(f"element {element} already selected")
        self.marginal_calls += 1
        return self.evaluate(s | {element}) - self.evaluate(s)


class ModularFunction(SetFunction):
    """f(S) = sum of fixed per-element weights; the simplest sanity case."""

    def __init__(self, weights):
        super().__init__()
        self.weights = list(weights)

    def _evaluate(self, subset):
        return sum(self.weights[i] for i in subset)


@dataclass(frozen=True)
class PartitionConstraint:
    """Per-block selection quotas: at most quota[i] elements from block[i]."""

    blocks: tuple[frozenset, ...]
    quotas: tuple[int, ...]

    def __post_init__(self):
        blocks = tuple(frozenset(b) for b in self.blocks)
        quotas = tuple(int(q) for q in self.quotas)
        if len(blocks) != len(quotas) or not blocks:
            raise InvalidConstraint("blocks and quotas must be nonempty and aligned")
        for i, (b, q) in enumerate(zip(blocks, quotas)):
            if q < 1:
                raise InvalidConstraint(f"quota of block {i} must be >= 1, got {q}")
            if len(b) <= q:
                raise InvalidConstraint(f"block {i} needs more candidates ({len(b)}) than its quota ({q})")
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "quotas", quotas)

    @property
    def total(self) -> int:
        return sum(self.quotas)

    def ground_set(self) -> frozenset:
        return frozenset().union(*self.blocks)

    def validate_cover(self, ground) -> None:
        missing = frozenset(ground) - self.ground_set()
        if missing:
            raise InvalidConstraint(f"blocks do not cover the ground set; missing {sorted(missing)}")


@dataclass(frozen=True)
class GreedyResult:
    selected: tuple[int, ...]
    gains: tuple[float, ...]
    value: float
    guarantee: str
    evaluations: int

    def to_json(self) -> dict:
        return {
            "selected": list(self.selected),
            "gains": list(self.gains),
            "value": self.value,
            "guarantee": self.guarantee,
            "evaluations": self.evaluations,
        }


def marginal(f: SetFunction, subset, element) -> float:
    return f.marginal(subset, element)


def greedy_cardinality(f: SetFunction, ground, k: int, lazy: bool = False) -> GreedyResult:
    """Sequential greedy for max f(S) s.t. |S| <= k.

    ``lazy`` switches to the stale-marginal priority queue accelerator; it is
    only valid when f is submodular and is therefore off by default.
    """
    ground = sorted(ground)
    if not 1 <= k <= len(ground):
        raise InvalidK(f"k must satisfy 1 <= k <= {len(ground)}, got {k}")
    calls_before = f.marginal_calls
    if lazy:
        selected, gains = _lazy_greedy(f, ground, k)
    else:
        selected, gains = _plain_greedy(f, ground, k)
    return GreedyResult(
        selected=tuple(selected),
        gains=tuple(gains),
        value=f.evaluate(selected),
        guarantee=GUARANTEE_CARDINALITY,
        evaluations=f.marginal_calls - calls_before,
    )


def _plain_greedy(f: SetFunction, ground: list, k: int):
    selected: list = []
    gains: list[float] = []
    chosen = set()
    for _ in range(k):
        best_el = None
        best_gain = -math.inf
        for el in ground:
            if el in chosen:
                continue
            g = f.marginal(selected, el)
            if g > best_gain:
                best_gain = g
                best_el = el
        selected.append(best_el)
        chosen.add(best_el)
        gains.append(best_gain)
    return selected, gains


def _lazy_greedy(f: SetFunction, ground: list, k: int):
    # Heap entries (-stale_gain, element, round_computed); a popped entry is
    # final once its gain was computed in the current round.
    heap = [(-f.marginal([], el), el, 1) for el in ground]
    heapq.heapify(heap)
    selected: list = []
    gains: list[float] = []
    for round_no in range(1, k + 1):
        while True:
            neg_gain, el, computed = heapq.heappop(heap)
            if computed == round_no:
                selected.append(el)
                gains.append(-neg_gain)
                break
            heapq.heappush(heap, (-f.marginal(selected, el), el, round_no))
    return selected, gains


def greedy_partition(f: SetFunction, constraint: PartitionConstraint) -> GreedyResult:
    """Sequential greedy over ordered blocks: quota[i] picks restricted to
    block[i] minus everything selected so far."""
    calls_before = f.marginal_calls
    selected: list = []
    gains: list[float] = []
    chosen = set()
    for block, quota in zip(constraint.blocks, constraint.quotas):
        pool = sorted(block)
        for _ in range(quota):
            best_el = None
            best_gain = -math.inf
            for el in pool:
                if el in chosen:
                    continue
                g = f.marginal(selected, el)
                if g > best_gain:
                    best_gain = g
                    best_el = el
            if best_el is None:
                raise InvalidConstraint("block exhausted before reaching its quota")
            selected.append(best_el)
            chosen.add(best_el)
            gains.append(best_gain)
    return GreedyResult(
        selected=tuple(selected),
        gains=tuple(gains),
        value=f.evaluate(selected),
        guarantee=GUARANTEE_PARTITION,
        evaluations=f.marginal_calls - calls_before,
    )


def _feasible_sets_cardinality(ground: list, k: int):
    for size in range(k + 1):
        for combo in itertools.combinations(ground, size):
            yield combo


def _feasible_sets_partition(ground: list, constraint: PartitionConstraint):
    blocks = [sorted(b) for b in constraint.blocks]
    disjoint = sum(len(b) for b in blocks) == len(set().union(*blocks))
    if disjoint:
        per_block = [
            [c for size in range(q + 1) for c in itertools.combinations(b, size)]
            for b, q in zip(blocks, constraint.quotas)
        ]
        for parts in itertools.product(*per_block):
            yield tuple(sorted(itertools.chain.from_iterable(parts)))
    else:
        for size in range(constraint.total + 1):
            for combo in itertools.combinations(ground, size):
                s = set(combo)
                if all(len(s & b) <= q for b, q in zip(constraint.blocks, constraint.quotas)):
                    yield combo


def _count_cardinality(n: int, k: int) -> int:
    return sum(math.comb(n, j) for j in range(k + 1))


def brute_force(f: SetFunction, ground, constraint) -> tuple[tuple, float]:
    """Exact maximizer by exhaustive enumeration; ties resolve to the
    lexicographically smallest index tuple."""
    ground = sorted(ground)
    if isinstance(constraint, PartitionConstraint):
        bound = math.prod(_count_cardinality(len(b), q) for b, q in zip(constraint.blocks, constraint.quotas))
        if bound > BRUTE_FORCE_LIMIT:
            raise InstanceTooLarge(f"about {bound} feasible sets exceeds the {BRUTE_FORCE_LIMIT} guard")
        candidates = set(_feasible_sets_partition(ground, constraint))
    else:
        k = int(constraint)
        if not 1 <= k <= len(ground):
            raise InvalidK(f"k must satisfy 1 <= k <= {len(ground)}, got {k}")
        if _count_cardinality(len(ground), k) > BRUTE_FORCE_LIMIT:
            raise InstanceTooLarge(f"C({len(ground)}, <={k}) exceeds the {BRUTE_FORCE_LIMIT} guard")
        candidates = _feasible_sets_cardinality(ground, k)
    best_set: tuple = ()
    best_val = -math.inf
    for combo in sorted(candidates):
        v = f.evaluate(combo)
        if v > best_val:
            best_val = v
            best_set = combo
    return best_set, best_val


@dataclass(frozen=True)
class PropertyReport:
    monotone_violations: int
    submodular_violations: int
    checks: int

    @property
    def clean(self) -> bool:
        return self.monotone_violations == 0 and self.submodular_violations == 0


def check_properties(f: SetFunction, ground, trials: int = 200, seed: int = 0) -> PropertyReport:
    """Count monotonicity and diminishing-returns violations of f.

    Ground sets of size <= 8 are checked exhaustively over every nested pair
    S subset-of R and every element outside R; larger ground sets sample
    ``trials`` random chains.
    """
    ground = sorted(ground)
    n = len(ground)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if n <= 8:
        return _check_exhaustive(f, ground)
    return _check_sampled(f, ground, trials, seed)


def _check_exhaustive(f: SetFunction, ground: list) -> PropertyReport:
    n = len(ground)
    values = {}
    for mask in range(1 << n):
        subset = frozenset(ground[i] for i in range(n) if mask >> i & 1)
        values[mask] = f.evaluate(subset)
    mono = 0
    sub = 0
    checks = 0
    full = (1 << n) - 1
    for r_mask in range(1 << n):
        s_mask = r_mask
        while True:
            s_mask = (s_mask - 1) & r_mask
            if s_mask == r_mask:
                break
            checks += 1
            if values[s_mask] > values[r_mask] + PROPERTY_TOL:
                mono += 1
            rest = full & ~r_mask
            i = 0
            rem = rest
            while rem:
                if rem & 1:
                    bit = 1 << i
                    gain_s = values[s_mask | bit] - values[s_mask]
                    gain_r = values[r_mask | bit] - values[r_mask]
                    checks += 1
                    if gain_s < gain_r - PROPERTY_TOL:
                        sub += 1
                rem >>= 1
                i += 1
            if s_mask == 0:
                break
    return PropertyReport(mono, sub, checks)


def _check_sampled(f: SetFunction, ground: list, trials: int, seed: int) -> PropertyReport:
    rng = random.Random(seed)
    n = len(ground)
    mono = 0
    sub = 0
    checks = 0
    for _ in range(trials):
        r_size = rng.randint(1, n - 1)
        r = rng.sample(ground, r_size)
        s = rng.sample(r, rng.randint(0, len(r) - 1))
        outside = [el for el in ground if el not in r]
        el = rng.choice(outside)
        fs = f.evaluate(s)
        fr = f.evaluate(r)
        checks += 2
        if fs > fr + PROPERTY_TOL:
            mono += 1
        if f.evaluate(set(s) | {el}) - fs < f.evaluate(set(r) | {el}) - fr - PROPERTY_TOL:
            sub += 1
    return PropertyReport(mono, sub, checks)
