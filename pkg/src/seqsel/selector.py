"""Feature subset selection by information-criterion minimization.

Three engines minimize ``2 * (minimized loss sum) + F * m * (|S| + 1)``
over feature subsets S, with F = 2 (AIC) or log n (BIC):

* :func:`exhaustive_select` -- evaluates all 2^p subsets under the exact
  loss; the oracle the branch-and-bound engine is tested against.
* :func:`stepwise_warm_start` -- greedy forward addition, used to seed
  incumbents.
* :func:`branch_and_bound` -- best-first search branching on the in/out
  status of one feature at a time.  A node's relaxation fits the chosen
  surrogate with every not-yet-excluded feature active while the penalty
  counts only the fixed-in ones; both terms are monotone in the
  completion, so the relaxation is a valid lower bound for every subset
  reachable from the node.

Whatever surrogate drives the search, the reported criterion value is
always recomputed by an exact maximum-likelihood refit on the selected
subset; ``objval`` is the surrogate objective itself.  For the
piecewise-linear surrogate, objval at the optimum is a certified lower
bound on the best achievable criterion value.
"""

from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import dataclass, replace

import numpy as np

from .data import Dataset, OrdinalEncoding
from .estimator import FitResult, class_problems, fit_exact, fit_pwl, fit_quad
from .loss import TangentSet, default_tangents

EXHAUSTIVE_GUARD = 20
PRUNE_SLACK = 1e-9
MAX_OPEN_NODES = 1_000_000

_CRITERIA = ("aic", "bic")
_APPROX = ("exact", "quad", "pwl")


@dataclass(frozen=True)
class SelectionProblem:
    """A dataset plus every knob a selection engine needs."""

    data: Dataset
    encoding: OrdinalEncoding
    criterion: str = "aic"
    approx: str = "exact"
    tangents: TangentSet | None = None
    time_limit: float = 600.0
    tolerance: float = 1e-9

    def __post_init__(self):
        if self.criterion not in _CRITERIA:
            raise ValueError(f"criterion must be one of {_CRITERIA}")
        if self.approx not in _APPROX:
            raise ValueError(f"approx must be one of {_APPROX}")
        if self.approx == "pwl" and self.tangents is None:
            object.__setattr__(self, "tangents", default_tangents())

    @property
    def penalty(self) -> float:
        """F in the criterion: 2 for AIC, log n for BIC."""
        return 2.0 if self.criterion == "aic" else math.log(self.data.n)


@dataclass(frozen=True)
class Node:
    """A branch-and-bound node: a three-way partition of the features."""

    fixed_in: frozenset[int]
    fixed_out: frozenset[int]
    undecided: frozenset[int]
    bound: float


@dataclass(frozen=True)
class SelectionReport:
    """Outcome of one selection run, ready for serialization."""

    method: str
    direction: str
    criterion_name: str
    criterion_value: float
    objval: float
    lower_bound: float | None
    selected: tuple[int, ...]
    selected_names: tuple[str, ...]
    fits: tuple[FitResult, ...]
    n: int
    p: int
    m: int
    nodes: int
    incumbent_updates: int
    wall_time_s: float
    optimal: bool
    warnings: tuple[str, ...] = ()


def criterion_value(loss_sum: float, subset_size: int, m: int, penalty: float) -> float:
    """2 * loss_sum + F * m * (|S| + 1); loss_sum is the minimized loss."""
    return 2.0 * loss_sum + penalty * m * (subset_size + 1)


def _fit_subset(prob: SelectionProblem, subset, approx: str):
    """Fit all m class subproblems on ``subset``; returns (loss_sum, fits)."""
    fits = []
    for cp in class_problems(prob.data, prob.encoding, subset):
        if approx == "exact":
            fits.append(fit_exact(cp))
        elif approx == "quad":
            fits.append(fit_quad(cp))
        else:
            fits.append(fit_pwl(cp, prob.tangents))
    return sum(f.loss for f in fits), tuple(fits)


class _FitCache:
    """Memoizes subset fits within one engine run, keyed by feature set."""

    def __init__(self, prob: SelectionProblem, approx: str):
        self.prob = prob
        self.approx = approx
        self.store: dict[frozenset[int], tuple[float, tuple[FitResult, ...]]] = {}

    def __call__(self, subset: frozenset[int]):
        hit = self.store.get(subset)
        if hit is None:
            hit = _fit_subset(self.prob, subset, self.approx)
            self.store[subset] = hit
        return hit


def evaluate_subset(prob: SelectionProblem, subset):
    """Surrogate objective and exact-refit criterion for one subset.

    Returns ``(objval, criterion, fits)`` where ``fits`` are the exact
    maximum-likelihood refits reported alongside the criterion.
    """
    subset = frozenset(int(j) for j in subset)
    if not subset <= set(range(prob.data.p)):
        raise ValueError("subset contains out-of-range feature indices")
    m, pen = prob.data.m, prob.penalty
    surr_loss, surr_fits = _fit_subset(prob, subset, prob.approx)
    objval = criterion_value(surr_loss, len(subset), m, pen)
    if prob.approx == "exact":
        return objval, objval, surr_fits
    exact_loss, exact_fits = _fit_subset(prob, subset, "exact")
    return objval, criterion_value(exact_loss, len(subset), m, pen), exact_fits


def _final_report(
    prob: SelectionProblem,
    method: str,
    subset: frozenset[int],
    objval: float,
    lower_bound,
    nodes: int,
    incumbent_updates: int,
    started: float,
    optimal: bool,
    extra_warnings=(),
) -> SelectionReport:
    data = prob.data
    exact_loss, fits = _fit_subset(prob, subset, "exact")
    crit = criterion_value(exact_loss, len(subset), data.m, prob.penalty)
    warn = list(extra_warnings)
    for k, fit in enumerate(fits, start=1):
        if fit.box_active:
            warn.append(f"parameter box active in exact refit of class {k}")
        if not fit.converged:
            warn.append(f"exact refit of class {k} did not converge")
    sel = tuple(sorted(subset))
    return SelectionReport(
        method=method,
        direction=prob.encoding.direction,
        criterion_name=prob.criterion,
        criterion_value=crit,
        objval=objval,
        lower_bound=lower_bound,
        selected=sel,
        selected_names=tuple(data.feature_names[j] for j in sel),
        fits=fits,
        n=data.n,
        p=data.p,
        m=data.m,
        nodes=nodes,
        incumbent_updates=incumbent_updates,
        wall_time_s=time.monotonic() - started,
        optimal=optimal,
        warnings=tuple(warn),
    )


def exhaustive_select(prob: SelectionProblem) -> SelectionReport:
    """Evaluate every subset under the exact loss; the brute-force oracle.

    Ties are broken toward smaller subsets, then lexicographically
    smallest index sets, which is exactly the enumeration order.
    """
    p = prob.data.p
    if p > EXHAUSTIVE_GUARD:
        raise ValueError(
            f"exhaustive enumeration over p={p} > {EXHAUSTIVE_GUARD} features refused"
        )
    started = time.monotonic()
    m, pen = prob.data.m, prob.penalty
    best_val = math.inf
    best: frozenset[int] = frozenset()
    nodes = 0
    updates = 0
    for size in range(p + 1):
        for combo in itertools.combinations(range(p), size):
            subset = frozenset(combo)
            loss, _ = _fit_subset(prob, subset, "exact")
            val = criterion_value(loss, size, m, pen)
            nodes += 1
            if val < best_val:
                best_val = val
                best = subset
                updates += 1
    return _final_report(
        prob,
        "exhaustive",
        best,
        objval=best_val,
        lower_bound=best_val,
        nodes=nodes,
        incumbent_updates=updates,
        started=started,
        optimal=True,
    )


def stepwise_warm_start(
    prob: SelectionProblem,
    _cache: _FitCache | None = None,
    _deadline: float | None = None,
):
    """Greedy forward selection on the problem's surrogate objective.

    Adds the single feature that most lowers the objective until no
    addition lowers it; deterministic (index-order tie-break).  Returns
    the selected index set.
    """
    cache = _cache if _cache is not None else _FitCache(prob, prob.approx)
    p, m, pen = prob.data.p, prob.data.m, prob.penalty
    current: frozenset[int] = frozenset()
    loss, _ = cache(current)
    current_val = criterion_value(loss, 0, m, pen)
    while True:
        best_j = None
        best_val = current_val
        for j in range(p):
            if j in current:
                continue
            if _deadline is not None and time.monotonic() > _deadline:
                return set(current)
            cand = current | {j}
            loss, _ = cache(cand)
            val = criterion_value(loss, len(cand), m, pen)
            if val < best_val:
                best_val = val
                best_j = j
        if best_j is None:
            return set(current)
        current = current | {best_j}
        current_val = best_val


def branch_and_bound(prob: SelectionProblem) -> SelectionReport:
    """Best-first branch-and-bound over feature in/out decisions.

    The incumbent tracks the best *surrogate* objective; pruning discards
    nodes whose relaxation cannot beat it by more than the 1e-9 slack.
    Branches on the undecided feature with the largest per-class
    coefficient magnitude at the node relaxation, fixed-in child first.
    The node count is the number of nodes whose relaxation was computed.
    On hitting the time limit the incumbent is returned along with the
    best open bound; otherwise the report is flagged optimal.
    """
    started = time.monotonic()
    data = prob.data
    p, m, pen = data.p, data.m, prob.penalty
    cache = _FitCache(prob, prob.approx)
    method = f"bnb-{prob.approx}"

    deadline = started + prob.time_limit
    inc_set: frozenset[int] = frozenset()
    loss, _ = cache(inc_set)
    inc_val = criterion_value(loss, 0, m, pen)
    updates = 1
    warm = frozenset(stepwise_warm_start(prob, _cache=cache, _deadline=deadline))
    if warm:
        loss, _ = cache(warm)
        warm_val = criterion_value(loss, len(warm), m, pen)
        if warm_val < inc_val:
            inc_val, inc_set = warm_val, warm
            updates += 1

    def better(val, subset):
        if val < inc_val:
            return True
        return val == inc_val and (len(subset), tuple(sorted(subset))) < (
            len(inc_set),
            tuple(sorted(inc_set)),
        )

    all_features = frozenset(range(p))
    root_loss, _ = cache(all_features)
    root = Node(
        fixed_in=frozenset(),
        fixed_out=frozenset(),
        undecided=all_features,
        bound=criterion_value(root_loss, 0, m, pen),
    )
    nodes = 1
    heap: list[tuple[float, int, Node]] = []
    stack: list[tuple[float, int, Node]] = []  # depth-first overflow lane
    counter = itertools.count()
    timed_out = False
    best_open = None

    def push(entry):
        if len(heap) >= MAX_OPEN_NODES:
            stack.append(entry)
        else:
            heapq.heappush(heap, entry)

    if not root.undecided:
        if better(root.bound, root.fixed_in):
            inc_val, inc_set = root.bound, root.fixed_in
            updates += 1
    elif root.bound < inc_val - PRUNE_SLACK:
        push((root.bound, next(counter), root))

    while heap or stack:
        bound, _, node = stack.pop() if stack else heapq.heappop(heap)
        if time.monotonic() - started > prob.time_limit:
            timed_out = True
            best_open = bound
            break
        if bound >= inc_val - PRUNE_SLACK:
            continue
        union = node.fixed_in | node.undecided
        _, fits = cache(union)
        cols = sorted(union)
        pos = {j: q for q, j in enumerate(cols)}
        undecided = sorted(node.undecided)
        scores = np.zeros(len(undecided))
        for fit in fits:
            scores = np.maximum(scores, np.abs(fit.coefficients[[pos[j] for j in undecided]]))
        branch_j = undecided[int(np.argmax(scores))]

        for direction in ("in", "out"):
            if direction == "in":
                child = Node(
                    fixed_in=node.fixed_in | {branch_j},
                    fixed_out=node.fixed_out,
                    undecided=node.undecided - {branch_j},
                    bound=0.0,
                )
                child_loss = cache(child.fixed_in | child.undecided)[0]
            else:
                child = Node(
                    fixed_in=node.fixed_in,
                    fixed_out=node.fixed_out | {branch_j},
                    undecided=node.undecided - {branch_j},
                    bound=0.0,
                )
                child_loss = cache(child.fixed_in | child.undecided)[0]
            child = replace(
                child,
                bound=criterion_value(child_loss, len(child.fixed_in), m, pen),
            )
            nodes += 1
            if not child.undecided:
                if better(child.bound, child.fixed_in):
                    inc_val, inc_set = child.bound, child.fixed_in
                    updates += 1
            elif child.bound < inc_val - PRUNE_SLACK:
                push((child.bound, next(counter), child))

    if timed_out:
        open_bounds = [best_open] + [entry[0] for entry in heap + stack]
        lower = min(min(open_bounds), inc_val)
        optimal = False
        warn = (f"time limit {prob.time_limit:g}s reached; incumbent returned",)
    else:
        lower = inc_val
        optimal = True
        warn = ()
    return _final_report(
        prob,
        method,
        inc_set,
        objval=inc_val,
        lower_bound=lower,
        nodes=nodes,
        incumbent_updates=updates,
        started=started,
        optimal=optimal,
        extra_warnings=warn,
    )
