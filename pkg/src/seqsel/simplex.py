"""Dense two-phase simplex solver for box-constrained linear programs.

Solves ``minimize c.x  subject to  A x >= b,  lower <= x <= upper`` with
finite bounds on every variable.  The solver is written for exact,
reproducible vertex answers on the small/medium dense problems produced by
the piecewise-linear estimator, not for sparse large-scale work:

* deterministic pivoting -- Dantzig entering with lowest-index ties, the
  leaving row always tie-broken by lowest basis index; after a stall the
  solver switches to Bland's rule outright, which cannot cycle;
* bounds are eliminated by shifting to the nonnegative orthant and adding
  explicit upper-bound rows, so the core loop is the textbook tableau
  method.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-7
STALL_LIMIT = 200
MAX_TABLEAU_CELLS = 50_000_000


class LpError(RuntimeError):
    """Structural solver failure (bad dimensions, unbounded, too large)."""


class CyclingError(LpError):
    """The anti-cycling iteration cap was hit."""


@dataclass(frozen=True)
class LpProblem:
    """minimize c.x  s.t.  a x >= b,  lower <= x <= upper (all finite)."""

    c: np.ndarray
    a: np.ndarray
    b: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "c", np.asarray(self.c, dtype=float))
        object.__setattr__(self, "a", np.atleast_2d(np.asarray(self.a, dtype=float)))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float))
        object.__setattr__(self, "lower", np.asarray(self.lower, dtype=float))
        object.__setattr__(self, "upper", np.asarray(self.upper, dtype=float))
        n = self.c.size
        if self.a.size == 0:
            object.__setattr__(self, "a", np.zeros((0, n)))
            object.__setattr__(self, "b", np.zeros(0))
        if self.a.shape[1] != n or self.b.size != self.a.shape[0]:
            raise LpError(
                f"inconsistent dimensions: c has {n} entries, "
                f"a is {self.a.shape}, b has {self.b.size}"
            )
        if self.lower.size != n or self.upper.size != n:
            raise LpError("bound vectors must match the variable count")
        if not (np.all(np.isfinite(self.lower)) and np.all(np.isfinite(self.upper))):
            raise LpError("all variable boxes must be finite")


@dataclass
class LpSolution:
    x: np.ndarray
    objective: float
    status: str  # "optimal" | "infeasible" | "box-bound-active"
    iterations: int = 0

    @property
    def ok(self) -> bool:
        return self.status != "infeasible"


def _pivot(t: np.ndarray, basis: list[int], row: int, col: int) -> None:
    t[row] /= t[row, col]
    colvals = t[:, col].copy()
    colvals[row] = 0.0
    t -= np.outer(colvals, t[row])
    # kill roundoff residue in the pivot column so later tests see exact 0/1
    t[:, col] = 0.0
    t[row, col] = 1.0
    basis[row] = col


def _run_phase(t, basis, ncols_usable, max_iter):
    """Pivot until optimal.  Returns iteration count; raises on trouble."""
    iters = 0
    bland = False
    stall = 0
    last_obj = t[-1, -1]
    while True:
        r = t[-1, :ncols_usable]
        if bland:
            neg = np.flatnonzero(r < -PIVOT_TOL)
            if neg.size == 0:
                return iters
            col = int(neg[0])
        else:
            col = int(np.argmin(r))
            if r[col] >= -PIVOT_TOL:
                return iters
        colvec = t[:-1, col]
        rows = np.flatnonzero(colvec > PIVOT_TOL)
        if rows.size == 0:
            raise LpError("unbounded direction in simplex phase")
        ratios = t[rows, -1] / colvec[rows]
        best = ratios.min()
        tied = rows[ratios <= best + PIVOT_TOL]
        # lowest basis index among ties (Bland-style leaving rule)
        row = int(tied[np.argmin([basis[i] for i in tied])])
        _pivot(t, basis, row, col)
        iters += 1
        if iters > max_iter:
            raise CyclingError(f"simplex cycling guard tripped after {iters} pivots")
        obj = t[-1, -1]
        if obj > last_obj - PIVOT_TOL:
            stall += 1
            if stall > STALL_LIMIT:
                bland = True
        else:
            stall = 0
            last_obj = obj


def solve_lp(lp: LpProblem) -> LpSolution:
    """Solve the LP to optimality; detect infeasibility via phase 1.

    The returned objective is recomputed as ``c.x`` from the extracted
    vertex, independent of the tableau bookkeeping.
    """
    n = lp.c.size
    if np.any(lp.lower > lp.upper):
        return LpSolution(x=np.full(n, np.nan), objective=np.nan, status="infeasible")

    span = lp.upper - lp.lower
    b0 = lp.b - lp.a @ lp.lower

    m_ge = lp.a.shape[0]
    nrows = m_ge + n
    # columns: shifted structural | one slack per row
    ncols = n + nrows
    if (nrows + 1) * (ncols + 1) > MAX_TABLEAU_CELLS:
        raise LpError(f"tableau too large: {nrows + 1} x {ncols + 1}")

    t = np.zeros((nrows + 1, ncols + 1))
    senses = np.empty(nrows)  # +1 for <=, -1 for >=
    t[:m_ge, :n] = lp.a
    t[:m_ge, -1] = b0
    senses[:m_ge] = -1.0
    for j in range(n):
        t[m_ge + j, j] = 1.0
        t[m_ge + j, -1] = span[j]
    senses[m_ge:] = 1.0
    for i in range(nrows):
        t[i, n + i] = senses[i]

    # make all right-hand sides nonnegative
    flip = t[:nrows, -1] < 0.0
    t[np.flatnonzero(flip), :] *= -1.0

    # rows whose slack column ended up +1 start basic on the slack;
    # the rest need artificials
    slack_ok = np.flatnonzero(t[np.arange(nrows), n + np.arange(nrows)] > 0.5)
    need_art = np.setdiff1d(np.arange(nrows), slack_ok)
    basis = [-1] * nrows
    for i in slack_ok:
        basis[i] = n + i

    total_iters = 0
    if need_art.size:
        art = np.zeros((nrows + 1, need_art.size))
        for k, i in enumerate(need_art):
            art[i, k] = 1.0
            basis[i] = ncols + k
        t = np.hstack([t[:, :-1], art, t[:, -1:]])
        # phase-1 reduced costs: cost 1 on artificials, eliminated on basics
        t[-1, :] = 0.0
        t[-1, ncols : ncols + need_art.size] = 1.0
        for i in need_art:
            t[-1, :] -= t[i, :]
        total_iters += _run_phase(t, basis, ncols + need_art.size, 20000)
        if -t[-1, -1] > FEAS_TOL:
            return LpSolution(
                x=np.full(n, np.nan),
                objective=np.nan,
                status="infeasible",
                iterations=total_iters,
            )
        # drive leftover artificials out of the basis
        drop_rows = []
        for i in range(nrows):
            if basis[i] >= ncols:
                row = t[i, :ncols]
                cand = np.flatnonzero(np.abs(row) > PIVOT_TOL)
                if cand.size:
                    _pivot(t, basis, i, int(cand[0]))
                    total_iters += 1
                else:
                    drop_rows.append(i)
        if drop_rows:
            keep = [i for i in range(nrows) if i not in set(drop_rows)]
            t = t[keep + [nrows], :]
            basis = [basis[i] for i in keep]
            nrows = len(keep)
        t = np.hstack([t[:, :ncols], t[:, -1:]])

    # phase 2
    c2 = np.zeros(ncols)
    c2[:n] = lp.c
    t[-1, :-1] = c2
    t[-1, -1] = 0.0
    for i in range(nrows):
        t[-1, :] -= c2[basis[i]] * t[i, :]
    total_iters += _run_phase(t, basis, ncols, 20000)

    xhat = np.zeros(ncols)
    xhat[basis] = t[:nrows, -1]
    x = lp.lower + xhat[:n]
    objective = float(lp.c @ x)

    status = "optimal"
    at_bound = (span > PIVOT_TOL) & (
        (np.abs(x - lp.lower) <= 1e-9) | (np.abs(x - lp.upper) <= 1e-9)
    )
    if np.any(at_bound):
        status = "box-bound-active"
    return LpSolution(x=x, objective=objective, status=status, iterations=total_iters)
