"""Per-class parameter estimation under the exact and surrogate losses.

The sequential logit likelihood separates over class levels: level k only
involves the samples whose label is >= k, each carrying a sign (+1 at the
label, -1 below it).  A :class:`ClassProblem` captures one such binary
subproblem; the three ``fit_*`` routines minimize

* the exact logistic loss (damped Newton with Armijo backtracking),
* its quadratic surrogate (normal equations), or
* the tangent-line piecewise-linear underestimator (LP, solved by the
  in-package simplex with lazy generation of tangent rows),

all over the parameter box |w_j| <= 100, |b| <= 100.  The box makes
separable subproblems well-posed: at |v| >= 100 the logistic loss is below
4e-44, so clamping never moves any reported criterion at 1e-9 resolution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset, OrdinalEncoding
from .loss import (
    TangentSet,
    logistic_loss,
    logistic_loss_curv,
    logistic_loss_grad,
    quad_loss,
    sigmoid,
)
from .simplex import LpProblem, solve_lp

PARAM_BOX = 100.0
GRAD_TOL = 1e-8
MAX_NEWTON_ITER = 100
RIDGE = 1e-10
ARMIJO_SLOPE = 1e-4


class FitError(RuntimeError):
    """Numerical failure inside a per-class fit."""


@dataclass(frozen=True)
class ClassProblem:
    """One per-level binary subproblem of the sequential logit likelihood.

    ``design`` holds the active-feature columns plus a trailing intercept
    column, restricted to the rows where this level is contested; ``signs``
    are the corresponding +-1 labels.
    """

    rows: np.ndarray
    signs: np.ndarray
    design: np.ndarray
    k: int

    def __post_init__(self):
        if self.design.shape[0] != self.signs.size or self.signs.size == 0:
            raise ValueError("class problem needs at least one active row")
        if not np.all(np.abs(self.signs) == 1.0):
            raise ValueError("signs must be +-1")


@dataclass(frozen=True)
class FitResult:
    coefficients: np.ndarray
    intercept: float
    loss: float
    converged: bool
    iterations: int
    method: str
    box_active: bool = False

    @property
    def theta(self) -> np.ndarray:
        return np.append(self.coefficients, self.intercept)


def class_problems(data: Dataset, enc: OrdinalEncoding, subset) -> list[ClassProblem]:
    """Build the m per-level subproblems restricted to ``subset`` features."""
    cols = sorted(int(j) for j in subset)
    Xs = data.X[:, cols]
    out = []
    for k in range(1, data.m + 1):
        psi_k = enc.psi[:, k - 1]
        rows = np.flatnonzero(psi_k != 0)
        design = np.hstack([Xs[rows], np.ones((rows.size, 1))])
        out.append(
            ClassProblem(
                rows=rows, signs=psi_k[rows].astype(float), design=design, k=k
            )
        )
    return out


def _result(theta, loss, converged, iterations, method):
    box_active = bool(np.any(np.abs(theta) >= PARAM_BOX - 1e-9))
    return FitResult(
        coefficients=theta[:-1].copy(),
        intercept=float(theta[-1]),
        loss=float(loss),
        converged=converged,
        iterations=iterations,
        method=method,
        box_active=box_active,
    )


def _newton_minimize(design, signs, value, grad_curv, method):
    """Projected damped Newton inside the parameter box, started at zero.

    A tiny gradient alone does not stop the iteration: on separable data
    the gradient vanishes along an unbounded descent ray while the Newton
    step stays O(1), so the loop also requires a tiny step (or a blocked
    box direction) before declaring a stationary point.  Separable
    problems therefore march until the box clamps them.
    """
    d = design.shape[1]
    theta = np.zeros(d)
    iterations = 0
    while True:
        grad, curv = grad_curv(theta)
        at_up = theta >= PARAM_BOX - 1e-12
        at_lo = theta <= -PARAM_BOX + 1e-12
        pgrad = grad.copy()
        pgrad[at_up & (grad < 0)] = 0.0
        pgrad[at_lo & (grad > 0)] = 0.0
        flat = np.max(np.abs(pgrad)) <= GRAD_TOL
        if iterations >= MAX_NEWTON_ITER:
            break
        hess = design.T @ (curv[:, None] * design)
        try:
            step = np.linalg.solve(hess, -grad)
            if not np.all(np.isfinite(step)):
                raise np.linalg.LinAlgError("non-finite step")
        except np.linalg.LinAlgError:
            try:
                step = np.linalg.solve(hess + RIDGE * np.eye(d), -grad)
            except np.linalg.LinAlgError as exc:
                raise FitError(
                    f"singular Newton system even with ridge {RIDGE:g} "
                    f"(cond={np.linalg.cond(hess):.3e})"
                ) from exc
        if flat:
            blocked = (at_up & (step > 0)) | (at_lo & (step < 0))
            step = step.copy()
            step[blocked] = 0.0
            if np.max(np.abs(step)) <= 1e-5:
                break
        f0 = value(theta)
        scale = 1.0
        accepted = False
        for _ in range(60):
            cand = np.clip(theta + scale * step, -PARAM_BOX, PARAM_BOX)
            delta = cand - theta
            if not np.any(delta):
                break
            armijo = f0 + ARMIJO_SLOPE * min(0.0, float(grad @ delta))
            if value(cand) <= armijo:
                theta = cand
                accepted = True
                break
            scale *= 0.5
        iterations += 1
        if not accepted:
            break
    grad, _ = grad_curv(theta)
    converged = float(np.max(np.abs(grad))) <= GRAD_TOL and not bool(
        np.any(np.abs(theta) >= PARAM_BOX - 1e-12)
    )
    return theta, value(theta), converged, iterations


def fit_exact(prob: ClassProblem) -> FitResult:
    """Minimize the exact logistic loss sum over (w, b) in the box.

    Deterministic: fixed start at zero, damped Newton, gradient max-norm
    tolerance 1e-8.  ``converged`` is False when the box clamps the
    solution (separable data) or the iteration cap was hit.
    """
    design, signs = prob.design, prob.signs

    def value(theta):
        return float(np.sum(logistic_loss(signs * (design @ theta))))

    def grad_curv(theta):
        v = signs * (design @ theta)
        grad = design.T @ (signs * logistic_loss_grad(v))
        return grad, logistic_loss_curv(v)

    theta, loss, converged, iterations = _newton_minimize(
        design, signs, value, grad_curv, "exact"
    )
    return _result(theta, loss, converged, iterations, "exact")


def fit_quad(prob: ClassProblem) -> FitResult:
    """Exact minimizer of the quadratic surrogate via the normal equations.

    Since the signs square to one, the surrogate is an unweighted
    least-squares problem; a 1e-10 ridge is added only if the Gram matrix
    is singular.  If the unconstrained minimizer escapes the parameter box
    (not reachable with standardized data in practice), a projected Newton
    pass on the same quadratic produces the box-constrained optimum.
    """
    design, signs = prob.design, prob.signs
    gram = design.T @ design
    rhs = 2.0 * (design.T @ signs)
    try:
        theta = np.linalg.solve(gram, rhs)
        if not np.all(np.isfinite(theta)):
            raise np.linalg.LinAlgError("non-finite solution")
    except np.linalg.LinAlgError:
        theta = np.linalg.solve(gram + RIDGE * np.eye(gram.shape[0]), rhs)
    if np.all(np.abs(theta) <= PARAM_BOX):
        loss = float(np.sum(quad_loss(signs * (design @ theta))))
        return _result(theta, loss, True, 1, "quad")

    def value(th):
        return float(np.sum(quad_loss(signs * (design @ th))))

    def grad_curv(th):
        u = design @ th
        grad = design.T @ (u / 4.0 - signs / 2.0)
        return grad, np.full(design.shape[0], 0.25)

    theta, loss, converged, iterations = _newton_minimize(
        design, signs, value, grad_curv, "quad"
    )
    return _result(theta, loss, converged, iterations, "quad")


def fit_pwl(prob: ClassProblem, tset: TangentSet) -> FitResult:
    """Minimize the summed tangent-line underestimator over the box.

    Equivalent to the LP  min sum_i t_i  s.t.  t_i >= a_l s_i (x_i.w + b)
    + c_l  for every tangent line l.  The full LP carries one t variable
    per row and rows*lines constraints, but at an optimal vertex only
    about d rows can have two tangents active, so the solve proceeds on a
    small reduced problem:

    * each row starts assigned its maximizing line at the exact-loss
      minimizer and stays a pure linear term until a second line is seen
      to matter, at which point it gets an explicit t variable;
    * a trust box around the current center keeps the reduced model
      honest (a linear underestimate minimized over the whole parameter
      box would race to a corner and drag every row into the model);
    * violated lines are added until the model matches the true pointwise
      maximum at the solution; if a trust bound is then active the box is
      recentered and widened, otherwise convexity makes the interior
      solution the global optimum and the loop stops.
    """
    if not tset.has_sentinels:
        raise ValueError("piecewise-linear fits require both -inf/+inf sentinels")
    design, signs = prob.design, prob.signs
    d = design.shape[1]
    slopes, offsets, h = tset.slopes, tset.offsets, tset.h

    # rows with identical signed design vectors share one weighted t
    # variable (an intercept-only problem collapses to two groups)
    gdesign, weights = np.unique(
        signs[:, None] * design, axis=0, return_counts=True
    )
    weights = weights.astype(float)
    g = gdesign.shape[0]

    center = fit_exact(prob).theta
    radius = 0.1
    active = np.zeros((g, h), dtype=bool)
    vals0 = np.multiply.outer(gdesign @ center, slopes) + offsets
    active[np.arange(g), vals0.argmax(axis=1)] = True
    t_cap = PARAM_BOX * np.abs(gdesign).sum(axis=1) + 1.0

    rounds = 0
    grow_only = False
    while True:
        rounds += 1
        if rounds > g * h + 100:
            raise FitError("tangent row generation failed to terminate")
        if rounds > 60:
            grow_only = True
        lo_theta = np.maximum(center - radius, -PARAM_BOX)
        up_theta = np.minimum(center + radius, PARAM_BOX)
        multi = np.flatnonzero(active.sum(axis=1) >= 2)
        nt = multi.size
        tpos = {int(i): d + q for q, i in enumerate(multi)}
        c = np.zeros(d + nt)
        c[d:] = weights[multi]
        rows_a: list[np.ndarray] = []
        rows_b: list[float] = []
        for i in range(g):
            lines = np.flatnonzero(active[i])
            if lines.size == 1:
                c[:d] += weights[i] * slopes[lines[0]] * gdesign[i]
            else:
                for ell in lines:
                    row = np.zeros(d + nt)
                    row[:d] = -slopes[ell] * gdesign[i]
                    row[tpos[int(i)]] = 1.0
                    rows_a.append(row)
                    rows_b.append(float(offsets[ell]))
        lp = LpProblem(
            c=c,
            a=np.array(rows_a) if rows_a else np.zeros((0, d + nt)),
            b=np.array(rows_b),
            lower=np.concatenate([lo_theta, -t_cap[multi]]),
            upper=np.concatenate([up_theta, t_cap[multi]]),
        )
        sol = solve_lp(lp)
        if not sol.ok:
            raise FitError("reduced tangent LP reported infeasible")
        theta = sol.x[:d]

        vals = np.multiply.outer(gdesign @ theta, slopes) + offsets
        true_max = vals.max(axis=1)
        modeled = np.where(active, vals, -np.inf).max(axis=1)
        gap = true_max - modeled
        violated = np.flatnonzero(gap > 1e-9)
        if violated.size:
            if grow_only:
                add = violated
            else:
                # a mass violation means the trial point jumped past the
                # model's validity region: contract, and only admit the
                # worst offenders so the working set stays near the true
                # ambiguity count
                if violated.size > max(32, g // 4):
                    radius = max(radius / 2.0, 0.02)
                add = violated[np.argsort(gap[violated])[::-1][:32]]
                keep = vals >= (true_max - 4.0 * radius)[:, None]
                active &= keep
                empty = ~active.any(axis=1)
                active[empty, vals[empty].argmax(axis=1)] = True
            active[add, vals[add].argmax(axis=1)] = True
            continue
        trust_active = (
            ((theta - lo_theta <= 1e-7) & (lo_theta > -PARAM_BOX + 1e-12))
            | ((up_theta - theta <= 1e-7) & (up_theta < PARAM_BOX - 1e-12))
        )
        if not np.any(trust_active):
            loss = float(weights @ true_max)
            return _result(theta, loss, True, rounds, "pwl")
        center = theta
        radius *= 3.0


def log_likelihood(
    weights: np.ndarray, intercepts: np.ndarray, enc: OrdinalEncoding, X: np.ndarray
) -> float:
    """Sequential logit log likelihood at the given parameters.

    ``weights`` has one row per class level (m x p); equals the log of the
    product of per-sample occurrence probabilities.
    """
    u = X @ np.asarray(weights, dtype=float).T + np.asarray(intercepts, dtype=float)
    psi = enc.psi.astype(float)
    return -float(np.sum(np.abs(psi) * logistic_loss(psi * u)))


def predict_proba(weights: np.ndarray, intercepts: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Class probabilities (length m+1) for one feature vector.

    Level k wins with probability q_k times the survival through all
    earlier levels; the top class is reached by surviving every level.
    """
    q = sigmoid(np.asarray(weights, dtype=float) @ np.asarray(x, dtype=float)
                + np.asarray(intercepts, dtype=float))
    q = np.atleast_1d(q)
    survive = np.cumprod(1.0 - q)
    probs = np.empty(q.size + 1)
    probs[0] = q[0]
    probs[1:-1] = q[1:] * survive[:-1]
    probs[-1] = survive[-1]
    return probs
