"""Logistic loss, its quadratic surrogate, and tangent-line underestimators.

The logistic loss f(v) = log(1 + exp(-v)) is the building block of the
sequential logit likelihood.  Two surrogates of f are provided:

* ``quad_loss`` -- the second-order Maclaurin expansion v^2/8 - v/2 + log 2,
  which turns likelihood maximization into least squares but overshoots
  badly away from the origin (it *grows* on the correctly-classified side).
* ``pwl_loss`` -- the pointwise maximum of tangent lines at a chosen point
  set, a piecewise-linear function that underestimates f everywhere and is
  exact at the tangent points.

Tangent sets may include -inf / +inf sentinels.  Those are handled
symbolically: the -inf tangent is the asymptote line -v (slope -1,
offset 0) and the +inf tangent is the flat line 0 (slope 0, offset 0);
no floating-point infinities enter any arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

LOG2 = math.log(2.0)

# Tangent points used by default: the origin, seven symmetric pairs, and
# both sentinels, 17 lines in total.
DEFAULT_TANGENT_POINTS: tuple[float, ...] = (
    -math.inf,
    -5.16,
    -3.55,
    -2.63,
    -1.90,
    -1.37,
    -0.89,
    -0.44,
    0.0,
    0.44,
    0.89,
    1.37,
    1.90,
    2.63,
    3.55,
    5.16,
    math.inf,
)


def logistic_loss(v):
    """log(1 + exp(-v)), overflow-free for any finite v (scalar or array)."""
    out = np.logaddexp(0.0, -np.asarray(v, dtype=float))
    if np.ndim(v) == 0:
        return float(out)
    return out


def sigmoid(v):
    """Logistic function 1 / (1 + exp(-v)), computed without overflow."""
    v = np.asarray(v, dtype=float)
    out = np.empty_like(v)
    pos = v >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-v[pos]))
    ev = np.exp(v[~pos])
    out[~pos] = ev / (1.0 + ev)
    if out.ndim == 0:
        return float(out)
    return out


def logistic_loss_grad(v):
    """First derivative of the logistic loss: -1 / (1 + exp(v)).

    Always in (-1, 0) for finite v.
    """
    s = sigmoid(-np.asarray(v, dtype=float))
    out = -s
    if np.ndim(v) == 0:
        return float(out)
    return out


def logistic_loss_curv(v):
    """Second derivative sigma(v) * (1 - sigma(v)); strictly positive."""
    v = np.asarray(v, dtype=float)
    s = sigmoid(v)
    out = s * sigmoid(-v)
    if np.ndim(v) == 0:
        return float(out)
    return out


def quad_loss(v):
    """Second-order expansion of the logistic loss at 0: v^2/8 - v/2 + log 2."""
    v = np.asarray(v, dtype=float)
    out = v * v / 8.0 - v / 2.0 + LOG2
    if np.ndim(v) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class TangentSet:
    """Slopes and offsets of tangent lines to the logistic loss.

    ``points`` are the tangency abscissas in strictly increasing order
    (may include +-inf sentinels).  Line ``l`` is ``v -> slopes[l] * v +
    offsets[l]``.  Slopes are strictly increasing; finite-point slopes lie
    in (-1, 0); the sentinels contribute the lines -v and 0.
    """

    points: tuple[float, ...]
    slopes: np.ndarray
    offsets: np.ndarray

    @property
    def h(self) -> int:
        return len(self.points)

    @property
    def has_sentinels(self) -> bool:
        return math.isinf(self.points[0]) and math.isinf(self.points[-1])

    def __post_init__(self):
        self.slopes.setflags(write=False)
        self.offsets.setflags(write=False)


def make_tangents(points) -> TangentSet:
    """Build the tangent-line family of the logistic loss at ``points``.

    ``points`` must be distinct and sorted ascending; -inf and +inf are
    allowed at the ends and yield the asymptote lines -v and 0.
    """
    pts = [float(p) for p in points]
    if len(pts) < 2:
        raise ValueError(f"need at least 2 tangent points, got {len(pts)}")
    for a, b in zip(pts, pts[1:]):
        if a == b:
            raise ValueError(f"duplicate tangent point {a!r}")
        if a > b:
            raise ValueError("tangent points must be sorted ascending")
    slopes = np.empty(len(pts))
    offsets = np.empty(len(pts))
    for i, p in enumerate(pts):
        if p == -math.inf:
            slopes[i], offsets[i] = -1.0, 0.0
        elif p == math.inf:
            slopes[i], offsets[i] = 0.0, 0.0
        else:
            a = logistic_loss_grad(p)
            slopes[i] = a
            offsets[i] = logistic_loss(p) - a * p
    return TangentSet(points=tuple(pts), slopes=slopes, offsets=offsets)


def default_tangents() -> TangentSet:
    """The default 17-line tangent set."""
    return make_tangents(DEFAULT_TANGENT_POINTS)


def pwl_loss(tset: TangentSet, v):
    """Pointwise maximum of the tangent lines at ``v`` (scalar or array).

    Underestimates the logistic loss everywhere and touches it at every
    finite tangent point.
    """
    v = np.asarray(v, dtype=float)
    vals = np.multiply.outer(v, tset.slopes) + tset.offsets
    out = vals.max(axis=-1)
    if np.ndim(out) == 0:
        return float(out)
    return out


def read_tangent_points(path) -> tuple[float, ...]:
    """Read a one-token-per-line tangent point file.

    Tokens ``inf`` / ``-inf`` (case-insensitive, ``+inf`` accepted) denote
    the sentinel lines.  Blank lines and ``#`` comments are skipped.
    """
    pts: list[float] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            token = raw.split("#", 1)[0].strip()
            if not token:
                continue
            low = token.lower()
            if low in ("inf", "+inf"):
                pts.append(math.inf)
            elif low == "-inf":
                pts.append(-math.inf)
            else:
                try:
                    pts.append(float(token))
                except ValueError:
                    raise ValueError(
                        f"{path}: line {lineno}: cannot parse tangent point {token!r}"
                    ) from None
    return tuple(pts)
