"""Solver-ready LP-format export and machine-readable selection reports.

``export_lp`` writes the subset-selection problem in the CPLEX-style LP
dialect (Minimize / Subject To / Bounds / Binary / SOS / End) so external
MIP software can cross-check the in-package engines: the quadratic
surrogate as a QuadObj bracket, the piecewise-linear surrogate with one
row per active sample/level/tangent triple.  Objective constants that LP
format cannot carry (the intercept penalty, the quadratic surrogate's
log-2 mass) ride in a ``\\ constant_objective:`` comment and are added
back by the bundled evaluator.

``write_report`` emits a canonical JSON report: fixed key order, floats
at 17 significant digits, UTF-8, LF line endings.  Re-reading and
re-writing a report reproduces it byte for byte.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .loss import LOG2, TangentSet, default_tangents
from .selector import SelectionProblem, SelectionReport

BIG_M_DEFAULT = 100.0


@dataclass(frozen=True)
class LpExportOptions:
    approx: str = "pwl"  # "quad" | "pwl"
    encoding: str = "bigm"  # "bigm" | "sos1"
    big_m: float = BIG_M_DEFAULT
    tangents: TangentSet | None = None

    def __post_init__(self):
        if self.approx not in ("quad", "pwl"):
            raise ValueError("approx must be 'quad' or 'pwl'")
        if self.encoding not in ("bigm", "sos1"):
            raise ValueError("encoding must be 'bigm' or 'sos1'")
        if self.big_m <= 0:
            raise ValueError("big-M must be positive")
        if self.approx == "pwl" and self.tangents is None:
            object.__setattr__(self, "tangents", default_tangents())


def _num(x: float) -> str:
    return format(float(x), ".17g")


def _terms(pairs) -> str:
    """Render [(coef, name), ...] as an LP expression, skipping zeros."""
    parts = []
    for coef, name in pairs:
        if coef == 0.0:
            continue
        sign = "-" if coef < 0 else "+"
        mag = abs(coef)
        if parts:
            parts.append(f"{sign} {_num(mag)} {name}")
        else:
            parts.append(f"{'-' if coef < 0 else ''}{_num(mag)} {name}")
    return " ".join(parts) if parts else "0 " + pairs[0][1] if pairs else "0"


def export_lp(prob: SelectionProblem, opts: LpExportOptions, path) -> None:
    """Write the MIQO/MILO subset-selection model as an LP-format file."""
    if opts.approx == "pwl" and opts.tangents is None:
        raise ValueError("piecewise-linear export requires a tangent set")
    data, enc = prob.data, prob.encoding
    n, p, m = data.n, data.p, data.m
    pen = prob.penalty
    X, psi = data.X, enc.psi
    active = [(i, k) for i in range(n) for k in range(m) if psi[i, k] != 0]

    lines: list[str] = []
    lines.append("\\ sequential-logit feature subset selection")
    lines.append(
        f"\\ approx={opts.approx} encoding={opts.encoding} criterion={prob.criterion}"
        f" direction={enc.direction} n={n} p={p} m={m}"
    )
    lines.append(
        "\\ parameter box |w|,|b| <= 100 matches the in-package estimator;"
        " the reference formulation leaves w unbounded"
    )
    if opts.approx == "quad":
        constant = pen * m + 2.0 * len(active) * LOG2
    else:
        constant = pen * m
    lines.append(f"\\ constant_objective: {_num(constant)}")

    obj_pairs = []
    if opts.approx == "pwl":
        for i, k in active:
            obj_pairs.append((2.0, f"t_{i + 1}_{k + 1}"))
    else:
        # 2 * sum quad(psi*(w.x+b)) expands to a linear part and a
        # quadratic form; psi^2 = 1 on active pairs
        lin_w = np.zeros((p, m))
        lin_b = np.zeros(m)
        for i, k in active:
            lin_w[:, k] += -psi[i, k] * X[i]
            lin_b[k] += -psi[i, k]
        for j in range(p):
            for k in range(m):
                obj_pairs.append((lin_w[j, k], f"w_{j + 1}_{k + 1}"))
        for k in range(m):
            obj_pairs.append((lin_b[k], f"b_{k + 1}"))
    for j in range(p):
        obj_pairs.append((pen * m, f"z_{j + 1}"))

    obj = _terms(obj_pairs)
    if opts.approx == "quad":
        quad_terms = []
        for k in range(m):
            rows = [i for i, kk in active if kk == k]
            A = np.hstack([X[rows], np.ones((len(rows), 1))])
            gram = A.T @ A
            names = [f"w_{j + 1}_{k + 1}" for j in range(p)] + [f"b_{k + 1}"]
            for a in range(p + 1):
                if gram[a, a] != 0.0:
                    quad_terms.append(f"+ {_num(gram[a, a] / 2.0)} {names[a]} ^ 2")
                for bidx in range(a + 1, p + 1):
                    if gram[a, bidx] != 0.0:
                        quad_terms.append(
                            f"+ {_num(gram[a, bidx])} {names[a]} * {names[bidx]}"
                        )
        obj += " + [ " + " ".join(quad_terms).lstrip("+ ") + " ] / 2"
    lines.append("Minimize")
    lines.append(" obj: " + obj)

    lines.append("Subject To")
    if opts.approx == "pwl":
        ts = opts.tangents
        for i, k in active:
            s = float(psi[i, k])
            for ell in range(ts.h):
                a = ts.slopes[ell]
                pairs = [(1.0, f"t_{i + 1}_{k + 1}")]
                for j in range(p):
                    pairs.append((-a * s * X[i, j], f"w_{j + 1}_{k + 1}"))
                pairs.append((-a * s, f"b_{k + 1}"))
                lines.append(
                    f" tan_{i + 1}_{k + 1}_{ell + 1}: {_terms(pairs)} >= "
                    f"{_num(ts.offsets[ell])}"
                )
    if opts.encoding == "bigm":
        for j in range(p):
            for k in range(m):
                lines.append(
                    f" mpos_{j + 1}_{k + 1}: w_{j + 1}_{k + 1} - {_num(opts.big_m)}"
                    f" z_{j + 1} <= 0"
                )
                lines.append(
                    f" mneg_{j + 1}_{k + 1}: - w_{j + 1}_{k + 1} - {_num(opts.big_m)}"
                    f" z_{j + 1} <= 0"
                )
    else:
        for j in range(p):
            lines.append(f" link_{j + 1}: u_{j + 1} + z_{j + 1} = 1")

    lines.append("Bounds")
    for j in range(p):
        for k in range(m):
            lines.append(f" -100 <= w_{j + 1}_{k + 1} <= 100")
    for k in range(m):
        lines.append(f" -100 <= b_{k + 1} <= 100")
    if opts.approx == "pwl":
        for i, k in active:
            lines.append(f" t_{i + 1}_{k + 1} free")
    if opts.encoding == "sos1":
        for j in range(p):
            lines.append(f" 0 <= u_{j + 1} <= 1")

    lines.append("Binary")
    for j in range(p):
        lines.append(f" z_{j + 1}")

    if opts.encoding == "sos1":
        lines.append("SOS")
        for j in range(p):
            for k in range(m):
                lines.append(
                    f" sos_{j + 1}_{k + 1}: S1:: u_{j + 1}:1 w_{j + 1}_{k + 1}:2"
                )
    lines.append("End")

    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


# --------------------------------------------------------------------------
# LP-file reading: just enough to evaluate and check files this module wrote
# --------------------------------------------------------------------------


@dataclass
class LpFileModel:
    objective: dict[str, float]
    quadratic: list[tuple[str, str, float]]  # (var, var, bracket coefficient)
    constraints: list[tuple[str, dict[str, float], str, float]]
    bounds: dict[str, tuple[float, float]]
    binaries: set[str]
    sos: list[list[tuple[str, float]]]
    constant: float


def _parse_expr(tokens):
    """Parse '3 x - 2.5 y + z' style token streams into {name: coef}."""
    coeffs: dict[str, float] = {}
    sign = 1.0
    number: float | None = None
    for tok in tokens:
        if tok == "+":
            continue
        if tok == "-":
            sign = -sign
            continue
        try:
            num = float(tok)
        except ValueError:
            coef = sign * (1.0 if number is None else number)
            coeffs[tok] = coeffs.get(tok, 0.0) + coef
            sign, number = 1.0, None
        else:
            number = num if number is None else number * num
    return coeffs


def parse_lp_file(path) -> LpFileModel:
    """Parse the LP dialect written by :func:`export_lp`."""
    objective: dict[str, float] = {}
    quadratic: list[tuple[str, str, float]] = []
    constraints = []
    bounds: dict[str, tuple[float, float]] = {}
    binaries: set[str] = set()
    sos: list[list[tuple[str, float]]] = []
    constant = 0.0
    section = None
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("\\"):
                if "constant_objective:" in line:
                    constant = float(line.split("constant_objective:")[1])
                continue
            low = line.lower()
            if low in ("minimize", "maximize"):
                section = "obj"
                continue
            if low == "subject to":
                section = "st"
                continue
            if low == "bounds":
                section = "bounds"
                continue
            if low == "binary":
                section = "binary"
                continue
            if low == "sos":
                section = "sos"
                continue
            if low == "end":
                break
            if section == "obj":
                body = line.split(":", 1)[1] if ":" in line else line
                if "[" in body:
                    linear, rest = body.split("[", 1)
                    bracket, tail = rest.split("]", 1)
                    if tail.replace(" ", "") not in ("/2", ""):
                        raise ValueError(f"unsupported quadratic tail {tail!r}")
                    toks = bracket.replace("^", " ^ ").replace("*", " * ").split()
                    idx = 0
                    sign = 1.0
                    while idx < len(toks):
                        if toks[idx] == "+":
                            sign = 1.0
                            idx += 1
                            continue
                        if toks[idx] == "-":
                            sign = -1.0
                            idx += 1
                            continue
                        coef = sign * float(toks[idx])
                        v1 = toks[idx + 1]
                        if toks[idx + 2] == "^":
                            quadratic.append((v1, v1, coef))
                            idx += 4
                        else:  # '*'
                            quadratic.append((v1, toks[idx + 3], coef))
                            idx += 4
                        sign = 1.0
                else:
                    linear = body
                for name, coef in _parse_expr(linear.split()).items():
                    objective[name] = objective.get(name, 0.0) + coef
            elif section == "st":
                name, body = line.split(":", 1)
                for sense in (">=", "<=", "="):
                    if sense in body:
                        expr, rhs = body.rsplit(sense, 1)
                        constraints.append(
                            (name.strip(), _parse_expr(expr.split()), sense, float(rhs))
                        )
                        break
                else:
                    raise ValueError(f"constraint without sense: {line!r}")
            elif section == "bounds":
                toks = line.split()
                if toks[-1] == "free":
                    bounds[toks[0]] = (-math.inf, math.inf)
                elif len(toks) == 5 and toks[1] == "<=" and toks[3] == "<=":
                    bounds[toks[2]] = (float(toks[0]), float(toks[4]))
                else:
                    raise ValueError(f"unsupported bounds line: {line!r}")
            elif section == "binary":
                binaries.update(line.split())
            elif section == "sos":
                body = line.split("S1::", 1)[1]
                members = []
                for part in body.split():
                    var, weight = part.rsplit(":", 1)
                    members.append((var, float(weight)))
                sos.append(members)
    return LpFileModel(
        objective=objective,
        quadratic=quadratic,
        constraints=constraints,
        bounds=bounds,
        binaries=binaries,
        sos=sos,
        constant=constant,
    )


def evaluate_lp_objective(model: LpFileModel, assignment: dict[str, float]) -> float:
    """Objective value at ``assignment``, constant comment included."""
    val = model.constant
    for name, coef in model.objective.items():
        val += coef * assignment.get(name, 0.0)
    for v1, v2, coef in model.quadratic:
        val += 0.5 * coef * assignment.get(v1, 0.0) * assignment.get(v2, 0.0)
    return val


def violated_constraints(
    model: LpFileModel, assignment: dict[str, float], tol: float = 1e-7
) -> list[str]:
    """Names of constraints the assignment violates by more than ``tol``."""
    bad = []
    for name, coeffs, sense, rhs in model.constraints:
        lhs = sum(coef * assignment.get(var, 0.0) for var, coef in coeffs.items())
        if sense == ">=" and lhs < rhs - tol:
            bad.append(name)
        elif sense == "<=" and lhs > rhs + tol:
            bad.append(name)
        elif sense == "=" and abs(lhs - rhs) > tol:
            bad.append(name)
    return bad


# --------------------------------------------------------------------------
# Canonical report JSON
# --------------------------------------------------------------------------


def _canon(value, indent: int) -> str:
    pad = " " * indent
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return _num(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        inner = ",\n".join(pad + "  " + _canon(v, indent + 2) for v in value)
        return "[\n" + inner + "\n" + pad + "]"
    if isinstance(value, dict):
        if not value:
            return "{}"
        inner = ",\n".join(
            pad + "  " + json.dumps(str(k)) + ": " + _canon(v, indent + 2)
            for k, v in value.items()
        )
        return "{\n" + inner + "\n" + pad + "}"
    raise TypeError(f"cannot serialize {type(value)!r}")


def report_to_dict(report: SelectionReport) -> dict:
    """The stable key-ordered dictionary form of a selection report."""
    coefficients = []
    for k, fit in enumerate(report.fits, start=1):
        coefficients.append(
            {
                "class": k,
                "intercept": float(fit.intercept),
                "weights": [float(w) for w in fit.coefficients],
            }
        )
    return {
        "method": report.method,
        "direction": report.direction,
        "criterion_name": report.criterion_name,
        "criterion_value": float(report.criterion_value),
        "objval": float(report.objval),
        "lower_bound": None if report.lower_bound is None else float(report.lower_bound),
        "selected": [j + 1 for j in report.selected],
        "selected_names": list(report.selected_names),
        "coefficients": coefficients,
        "n": report.n,
        "p": report.p,
        "m": report.m,
        "nodes": report.nodes,
        "incumbent_updates": report.incumbent_updates,
        "wall_time_s": float(report.wall_time_s),
        "optimal": report.optimal,
        "warnings": list(report.warnings),
    }


def dumps_report(payload: dict) -> str:
    return _canon(payload, 0) + "\n"


def write_report(report: SelectionReport | dict, path) -> dict:
    """Write the canonical report JSON; returns the emitted dictionary."""
    payload = report if isinstance(report, dict) else report_to_dict(report)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_report(payload))
    return payload


def read_report(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
