"""Dense simplex solver: exactness, infeasibility detection, determinism."""

import itertools

import numpy as np
import pytest

from seqsel.simplex import LpError, LpProblem, LpSolution, solve_lp


def enumerate_vertices(lp):
    """Brute-force reference: try every n-subset of tight constraints."""
    n = lp.c.size
    rows = [(lp.a[i], lp.b[i]) for i in range(lp.a.shape[0])]
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        rows.append((e, lp.lower[j]))
        rows.append((e, lp.upper[j]))
    best = None
    for combo in itertools.combinations(range(len(rows)), n):
        A = np.array([rows[i][0] for i in combo])
        b = np.array([rows[i][1] for i in combo])
        try:
            x = np.linalg.solve(A, b)
        except np.linalg.LinAlgError:
            continue
        feasible = (
            np.all(lp.a @ x >= lp.b - 1e-8)
            and np.all(x >= lp.lower - 1e-8)
            and np.all(x <= lp.upper + 1e-8)
        )
        if feasible:
            val = float(lp.c @ x)
            if best is None or val < best:
                best = val
    return best


class TestExamples:
    def test_sentinel_geometry(self):
        # min t  s.t.  t >= -v, t >= 0, v in [-100, 100]
        lp = LpProblem(
            c=[1.0, 0.0],
            a=[[1.0, 1.0], [1.0, 0.0]],
            b=[0.0, 0.0],
            lower=[-1e6, -100.0],
            upper=[1e6, 100.0],
        )
        sol = solve_lp(lp)
        assert sol.ok
        assert sol.objective == pytest.approx(0.0, abs=1e-9)

    def test_three_variable_vertex(self):
        # min -x - 2y - 3z  s.t.  x + y + z <= 10, each var in [0, 4];
        # hand solution: saturate z then y, x picks up the slack -> (2,4,4)
        lp = LpProblem(
            c=[-1.0, -2.0, -3.0],
            a=[[-1.0, -1.0, -1.0]],
            b=[-10.0],
            lower=[0.0, 0.0, 0.0],
            upper=[4.0, 4.0, 4.0],
        )
        sol = solve_lp(lp)
        assert sol.objective == pytest.approx(-22.0, abs=1e-9)
        np.testing.assert_allclose(sol.x, [2.0, 4.0, 4.0], atol=1e-9)
        assert sol.objective == pytest.approx(enumerate_vertices(lp), abs=1e-9)

    def test_contradictory_bounds_infeasible(self):
        lp = LpProblem(c=[1.0], a=[[1.0]], b=[0.0], lower=[5.0], upper=[1.0])
        assert solve_lp(lp).status == "infeasible"

    def test_row_infeasible(self):
        lp = LpProblem(c=[1.0], a=[[1.0]], b=[5.0], lower=[0.0], upper=[1.0])
        assert solve_lp(lp).status == "infeasible"


class TestValidation:
    def test_rejects_infinite_bounds(self):
        with pytest.raises(LpError, match="finite"):
            LpProblem(c=[1.0], a=[[1.0]], b=[0.0], lower=[-np.inf], upper=[1.0])

    def test_rejects_dimension_mismatch(self):
        with pytest.raises(LpError, match="dimensions"):
            LpProblem(c=[1.0, 2.0], a=[[1.0]], b=[0.0], lower=[0, 0], upper=[1, 1])


class TestAgainstVertexEnumeration:
    def test_random_boxes_and_rows(self, rng):
        mismatches = 0
        for _ in range(40):
            n = int(rng.integers(2, 5))
            mrows = int(rng.integers(1, 6))
            lp = LpProblem(
                c=rng.normal(size=n),
                a=rng.normal(size=(mrows, n)),
                b=rng.normal(size=mrows) - 1.0,
                lower=-np.abs(rng.normal(size=n)) - 1.0,
                upper=np.abs(rng.normal(size=n)) + 1.0,
            )
            sol = solve_lp(lp)
            ref = enumerate_vertices(lp)
            if ref is None:
                assert sol.status == "infeasible"
            else:
                assert sol.ok
                assert sol.objective == pytest.approx(ref, abs=1e-7)
        assert mismatches == 0

    def test_equality_sandwich(self):
        # x + y == 3 enforced as two opposing inequalities
        lp = LpProblem(
            c=[1.0, -1.0],
            a=[[1, 1], [-1, -1]],
            b=[3.0, -3.0],
            lower=[0, 0],
            upper=[2, 2],
        )
        sol = solve_lp(lp)
        assert sol.objective == pytest.approx(-1.0, abs=1e-9)
        np.testing.assert_allclose(sol.x, [1.0, 2.0], atol=1e-9)


class TestContracts:
    def test_objective_matches_reference_recomputation(self, rng):
        for _ in range(20):
            n = int(rng.integers(2, 6))
            lp = LpProblem(
                c=rng.normal(size=n),
                a=rng.normal(size=(3, n)),
                b=rng.normal(size=3) - 2.0,
                lower=np.full(n, -5.0),
                upper=np.full(n, 5.0),
            )
            sol = solve_lp(lp)
            if sol.ok:
                assert abs(sol.objective - float(lp.c @ sol.x)) <= 1e-9
                assert np.all(lp.a @ sol.x >= lp.b - 1e-7)

    def test_deterministic_repeat(self):
        rng = np.random.default_rng(99)
        lp = LpProblem(
            c=rng.normal(size=4),
            a=rng.normal(size=(5, 4)),
            b=rng.normal(size=5) - 1.0,
            lower=np.full(4, -3.0),
            upper=np.full(4, 3.0),
        )
        s1, s2 = solve_lp(lp), solve_lp(lp)
        assert s1.objective == s2.objective
        assert s1.iterations == s2.iterations
        assert np.array_equal(s1.x, s2.x)

    def test_degenerate_duplicate_rows(self):
        # same constraint repeated five times exercises tie handling
        row = [1.0, 1.0]
        lp = LpProblem(
            c=[1.0, 2.0],
            a=[row] * 5,
            b=[1.0] * 5,
            lower=[0.0, 0.0],
            upper=[4.0, 4.0],
        )
        sol = solve_lp(lp)
        assert sol.objective == pytest.approx(1.0, abs=1e-9)

    def test_solution_dataclass_shape(self):
        lp = LpProblem(c=[0.0], a=[[1.0]], b=[-1.0], lower=[-1.0], upper=[1.0])
        sol = solve_lp(lp)
        assert isinstance(sol, LpSolution)
        assert sol.x.shape == (1,)
