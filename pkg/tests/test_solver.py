import numpy as np
import pytest

from wsvie.cli import get_problem
from wsvie.mesh import boundary_layer_covering, causal_order, shadow_matrix
from wsvie.solver import (KernelSpec, VieProblem, collocation_residual, oracle_solve,
                          preset_1d, preset_2d, residual, solve_1d, solve_2d)
from wsvie.spline import build_tensor_spline, max_node_error, sup_error

Q_05 = dict(r=2, gamma=0.5, kind="q_star")


@pytest.fixture(scope="module")
def q_params():
    from wsvie.funclass import derive_class_params

    return derive_class_params(2, 0.5, "q_star")


@pytest.fixture(scope="module")
def q25_params_2d():
    from wsvie.funclass import derive_class_params

    return derive_class_params(2, 2.5, "q_star", l=2)


@pytest.fixture(scope="module")
def b_params_2d():
    from wsvie.funclass import derive_class_params

    return derive_class_params(2, 0.5, "b_star", l=2)


class TestSolve1D:
    def test_manufactured_corner_solution(self, q_params):
        prob = get_problem("corner-power-1d")
        mesh, sched, fam = preset_1d(q_params, 16)
        sol = solve_1d(prob, mesh, sched, fam)
        assert max_node_error(sol, prob.exact) <= 1e-6

    def test_singular_rules_agree(self, q_params):
        prob = get_problem("corner-power-1d")
        mesh, sched, fam = preset_1d(q_params, 8)
        a = solve_1d(prob, mesh, sched, fam, singular_rule="legendre")
        b = solve_1d(prob, mesh, sched, fam, singular_rule="jacobi")
        dev = max(float(np.max(np.abs(x - y))) for x, y in zip(a.values, b.values))
        assert dev <= 1e-10
        assert max_node_error(a, prob.exact) <= 1e-5

    def test_zero_kernel_interpolates_rhs(self, q_params):
        prob = get_problem("poly-k0-1d")
        mesh, sched, fam = preset_1d(q_params, 6)
        sol = solve_1d(prob, mesh, sched, fam)
        assert max_node_error(sol, prob.rhs) <= 1e-13

    def test_zero_smooth_factor_matches_zero_kernel(self, q_params):
        rhs = lambda t: 1.0 + 0.5 * t
        kern = KernelSpec(exponents=(2.5,), smooth_factor=lambda t, tau: 0.0 * t * tau)
        prob = VieProblem(l=1, T=1.0, kernel=kern, rhs=rhs, exact=rhs)
        mesh, sched, fam = preset_1d(q_params, 5)
        sol = solve_1d(prob, mesh, sched, fam)
        assert max_node_error(sol, rhs) <= 1e-12

    def test_homogeneous_equation_trivial(self, q_params):
        prob = VieProblem(l=1, T=1.0, kernel=KernelSpec(exponents=(2.5,)),
                          rhs=lambda t: 0.0 * t)
        mesh, sched, fam = preset_1d(q_params, 8)
        sol = solve_1d(prob, mesh, sched, fam)
        assert max(float(np.max(np.abs(v))) for v in sol.values) <= 1e-12

    def test_smooth_factor_against_manufactured(self, q_params):
        # kernel 2 (t - tau)^2.5: rhs manufactured from x = t^2.5
        from wsvie.quad import power_moment

        c = power_moment(2.5, 2.5, 1.0)
        kern = KernelSpec(exponents=(2.5,),
                          smooth_factor=lambda t, tau: 2.0 + 0.0 * t * tau)
        prob = VieProblem(l=1, T=1.0, kernel=kern,
                          rhs=lambda t: t ** 2.5 - 2.0 * c * t ** 6,
                          exact=lambda t: t ** 2.5)
        mesh, sched, fam = preset_1d(q_params, 12)
        sol = solve_1d(prob, mesh, sched, fam)
        assert max_node_error(sol, prob.exact) <= 1e-6

    def test_schedule_mismatch_rejected(self, q_params):
        prob = get_problem("corner-power-1d")
        mesh, _, fam = preset_1d(q_params, 8)
        with pytest.raises(ValueError):
            solve_1d(prob, mesh, [3, 3], fam)

    def test_wrong_dimension_rejected(self, q_params):
        prob = get_problem("corner-power-2d")
        mesh, sched, fam = preset_1d(q_params, 4)
        with pytest.raises(ValueError):
            solve_1d(prob, mesh, sched, fam)


class TestOracle1D:
    def test_self_check_against_exact(self):
        prob = get_problem("corner-power-1d")
        oracle = oracle_solve(prob, 200)
        assert np.max(np.abs(oracle.values - prob.exact(oracle.axes[0]))) <= 1e-3

    def test_cross_validation_cos_rhs(self, q_params):
        prob = get_problem("cos-rhs-1d")
        oracle = oracle_solve(prob, 200)
        mesh, sched, fam = preset_1d(q_params, 16)
        sol = solve_1d(prob, mesh, sched, fam)
        assert np.max(np.abs(sol.eval(oracle.axes[0]) - oracle.values)) <= 1e-3

    def test_zero_kernel_returns_rhs_samples(self):
        prob = get_problem("poly-k0-1d")
        oracle = oracle_solve(prob, 50)
        assert oracle.values == pytest.approx(prob.rhs(oracle.axes[0]))

    def test_smooth_factor_supported(self, q_params):
        kern = KernelSpec(exponents=(2.5,), smooth_factor=lambda t, tau: 1.0 + 0.0 * tau)
        prob_h = VieProblem(l=1, T=1.0, kernel=kern, rhs=np.cos)
        prob_plain = get_problem("cos-rhs-1d")
        a = oracle_solve(prob_h, 100)
        b = oracle_solve(prob_plain, 100)
        assert np.max(np.abs(a.values - b.values)) <= 1e-12

    def test_grid_cap(self):
        prob = get_problem("corner-power-1d")
        with pytest.raises(ValueError):
            oracle_solve(prob, 500)


class TestOracle2D:
    def test_self_check_against_exact(self):
        prob = get_problem("corner-power-2d")
        oracle = oracle_solve(prob, 40)
        t1, t2 = oracle.axes
        exact = prob.exact(t1[:, None], t2[None, :])
        assert np.max(np.abs(oracle.values - exact)) <= 5e-3

    def test_zero_kernel(self):
        prob = get_problem("poly-k0-2d")
        oracle = oracle_solve(prob, 10)
        t1, t2 = oracle.axes
        assert oracle.values == pytest.approx(prob.rhs(t1[:, None], t2[None, :]))

    def test_smooth_factor_unsupported(self):
        kern = KernelSpec(exponents=(2.5, 2.5),
                          smooth_factor=lambda a, b, c, d: 1.0)
        prob = VieProblem(l=2, T=1.0, kernel=kern, rhs=lambda a, b: a * b)
        with pytest.raises(NotImplementedError):
            oracle_solve(prob, 10)


class TestSolve2D:
    def test_corner_power_bstar_n3(self, b_params_2d):
        prob = get_problem("corner-power-2d")
        cov, degree, fam = preset_2d(b_params_2d, 3)
        sol = solve_2d(prob, cov, degree, fam)
        assert max_node_error(sol, prob.exact, owned_only=True) <= 1e-6

    def test_corner_power_qstar_small(self, q25_params_2d):
        prob = get_problem("corner-power-2d")
        cov, degree, fam = preset_2d(q25_params_2d, 2)
        sol = solve_2d(prob, cov, degree, fam)
        assert max_node_error(sol, prob.exact, owned_only=True) <= 1e-5

    def test_homogeneous_2d(self, q25_params_2d):
        prob = VieProblem(l=2, T=1.0, kernel=KernelSpec(exponents=(2.5, 2.5)),
                          rhs=lambda a, b: 0.0 * a * b)
        cov, degree, fam = preset_2d(q25_params_2d, 2)
        sol = solve_2d(prob, cov, degree, fam)
        assert max(float(np.max(np.abs(v))) for v in sol.values) <= 1e-12

    def test_zero_kernel_2d(self, q25_params_2d):
        prob = get_problem("poly-k0-2d")
        cov, degree, fam = preset_2d(q25_params_2d, 2)
        sol = solve_2d(prob, cov, degree, fam)
        assert max_node_error(sol, prob.rhs) <= 1e-12

    def test_generic_smooth_factor_path_matches_fast_path(self, q25_params_2d):
        prob = get_problem("corner-power-2d")
        kern = KernelSpec(exponents=(2.5, 2.5),
                          smooth_factor=lambda t1, t2, u1, u2: np.ones(
                              np.broadcast(t1, t2, u1, u2).shape))
        prob_h = VieProblem(l=2, T=1.0, kernel=kern, rhs=prob.rhs, exact=prob.exact)
        cov, degree, fam = preset_2d(q25_params_2d, 1)
        fast = solve_2d(prob, cov, degree, fam)
        slow = solve_2d(prob_h, cov, degree, fam)
        dev = max(float(np.max(np.abs(fast.values[ci] - slow.values[ci])))
                  for ci in range(cov.ncells))
        assert dev <= 1e-9

    def test_collocation_residual_small(self, q25_params_2d):
        prob = get_problem("corner-power-2d")
        cov, degree, fam = preset_2d(q25_params_2d, 3)
        sol = solve_2d(prob, cov, degree, fam)
        assert collocation_residual(prob, sol) <= 1e-9

    def test_collocation_residual_1d(self, q_params):
        prob = get_problem("corner-power-1d")
        mesh, sched, fam = preset_1d(q_params, 8)
        sol = solve_1d(prob, mesh, sched, fam)
        assert collocation_residual(prob, sol) <= 1e-10

    def test_order_invariance(self, q25_params_2d):
        import heapq

        prob = get_problem("corner-power-2d")
        cov, degree, fam = preset_2d(q25_params_2d, 3)
        S = shadow_matrix(cov)
        indeg = S.sum(axis=0).astype(int)
        lo = cov.lo_array
        keys = [(-float(lo[i].sum()), tuple(-lo[i]), i) for i in range(cov.ncells)]
        ready = [keys[i] for i in range(cov.ncells) if indeg[i] == 0]
        heapq.heapify(ready)
        alt = []
        while ready:
            _, _, i = heapq.heappop(ready)
            alt.append(i)
            for j in np.nonzero(S[i])[0]:
                indeg[j] -= 1
                if indeg[j] == 0:
                    heapq.heappush(ready, keys[j])
        assert alt != causal_order(cov)
        from wsvie.mesh import verify_causal_order

        assert verify_causal_order(cov, alt)
        s1 = solve_2d(prob, cov, degree, fam)
        s2 = solve_2d(prob, cov, degree, fam, order=alt)
        dev = max(float(np.max(np.abs(s1.values[ci] - s2.values[ci])))
                  for ci in range(cov.ncells))
        assert dev <= 1e-9

    def test_invalid_order_rejected(self, q25_params_2d):
        prob = get_problem("corner-power-2d")
        cov, degree, fam = preset_2d(q25_params_2d, 2)
        with pytest.raises((ValueError, RuntimeError)):
            solve_2d(prob, cov, degree, fam, order=list(range(cov.ncells))[::-1])


class TestResidual:
    def test_exact_solution_spline_residual(self, b_params_2d):
        prob = get_problem("corner-power-2d")
        cov, degree, fam = preset_2d(b_params_2d, 5)
        spl = build_tensor_spline(prob.exact, cov, degree, family=fam)
        ax = np.linspace(0.05, 1.0, 14)
        assert residual(prob, spl, (ax, ax)) <= 1e-8

    def test_zero_spline_zero_rhs(self, q_params):
        prob = VieProblem(l=1, T=1.0, kernel=KernelSpec(exponents=(2.5,)),
                          rhs=lambda t: 0.0 * t)
        mesh, sched, fam = preset_1d(q_params, 4)
        sol = solve_1d(prob, mesh, sched, fam)
        assert residual(prob, sol, np.linspace(0, 1, 31)) == 0.0

    def test_solve_output_residual_bstar_n3(self, b_params_2d):
        prob = get_problem("corner-power-2d")
        cov, degree, fam = preset_2d(b_params_2d, 3)
        sol = solve_2d(prob, cov, degree, fam)
        ax = np.linspace(0, 1, 21)
        assert residual(prob, sol, (ax, ax)) <= 1e-6

    def test_1d_residual_of_solution(self, q_params):
        prob = get_problem("corner-power-1d")
        mesh, sched, fam = preset_1d(q_params, 16)
        sol = solve_1d(prob, mesh, sched, fam)
        assert residual(prob, sol, np.linspace(0, 1, 101)) <= 1e-4


class TestKernelSpec:
    def test_diagonal_vanishes_for_positive_exponents(self):
        kern = KernelSpec(exponents=(2.5, 2.5))
        assert kern.g(0.0, 0.3) == 0.0
        assert kern.g(0.5, 0.0) == 0.0
        assert kern.g(0.5, 0.5) == pytest.approx(0.25 ** 2.5)

    def test_exponent_validation(self):
        with pytest.raises(ValueError):
            KernelSpec(exponents=(-1.0,))

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            VieProblem(l=2, T=1.0, kernel=KernelSpec(exponents=(2.5,)),
                       rhs=lambda a, b: a * b)

    def test_residual_accepts_point_array_2d(self, b_params_2d):
        prob = get_problem("corner-power-2d")
        cov, degree, fam = preset_2d(b_params_2d, 2)
        sol = solve_2d(prob, cov, degree, fam)
        pts = np.array([[0.3, 0.8], [0.9, 0.1], [1.0, 1.0]])
        grid_equiv = max(residual(prob, sol, (pts[i, :1], pts[i, 1:]))
                         for i in range(3))
        assert residual(prob, sol, pts) == pytest.approx(grid_equiv, rel=1e-12)


class TestConvergenceContract:
    def test_1d_solver_error_tracks_spline_error(self, q_params):
        from wsvie.spline import build_spline_1d

        prob = get_problem("corner-power-1d")
        worst = 0.0
        for N in range(2, 9):
            mesh, sched, fam = preset_1d(q_params, N)
            sol = solve_1d(prob, mesh, sched, fam)
            approx = build_spline_1d(prob.exact, mesh, sched, fam)
            ratio = sup_error(sol, prob.exact, 2001) / sup_error(approx, prob.exact, 2001)
            worst = max(worst, ratio)
        assert worst <= 10.0
