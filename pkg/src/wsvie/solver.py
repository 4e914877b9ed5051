"""Step-by-step spline-collocation solvers for weakly singular Volterra equations.

Equations have the second-kind form

    x(t) - int_0^{t_l} ... int_0^{t_1} h(t, tau) g(t - tau) x(tau) dtau = f(t)

on [0, T]^l with the product kernel g(u) = prod_i u_i^{p_i}. The approximate
solution is a local spline whose nodal values are determined cell by cell in a
causal order: inside the current cell the integral is expressed in the cell's
tensor Lagrange basis, while the part over already-processed cells is
evaluated with the known spline and moved to the right-hand side.

With no smooth factor (h absent) both pieces factorize per axis, because the
kernel is a product and the spline is a tensor polynomial: the history
contribution of a processed cell D reduces to W1 @ X_D @ W2.T with one moment
matrix per axis. A general h(t, tau) falls back to tensor Gauss cubature.

Cells whose predecessors are complete could be solved concurrently (wavefront
contract); this implementation is the single-threaded reference.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .interp import NodeSet, build_nodes, lagrange_basis_matrix
from .interp import geometric_degree_schedule, geometric_global_degree, power_degree_schedule
from .mesh import (Covering, GradedMesh, boundary_layer_covering, causal_order,
                   corner_layer_covering, geometric_covering, geometric_mesh,
                   power_graded_mesh)
from .quad import DEFAULT_COMPOSITE_DEPTH, axis_kernel_quadrature, kernel_moments
from .spline import LocalSpline, TensorSpline, _cell_nodesets


@dataclass
class KernelSpec:
    """Product kernel h(t, tau) * prod_i (t_i - tau_i)^{p_i}.

    ``exponents`` lists p_i per axis (each > -1). ``smooth_factor`` is an
    optional vectorized callable taking 2l coordinate arrays
    (t_1, ..., t_l, tau_1, ..., tau_l); absent means h == 1 and enables the
    fast per-axis factorized path.
    """

    exponents: tuple
    smooth_factor: object = None

    def __post_init__(self):
        self.exponents = tuple(float(p) for p in np.atleast_1d(self.exponents))
        if any(p <= -1 for p in self.exponents):
            raise ValueError(f"kernel exponents must be > -1, got {self.exponents}")

    def g(self, *diffs):
        """Product factor prod_i d_i^{p_i}; zero on the diagonal for p_i > 0."""
        if len(diffs) != len(self.exponents):
            raise ValueError("difference count does not match the exponent count")
        out = np.ones(np.broadcast(*diffs).shape)
        for d, p in zip(diffs, self.exponents):
            d = np.asarray(d, dtype=float)
            if p > 0:
                out = out * np.where(d == 0.0, 0.0, d ** p)
            elif p != 0:
                out = out * d ** p
        return out


@dataclass
class VieProblem:
    """Equation definition: dimension, domain edge, kernel, rhs, optional exact solution."""

    l: int
    T: float
    kernel: KernelSpec | None
    rhs: object
    exact: object = None

    def __post_init__(self):
        if self.l not in (1, 2):
            raise ValueError(f"l must be 1 or 2, got {self.l}")
        if self.T <= 0:
            raise ValueError(f"T must be > 0, got {self.T}")
        if self.kernel is not None and len(self.kernel.exponents) != self.l:
            raise ValueError("kernel exponent count does not match the dimension")


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------

def preset_1d(params, N: int):
    """(mesh, schedule, family) for solving/approximating on [0, T] at level N."""
    if params.kind in ("q_star", "q_double_star"):
        mesh = power_graded_mesh(N, params.T, params.grading_exponent)
        schedule = power_degree_schedule(mesh.nsegments, params.r, params.s)
        family = "legendre_closed"
    else:
        mesh = geometric_mesh(N, params.T)
        schedule = geometric_degree_schedule(mesh.nsegments, params.r, params.gamma,
                                             params.bound_constant, params.T)
        family = "chebyshev1_closed"
    return mesh, schedule, family


def preset_2d(params, N: int):
    """(covering, per-axis node count, family) for the plane at level N."""
    if params.kind == "q_star":
        cov = boundary_layer_covering(N, params.T, 2, params.grading_exponent)
        return cov, max(params.s, 2), "legendre_closed"
    if params.kind == "q_double_star":
        cov = corner_layer_covering(N, params.T, 2, params.grading_exponent)
        return cov, max(params.s, 2), "legendre_closed"
    if params.kind == "b_star":
        cov = geometric_covering(N, params.T, 2)
        degree = geometric_global_degree(N, params.r, params.gamma,
                                         params.bound_constant, params.T)
        return cov, degree, "chebyshev1_closed"
    raise ValueError(f"no covering construction for kind {params.kind!r}")


# ---------------------------------------------------------------------------
# 1D solver
# ---------------------------------------------------------------------------

def _smooth_1d(kernel, t, tau):
    return kernel.smooth_factor(t, tau)


def solve_1d(problem: VieProblem, mesh: GradedMesh, schedule,
             family: str = "legendre_closed", quad_n: int | None = None,
             singular_rule: str = "legendre",
             composite_depth: int = DEFAULT_COMPOSITE_DEPTH) -> LocalSpline:
    """March the collocation solution segment by segment over a 1D mesh.

    On segment k the unknowns are the nodal values at its collocation nodes;
    the value shared with segment k-1 (the breakpoint) is pinned to the
    already-computed one. Each local dense system is solved by LU with partial
    pivoting and its residual is required to stay below 1e-10.
    """
    if problem.l != 1:
        raise ValueError("solve_1d requires a 1-dimensional problem")
    schedule = list(schedule)
    if len(schedule) != mesh.nsegments:
        raise ValueError(f"schedule length {len(schedule)} != segment count {mesh.nsegments}")
    if quad_n is None:
        quad_n = min(max(schedule) + 4, 64)
    kern = problem.kernel
    p = kern.exponents[0] if kern is not None else None
    segs = mesh.segments()
    nodesets = [build_nodes(seg, family, m) for seg, m in zip(segs, schedule)]
    values: list[np.ndarray] = []
    for k, ns in enumerate(nodesets):
        xi, m = ns.nodes, ns.m
        hist = np.zeros(m)
        if kern is not None:
            for kp in range(k):
                a, b = segs[kp]
                src = nodesets[kp]
                if kern.smooth_factor is None:
                    M = kernel_moments(xi, p, a, b, src, quad_n,
                                       rule=singular_rule, depth=composite_depth)
                    hist += M @ values[kp]
                else:
                    T, W = axis_kernel_quadrature(xi, p, a, b, quad_n,
                                                  rule=singular_rule, depth=composite_depth)
                    spl_at = (lagrange_basis_matrix(src, T.ravel())
                              .reshape(m, -1, src.m) @ values[kp])
                    hist += np.sum(W * _smooth_1d(kern, xi[:, None], T) * spl_at, axis=1)
        if kern is None:
            A = np.eye(m)
        else:
            a, b = segs[k]
            if kern.smooth_factor is None:
                S = kernel_moments(xi, p, a, b, ns, quad_n,
                                   rule=singular_rule, depth=composite_depth)
            else:
                T, W = axis_kernel_quadrature(xi, p, a, b, quad_n,
                                              rule=singular_rule, depth=composite_depth)
                B = lagrange_basis_matrix(ns, T.ravel()).reshape(m, -1, m)
                S = np.einsum("rq,rq,rqm->rm", W, _smooth_1d(kern, xi[:, None], T), B)
            A = np.eye(m) - S
        rhs = np.asarray(problem.rhs(xi), dtype=float) + hist
        if k > 0:
            A[0, :] = 0.0
            A[0, 0] = 1.0
            rhs[0] = values[k - 1][-1]
        try:
            sol = np.linalg.solve(A, rhs)
        except np.linalg.LinAlgError as exc:
            raise RuntimeError(f"singular local system on segment {k}") from exc
        res = float(np.max(np.abs(A @ sol - rhs)))
        if res > 1e-10:
            raise RuntimeError(f"local solve residual {res:.2e} > 1e-10 on segment {k}")
        values.append(sol)
    return LocalSpline(mesh=mesh, nodesets=nodesets, values=values)


# ---------------------------------------------------------------------------
# 2D solver
# ---------------------------------------------------------------------------

def _smooth_2d_tensor(kernel, x1, x2, T1, T2):
    """h evaluated on the tensor grid (i, j, q1, q2) of nodes x cubature points."""
    return kernel.smooth_factor(x1[:, None, None, None], x2[None, :, None, None],
                                T1[:, None, :, None], T2[None, :, None, :])


def solve_2d(problem: VieProblem, covering: Covering, degree,
             family: str = "legendre_closed", quad_n: int | None = None,
             order=None, singular_rule: str = "legendre",
             composite_depth: int = DEFAULT_COMPOSITE_DEPTH) -> TensorSpline:
    """Solve a 2D equation cell by cell over a covering.

    In each cell, nodes lying on the closure of a shadow-predecessor cell are
    knowns inherited from that cell's spline (earliest such cell in the list);
    all other nodal values are unknowns of the local dense system. History
    integrals are accumulated over predecessor cells in list order, which
    makes the assembled systems independent of the particular causal order.
    """
    if problem.l != 2:
        raise ValueError("solve_2d requires a 2-dimensional problem")
    if covering.l != 2:
        raise ValueError("covering dimension != 2")
    if order is None:
        order = causal_order(covering)
    order = list(order)
    if sorted(order) != list(range(covering.ncells)):
        raise ValueError("order is not a permutation of the covering's cells")
    nodesets = _cell_nodesets(covering, degree, family)
    if quad_n is None:
        quad_n = min(max(max(ns.m for ns in pair) for pair in nodesets) + 4, 64)
    kern = problem.kernel
    values = [None] * covering.ncells
    owned = [None] * covering.ncells
    spl = TensorSpline(covering=covering, nodesets=nodesets, values=values, owned=owned)
    lo, hi = covering.lo_array, covering.hi_array
    tol = 1e-12 * covering.T
    done = np.zeros(covering.ncells, dtype=bool)
    for ci in order:
        cell = covering.cells[ci]
        ns1, ns2 = nodesets[ci]
        xi1, xi2 = ns1.nodes, ns2.nodes
        m1, m2 = ns1.m, ns2.m
        pred = np.all(lo < np.asarray(cell.hi)[None, :], axis=1)
        pred[ci] = False
        pred_idx = np.nonzero(pred)[0]
        if not done[pred_idx].all():
            raise RuntimeError(f"order processes cell {ci} before its predecessors")

        H = np.zeros((m1, m2))
        if kern is not None:
            p1, p2 = kern.exponents
            # many cells share identical per-axis ranges, so moment matrices
            # against the current collocation coordinates are cached per axis
            cache: dict = {}

            def moments_for(axis, xi, p, a, b, src):
                key = (axis, a, b, src.m)
                M = cache.get(key)
                if M is None:
                    M = kernel_moments(xi, p, a, b, src, quad_n,
                                       rule=singular_rule, depth=composite_depth)
                    cache[key] = M
                return M

            for di in pred_idx:
                d = covering.cells[di]
                src1, src2 = nodesets[di]
                if kern.smooth_factor is None:
                    W1 = moments_for(0, xi1, p1, d.lo[0], d.hi[0], src1)
                    W2 = moments_for(1, xi2, p2, d.lo[1], d.hi[1], src2)
                    H += W1 @ values[di] @ W2.T
                else:
                    T1, W1 = axis_kernel_quadrature(xi1, p1, d.lo[0], d.hi[0], quad_n,
                                                    rule=singular_rule, depth=composite_depth)
                    T2, W2 = axis_kernel_quadrature(xi2, p2, d.lo[1], d.hi[1], quad_n,
                                                    rule=singular_rule, depth=composite_depth)
                    B1 = lagrange_basis_matrix(src1, T1.ravel()).reshape(m1, -1, src1.m)
                    B2 = lagrange_basis_matrix(src2, T2.ravel()).reshape(m2, -1, src2.m)
                    hten = _smooth_2d_tensor(kern, xi1, xi2, T1, T2)
                    G1 = np.einsum("iqa,ab->iqb", B1, values[di])
                    H += np.einsum("iq,jp,ijqp,iqb,jpb->ij", W1, W2, hten, G1, B2,
                                   optimize=True)

        pts = spl.node_grid(ci)
        npts = pts.shape[0]
        known_mask = np.zeros(npts, dtype=bool)
        known_vals = np.zeros(npts)
        if pred_idx.size:
            rank = covering.causal_rank()
            contains = (np.all(pts[:, None, :] >= lo[pred_idx][None, :, :] - tol, axis=2)
                        & np.all(pts[:, None, :] <= hi[pred_idx][None, :, :] + tol, axis=2))
            for pi in np.nonzero(contains.any(axis=1))[0]:
                cands = pred_idx[contains[pi]]
                donor = int(cands[np.argmin(rank[cands])])
                known_vals[pi] = spl.eval_cell(donor, pts[pi:pi + 1])[0]
                known_mask[pi] = True

        if kern is None:
            A = np.eye(npts)
        elif kern.smooth_factor is None:
            S1 = kernel_moments(xi1, p1, cell.lo[0], cell.hi[0], ns1, quad_n,
                                rule=singular_rule, depth=composite_depth)
            S2 = kernel_moments(xi2, p2, cell.lo[1], cell.hi[1], ns2, quad_n,
                                rule=singular_rule, depth=composite_depth)
            A = np.eye(npts) - np.einsum("ia,jb->ijab", S1, S2).reshape(npts, npts)
        else:
            T1, W1 = axis_kernel_quadrature(xi1, p1, cell.lo[0], cell.hi[0], quad_n,
                                            rule=singular_rule, depth=composite_depth)
            T2, W2 = axis_kernel_quadrature(xi2, p2, cell.lo[1], cell.hi[1], quad_n,
                                            rule=singular_rule, depth=composite_depth)
            B1 = lagrange_basis_matrix(ns1, T1.ravel()).reshape(m1, -1, m1)
            B2 = lagrange_basis_matrix(ns2, T2.ravel()).reshape(m2, -1, m2)
            hten = _smooth_2d_tensor(kern, xi1, xi2, T1, T2)
            C1 = np.einsum("iq,iqa->iqa", W1, B1)
            C2 = np.einsum("jp,jpb->jpb", W2, B2)
            S = np.einsum("iqa,ijqp,jpb->ijab", C1, hten, C2, optimize=True)
            A = np.eye(npts) - S.reshape(npts, npts)

        rhs = np.asarray(problem.rhs(pts[:, 0], pts[:, 1]), dtype=float) + H.ravel()
        if known_mask.any():
            rows = np.nonzero(known_mask)[0]
            A[rows, :] = 0.0
            A[rows, rows] = 1.0
            rhs[rows] = known_vals[rows]
        try:
            sol = np.linalg.solve(A, rhs)
        except np.linalg.LinAlgError as exc:
            raise RuntimeError(f"singular local system on cell {ci} (layer {cell.k})") from exc
        res = float(np.max(np.abs(A @ sol - rhs)))
        if res > 1e-9:
            raise RuntimeError(f"local solve residual {res:.2e} > 1e-9 on cell {ci}")
        values[ci] = sol.reshape(m1, m2)
        owned[ci] = (~known_mask).reshape(m1, m2)
        done[ci] = True
    return spl


# ---------------------------------------------------------------------------
# integral operator application, residuals
# ---------------------------------------------------------------------------

def apply_integral_operator(problem: VieProblem, solution, axes,
                            quad_n: int = 12, singular_rule: str = "legendre",
                            composite_depth: int = DEFAULT_COMPOSITE_DEPTH):
    """Evaluate (K x)(t) on a grid given by per-axis sample arrays.

    ``solution`` is the LocalSpline / TensorSpline to integrate against; the
    integral is taken over the solution's own cells clipped to [0, t].
    """
    kern = problem.kernel
    if problem.l == 1:
        ts = np.atleast_1d(np.asarray(axes[0] if isinstance(axes, (tuple, list)) else axes,
                                      dtype=float))
        out = np.zeros_like(ts)
        if kern is None:
            return out
        p = kern.exponents[0]
        for k, (a, b) in enumerate(solution.mesh.segments()):
            src = solution.nodesets[k]
            if kern.smooth_factor is None:
                M = kernel_moments(ts, p, a, b, src, quad_n,
                                   rule=singular_rule, depth=composite_depth)
                out += M @ solution.values[k]
            else:
                T, W = axis_kernel_quadrature(ts, p, a, b, quad_n,
                                              rule=singular_rule, depth=composite_depth)
                spl_at = (lagrange_basis_matrix(src, T.ravel())
                          .reshape(ts.size, -1, src.m) @ solution.values[k])
                out += np.sum(W * kern.smooth_factor(ts[:, None], T) * spl_at, axis=1)
        return out
    ax1 = np.atleast_1d(np.asarray(axes[0], dtype=float))
    ax2 = np.atleast_1d(np.asarray(axes[1], dtype=float))
    out = np.zeros((ax1.size, ax2.size))
    if kern is None:
        return out
    p1, p2 = kern.exponents
    cache: dict = {}
    for di, d in enumerate(solution.covering.cells):
        src1, src2 = solution.nodesets[di]
        if kern.smooth_factor is None:
            key1 = (0, d.lo[0], d.hi[0], src1.m)
            W1 = cache.get(key1)
            if W1 is None:
                W1 = kernel_moments(ax1, p1, d.lo[0], d.hi[0], src1, quad_n,
                                    rule=singular_rule, depth=composite_depth)
                cache[key1] = W1
            key2 = (1, d.lo[1], d.hi[1], src2.m)
            W2 = cache.get(key2)
            if W2 is None:
                W2 = kernel_moments(ax2, p2, d.lo[1], d.hi[1], src2, quad_n,
                                    rule=singular_rule, depth=composite_depth)
                cache[key2] = W2
            out += W1 @ solution.values[di] @ W2.T
        else:
            T1, W1 = axis_kernel_quadrature(ax1, p1, d.lo[0], d.hi[0], quad_n,
                                            rule=singular_rule, depth=composite_depth)
            T2, W2 = axis_kernel_quadrature(ax2, p2, d.lo[1], d.hi[1], quad_n,
                                            rule=singular_rule, depth=composite_depth)
            B1 = lagrange_basis_matrix(src1, T1.ravel()).reshape(ax1.size, -1, src1.m)
            B2 = lagrange_basis_matrix(src2, T2.ravel()).reshape(ax2.size, -1, src2.m)
            hten = kern.smooth_factor(ax1[:, None, None, None], ax2[None, :, None, None],
                                      T1[:, None, :, None], T2[None, :, None, :])
            G1 = np.einsum("iqa,ab->iqb", B1, solution.values[di])
            out += np.einsum("iq,jp,ijqp,iqb,jpb->ij", W1, W2, hten, G1, B2,
                             optimize=True)
    return out


def residual(problem: VieProblem, solution, samples, quad_n: int = 12,
             singular_rule: str = "legendre",
             composite_depth: int = DEFAULT_COMPOSITE_DEPTH) -> float:
    """Max |x(t) - (K x)(t) - f(t)| over sample points.

    ``samples`` is an array of points for l = 1; for l = 2 either a pair of
    axis arrays spanning a sample grid, or an (n, 2) array of points (each
    evaluated through its own degenerate grid).
    """
    if problem.l == 1:
        ts = np.atleast_1d(np.asarray(samples, dtype=float))
        r = (solution.eval(ts)
             - apply_integral_operator(problem, solution, ts, quad_n,
                                       singular_rule, composite_depth)
             - np.asarray(problem.rhs(ts), dtype=float))
        return float(np.max(np.abs(r)))
    if isinstance(samples, np.ndarray) and samples.ndim == 2:
        return max(residual(problem, solution, (samples[i, :1], samples[i, 1:]),
                            quad_n, singular_rule, composite_depth)
                   for i in range(samples.shape[0]))
    ax1 = np.atleast_1d(np.asarray(samples[0], dtype=float))
    ax2 = np.atleast_1d(np.asarray(samples[1], dtype=float))
    g1, g2 = np.meshgrid(ax1, ax2, indexing="ij")
    pts = np.column_stack([g1.ravel(), g2.ravel()])
    kx = apply_integral_operator(problem, solution, (ax1, ax2), quad_n,
                                 singular_rule, composite_depth)
    r = (solution.eval(pts).reshape(ax1.size, ax2.size) - kx
         - np.asarray(problem.rhs(g1, g2), dtype=float))
    return float(np.max(np.abs(r)))


def collocation_residual(problem: VieProblem, solution,
                         quad_n: int | None = None,
                         singular_rule: str = "legendre",
                         composite_depth: int = DEFAULT_COMPOSITE_DEPTH) -> float:
    """Max discrete-equation residual over the nodes each cell owns.

    Re-evaluates the collocation equations from the stored nodal values with
    the same quadrature the solver used; inherited (non-owned) nodes belong to
    the cell that first computed them and are checked there.
    """
    kern = problem.kernel
    if problem.l == 1:
        worst = 0.0
        segs = solution.mesh.segments()
        if quad_n is None:
            quad_n = min(max(ns.m for ns in solution.nodesets) + 4, 64)
        for k, ns in enumerate(solution.nodesets):
            xi = ns.nodes
            lhs = solution.values[k].copy()
            if kern is not None:
                p = kern.exponents[0]
                for kp in range(k + 1):
                    a, b = segs[kp]
                    src = solution.nodesets[kp]
                    M = kernel_moments(xi, p, a, b, src, quad_n,
                                       rule=singular_rule, depth=composite_depth)
                    lhs -= M @ solution.values[kp]
            r = lhs - np.asarray(problem.rhs(xi), dtype=float)
            if k > 0:
                r = r[1:]  # first node owned by the previous segment
            worst = max(worst, float(np.max(np.abs(r))))
        return worst
    worst = 0.0
    cov = solution.covering
    p1, p2 = (kern.exponents if kern is not None else (None, None))
    if quad_n is None:
        quad_n = min(max(max(ns.m for ns in pair) for pair in solution.nodesets) + 4, 64)
    lo = cov.lo_array
    for ci, cell in enumerate(cov.cells):
        ns1, ns2 = solution.nodesets[ci]
        xi1, xi2 = ns1.nodes, ns2.nodes
        own = solution.owned[ci]
        if not own.any():
            continue
        lhs = solution.values[ci].copy()
        if kern is not None:
            pred = np.all(lo < np.asarray(cell.hi)[None, :], axis=1)
            pred[ci] = True  # include the cell's own clipped integral
            for di in np.nonzero(pred)[0]:
                d = cov.cells[di]
                src1, src2 = solution.nodesets[di]
                W1 = kernel_moments(xi1, p1, d.lo[0], d.hi[0], src1, quad_n,
                                    rule=singular_rule, depth=composite_depth)
                W2 = kernel_moments(xi2, p2, d.lo[1], d.hi[1], src2, quad_n,
                                    rule=singular_rule, depth=composite_depth)
                lhs -= W1 @ solution.values[di] @ W2.T
        pts = solution.node_grid(ci)
        r = lhs - np.asarray(problem.rhs(pts[:, 0], pts[:, 1]),
                             dtype=float).reshape(lhs.shape)
        worst = max(worst, float(np.max(np.abs(r[own]))))
    return worst


# ---------------------------------------------------------------------------
# product-integration oracle on uniform grids
# ---------------------------------------------------------------------------

@dataclass
class OracleSolution:
    """Uniform-grid solution values from the product-integration oracle."""

    axes: tuple
    values: np.ndarray


def _linear_weight_matrix(t: np.ndarray, p: float, kern: KernelSpec,
                          quad_n: int, singular_rule: str, depth: int) -> np.ndarray:
    """Nodal weights V with (V x)[i] ~= int_0^{t_i} kernel * (linear interp of x)."""
    n = t.size - 1
    V = np.zeros((n + 1, n + 1))
    for j in range(n):
        lin = build_nodes((t[j], t[j + 1]), "legendre_closed", 2)
        xs = t[j + 1:]
        if kern.smooth_factor is None:
            M = kernel_moments(xs, p, t[j], t[j + 1], lin, quad_n,
                               rule=singular_rule, depth=depth)
        else:
            TT, WW = axis_kernel_quadrature(xs, p, t[j], t[j + 1], quad_n,
                                            rule=singular_rule, depth=depth)
            B = lagrange_basis_matrix(lin, TT.ravel()).reshape(xs.size, -1, 2)
            M = np.einsum("rq,rq,rqm->rm", WW, kern.smooth_factor(xs[:, None], TT), B)
        V[j + 1:, j] += M[:, 0]
        V[j + 1:, j + 1] += M[:, 1]
    return V


def oracle_solve(problem: VieProblem, uniform_n: int, quad_n: int = 10,
                 singular_rule: str = "legendre",
                 composite_depth: int = DEFAULT_COMPOSITE_DEPTH) -> OracleSolution:
    """Product-integration solution on a uniform grid, advanced causally.

    The solution is represented piecewise linearly; kernel moments against the
    local linear basis are computed per cell by Gauss rules (graded toward the
    singular endpoint). Accuracy is second order in the mesh width. For l = 2
    only kernels without a smooth factor are supported.
    """
    kern = problem.kernel
    if problem.l == 1:
        if uniform_n > 400:
            raise ValueError("uniform_n must be <= 400 for l = 1")
        t = np.linspace(0.0, problem.T, uniform_n + 1)
        f = np.asarray(problem.rhs(t), dtype=float)
        if kern is None:
            return OracleSolution(axes=(t,), values=f.copy())
        V = _linear_weight_matrix(t, kern.exponents[0], kern, quad_n,
                                  singular_rule, composite_depth)
        x = np.zeros(uniform_n + 1)
        for i in range(uniform_n + 1):
            acc = V[i, :i] @ x[:i] if i else 0.0
            x[i] = (f[i] + acc) / (1.0 - V[i, i])
        return OracleSolution(axes=(t,), values=x)

    if uniform_n > 100:
        raise ValueError("uniform_n must be <= 100 per axis for l = 2")
    if kern is not None and kern.smooth_factor is not None:
        raise NotImplementedError("2D oracle supports product kernels without a smooth factor")
    t1 = np.linspace(0.0, problem.T, uniform_n + 1)
    t2 = np.linspace(0.0, problem.T, uniform_n + 1)
    F = np.asarray(problem.rhs(t1[:, None], t2[None, :]), dtype=float)
    if kern is None:
        return OracleSolution(axes=(t1, t2), values=F.copy())
    V1 = _linear_weight_matrix(t1, kern.exponents[0], kern, quad_n,
                               singular_rule, composite_depth)
    V2 = _linear_weight_matrix(t2, kern.exponents[1], kern, quad_n,
                               singular_rule, composite_depth)
    n = uniform_n
    X = np.zeros((n + 1, n + 1))
    for i in range(n + 1):
        G = V2 @ (V1[i, :i] @ X[:i, :]) if i else np.zeros(n + 1)
        vii = V1[i, i]
        for j in range(n + 1):
            cross = vii * (V2[j, :j] @ X[i, :j]) if j else 0.0
            X[i, j] = (F[i, j] + G[j] + cross) / (1.0 - vii * V2[j, j])
    return OracleSolution(axes=(t1, t2), values=X)
