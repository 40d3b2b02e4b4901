"""Discrete transport geodesics with certified duality gaps.

The squared distance between two strictly positive densities is the
minimum of the discrete action

    sum_k  dt * 2 F(mid_k, m_k),      mid_k = (rho_k + rho_{k+1}) / 2,

over paths satisfying the discrete continuity equation

    rho_{k+1} - rho_k = (dt/2) div(m_k - (m_k)_*).

The solver never touches infeasible iterates: it optimizes only the
interior node densities (moves restricted to ker(grad)^perp, so traces
and reachability are preserved exactly) and reconstructs the momenta on
every interval through the weighted elliptic solve, m_k = grad(X_k) mid_k.
With that reconstruction the per-interval action is <f_k; X_k> with
f_k = (rho_{k+1} - rho_k)/dt, which is what the optimizer and its
analytic gradient use.

A converged (or best-effort) path is accompanied by a dual certificate:
node potentials lambda_k satisfying the discrete Hamilton-Jacobi
inequality  (lambda_{k+1}-lambda_k)/dt + (1/2)(grad lb_k)^*(grad lb_k) <= 0
(lb_k the midpoint), whose endpoint pairing bounds the primal action
from below.  The reported gap is therefore a true optimality certificate,
not a heuristic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .action import kinetic
from .elliptic import WeightedOperator, solve_potential
from .hermitian import (
    DensityMatrix,
    HermitianMatrix,
    OperatorStack,
    inner_product,
    unvec_h,
    vec_h,
)
from .lindblad import LindbladSet, divergence, gradient


class InfeasibleEndpoints(ValueError):
    """rho1 - rho0 has a kernel component; no finite-cost connection exists."""


@dataclass
class SolverConfig:
    K: int = 32
    max_iter: int = 500
    grad_tol: float = 1e-7  # scaled by (1 + |cost|) inside the solver
    eps_pd: float = 1e-8    # eigenvalue floor maintained by the line search


@dataclass
class DiscretePath:
    K: int
    grid: np.ndarray
    densities: list          # K+1 DensityMatrix
    momenta: list            # K OperatorStack (general)
    potentials: list | None  # K HermitianMatrix when feasible-by-construction


@dataclass
class DualPath:
    K: int
    nodes: list               # K+1 HermitianMatrix


@dataclass
class GeodesicResult:
    path: DiscretePath
    distance: float
    primal_cost: float
    dual_path: DualPath
    dual_value: float
    gap: float
    hamiltonian: list
    iterations: int
    converged: bool
    grad_norm: float
    trace_drift: float
    warnings: list = field(default_factory=list)
    iterate_nodes: list | None = None


@dataclass
class HamiltonianProfile:
    values: list
    mean: float
    rel_std: float
    speed_check: list          # [i, j, relative error] per sub-window
    speed_ok: bool


def feasibility_gap(l: LindbladSet, rho0, rho1) -> float:
    """Norm of the kernel component of rho1 - rho0 (zero iff connectable)."""
    d = _mat(rho1) - _mat(rho0)
    return float(np.linalg.norm(l.kernel_vecs.T @ vec_h(d)))


def _mat(x) -> np.ndarray:
    return x.mat if hasattr(x, "mat") else np.asarray(x, dtype=complex)


def _gram(blocks: np.ndarray) -> np.ndarray:
    return np.einsum("kji,kjl->il", np.conj(blocks), blocks)


def continuity_residual(l: LindbladSet, path: DiscretePath) -> float:
    """Max over intervals of |rho_{k+1} - rho_k - (dt/2) div(m_k - m_k*)|."""
    dt = 1.0 / path.K
    worst = 0.0
    for k in range(path.K):
        m = path.momenta[k].blocks
        y = m - np.conj(np.transpose(m, (0, 2, 1)))
        rhs = 0.5 * dt * divergence(l, OperatorStack(y, flavor="skew")).mat
        diff = _mat(path.densities[k + 1]) - _mat(path.densities[k]) - rhs
        worst = max(worst, float(np.linalg.norm(diff)))
    return worst


def _interval_solve(l: LindbladSet, rho_a: np.ndarray, rho_b: np.ndarray, dt: float):
    """Potential, momentum and action data for one interval.

    Returns (X matrix, momentum blocks, grad-X blocks, action term
    <f; X> with f = (rho_b - rho_a)/dt).
    """
    mid = 0.5 * (rho_a + rho_b)
    f = (rho_b - rho_a) / dt
    x = solve_potential(WeightedOperator(l, mid), HermitianMatrix(f))
    v = gradient(l, x).blocks
    m = np.einsum("kij,jl->kil", v, mid)
    action = float(np.trace(f.conj().T @ x.mat).real)
    return x.mat, m, v, action


def _endpoint_guard(l: LindbladSet, rho0, rho1):
    r0 = DensityMatrix(_mat(rho0), strict=True)
    r1 = DensityMatrix(_mat(rho1), strict=True)
    gap = feasibility_gap(l, r0, r1)
    if gap > 1e-10:
        raise InfeasibleEndpoints(
            f"rho1 - rho0 has a kernel component of norm {gap:.3e}; the "
            "endpoints are not connectable by any finite-action path "
            "(connectability requires rho1 - rho0 orthogonal to ker(grad))"
        )
    return r0, r1


def initial_path(l: LindbladSet, rho0, rho1, big_k: int) -> DiscretePath:
    """Linear density interpolation with per-interval reconstructed momenta.

    Exactly feasible: with X_k solving the weighted system at the interval
    midpoint and m_k = grad(X_k) mid_k, the identity
    m - m_* = grad(X) mid + mid grad(X) turns the elliptic equation into
    the discrete continuity equation.
    """
    r0, r1 = _endpoint_guard(l, rho0, rho1)
    dt = 1.0 / big_k
    nodes = [r0]
    for j in range(1, big_k):
        t = j * dt
        nodes.append(DensityMatrix((1 - t) * r0.mat + t * r1.mat))
    nodes.append(r1)
    momenta, potentials = [], []
    for k in range(big_k):
        x, m, _, _ = _interval_solve(l, nodes[k].mat, nodes[k + 1].mat, dt)
        potentials.append(HermitianMatrix(x))
        momenta.append(OperatorStack(m, flavor="general"))
    return DiscretePath(K=big_k, grid=np.linspace(0.0, 1.0, big_k + 1),
                        densities=nodes, momenta=momenta, potentials=potentials)


# ---------------------------------------------------------------------------
# reduced objective over interior nodes
# ---------------------------------------------------------------------------

class _Reduced:
    """E(y) = sum_k <rho_{k+1} - rho_k; X_k> over interior-node moves y.

    Interior node j sits at base_j + unvec(C y_j) with C an orthonormal
    basis of ker(grad)^perp, so unit trace and endpoint reachability are
    automatic for every candidate.
    """

    def __init__(self, l, r0, r1, big_k, floor):
        self.l = l
        self.big_k = big_k
        self.dt = 1.0 / big_k
        self.floor = floor
        self.c = l.complement_vecs
        self.d = self.c.shape[1]
        self.ends = (r0.mat, r1.mat)
        self.base = [((1 - j * self.dt) * r0.mat + j * self.dt * r1.mat)
                     for j in range(1, big_k)]

    def nodes(self, y: np.ndarray) -> list:
        out = [self.ends[0]]
        for j in range(self.big_k - 1):
            move = unvec_h(self.c @ y[j * self.d:(j + 1) * self.d], self.l.n)
            out.append(self.base[j] + move)
        out.append(self.ends[1])
        return out

    def feasible(self, y: np.ndarray) -> bool:
        nodes = self.nodes(y)
        for j in range(1, self.big_k):
            if float(np.linalg.eigvalsh(nodes[j])[0]) <= self.floor:
                return False
        for k in range(self.big_k):
            mid = 0.5 * (nodes[k] + nodes[k + 1])
            if float(np.linalg.eigvalsh(mid)[0]) <= self.floor:
                return False
        return True

    def value_grad(self, y: np.ndarray):
        nodes = self.nodes(y)
        xs, grams, ms = [], [], []
        total = 0.0
        for k in range(self.big_k):
            x, m, v, action = _interval_solve(self.l, nodes[k], nodes[k + 1], self.dt)
            xs.append(x)
            ms.append(m)
            grams.append(_gram(v))
            total += self.dt * action
        g = np.zeros(y.size)
        for j in range(1, self.big_k):
            gj = 2.0 * (xs[j - 1] - xs[j]) \
                - 0.5 * self.dt * (grams[j - 1] + grams[j])
            g[(j - 1) * self.d: j * self.d] = self.c.T @ vec_h(gj)
        return total, g, xs, ms


def _finite_difference_grad(reduced: _Reduced, y: np.ndarray, h: float = 1e-6):
    """Central finite differences over the reduced coordinates (cross-check path)."""
    g = np.zeros(y.size)
    for i in range(y.size):
        e = np.zeros(y.size)
        e[i] = h
        fp = reduced.value_grad(y + e)[0]
        fm = reduced.value_grad(y - e)[0]
        g[i] = (fp - fm) / (2 * h)
    return g


def _two_loop(g, s_hist, y_hist):
    q = g.copy()
    alphas = []
    for s, y in zip(reversed(s_hist), reversed(y_hist)):
        a = (s @ q) / (y @ s)
        alphas.append(a)
        q -= a * y
    if y_hist:
        s, y = s_hist[-1], y_hist[-1]
        q *= (s @ y) / (y @ y)
    for (s, y), a in zip(zip(s_hist, y_hist), reversed(alphas)):
        b = (y @ q) / (y @ s)
        q += (a - b) * s
    return q


def _constant_result(l: LindbladSet, r0, cfg: SolverConfig,
                     warnings_list: list) -> GeodesicResult:
    """Coincident endpoints: the constant path, distance exactly zero."""
    zeros_m = np.zeros((l.count, l.n, l.n), dtype=complex)
    path = DiscretePath(
        K=cfg.K,
        grid=np.linspace(0.0, 1.0, cfg.K + 1),
        densities=[r0] * (cfg.K + 1),
        momenta=[OperatorStack(zeros_m, flavor="general")] * cfg.K,
        potentials=[HermitianMatrix(np.zeros((l.n, l.n)))] * cfg.K,
    )
    dual_path, dual_value = dual_certificate(l, path)
    return GeodesicResult(
        path=path, distance=0.0, primal_cost=0.0,
        dual_path=dual_path, dual_value=dual_value, gap=0.0 - dual_value,
        hamiltonian=[0.0] * cfg.K, iterations=0, converged=True,
        grad_norm=0.0, trace_drift=0.0, warnings=warnings_list,
        iterate_nodes=None,
    )


def optimize_geodesic(l: LindbladSet, rho0, rho1, config: SolverConfig | None = None,
                      record_iterates: bool = False) -> GeodesicResult:
    """Minimize the discrete action over interior nodes; return path + certificate.

    Quasi-Newton (L-BFGS) descent with Armijo backtracking; steps that
    would push any node or interval midpoint below the eigenvalue floor
    are shortened, and a persistent failure to move is reported as a
    boundary hit with the best iterate returned.
    """
    cfg = config or SolverConfig()
    r0, r1 = _endpoint_guard(l, rho0, rho1)
    warnings_list = []
    if l.kernel_dim > 1:
        warnings_list.append("kernel-dim")

    if float(np.linalg.norm(r1.mat - r0.mat)) <= 1e-14:
        return _constant_result(l, r0, cfg, warnings_list)

    reduced = _Reduced(l, r0, r1, cfg.K, cfg.eps_pd)
    y = np.zeros((cfg.K - 1) * reduced.d)
    cost, grad, xs, ms = reduced.value_grad(y)
    gnorm = float(np.linalg.norm(grad))
    trace_drift = max(abs(float(np.trace(nd).real) - 1.0) for nd in reduced.nodes(y))
    iterates = [reduced.nodes(y)] if record_iterates else None

    s_hist, y_hist = [], []
    iterations = 0
    converged = gnorm <= cfg.grad_tol * (1.0 + abs(cost))
    while not converged and iterations < cfg.max_iter and y.size:
        d = -_two_loop(grad, s_hist, y_hist) if s_hist else -grad
        slope = float(d @ grad)
        if slope >= 0:
            d, slope = -grad, -gnorm * gnorm
        step, accepted = 1.0, False
        for _ in range(60):
            cand = y + step * d
            if reduced.feasible(cand):
                c_cost, c_grad, c_xs, c_ms = reduced.value_grad(cand)
                if c_cost <= cost + 1e-4 * step * slope:
                    accepted = True
                    break
            step *= 0.5
        if not accepted:
            warnings_list.append("boundary-hit")
            break
        s_vec, y_vec = cand - y, c_grad - grad
        if float(s_vec @ y_vec) > 1e-12 * np.linalg.norm(s_vec) * np.linalg.norm(y_vec):
            s_hist.append(s_vec)
            y_hist.append(y_vec)
            if len(s_hist) > 10:
                s_hist.pop(0)
                y_hist.pop(0)
        y, cost, grad, xs, ms = cand, c_cost, c_grad, c_xs, c_ms
        gnorm = float(np.linalg.norm(grad))
        iterations += 1
        trace_drift = max(trace_drift,
                          max(abs(float(np.trace(nd).real) - 1.0)
                              for nd in reduced.nodes(y)))
        if record_iterates:
            iterates.append(reduced.nodes(y))
        converged = gnorm <= cfg.grad_tol * (1.0 + abs(cost))

    nodes = reduced.nodes(y)
    densities = [r0] + [DensityMatrix(nd, eps_pd=1e-8) for nd in nodes[1:-1]] + [r1]
    path = DiscretePath(
        K=cfg.K,
        grid=np.linspace(0.0, 1.0, cfg.K + 1),
        densities=densities,
        momenta=[OperatorStack(m, flavor="general") for m in ms],
        potentials=[HermitianMatrix(x) for x in xs],
    )
    primal = cost
    dual_path, dual_value = dual_certificate(l, path)
    hams = []
    for k in range(cfg.K):
        mid = 0.5 * (nodes[k] + nodes[k + 1])
        hams.append(kinetic(mid, path.momenta[k]).value)
    return GeodesicResult(
        path=path,
        distance=float(np.sqrt(max(primal, 0.0))),
        primal_cost=primal,
        dual_path=dual_path,
        dual_value=dual_value,
        gap=primal - dual_value,
        hamiltonian=hams,
        iterations=iterations,
        converged=bool(converged or (cfg.K == 1)),
        grad_norm=gnorm,
        trace_drift=trace_drift,
        warnings=warnings_list,
        iterate_nodes=iterates,
    )


def dual_certificate(l: LindbladSet, path: DiscretePath):
    """Hamilton-Jacobi-feasible node potentials and their certified value.

    Seeds node values from the interval potentials (midpoint averaging,
    linear extrapolation at the ends), then sweeps the intervals in
    order, shifting each right node by a multiple of the identity so the
    interval's largest HJ-residual eigenvalue lands exactly at zero.
    Identity shifts leave every gradient untouched, so the sweep cannot
    break earlier intervals.

    Returns (DualPath, dual_value).  Scale convention: the raw endpoint
    pairing <lam_K; rho_K> - <lam_0; rho_0> bounds the action measured in
    F units; the returned dual_value is twice that, placing it on the
    same squared-distance scale as primal_cost.
    """
    if path.potentials is None:
        raise ValueError("dual_certificate needs a path with interval potentials")
    big_k = path.K
    dt = 1.0 / big_k
    xs = [p.mat for p in path.potentials]
    if big_k == 1:
        lam = [xs[0].copy(), xs[0].copy()]
    else:
        lam = [0.5 * (3.0 * xs[0] - xs[1])]
        lam += [0.5 * (xs[k - 1] + xs[k]) for k in range(1, big_k)]
        lam.append(0.5 * (3.0 * xs[-1] - xs[-2]))
    ident = np.eye(l.n)
    for k in range(big_k):
        mid = 0.5 * (lam[k] + lam[k + 1])
        gr = _gram(gradient(l, HermitianMatrix(mid)).blocks)
        res = (lam[k + 1] - lam[k]) / dt + 0.5 * gr
        shift = float(np.linalg.eigvalsh(res)[-1])
        lam[k + 1] = lam[k + 1] - dt * shift * ident
    bracket = float(np.trace(lam[-1] @ _mat(path.densities[-1])).real) \
        - float(np.trace(lam[0] @ _mat(path.densities[0])).real)
    dual = DualPath(K=big_k, nodes=[HermitianMatrix(m) for m in lam])
    return dual, 2.0 * bracket


def hj_residuals(l: LindbladSet, dual: DualPath) -> list:
    """Largest eigenvalue of the HJ residual on each interval (feasible: <= 0)."""
    dt = 1.0 / dual.K
    out = []
    for k in range(dual.K):
        mid = 0.5 * (dual.nodes[k].mat + dual.nodes[k + 1].mat)
        gr = _gram(gradient(l, HermitianMatrix(mid)).blocks)
        res = (dual.nodes[k + 1].mat - dual.nodes[k].mat) / dt + 0.5 * gr
        out.append(float(np.linalg.eigvalsh(res)[-1]))
    return out


def dual_pairing_value(path: DiscretePath, dual: DualPath) -> float:
    """2 (<lam_K; rho_K> - <lam_0; rho_0>) for any path/certificate pair."""
    bracket = float(inner_product(dual.nodes[-1], path.densities[-1].base)) \
        - float(inner_product(dual.nodes[0], path.densities[0].base))
    return 2.0 * bracket


def hamiltonian_profile(result: GeodesicResult) -> HamiltonianProfile:
    """Constancy diagnostics of the per-interval kinetic values.

    For every sub-window [t_i, t_j] the action restricted to the window
    and reparametrized to unit time is (t_j - t_i) * sum(dt * 2 F_k over
    the window); on an exact geodesic it equals ((t_j - t_i) * distance)^2.
    speed_check lists the relative deviations.
    """
    vals = list(result.hamiltonian)
    big_k = result.path.K
    dt = 1.0 / big_k
    mean = float(np.mean(vals))
    rel_std = float(np.std(vals) / mean) if mean > 1e-15 else 0.0
    total = result.primal_cost
    cum = np.concatenate([[0.0], np.cumsum([2.0 * dt * v for v in vals])])
    windows = []
    worst_ok = True
    tol = max(10.0 * rel_std, 1e-9)
    for i in range(big_k + 1):
        for j in range(i + 1, big_k + 1):
            width = (j - i) * dt
            sub_sq = width * (cum[j] - cum[i])
            target = width ** 2 * total
            err = abs(sub_sq - target) / max(abs(target), 1e-15) \
                if total > 1e-15 else 0.0
            windows.append([i, j, err])
            if err > tol:
                worst_ok = False
    return HamiltonianProfile(values=vals, mean=mean, rel_std=rel_std,
                              speed_check=windows, speed_ok=worst_ok)


def distance(l: LindbladSet, rho0, rho1, config: SolverConfig | None = None) -> float:
    """Convenience wrapper: the certified transport distance (sqrt of the action)."""
    return optimize_geodesic(l, rho0, rho1, config).distance
