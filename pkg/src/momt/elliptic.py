"""Weighted elliptic machinery.

For a weight rho >= 0 the central object is the self-adjoint map

    T_rho : X  |->  div( (grad(X) rho + rho grad(X)) / 2 ),

whose quadratic form is <X; T_rho X> = Q_rho(grad X) with
Q_rho(v) = tr(rho v^* v).  Restricted to ker(grad)^perp the map is
positive definite whenever rho is, which yields:

* solve_potential — the unique X in ker(grad)^perp with T_rho X = f,
* poincare_constant — the smallest restricted eigenvalue (the sharp
  constant c in Q_rho(grad(X - proj X)) >= c |X - proj X|^2),
* best_gradient_fit — the closest gradient field to a given skew stack
  in the Q_rho seminorm,
* momentum_min_check — the primal/dual pair certifying that m = grad(X) rho
  minimizes the kinetic cost among all momenta with a prescribed
  divergence picture.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .hermitian import (
    EPS_PD,
    DensityMatrix,
    DimensionMismatch,
    HermitianMatrix,
    OperatorStack,
    hermitian_basis,
    inner_product,
    unvec_h,
    unvec_stack,
    vec_h,
)
from .lindblad import LindbladSet, divergence, gradient


class WeightError(ValueError):
    """The weight matrix is not positive semidefinite."""


class SingularWeight(ValueError):
    """The weight matrix is singular (or nearly so) where strict positivity is required."""


class InfeasibleRHS(ValueError):
    """Right-hand side has a component inside ker(grad); no potential exists."""


def _weight(rho) -> np.ndarray:
    r = rho.mat if hasattr(rho, "mat") else np.asarray(rho, dtype=complex)
    r = 0.5 * (r + r.conj().T)
    lo = float(np.linalg.eigvalsh(r)[0])
    if lo < -EPS_PD:
        raise WeightError(f"weight has negative eigenvalue {lo:.3e}")
    return r


def quadratic_form(rho, v) -> float:
    """Q_rho(v) = tr(rho v^* v), summing the block Gram matrix; >= 0."""
    r = _weight(rho)
    blocks = v.blocks if isinstance(v, OperatorStack) else np.asarray(v, dtype=complex)
    if blocks.shape[1] != r.shape[0]:
        raise DimensionMismatch("weight and stack dimensions differ")
    gram = np.einsum("kji,kjl->il", np.conj(blocks), blocks)
    return float(np.trace(r @ gram).real)


def _anticommutator_rep(rho: np.ndarray) -> np.ndarray:
    """Real symmetric matrix of v |-> (v rho + rho v)/2 on skew coordinates."""
    n = rho.shape[0]
    basis = hermitian_basis(n)
    skew = 1j * basis
    anti = 0.5 * (np.einsum("bij,jl->bil", skew, rho)
                  + np.einsum("ij,bjl->bil", rho, skew))
    rep = (-1j * np.einsum("aij,bij->ab", np.conj(basis), anti)).real
    return 0.5 * (rep + rep.T)


class WeightedOperator:
    """T_rho with its real symmetric matrix representation.

    Attributes: lindblad, rho (raw Hermitian ndarray), matrix_rep
    (n^2 x n^2 real symmetric PSD), restricted_min_eig (smallest
    eigenvalue on ker(grad)^perp; 0 when the complement is empty).
    """

    def __init__(self, lindblad: LindbladSet, rho):
        self.lindblad = lindblad
        self.rho = _weight(rho)
        if self.rho.shape != (lindblad.n, lindblad.n):
            raise DimensionMismatch("weight dimension does not match operator set")
        g = lindblad.grad_matrix.reshape(lindblad.count, lindblad.n ** 2, lindblad.n ** 2)
        r = _anticommutator_rep(self.rho)
        # T = sum_k G_k^T R G_k: rows of each G_k are skew coordinates (index a),
        # columns are Hermitian coordinates (indices b, d)
        t = np.einsum("kab,ac,kcd->bd", g, r, g)
        self.matrix_rep = 0.5 * (t + t.T)
        c = lindblad.complement_vecs
        if c.shape[1] == 0:
            self.restricted_min_eig = 0.0
            self._restricted = np.zeros((0, 0))
        else:
            self._restricted = c.T @ self.matrix_rep @ c
            self._restricted = 0.5 * (self._restricted + self._restricted.T)
            self.restricted_min_eig = float(np.linalg.eigvalsh(self._restricted)[0])

    def apply(self, x) -> HermitianMatrix:
        a = x.mat if hasattr(x, "mat") else np.asarray(x, dtype=complex)
        return HermitianMatrix(unvec_h(self.matrix_rep @ vec_h(a), self.lindblad.n))

    def __repr__(self):
        return (f"WeightedOperator(n={self.lindblad.n}, "
                f"restricted_min_eig={self.restricted_min_eig:.6g})")


def assemble_weighted(l: LindbladSet, rho) -> WeightedOperator:
    """Build T_rho (matrix representation + restricted smallest eigenvalue)."""
    return WeightedOperator(l, rho)


def apply_weighted(l: LindbladSet, rho, x) -> HermitianMatrix:
    """T_rho X evaluated blockwise, bypassing matrix_rep (independent route)."""
    r = _weight(rho)
    v = gradient(l, x).blocks
    mixed = 0.5 * (np.einsum("kij,jl->kil", v, r) + np.einsum("ij,kjl->kil", r, v))
    return divergence(l, OperatorStack(mixed, flavor="skew"))


def solve_potential(w: WeightedOperator, f, rtol: float = 1e-9) -> HermitianMatrix:
    """The unique X in ker(grad)^perp with T_rho X = f (rho strictly positive).

    Raises InfeasibleRHS if f has a kernel component beyond 1e-10 |f|,
    SingularWeight if rho is not safely positive definite.  The returned
    X satisfies |T X - f| <= rtol * max(|f|, 1) and the stability bound
    |f| >= restricted_min_eig * |X|.
    """
    lo = float(np.linalg.eigvalsh(w.rho)[0])
    if lo <= EPS_PD:
        raise SingularWeight(
            f"weight min eigenvalue {lo:.3e} <= {EPS_PD:.1e}; the restricted "
            "system is not safely invertible"
        )
    l = w.lindblad
    fv = vec_h(f.mat if hasattr(f, "mat") else np.asarray(f, dtype=complex))
    fnorm = float(np.linalg.norm(fv))
    kpart = float(np.linalg.norm(l.kernel_vecs.T @ fv))
    # the relative gate alone would reject float-noise-sized right-hand
    # sides whose "kernel component" is pure rounding error
    if kpart > 1e-10 * fnorm and kpart > 1e-14:
        raise InfeasibleRHS(
            f"right-hand side has kernel component {kpart:.3e} (|f| = {fnorm:.3e}); "
            "solvability requires f orthogonal to ker(grad)"
        )
    c = l.complement_vecs
    if c.shape[1] == 0:
        return HermitianMatrix(np.zeros((l.n, l.n)))
    sol = cho_solve(cho_factor(w._restricted), c.T @ fv)
    xv = c @ sol
    residual = float(np.linalg.norm(w.matrix_rep @ xv - fv))
    if residual > rtol * max(fnorm, 1.0):
        raise RuntimeError(
            f"potential solve residual {residual:.3e} exceeds tolerance; "
            "the weighted operator is badly conditioned"
        )
    return HermitianMatrix(unvec_h(xv, l.n))


def poincare_constant(l: LindbladSet, rho) -> float:
    """Sharp constant c with Q_rho(grad(X - proj X)) >= c |X - proj X|^2.

    Equals the smallest eigenvalue of T_rho on ker(grad)^perp.  For a
    singular weight (or a gradient with full kernel) the constant
    degenerates; 0 is returned with a warning instead of an error.
    """
    r = _weight(rho.mat if isinstance(rho, DensityMatrix) else rho)
    lo = float(np.linalg.eigvalsh(r)[0])
    if lo <= EPS_PD or l.complement_vecs.shape[1] == 0:
        warnings.warn(
            "degenerate weight or trivial gradient: the sharp constant is 0 "
            "and the inequality may lose strictness",
            RuntimeWarning,
            stacklevel=2,
        )
        return 0.0
    return WeightedOperator(l, r).restricted_min_eig


def poincare_constant_over(l: LindbladSet, densities) -> float:
    """Minimum of poincare_constant over a user-supplied sample of weights."""
    vals = [poincare_constant(l, rho) for rho in densities]
    if not vals:
        raise ValueError("need at least one sample density")
    return min(vals)


def best_gradient_fit(l: LindbladSet, rho, v) -> HermitianMatrix:
    """The X in ker(grad)^perp minimizing Q_rho(v - grad X) over potentials.

    Characterized by stationarity: (v - grad X) rho + rho (v - grad X)
    must be divergence-free, i.e. T_rho X = div((v rho + rho v)/2).
    """
    r = _weight(rho.mat if isinstance(rho, DensityMatrix) else rho)
    stack = v if isinstance(v, OperatorStack) else OperatorStack(v, flavor="skew")
    mixed = 0.5 * (np.einsum("kij,jl->kil", stack.blocks, r)
                   + np.einsum("ij,kjl->kil", r, stack.blocks))
    f = divergence(l, OperatorStack(mixed, flavor="skew"))
    return solve_potential(WeightedOperator(l, r), f)


@dataclass
class MomentumCheck:
    primal_min: float
    dual_max: float
    optimal_m: OperatorStack
    potential: HermitianMatrix


def momentum_min_check(l: LindbladSet, rho, f) -> MomentumCheck:
    """Primal/dual values of the constrained momentum problem.

    primal_min = (1/2) <m; m rho^{-1}> at the reconstructed optimum
    m = grad(X) rho, dual_max = <f; X> - (1/2) Q_rho(grad X) at Y = X;
    the two agree (strong duality of a linearly-constrained quadratic).
    """
    r = _weight(rho.mat if isinstance(rho, DensityMatrix) else rho)
    w = WeightedOperator(l, r)
    x = solve_potential(w, f)
    v = gradient(l, x)
    m = OperatorStack(np.einsum("kij,jl->kil", v.blocks, r), flavor="general")
    rinv = np.linalg.inv(r)
    rinv = 0.5 * (rinv + rinv.conj().T)
    gram = np.einsum("kji,kjl->il", np.conj(m.blocks), m.blocks)
    primal = 0.5 * float(np.trace(gram @ rinv).real)
    fmat = f.mat if hasattr(f, "mat") else np.asarray(f, dtype=complex)
    dual = float(inner_product(HermitianMatrix(fmat), x)) - 0.5 * quadratic_form(r, v)
    return MomentumCheck(primal_min=primal, dual_max=dual, optimal_m=m, potential=x)


def momentum_divergence_matrix(l: LindbladSet) -> np.ndarray:
    """Real matrix of m |-> vec_h( div(m - m_*)/2 ) on general-stack coordinates.

    Columns follow the vec_stack convention (all real parts, then all
    imaginary parts).  Used to sample feasible momentum perturbations:
    the null space of this matrix is exactly the set of directions that
    leave the continuity picture unchanged.
    """
    big_n, n = l.count, l.n
    dof = 2 * big_n * n * n
    cols = np.zeros((n * n, dof))
    for p in range(dof):
        x = np.zeros(dof)
        x[p] = 1.0
        m = unvec_stack(x, big_n, n)
        y = m - np.conj(np.transpose(m, (0, 2, 1)))
        cols[:, p] = vec_h(0.5 * divergence(l, OperatorStack(y, flavor="skew")).mat)
    return cols


__all__ = [
    "WeightError", "SingularWeight", "InfeasibleRHS",
    "WeightedOperator", "MomentumCheck",
    "quadratic_form", "assemble_weighted", "apply_weighted", "solve_potential",
    "poincare_constant", "poincare_constant_over", "best_gradient_fit",
    "momentum_min_check", "momentum_divergence_matrix",
]
