"""Non-commutative operator calculus induced by a set of Hermitian matrices.

A LindbladSet L = (L_1, ..., L_N) defines

    gradient    grad(X)  = (L_k X - X L_k)_k          Hermitian -> skew stack
    divergence  div(Y)   = sum_k (L_k Y_k - Y_k L_k)  skew stack -> Hermitian
    laplacian   lap(X)   = -div(grad(X))
                         = sum_k (2 L_k X L_k - X L_k L_k - L_k L_k X)

together with the kernel of the gradient (always containing the
identity), the orthogonal projection onto it, and the dissipative heat
flow rho' = -i[H, rho] + lap(rho)/2.

In the library's real vectorization the gradient is a plain real matrix
(``grad_matrix``) and the divergence is its transpose, which is how the
kernel and all downstream superoperators are assembled.
"""

from __future__ import annotations

import numpy as np

from .hermitian import (
    DensityMatrix,
    DimensionMismatch,
    FlavorError,
    HermitianMatrix,
    OperatorStack,
    hermitian_basis,
    matrix_from_literal,
    matrix_to_literal,
    unvec_h,
    vec_h,
)

#: relative singular-value threshold for the kernel rank decision
KERNEL_RTOL = 1e-10


class StabilityError(RuntimeError):
    """Heat-flow step produced a state with an inadmissible negative eigenvalue."""


class LindbladSet:
    """N Hermitian operators with cached gradient superoperator and kernel.

    Attributes
    ----------
    ops : ndarray (N, n, n), the operators (symmetrized, read-only)
    grad_matrix : real ndarray (N*n^2, n^2); applied to vec_h(X) it gives
        the stacked skew coordinates of grad(X)
    kernel_basis : list of HermitianMatrix, orthonormal, spanning ker(grad);
        the first element is always I/sqrt(n)
    kernel_dim : int, >= 1
    kernel_vecs : real ndarray (n^2, kernel_dim), vec_h of the basis
    complement_vecs : real ndarray (n^2, n^2 - kernel_dim), orthonormal
        basis of ker(grad)^perp (the row space of grad_matrix)
    """

    def __init__(self, operators):
        mats = [HermitianMatrix(op) for op in operators]
        if not mats:
            raise DimensionMismatch("need at least one operator")
        n = mats[0].n
        if any(m.n != n for m in mats):
            raise DimensionMismatch("all operators must share one dimension")
        ops = np.array([m.mat for m in mats], dtype=complex)
        ops.setflags(write=False)
        self.ops = ops
        self.n = n
        self.count = len(mats)
        self.operators = mats
        self._build_grad_matrix()
        self._build_kernel()

    def _build_grad_matrix(self):
        n, big_n = self.n, self.count
        basis = hermitian_basis(n)
        # commutators C[k, b] = [L_k, B_b]
        comm = (np.einsum("kij,bjl->kbil", self.ops, basis)
                - np.einsum("bij,kjl->kbil", basis, self.ops))
        # skew coordinates: <i B_a; C> = -i tr(B_a C)
        g = (-1j * np.einsum("aij,kbij->kab", np.conj(basis), comm)).real
        self.grad_matrix = g.reshape(big_n * n * n, n * n)
        self.grad_matrix.setflags(write=False)

    def _build_kernel(self):
        n = self.n
        u, s, vh = np.linalg.svd(self.grad_matrix)
        if s.size and s[0] > 0:
            rank = int(np.sum(s > KERNEL_RTOL * s[0]))
        else:
            rank = 0
        null = vh[rank:].T  # (n^2, kdim), orthonormal
        # Rotate the null basis so I/sqrt(n) is literally the first element.
        ident = vec_h(np.eye(n)) / np.sqrt(n)
        coeffs = null.T @ ident
        cols = [ident]
        rest = null @ (np.eye(null.shape[1]) - np.outer(coeffs, coeffs))
        if null.shape[1] > 1:
            q, r = np.linalg.qr(rest)
            keep = np.abs(np.diag(r)) > 1e-8
            cols.extend(q[:, i] for i in range(q.shape[1]) if keep[i])
        vecs = np.column_stack(cols)
        self.kernel_vecs = vecs
        self.kernel_dim = vecs.shape[1]
        self.kernel_basis = [HermitianMatrix(unvec_h(vecs[:, i], n))
                             for i in range(self.kernel_dim)]
        self.complement_vecs = vh[:rank].T
        self.kernel_vecs.setflags(write=False)
        self.complement_vecs.setflags(write=False)

    def __repr__(self):
        return f"LindbladSet(N={self.count}, n={self.n}, kernel_dim={self.kernel_dim})"


def _square(l: LindbladSet, x) -> np.ndarray:
    a = np.asarray(x, dtype=complex) if not hasattr(x, "mat") else x.mat
    if a.shape != (l.n, l.n):
        raise DimensionMismatch(f"expected shape {(l.n, l.n)}, got {a.shape}")
    return a


def gradient(l: LindbladSet, x) -> OperatorStack:
    """grad(X): block k is the commutator L_k X - X L_k (skew-Hermitian)."""
    a = _square(l, x)
    blocks = np.einsum("kij,jl->kil", l.ops, a) - np.einsum("ij,kjl->kil", a, l.ops)
    return OperatorStack(blocks, flavor="skew")


def divergence(l: LindbladSet, y) -> HermitianMatrix:
    """div(Y) = sum_k (L_k Y_k - Y_k L_k) for a skew stack Y, Hermitian output."""
    stack = y if isinstance(y, OperatorStack) else OperatorStack(y, flavor="skew")
    if stack.flavor != "skew":
        raise FlavorError("divergence expects a skew-flavored stack")
    if stack.dim != l.n or stack.count != l.count:
        raise DimensionMismatch(
            f"stack shape {(stack.count, stack.dim)} does not match operator set "
            f"{(l.count, l.n)}"
        )
    out = np.einsum("kij,kjl->il", l.ops, stack.blocks) \
        - np.einsum("kij,kjl->il", stack.blocks, l.ops)
    return HermitianMatrix(out)


def laplacian(l: LindbladSet, x) -> HermitianMatrix:
    """lap(X) by the closed form sum_k (2 L_k X L_k - X L_k^2 - L_k^2 X)."""
    a = _square(l, x)
    lsq = np.einsum("kij,kjl->il", l.ops, l.ops)
    out = 2.0 * np.einsum("kij,jl,klm->im", l.ops, a, l.ops) - a @ lsq - lsq @ a
    return HermitianMatrix(out)


def kernel_basis(l: LindbladSet) -> list[HermitianMatrix]:
    """Orthonormal Hermitian basis of ker(grad); I/sqrt(n) is element 0."""
    return list(l.kernel_basis)


def project_kernel(l: LindbladSet, x) -> HermitianMatrix:
    """Orthogonal projection of X onto ker(grad)."""
    a = _square(l, x)
    coords = l.kernel_vecs.T @ vec_h(a)
    return HermitianMatrix(unvec_h(l.kernel_vecs @ coords, l.n))


def heat_flow(l: LindbladSet, rho0: DensityMatrix, t_final: float, steps: int,
              hamiltonian=None) -> DensityMatrix:
    """Integrate rho' = -i[H, rho] + lap(rho)/2 with explicit midpoint steps.

    Trace and Hermiticity are preserved by the scheme; if a step drives
    the smallest eigenvalue below -1e-8 the integration aborts with a
    StabilityError suggesting a larger ``steps``.
    """
    if t_final < 0:
        raise ValueError("t_final must be nonnegative")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    h = None
    if hamiltonian is not None:
        h = HermitianMatrix(hamiltonian).mat
        if h.shape != (l.n, l.n):
            raise DimensionMismatch("Hamiltonian dimension mismatch")

    def rhs(r):
        out = 0.5 * laplacian(l, r).mat
        if h is not None:
            out = out - 1j * (h @ r - r @ h)
        return out

    rho = np.array(rho0.mat if isinstance(rho0, DensityMatrix) else rho0, dtype=complex)
    dt = t_final / steps
    for _ in range(steps):
        if dt == 0.0:
            break
        k1 = rhs(rho)
        k2 = rhs(rho + 0.5 * dt * k1)
        rho = rho + dt * k2
        rho = 0.5 * (rho + rho.conj().T)
        lo = float(np.linalg.eigvalsh(rho)[0])
        if lo < -1e-8:
            raise StabilityError(
                f"state left the positive cone (min eigenvalue {lo:.3e}); "
                f"increase steps (currently {steps})"
            )
    return DensityMatrix(rho, eps_pd=1e-8)


def to_json(l: LindbladSet) -> dict:
    """{"n": int, "operators": [matrix literals]}"""
    return {"n": l.n, "operators": [matrix_to_literal(op.mat) for op in l.operators]}


def from_json(d: dict) -> LindbladSet:
    return LindbladSet([matrix_from_literal(lit) for lit in d["operators"]])
