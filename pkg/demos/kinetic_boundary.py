"""What the kinetic functional does at the boundary of the positive cone.

F(rho, m) = (1/2) tr(m^* m rho^{-1}) for strictly positive rho.  On the
boundary the value is the monotone limit from inside: finite with the
pseudo-inverse exactly when every block of m vanishes on ker(rho),
infinite otherwise.  The dual description uses pairs (a, b) with
a + (1/2) b^* b <= 0.
"""

import numpy as np

from momt import DualPoint, HermitianMatrix, OperatorStack, fenchel_gap, kinetic

rng = np.random.default_rng(3)

# --- boundary dichotomy ----------------------------------------------------
rho_edge = np.diag([1.0, 0.0]).astype(complex)       # rank one
m_ok = OperatorStack(np.array([[[2.0, 0.0], [1.0, 0.0]]], dtype=complex),
                     flavor="general")               # columns avoid ker(rho)
m_bad = OperatorStack(np.array([[[0.0, 1.0], [0.0, 0.0]]], dtype=complex),
                      flavor="general")              # hits ker(rho)

print("rank-one weight rho = diag(1, 0):")
print("  momentum supported away from the kernel ->", kinetic(rho_edge, m_ok))
print("  momentum leaking into the kernel        ->", kinetic(rho_edge, m_bad))

print()
print("the finite case really is the limit from the interior:")
for eps in [1e-2, 1e-4, 1e-6, 1e-8]:
    reg = np.diag([1.0 - eps, eps]).astype(complex)
    v = kinetic(reg / np.trace(reg).real, m_ok)
    print(f"  eps={eps:.0e}  F = {v.value:.10f}")
print(f"  boundary value           {kinetic(rho_edge, m_ok).value:.10f}")

print()
print("...while the infinite case blows up like 1/eps:")
for eps in [1e-2, 1e-4, 1e-6]:
    reg = np.diag([1.0 - eps, eps]).astype(complex)
    print(f"  eps={eps:.0e}  F = {kinetic(reg, m_bad).value:.4e}")

# --- the dual pairing ------------------------------------------------------
# F is the support function of the cone {(a, b) : a + b^* b / 2 <= 0} in the
# pairing <a; rho> + b . m, so every feasible pair gives a lower bound and
# the bound is attained at b = m rho^{-1}, a = -b^* b / 2.
print()
print("dual pairs never overshoot, and the canonical pair is exact:")
rho = np.array([[0.6, 0.1 - 0.2j], [0.1 + 0.2j, 0.4]])
m = OperatorStack(rng.standard_normal((2, 2, 2))
                  + 1j * rng.standard_normal((2, 2, 2)), flavor="general")
f_val = kinetic(rho, m).value
print(f"  F(rho, m) = {f_val:.8f}")

worst = np.inf
for _ in range(2000):
    b = OperatorStack(rng.standard_normal((2, 2, 2))
                      + 1j * rng.standard_normal((2, 2, 2)), flavor="general")
    gram = np.einsum("kji,kjl->il", np.conj(b.blocks), b.blocks)
    a = HermitianMatrix(-0.5 * gram - abs(rng.standard_normal()) * np.eye(2))
    worst = min(worst, fenchel_gap(rho, m, DualPoint(a=a, b=b)))
print(f"  smallest gap over 2000 random feasible pairs: {worst:.6f} (>= 0)")

b_star = np.einsum("kij,jl->kil", m.blocks, np.linalg.inv(rho))
gram = np.einsum("kji,kjl->il", np.conj(b_star), b_star)
exact = DualPoint(a=HermitianMatrix(-0.5 * gram),
                  b=OperatorStack(b_star, flavor="general"))
print(f"  gap at the canonical pair:                    "
      f"{fenchel_gap(rho, m, exact):.3e}")
