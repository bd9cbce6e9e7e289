"""Inner solve of the 7-point rolling-shutter absolute pose problem with
unknown focal length and one-parameter division distortion.

Works in the same normalized, pre-rotated frame as :mod:`rspose.r7pf`. The
third-row system is shared; the first-row equations gain the factor
``d_i = 1 + lam (r_i^2 + c_i^2)`` and become seven quadrics over::

    [b1 q, b1 lam, b1, b2 q, b2 lam, b2, b3 q, b3 lam, b3, C0z q, tz q, q, lam, 1]
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import template as _template
from .errors import NoFeasibleSolution, TemplateSingular
from .numlin import eig, gauss_jordan_eliminate
from .r7pf import (
    REAL_TOL,
    _assemble,
    build_row3_system,
    nullspace_param,
    row1_parts,
    with_residual,
)

MONOMIALS = (
    "b1*q", "b1*lam", "b1", "b2*q", "b2*lam", "b2",
    "b3*q", "b3*lam", "b3", "C0z*q", "tz*q", "q", "lam", "1",
)
ELIMINATED = (9, 10)
REDUCED_MONOMIALS = tuple(m for i, m in enumerate(MONOMIALS) if i not in ELIMINATED)

# columns of the reduced system multiplying [b1, b2, b3, 1]
_Q_COLS = [0, 3, 6, 9]
_LAM_COLS = [1, 4, 7, 10]
_ONE_COLS = [2, 5, 8, 11]


@dataclass(frozen=True)
class QuadraticSystem:
    coeffs: np.ndarray
    monomials: tuple = MONOMIALS
    unknowns: tuple = ("b1", "b2", "b3", "C0z", "tz", "q", "lam")

    def evaluate(self, values):
        """Equation values at ``values``, a dict from unknown name to number."""
        return self.coeffs @ monomial_vector(values, self.monomials)


@dataclass(frozen=True)
class ReducedSystem5:
    """Five quadrics in ``b1, b2, b3, q, lam`` plus the two elimination rows."""

    coeffs: np.ndarray
    elimination_rows: np.ndarray
    monomials: tuple = REDUCED_MONOMIALS

    def pencil(self):
        """``(A, B, C)`` with ``(q A + lam B + C) [b1, b2, b3, 1] = 0``."""
        M = self.coeffs
        return M[:, _Q_COLS], M[:, _LAM_COLS], M[:, _ONE_COLS]

    def evaluate(self, sol):
        """Residuals of the five equations at ``(b1, b2, b3, q, lam)``."""
        b1, b2, b3, q, lam = sol
        bt = np.array([b1, b2, b3, 1.0])
        A, B, C = self.pencil()
        return (q * A + lam * B + C) @ bt


def monomial_vector(values, monomials):
    out = []
    for m in monomials:
        val = 1.0
        if m != "1":
            for name in m.split("*"):
                val = val * values[name]
        out.append(val)
    return np.array(out)


def build_row1_system_r(corrs, ns, v_hat):
    """First-row equations of all seven points over :data:`MONOMIALS`."""
    P2, P3 = row1_parts(corrs, ns, v_hat)
    r, c = corrs.image[:, 0], corrs.image[:, 1]
    rho2 = r**2 + c**2
    n = len(r)
    S = np.zeros((n, 14))
    # -(1 + lam rho^2) P2 + c q P3 + c q C0z + c r q tz = 0
    S[:, [0, 3, 6, 11]] = c[:, None] * P3
    S[:, [1, 4, 7, 12]] = -rho2[:, None] * P2
    S[:, [2, 5, 8, 13]] = -P2
    S[:, 9] = c
    S[:, 10] = c * r
    return QuadraticSystem(S)


def reduce_system(sys7):
    """Gauss-Jordan elimination of ``C0z q`` and ``tz q``."""
    G = gauss_jordan_eliminate(sys7.coeffs, list(ELIMINATED))
    keep = [i for i in range(14) if i not in ELIMINATED]
    return ReducedSystem5(G[2:, keep], G[:2])


def _minor_coefficients(A, B, C, tmpl):
    """Coefficients of the five ``4 x 4`` minors over the homogeneous quartics."""
    nodes = tmpl["nodes"]
    pencils = (
        nodes[:, 0, None, None] * A + nodes[:, 1, None, None] * B + nodes[:, 2, None, None] * C
    )  # (15, 5, 4)
    rows = tmpl["minor_rows"]  # (5, 4)
    dets = np.linalg.det(pencils[:, rows, :])  # (15, 5)
    return (tmpl["interpolation_inverse"] @ dets).T  # (5, 15)


def _action_matrix(Q, tmpl):
    hom = [tuple(m) for m in tmpl["homogeneous_monomials"]]
    col = {(a, b): i for i, (a, b, _) in enumerate(hom)}
    basis = [tuple(m) for m in tmpl["basis"]]
    quartics = [tuple(m) for m in tmpl["quartics"]]
    Q4 = Q[:, [col[m] for m in quartics]]
    Qlow = Q[:, [col[m] for m in basis]]
    if np.linalg.cond(Q4) > 1e12:
        raise TemplateSingular("quartic block of the minors is singular")
    red = -np.linalg.solve(Q4, Qlow)  # quartic monomials in terms of the basis
    M = np.zeros((10, 10))
    for i, (kind, j) in enumerate(_template.action_structure()):
        if kind == "basis":
            M[i, j] = 1.0
        else:
            M[i] = red[j]
    return M


def _newton(sys5, sols, steps=3):
    """A few Newton steps on all roots at once."""
    A, B, C = sys5.pencil()
    z = np.array(sols, dtype=complex)
    bt = np.ones((len(z), 4), dtype=complex)
    J = np.empty((len(z), 5, 5), dtype=complex)
    for _ in range(steps):
        bt[:, :3] = z[:, :3]
        P = z[:, 3, None, None] * A + z[:, 4, None, None] * B + C
        F = np.einsum("kij,kj->ki", P, bt)
        J[:, :, :3] = P[:, :, :3]
        J[:, :, 3] = bt @ A.T
        J[:, :, 4] = bt @ B.T
        try:
            dz = np.linalg.solve(J, F[..., None])[..., 0]
        except np.linalg.LinAlgError:
            break
        z = z - dz
        if np.abs(dz).max() < 1e-15 * max(1.0, np.abs(z).max()):
            break
    return z


def solve_5quadrics(sys5, *, polish=True):
    """All isolated complex solutions ``(b1, b2, b3, q, lam)``, at most ten."""
    tmpl = _template.load()
    A, B, C = sys5.pencil()
    # balance rows and the three coefficient blocks
    row = np.linalg.norm(np.c_[A, B, C], axis=1)
    if np.any(row == 0):
        raise TemplateSingular("an equation of the reduced system vanishes")
    A, B, C = A / row[:, None], B / row[:, None], C / row[:, None]
    sa, sb, sc = (np.linalg.norm(M) for M in (A, B, C))
    if min(sa, sb, sc) == 0:
        raise TemplateSingular("a coefficient block of the reduced system vanishes")
    Q = _minor_coefficients(A / sa, B / sb, C / sc, tmpl)
    pairs = eig(_action_matrix(Q, tmpl))
    sols = []
    for lam_s, vec in zip(pairs.values, pairs.vectors.T):
        if abs(vec[0]) < 1e-12 * np.abs(vec).max():
            continue
        vec = vec / vec[0]
        q = vec[1] * sc / sa
        lam = lam_s * sc / sb
        P = q * A + lam * B + C
        _, _, Vh = np.linalg.svd(P)
        bt = Vh[-1].conj()
        if abs(bt[3]) < 1e-12:
            continue
        bt = bt / bt[3]
        sols.append([bt[0], bt[1], bt[2], q, lam])
    sols = np.array(sols, dtype=complex).reshape(-1, 5)
    if polish and len(sols):
        sols = _newton(sys5, sols)
    return sols


def solve_inner_r7pfr(corrs, v_hat=np.zeros(3)):
    """All feasible candidates for one fixed ``v_hat``, best residual first."""
    if len(corrs) != 7:
        raise ValueError("the inner R7Pfr solve needs exactly 7 correspondences")
    v_hat = np.asarray(v_hat, dtype=float)
    ns = nullspace_param(build_row3_system(corrs, v_hat))
    sys7 = build_row1_system_r(corrs, ns, v_hat)
    sys5 = reduce_system(sys7)
    rho2_max = np.max(np.sum(corrs.image**2, axis=1))
    piv = sys5.elimination_rows
    cands = []
    for sol in solve_5quadrics(sys5):
        scale = np.maximum(np.abs(sol.real), 1.0)
        if np.any(np.abs(sol.imag) > REAL_TOL * scale):
            continue
        b1, b2, b3, q, lam = sol.real
        if q <= 1e-10 or 1.0 + lam * rho2_max <= 0:
            continue
        m = monomial_vector(
            {"b1": b1, "b2": b2, "b3": b3, "q": q, "lam": lam, "C0z": 0.0, "tz": 0.0},
            MONOMIALS,
        )
        # pivot rows: (C0z q or tz q) + rest . m = 0
        c0z, tz = -(piv @ m) / q
        cand = _assemble(ns, [b1, b2, b3], c0z, tz, q, lam)
        if not all(np.isfinite(a).all() for a in (cand.v, cand.w, cand.c0, cand.t)):
            continue
        cands.append(with_residual(corrs, cand))
    if not cands:
        raise NoFeasibleSolution("no real candidate with f > 0 and valid distortion")
    cands.sort(key=lambda s: s.residual)
    return cands
