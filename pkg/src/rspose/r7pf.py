"""Inner solve of the 7-point rolling-shutter absolute pose problem with
unknown focal length.

All quantities are in normalized image units with the reference row at 0 and
scene points already pre-rotated. The unknowns of one inner solve are the
linearized orientation ``v``, angular velocity ``w``, translation ``C0``,
translational velocity ``t`` and ``q = 1 / f``; the bilinear term
``[w]x [v]x`` is frozen at a preliminary ``v_hat``.

Unknown vector of the focal-free (third-row) equations::

    y = [v1, v2, v3, w1, w2, w3, C0x, C0y, tx, ty, 1]
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoFeasibleSolution, RankDegenerate
from .geom import RsCameraModel, residual_double_lin, skew
from .numlin import gauss_jordan_eliminate, nullspace, solve_gep

Y_MONOMIALS = ("v1", "v2", "v3", "w1", "w2", "w3", "C0x", "C0y", "tx", "ty", "1")
GEP_MONOMIALS = ("b1", "b2", "b3", "C0z", "tz", "1")
REAL_TOL = 1e-8


@dataclass(frozen=True)
class NullSpaceParam:
    """Null space of the third-row system, ``y = sum_j beta_j y_j``.

    ``basis`` holds the four orthonormal null vectors as columns. Fixing the
    last entry of ``y`` to one removes one coefficient, which is expressed as
    ``y = particular + directions @ beta`` with three free ``beta``.
    """

    basis: np.ndarray
    particular: np.ndarray
    directions: np.ndarray

    @classmethod
    def from_basis(cls, N):
        n = N[-1]
        nn = n @ n
        if nn < 1e-20:
            raise RankDegenerate("null space does not reach the affine slice y[-1] = 1")
        particular = N @ n / nn
        # orthonormal complement of n inside the 4-dim coefficient space
        Q, _ = np.linalg.qr(np.c_[n, np.eye(4)[:, :3]])
        Z = Q[:, 1:4]
        directions = N @ Z
        directions[-1] = 0.0
        return cls(N, particular, directions)

    def y(self, beta):
        return self.particular + self.directions @ np.asarray(beta)

    def beta_of(self, y):
        """Coordinates of a vector ``y`` (with ``y[-1] = 1``) in this chart."""
        return self.directions.T @ (np.asarray(y) - self.particular)


@dataclass(frozen=True)
class CandidateSolution:
    """One real, feasible solution of an inner solve (normalized units)."""

    v: np.ndarray
    w: np.ndarray
    c0: np.ndarray
    t: np.ndarray
    q: float
    lam: float = 0.0
    residual: float = np.inf
    dropped_constraint_error: float = 0.0

    @property
    def f(self):
        return 1.0 / self.q

    def model(self):
        return RsCameraModel(self.v, self.w, self.c0, self.t, self.f, self.lam, 0.0)


def linear_rows(x, X, v_hat):
    """Per-point ``(3, 11)`` maps from ``y`` to the camera-frame point.

    The camera-frame point is ``L @ y + e3 * (C0z + r tz)``; the third
    component is the only one that carries ``C0z`` and ``tz``.
    """
    x = np.atleast_2d(x)
    X = np.atleast_2d(X)
    r = x[:, 0]
    n = len(r)
    a = X @ skew(v_hat).T
    L = np.zeros((n, 3, 11))
    L[:, :, 0:3] = -skew(X)
    L[:, :, 3:6] = -r[:, None, None] * (skew(X) + skew(a))
    L[:, 0, 6] = 1.0
    L[:, 1, 7] = 1.0
    L[:, 0, 8] = r
    L[:, 1, 9] = r
    L[:, :, 10] = X
    return L


def build_row3_system(corrs, v_hat):
    """The ``7 x 11`` focal- and distortion-free system ``M y = 0``."""
    x = corrs.image
    L = linear_rows(x, corrs.scene, v_hat)
    r, c = x[:, 0], x[:, 1]
    return -c[:, None] * L[:, 0, :] + r[:, None] * L[:, 1, :]


def nullspace_param(M):
    N, _ = nullspace(M, 4)
    return NullSpaceParam.from_basis(N)


def row1_parts(corrs, ns, v_hat):
    """Pieces of the first-row equations after substituting the null space.

    For each point returns ``(P2, P3)`` as affine functions of beta, i.e.
    arrays of shape ``(n, 4)`` with coefficients of ``[b1, b2, b3, 1]``.
    """
    L = linear_rows(corrs.image, corrs.scene, v_hat)
    Y = np.c_[ns.directions, ns.particular]  # (11, 4)
    return L[:, 1, :] @ Y, L[:, 2, :] @ Y


def build_gep(corrs, ns, v_hat):
    """Generalized eigenproblem ``q A1 x = A0 x`` with ``x = [b1, b2, b3, C0z, tz, 1]``.

    Uses the first-row equations of the first six correspondences.
    """
    sub = corrs.subset(np.arange(6))
    P2, P3 = row1_parts(sub, ns, v_hat)
    r, c = sub.image[:, 0], sub.image[:, 1]
    A1 = np.zeros((6, 6))
    A0 = np.zeros((6, 6))
    A1[:, [0, 1, 2, 5]] = c[:, None] * P3
    A1[:, 3] = c
    A1[:, 4] = c * r
    A0[:, [0, 1, 2, 5]] = P2
    return A0, A1


def row1_residuals(corrs, ns, v_hat, beta, c0z, tz, q):
    """First-row equation values at a parameter point (one per point)."""
    P2, P3 = row1_parts(corrs, ns, v_hat)
    b = np.r_[beta, 1.0]
    r, c = corrs.image[:, 0], corrs.image[:, 1]
    return -(P2 @ b) + c * q * (P3 @ b) + c * q * (c0z + r * tz)


def _is_real(z):
    return abs(z.imag) <= REAL_TOL * abs(z.real)


def _assemble(ns, beta, c0z, tz, q, lam=0.0):
    y = ns.y(beta)
    return CandidateSolution(
        v=y[0:3],
        w=y[3:6],
        c0=np.array([y[6], y[7], c0z]),
        t=np.array([y[8], y[9], tz]),
        q=float(q),
        lam=float(lam),
    )


def with_residual(corrs, cand, dropped=0.0):
    res = float(residual_double_lin(corrs.image, corrs.scene, cand.model()).sum())
    return CandidateSolution(
        cand.v, cand.w, cand.c0, cand.t, cand.q, cand.lam, res, float(dropped)
    )


def _gep_solutions_6(A0, A1):
    pairs = solve_gep(A0, A1)
    out = []
    for q, x in zip(pairs.values, pairs.vectors.T):
        if not _is_real(q) or q.real <= 1e-10 or abs(x[5]) < 1e-12 * np.abs(x).max():
            continue
        x = (x / x[5]).real
        out.append((q.real, x[:3], x[3], x[4]))
    return out


def _gep_solutions_4(A0, A1):
    S = gauss_jordan_eliminate(np.c_[A1, A0], [3, 4])
    piv, rest = S[:2], S[2:]
    keep = [0, 1, 2, 5]
    pairs = solve_gep(rest[:, 6:][:, keep], rest[:, :6][:, keep])
    out = []
    for q, x in zip(pairs.values, pairs.vectors.T):
        if not _is_real(q) or q.real <= 1e-10 or abs(x[3]) < 1e-12 * np.abs(x).max():
            continue
        q = q.real
        x = (x / x[3]).real
        # pivot rows: q * (e_k + a1 . x) - a0 . x = 0 for C0z (k=3) and tz (k=4)
        c0z, tz = (piv[:, 6:][:, keep] @ x - q * (piv[:, :6][:, keep] @ x)) / q
        out.append((q, x[:3], c0z, tz))
    return out


def solve_inner_r7pf(corrs, v_hat=np.zeros(3), *, gep_size=6):
    """All feasible candidates for one fixed ``v_hat``, best residual first.

    ``gep_size=4`` eliminates ``C0z q`` and ``tz q`` before the eigenproblem.
    """
    if len(corrs) != 7:
        raise ValueError("the inner R7Pf solve needs exactly 7 correspondences")
    v_hat = np.asarray(v_hat, dtype=float)
    ns = nullspace_param(build_row3_system(corrs, v_hat))
    A0, A1 = build_gep(corrs, ns, v_hat)
    sols = _gep_solutions_6(A0, A1) if gep_size == 6 else _gep_solutions_4(A0, A1)
    last = corrs.subset([6])
    cands = []
    for q, beta, c0z, tz in sols:
        cand = _assemble(ns, beta, c0z, tz, q)
        if not all(np.isfinite(a).all() for a in (cand.v, cand.w, cand.c0, cand.t)):
            continue
        dropped = abs(row1_residuals(last, ns, v_hat, beta, c0z, tz, q)[0])
        cands.append(with_residual(corrs, cand, dropped))
    if not cands:
        raise NoFeasibleSolution("no real candidate with f > 0")
    cands.sort(key=lambda s: s.residual)
    return cands
