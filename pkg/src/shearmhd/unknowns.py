"""Transforms between (v, b), symmetric (p1, p2) and tailored (ptilde) unknowns.

Sign conventions, fixed once and tested against each other:

* perpendicular gradient  perp_grad_t(phi) = (d_y^t phi, -d_x phi),
  divergence-free by construction;
* scalar curl             curl_t(u) = d_x u2 - d_y^t u1;
* p_i = Lambda_t^{-1} curl_t(field_neq), inverted by
  field_neq = perp_grad_t(Lambda_t^{-1} p_i);
* ptilde_1 = p_1 - (1/alpha) d_y^t Delta_t^{-1} p_2, i.e. the correction
  symbol on p_2 is +i(eta - k t)/(alpha * Lambda_t^2); ptilde_2 = p_2.

With these choices the two construction routes of the adapted velocity
commute exactly: Lambda_t^{-1} curl_t(vtilde_neq) = ptilde_1 for
vtilde = v + (1/alpha) d_x^{-1} b_2 e_1.

States are mean-free and divergence-free in the sheared frame at their own
time tag; at k = 0 divergence-freeness forces the second components of the
averages to vanish, so averages are carried as scalar eta-columns.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import Grid, shear_symbols, hermitian_defect, l2_norm


@dataclass
class MHDState:
    """Velocity/magnetic perturbation pair in the sheared frame."""

    grid: Grid
    v: np.ndarray  # (2, Nx, Ny) complex
    b: np.ndarray
    t: float = 0.0

    def copy(self):
        return MHDState(self.grid, self.v.copy(), self.b.copy(), self.t)

    def norm(self) -> float:
        return l2_norm(self.grid, self.v[0], self.v[1], self.b[0], self.b[1])

    def hermitian_defect(self) -> float:
        return max(hermitian_defect(c) for c in (*self.v, *self.b))


@dataclass
class TailoredState:
    """(ptilde_1, ptilde_2) on k != 0 plus the scalar average columns."""

    grid: Grid
    ptilde: np.ndarray  # (2, Nx, Ny) complex, k = 0 column zero
    v_eq: np.ndarray  # (Ny,) complex, first velocity component at k = 0
    b_eq: np.ndarray
    t: float = 0.0

    def copy(self):
        return TailoredState(self.grid, self.ptilde.copy(), self.v_eq.copy(),
                             self.b_eq.copy(), self.t)

    def norm(self) -> float:
        return l2_norm(self.grid, self.ptilde[0], self.ptilde[1],
                       self.v_eq, self.b_eq)


def divergence_t(grid: Grid, u: np.ndarray, t: float) -> np.ndarray:
    sym = shear_symbols(grid, t)
    return sym.ikx * u[0] + sym.idyt * u[1]


def curl_t(grid: Grid, u: np.ndarray, t: float) -> np.ndarray:
    """Scalar curl d_x u2 - d_y^t u1."""
    sym = shear_symbols(grid, t)
    return sym.ikx * u[1] - sym.idyt * u[0]


def perp_grad_t(grid: Grid, phi: np.ndarray, t: float) -> np.ndarray:
    """(d_y^t phi, -d_x phi); always divergence-free in the sheared frame."""
    sym = shear_symbols(grid, t)
    return np.stack([sym.idyt * phi, -sym.ikx * phi])


def leray_project_t(grid: Grid, u: np.ndarray, t: float) -> np.ndarray:
    """u - grad_t Delta_t^{-1} (div_t u); the (0,0) mode passes through."""
    sym = shear_symbols(grid, t)
    phi = sym.inv_lap * (sym.ikx * u[0] + sym.idyt * u[1])
    return np.stack([u[0] - sym.ikx * phi, u[1] - sym.idyt * phi])


def _neq(coeffs: np.ndarray) -> np.ndarray:
    out = coeffs.copy()
    out[0, :] = 0.0
    return out


def _inv_lambda(grid: Grid, t: float) -> np.ndarray:
    sym = shear_symbols(grid, t)
    lam = sym.lam.copy()
    lam[lam == 0] = 1.0
    inv = 1.0 / lam
    inv[0, 0] = 0.0
    return inv


def scalar_from_vector(grid: Grid, u: np.ndarray, t: float) -> np.ndarray:
    """p = Lambda_t^{-1} curl_t(u_neq); the k = 0 column is dropped."""
    return _neq(_inv_lambda(grid, t) * curl_t(grid, u, t))


def vector_from_scalar(grid: Grid, p: np.ndarray, t: float) -> np.ndarray:
    """Inverse of :func:`scalar_from_vector` on divergence-free data."""
    return perp_grad_t(grid, _inv_lambda(grid, t) * _neq(p), t)


def to_p(state: MHDState):
    """(p1, p2) from a divergence-free state."""
    g, t = state.grid, state.t
    return scalar_from_vector(g, state.v, t), scalar_from_vector(g, state.b, t)


def ptilde_correction_symbol(grid: Grid, alpha: float, t: float) -> np.ndarray:
    """Symbol of -(1/alpha) d_y^t Delta_t^{-1}: +i(eta - kt)/(alpha Lambda_t^2)."""
    if alpha == 0:
        raise ValueError("alpha must be nonzero")
    sym = shear_symbols(grid, t)
    lam2 = sym.lam2.copy()
    lam2[lam2 == 0] = 1.0
    corr = 1j * sym.u / (alpha * lam2)
    corr[0, :] = 0.0
    return corr


def to_ptilde(p1: np.ndarray, p2: np.ndarray, alpha: float, t: float, grid: Grid):
    corr = ptilde_correction_symbol(grid, alpha, t)
    return p1 + corr * p2, p2.copy()


def from_ptilde(pt1: np.ndarray, pt2: np.ndarray, alpha: float, t: float, grid: Grid):
    corr = ptilde_correction_symbol(grid, alpha, t)
    return pt1 - corr * pt2, pt2.copy()


def to_vtilde(state: MHDState, alpha: float) -> np.ndarray:
    """Adapted velocity vtilde = v + (1/alpha) d_x^{-1} b_2 e_1 (k != 0 only)."""
    if alpha == 0:
        raise ValueError("alpha must be nonzero")
    g = state.grid
    k = g.K * np.ones(g.shape)
    inv_ikx = np.zeros(g.shape, dtype=np.complex128)
    nz = k != 0
    inv_ikx[nz] = 1.0 / (1j * k[nz])
    vt = state.v.copy()
    vt[0] = vt[0] + inv_ikx * state.b[1] / alpha
    return vt


def state_to_tailored(state: MHDState, alpha: float) -> TailoredState:
    g, t = state.grid, state.t
    p1, p2 = to_p(state)
    pt1, pt2 = to_ptilde(p1, p2, alpha, t, g)
    return TailoredState(g, np.stack([pt1, pt2]),
                         state.v[0][0, :].copy(), state.b[0][0, :].copy(), t)


def tailored_to_state(ts: TailoredState, alpha: float) -> MHDState:
    g, t = ts.grid, ts.t
    p1, p2 = from_ptilde(ts.ptilde[0], ts.ptilde[1], alpha, t, g)
    v = vector_from_scalar(g, p1, t)
    b = vector_from_scalar(g, p2, t)
    v[0][0, :] = ts.v_eq
    b[0][0, :] = ts.b_eq
    return MHDState(g, v, b, t)


def hminus1_norm(grid: Grid, *tables: np.ndarray) -> float:
    """Inhomogeneous H^{-1}: <k,eta>^{-1} multiplier on the mean-free part."""
    w2 = 1.0 / (1.0 + grid.K**2 + grid.ETA**2)
    s = 0.0
    for c in tables:
        cc = c.copy()
        if cc.ndim == 2:
            cc[0, 0] = 0.0
            s += float(np.sum(w2 * np.abs(cc) ** 2))
        else:
            w1 = 1.0 / (1.0 + grid.eta**2)
            cc[0] = 0.0
            s += float(np.sum(w1 * np.abs(cc) ** 2))
    return float(np.sqrt(s / grid.Ly))


def vorticity_current_norms(state: MHDState):
    """(||(v,b)||_L2, ||(w,j)||_L2, ||(v,b)||_H^-1) with w, j the sheared curls."""
    g, t = state.grid, state.t
    w = curl_t(g, state.v, t)
    j = curl_t(g, state.b, t)
    return (state.norm(), l2_norm(g, w, j),
            hminus1_norm(g, state.v[0], state.v[1], state.b[0], state.b[1]))


def divergence_residual(state: MHDState) -> float:
    g, t = state.grid, state.t
    dv = divergence_t(g, state.v, t)
    db = divergence_t(g, state.b, t)
    denom = state.norm()
    if denom == 0:
        return 0.0
    return l2_norm(g, dv, db) / denom
