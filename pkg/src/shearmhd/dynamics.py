"""Right-hand sides and time stepping for the sheared-frame MHD system.

Two equivalent formulations are evolved:

* ``vb``: the (v, b) system with the shear-coupling terms -v2*e1 / +b2*e1,
  the alpha*d_x exchange, quadratic transport, the explicit linear pressure
  2 d_x Delta_t^{-1} grad_t v2, and Leray projection of the quadratic terms.
  In the sheared frame d/dt(div_t v) = div_t(dv/dt) - d_x v2, so the linear
  pair (-v2*e1 + pressure) must NOT be projected: it supplies exactly the
  +d_x v2 divergence that keeps div_t v = 0 along the flow.
* ``ptilde``: the tailored system in (ptilde_1, ptilde_2, v_eq, b_eq).  The
  linear coupling on ptilde_2 carries, besides alpha*d_x, the symbol produced
  by differentiating the change of unknowns in time,
      S(k, eta, t) = -i k^3 / (alpha * Lambda_t^4),
  i.e. the operator +(1/(alpha d_x)) d_x^4 Delta_t^{-2}.  Two alternative
  sign/term variants of this symbol are selectable for comparison runs
  ("mixed": +i k (k^2 - 2 u^2)/(alpha Lambda_t^4); "flipped": +i k^3/(alpha
  Lambda_t^4)); only the derived default is route-equivalent with the vb
  form.

Dissipation nu*Delta_t / kappa*Delta_t is integrated exactly through
per-mode integrating factors exp(-nu * int Lambda_t^2 dt) inside a Lawson
(integrating-factor) RK4; the anisotropic cross term ((nu-kappa)/alpha)
d_y^t ptilde_2 stays in the explicit part.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .spectral import (Grid, ProductWorkspace, conj_flip, shear_symbols)
from .unknowns import (MHDState, TailoredState, leray_project_t,
                       ptilde_correction_symbol, state_to_tailored,
                       tailored_to_state)

SYMBOL_VARIANTS = ("derived", "mixed", "flipped")


class NumericalAbort(RuntimeError):
    """Raised when the state stops being finite; carries the last good time."""

    def __init__(self, t_last: float):
        super().__init__(f"non-finite state detected; last good time t = {t_last:.6g}")
        self.t_last = t_last


@dataclass
class EvolutionConfig:
    dt: float = 0.02
    t_end: float = 10.0
    form: str = "vb"  # or "ptilde"
    nu: float = 0.0
    kappa: float = 0.0
    order: int = 4
    cfl: float = 0.5
    fixed_dt: bool = False
    linear_only: bool = False
    symbol_variant: str = "derived"

    def __post_init__(self):
        if self.form not in ("vb", "ptilde"):
            raise ValueError("form must be 'vb' or 'ptilde'")
        if self.symbol_variant not in SYMBOL_VARIANTS:
            raise ValueError(f"symbol_variant must be one of {SYMBOL_VARIANTS}")
        if self.nu < 0 or self.kappa < 0:
            raise ValueError("nu, kappa must be nonnegative")
        if self.dt <= 0 or self.t_end < 0:
            raise ValueError("dt and t_end must be positive")
        if self.order != 4:
            raise ValueError("only the classical 4th-order integrator is provided")


def dissipation_phase(grid: Grid, t0: float, t1: float) -> np.ndarray:
    """Exact per-mode integral of Lambda_t^2 over [t0, t1]."""
    K, ETA = grid.K, grid.ETA
    dt = t1 - t0
    with np.errstate(divide="ignore", invalid="ignore"):
        cubic = ((ETA - K * t0) ** 3 - (ETA - K * t1) ** 3) / (3.0 * K)
    phase = K**2 * dt + np.where(K == 0, ETA**2 * dt, cubic)
    return phase * np.ones(grid.shape)


def ptilde_coupling_symbol(grid: Grid, t: float, alpha: float,
                           variant: str = "derived") -> np.ndarray:
    """Linear symbol multiplying ptilde_2 in the ptilde_1 equation (sans alpha*d_x)."""
    sym = shear_symbols(grid, t)
    lam4 = sym.lam2**2
    lam4[lam4 == 0] = 1.0
    k = grid.K * np.ones(grid.shape)
    if variant == "derived":
        s = -1j * k**3 / (alpha * lam4)
    elif variant == "mixed":
        s = 1j * k * (k**2 - 2.0 * sym.u**2) / (alpha * lam4)
    elif variant == "flipped":
        s = 1j * k**3 / (alpha * lam4)
    else:
        raise ValueError(f"unknown symbol variant {variant!r}")
    s[0, :] = 0.0
    return s


# ---------------------------------------------------------------------------
# quadratic terms
# ---------------------------------------------------------------------------

def quadratic_terms(grid: Grid, v: np.ndarray, b: np.ndarray, t: float,
                    ws: ProductWorkspace):
    """Dealiased (b.grad_t b - v.grad_t v, b.grad_t v - v.grad_t b)."""
    sym = shear_symbols(grid, t)
    vp = [ws.phys(v[0]), ws.phys(v[1])]
    bp = [ws.phys(b[0]), ws.phys(b[1])]

    def grads(c):
        return ws.phys(sym.ikx * c), ws.phys(sym.idyt * c)

    gv = [grads(v[0]), grads(v[1])]
    gb = [grads(b[0]), grads(b[1])]

    def advect(a_phys, g):
        return a_phys[0] * g[0] + a_phys[1] * g[1]

    nlv = np.stack([ws.spec(advect(bp, gb[i]) - advect(vp, gv[i])) for i in (0, 1)])
    nlb = np.stack([ws.spec(advect(bp, gv[i]) - advect(vp, gb[i])) for i in (0, 1)])
    return nlv, nlb


# ---------------------------------------------------------------------------
# vb form
# ---------------------------------------------------------------------------

class VBIntegrator:
    """Lawson-RK4 integrator for the (v, b) formulation.

    The stacked layout is Y = [v1, v2, b1, b2] with shape (4, Nx, Ny).
    """

    form = "vb"

    def __init__(self, grid: Grid, alpha: float, nu: float = 0.0,
                 kappa: float = 0.0, linear_only: bool = False):
        if alpha == 0:
            raise ValueError("alpha must be nonzero")
        self.grid = grid
        self.alpha = alpha
        self.nu = nu
        self.kappa = kappa
        self.linear_only = linear_only
        self.ws = ProductWorkspace(grid)

    @staticmethod
    def pack(state: MHDState) -> np.ndarray:
        return np.concatenate([state.v, state.b])

    def unpack(self, Y: np.ndarray, t: float) -> MHDState:
        return MHDState(self.grid, Y[:2].copy(), Y[2:].copy(), t)

    def rhs(self, t: float, Y: np.ndarray) -> np.ndarray:
        g = self.grid
        sym = shear_symbols(g, t)
        v, b = Y[:2], Y[2:]
        ik = sym.ikx
        # linear pressure 2 d_x Delta_t^{-1} grad_t v2 plus the shear pair
        press = 2.0 * ik * sym.inv_lap * v[1]
        dv = np.stack([-v[1] + ik * press + self.alpha * ik * b[0],
                       sym.idyt * press + self.alpha * ik * b[1]])
        db = np.stack([b[1] + self.alpha * ik * v[0],
                       self.alpha * ik * v[1]])
        if not self.linear_only:
            nlv, nlb = quadratic_terms(g, v, b, t, self.ws)
            dv += leray_project_t(g, nlv, t)
            db += leray_project_t(g, nlb, t)
        return np.concatenate([dv, db])

    def decay_factors(self, t0: float, h: float):
        if self.nu == 0.0 and self.kappa == 0.0:
            return None
        ph_half = dissipation_phase(self.grid, t0, t0 + 0.5 * h)
        ph_full = dissipation_phase(self.grid, t0, t0 + h)

        def stack(ph):
            ev, eb = np.exp(-self.nu * ph), np.exp(-self.kappa * ph)
            return np.stack([ev, ev, eb, eb])

        e_half = stack(ph_half)
        e_full = stack(ph_full)
        return e_half, e_full / e_half, e_full

    def cleanup(self, Y: np.ndarray, t: float) -> np.ndarray:
        g = self.grid
        v = leray_project_t(g, Y[:2], t)
        b = leray_project_t(g, Y[2:], t)
        out = np.concatenate([v, b])
        for i in range(4):
            out[i] = 0.5 * (out[i] + conj_flip(out[i]))
            out[i][g.nyquist] = 0.0
            out[i][~g.dealias_keep] = 0.0
            out[i][0, 0] = 0.0
        return out

    def max_speed(self, Y: np.ndarray) -> float:
        # l1 coefficient norm bounds the physical sup norm
        return max(float(np.sum(np.abs(Y[i]))) for i in range(Y.shape[0]))


# ---------------------------------------------------------------------------
# ptilde form
# ---------------------------------------------------------------------------

class PtildeIntegrator:
    """Lawson-RK4 integrator for the tailored formulation.

    Stacked layout Y = [ptilde1, ptilde2, vq, bq] of shape (4, Nx, Ny); the
    average channels vq, bq use only their k = 0 row.
    """

    form = "ptilde"

    def __init__(self, grid: Grid, alpha: float, nu: float = 0.0,
                 kappa: float = 0.0, linear_only: bool = False,
                 symbol_variant: str = "derived"):
        if alpha == 0:
            raise ValueError("alpha must be nonzero")
        self.grid = grid
        self.alpha = alpha
        self.nu = nu
        self.kappa = kappa
        self.linear_only = linear_only
        self.variant = symbol_variant
        self.ws = ProductWorkspace(grid)

    def pack(self, ts: TailoredState) -> np.ndarray:
        g = self.grid
        Y = np.zeros((4, *g.shape), dtype=np.complex128)
        Y[0], Y[1] = ts.ptilde
        Y[2][0, :] = ts.v_eq
        Y[3][0, :] = ts.b_eq
        return Y

    def unpack(self, Y: np.ndarray, t: float) -> TailoredState:
        return TailoredState(self.grid, Y[:2].copy(), Y[2][0, :].copy(),
                             Y[3][0, :].copy(), t)

    def reconstruct(self, Y: np.ndarray, t: float):
        from .unknowns import from_ptilde, vector_from_scalar
        g = self.grid
        p1, p2 = from_ptilde(Y[0], Y[1], self.alpha, t, g)
        v = vector_from_scalar(g, p1, t)
        b = vector_from_scalar(g, p2, t)
        v[0][0, :] = Y[2][0, :]
        b[0][0, :] = Y[3][0, :]
        return v, b

    def rhs(self, t: float, Y: np.ndarray) -> np.ndarray:
        from .unknowns import curl_t
        g = self.grid
        sym = shear_symbols(g, t)
        iak = 1j * self.alpha * g.K * np.ones(g.shape)
        S = ptilde_coupling_symbol(g, t, self.alpha, self.variant)
        dY = np.zeros_like(Y)
        dY[0] = (iak + S) * Y[1]
        dY[1] = iak * Y[0]
        if self.nu != self.kappa:
            dY[0] += ((self.nu - self.kappa) / self.alpha) * sym.idyt * Y[1]
        if not self.linear_only:
            v, b = self.reconstruct(Y, t)
            nlv, nlb = quadratic_terms(g, v, b, t, self.ws)
            inv_lam = np.where(sym.lam > 0, 1.0 / np.where(sym.lam > 0, sym.lam, 1.0), 0.0)
            n1 = inv_lam * curl_t(g, nlv, t)
            n2 = inv_lam * curl_t(g, nlb, t)
            n1[0, :] = 0.0
            n2[0, :] = 0.0
            corr = ptilde_correction_symbol(g, self.alpha, t)
            dY[0] += n1 + corr * n2
            dY[1] += n2
            dY[2][0, :] = nlv[0][0, :]
            dY[3][0, :] = nlb[0][0, :]
        return dY

    def decay_factors(self, t0: float, h: float):
        if self.nu == 0.0 and self.kappa == 0.0:
            return None
        ph_half = dissipation_phase(self.grid, t0, t0 + 0.5 * h)
        ph_full = dissipation_phase(self.grid, t0, t0 + h)

        def stack(ph):
            ev, eb = np.exp(-self.nu * ph), np.exp(-self.kappa * ph)
            return np.stack([ev, eb, ev, eb])

        e_half = stack(ph_half)
        e_full = stack(ph_full)
        return e_half, e_full / e_half, e_full

    def cleanup(self, Y: np.ndarray, t: float) -> np.ndarray:
        del t
        g = self.grid
        out = Y.copy()
        for i in (0, 1):
            out[i] = 0.5 * (out[i] + conj_flip(out[i]))
            out[i][0, :] = 0.0
            out[i][g.nyquist] = 0.0
            out[i][~g.dealias_keep] = 0.0
        for i in (2, 3):
            row = out[i][0, :]
            flipped = np.conj(np.roll(row[::-1], 1))
            row = 0.5 * (row + flipped)
            row[0] = 0.0
            row[g.Ny // 2] = 0.0
            keep = np.abs(np.fft.fftfreq(g.Ny, 1.0 / g.Ny)) <= g.Ny / 3.0
            row[~keep] = 0.0
            out[i][:] = 0.0
            out[i][0, :] = row
        return out

    def max_speed(self, Y: np.ndarray) -> float:
        return max(float(np.sum(np.abs(Y[i]))) for i in range(Y.shape[0]))


# ---------------------------------------------------------------------------
# stepping
# ---------------------------------------------------------------------------

def lawson_rk4_step(integ, Y: np.ndarray, t: float, h: float) -> np.ndarray:
    """One classical RK4 step in Lawson variables (exact diagonal dissipation)."""
    fac = integ.decay_factors(t, h)
    k1 = integ.rhs(t, Y)
    if fac is None:
        k2 = integ.rhs(t + 0.5 * h, Y + 0.5 * h * k1)
        k3 = integ.rhs(t + 0.5 * h, Y + 0.5 * h * k2)
        k4 = integ.rhs(t + h, Y + h * k3)
        return Y + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
    e_half, e_back, e_full = fac
    f2 = integ.rhs(t + 0.5 * h, e_half * (Y + 0.5 * h * k1))
    f3 = integ.rhs(t + 0.5 * h, e_half * Y + 0.5 * h * f2)
    f4 = integ.rhs(t + h, e_full * Y + h * e_back * f3)
    return e_full * Y + (h / 6.0) * (e_full * k1 + 2.0 * e_back * (f2 + f3) + f4)


def cfl_dt(integ, Y: np.ndarray, t: float, cfl: float = 0.5) -> float:
    g = integ.grid
    kmax = g.Nx / 3.0
    emax = g.Ny / (3.0 * g.Ly)
    symmax = max(kmax, emax + kmax * abs(t))
    umax = integ.max_speed(Y)
    return cfl / (abs(integ.alpha) * kmax + umax * symmax + 1e-30)


def evolve(integ, Y0: np.ndarray, t0: float, t_end: float,
           dt: float = 0.02, fixed_dt: bool = False, cfl: float = 0.5,
           callback=None, callback_every: int = 1):
    """March Y from t0 to t_end; returns (t, Y).

    ``callback(t, Y)`` fires at t0, then after every ``callback_every``-th
    accepted step, and at t_end.  With ``fixed_dt`` the step is exactly
    ``dt`` (final step shortened to land on t_end); otherwise the step also
    respects the CFL limit of the current state.
    """
    t, Y = float(t0), Y0.copy()
    if callback is not None:
        callback(t, Y)
    steps = 0
    while t < t_end - 1e-12:
        h = dt if fixed_dt else min(dt, cfl_dt(integ, Y, t, cfl))
        h = min(h, t_end - t)
        Y = lawson_rk4_step(integ, Y, t, h)
        t += h
        Y = integ.cleanup(Y, t)
        steps += 1
        if not np.isfinite(Y.view(float)).all():
            raise NumericalAbort(t - h)
        if callback is not None and (steps % callback_every == 0 or t >= t_end - 1e-12):
            callback(t, Y)
    return t, Y


def step(state, config: EvolutionConfig, alpha: float):
    """Advance a state by one config.dt step in the configured form."""
    if config.form == "vb":
        if not isinstance(state, MHDState):
            raise TypeError("vb form expects an MHDState")
        integ = VBIntegrator(state.grid, alpha, config.nu, config.kappa,
                             config.linear_only)
    else:
        if not isinstance(state, TailoredState):
            raise TypeError("ptilde form expects a TailoredState")
        integ = PtildeIntegrator(state.grid, alpha, config.nu, config.kappa,
                                 config.linear_only, config.symbol_variant)
    Y = integ.pack(state)
    t1, Y1 = evolve(integ, Y, state.t, state.t + config.dt, dt=config.dt,
                    fixed_dt=True)
    return integ.unpack(Y1, t1)


# ---------------------------------------------------------------------------
# per-mode linear systems
# ---------------------------------------------------------------------------

@dataclass
class LinearModeSystem:
    """One (k, eta) mode of the linearized dynamics, k != 0."""

    k: int
    eta: float
    alpha: float
    coords: str = "p"  # or "ptilde"
    nu: float = 0.0
    kappa: float = 0.0
    symbol_variant: str = "derived"

    def __post_init__(self):
        if self.k == 0:
            raise ValueError("k = 0 modes evolve trivially; use the identity map")
        if self.coords not in ("p", "ptilde"):
            raise ValueError("coords must be 'p' or 'ptilde'")

    def matrix(self, t: float) -> np.ndarray:
        k, eta, alpha = self.k, self.eta, self.alpha
        u = eta - k * t
        lam2 = k * k + u * u
        iak = 1j * alpha * k
        if self.coords == "p":
            m = np.array([[k * u / lam2, iak], [iak, -k * u / lam2]],
                         dtype=np.complex128)
        else:
            if self.symbol_variant == "derived":
                s = -1j * k**3 / (alpha * lam2**2)
            elif self.symbol_variant == "mixed":
                s = 1j * k * (k * k - 2 * u * u) / (alpha * lam2**2)
            else:
                s = 1j * k**3 / (alpha * lam2**2)
            m = np.array([[0.0, iak + s], [iak, 0.0]], dtype=np.complex128)
        if self.nu or self.kappa:
            m = m - np.diag([self.nu * lam2, self.kappa * lam2])
        return m


@dataclass
class ModeTrajectory:
    """Time series of one linear mode, used as solver oracle."""

    system: LinearModeSystem
    times: np.ndarray
    values: np.ndarray  # (n, 2) complex
    tol: float = 1e-10


def _ivp_rhs(sys: LinearModeSystem):
    def f(t, y):
        z = y[:2] + 1j * y[2:]
        dz = sys.matrix(t) @ z
        return np.concatenate([dz.real, dz.imag])
    return f


def linear_mode_propagate(sys: LinearModeSystem, p_init, t0: float, t1: float,
                          tol: float = 1e-10) -> np.ndarray:
    """Adaptive high-order integration of the 2x2 mode system."""
    if t1 < t0:
        raise ValueError("t1 must be >= t0")
    z0 = np.asarray(p_init, dtype=np.complex128)
    y0 = np.concatenate([z0.real, z0.imag])
    sol = solve_ivp(_ivp_rhs(sys), (t0, t1), y0, method="DOP853",
                    rtol=tol, atol=tol * max(1.0, float(np.max(np.abs(z0)))),
                    dense_output=False)
    if not sol.success:
        raise RuntimeError(f"mode integration failed: {sol.message}")
    y = sol.y[:, -1]
    return y[:2] + 1j * y[2:]


def linear_mode_trajectory(sys: LinearModeSystem, p_init, times,
                           tol: float = 1e-10) -> ModeTrajectory:
    times = np.asarray(times, dtype=float)
    z0 = np.asarray(p_init, dtype=np.complex128)
    y0 = np.concatenate([z0.real, z0.imag])
    sol = solve_ivp(_ivp_rhs(sys), (times[0], times[-1]), y0, method="DOP853",
                    rtol=tol, atol=tol * max(1.0, float(np.max(np.abs(z0)))),
                    t_eval=times)
    if not sol.success:
        raise RuntimeError(f"mode integration failed: {sol.message}")
    vals = (sol.y[:2] + 1j * sol.y[2:]).T
    return ModeTrajectory(sys, times, vals, tol)


def propagate_linear_grid(grid: Grid, Y0: np.ndarray, t0: float, t1: float,
                          alpha: float, coords: str = "ptilde",
                          symbol_variant: str = "derived", dt: float = 0.004,
                          nu: float = 0.0, kappa: float = 0.0) -> np.ndarray:
    """Vectorized RK4 for the per-mode linear system over a whole table.

    Y0 has shape (2, Nx, Ny); k = 0 columns are held fixed (they evolve
    trivially in the linear system).  Diagonal dissipation is applied as the
    exact per-step integrating factor.
    """
    K = grid.K * np.ones(grid.shape)
    ETA = grid.ETA * np.ones(grid.shape)

    def deriv(t, Y):
        u = ETA - K * t
        lam2 = K**2 + u**2
        lam2 = np.where(lam2 == 0, 1.0, lam2)
        iak = 1j * alpha * K
        if coords == "p":
            a = K * u / lam2
            d0 = a * Y[0] + iak * Y[1]
            d1 = -a * Y[1] + iak * Y[0]
        else:
            if symbol_variant == "derived":
                s = -1j * K**3 / (alpha * lam2**2)
            elif symbol_variant == "mixed":
                s = 1j * K * (K**2 - 2.0 * u**2) / (alpha * lam2**2)
            else:
                s = 1j * K**3 / (alpha * lam2**2)
            d0 = (iak + s) * Y[1]
            d1 = iak * Y[0]
        d0[0, :] = 0.0
        d1[0, :] = 0.0
        return np.stack([d0, d1])

    n = max(1, int(np.ceil((t1 - t0) / dt)))
    h = (t1 - t0) / n
    Y = Y0.copy()
    t = t0
    for _ in range(n):
        k1 = deriv(t, Y)
        k2 = deriv(t + 0.5 * h, Y + 0.5 * h * k1)
        k3 = deriv(t + 0.5 * h, Y + 0.5 * h * k2)
        k4 = deriv(t + h, Y + h * k3)
        Y = Y + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
        if nu or kappa:
            ph = dissipation_phase(grid, t, t + h)
            Y[0] *= np.exp(-nu * ph)
            Y[1] *= np.exp(-kappa * ph)
        t += h
    return Y


# ---------------------------------------------------------------------------
# norm-inflation experiment
# ---------------------------------------------------------------------------

def norm_inflation_experiment(state0: MHDState, alpha: float, c0: float,
                              eps: float, t_end: float, dt: float = 0.02,
                              sample_dt: float = 0.5, linear_only: bool = False,
                              symbol_variant: str = "derived",
                              lin_dt: float = 0.004):
    """Co-evolve the full solution and the per-mode linear ptilde flow.

    Returns (rows, summary): rows carry per-sample norms and ratios, the
    summary the extreme ratios against C1 = exp(pi/(2 alpha)).
    """
    from .spectral import l2_norm
    from .unknowns import curl_t, hminus1_norm

    g = state0.grid
    ts0 = state_to_tailored(state0, alpha)
    pt_in_l2 = l2_norm(g, ts0.ptilde[0], ts0.ptilde[1])
    pt_in_h1 = hminus1_norm(g, ts0.ptilde[0], ts0.ptilde[1])
    if pt_in_l2 == 0:
        raise ValueError("initial tailored state vanishes")

    integ = VBIntegrator(g, alpha, linear_only=linear_only)
    Y = integ.pack(state0)
    c1 = float(np.exp(np.pi / (2.0 * abs(alpha))))
    rows = []
    state = {"t": state0.t, "lin": ts0.ptilde.copy(), "t_lin": state0.t}

    def sample(t, Yc):
        if t > state["t_lin"]:
            state["lin"] = propagate_linear_grid(g, state["lin"], state["t_lin"], t,
                                                 alpha, "ptilde", symbol_variant,
                                                 dt=lin_dt)
            state["t_lin"] = t
        st = integ.unpack(Yc, t)
        ts = state_to_tailored(st, alpha)
        lin = state["lin"]
        pt_l2 = l2_norm(g, ts.ptilde[0], ts.ptilde[1])
        lin_l2 = l2_norm(g, lin[0], lin[1])
        dev_l2 = l2_norm(g, ts.ptilde[0] - lin[0], ts.ptilde[1] - lin[1])
        pt_h1 = hminus1_norm(g, ts.ptilde[0], ts.ptilde[1])
        lin_h1 = hminus1_norm(g, lin[0], lin[1])
        dev_h1 = hminus1_norm(g, ts.ptilde[0] - lin[0], ts.ptilde[1] - lin[1])
        wj = l2_norm(g, curl_t(g, st.v, t), curl_t(g, st.b, t))
        rows.append({
            "t": t,
            "ptilde_l2": pt_l2,
            "ptilde_lin_l2": lin_l2,
            "deviation_l2": dev_l2,
            "ratio_l2": pt_l2 / pt_in_l2,
            "ratio_lin_l2": lin_l2 / pt_in_l2,
            "ratio_h1": pt_h1 / pt_in_h1 if pt_in_h1 > 0 else 0.0,
            "ratio_lin_h1": lin_h1 / pt_in_h1 if pt_in_h1 > 0 else 0.0,
            "rel_deviation": dev_l2 / lin_l2 if lin_l2 > 0 else 0.0,
            "rel_deviation_h1": dev_h1 / lin_h1 if lin_h1 > 0 else 0.0,
            "wj_over_t": wj / np.hypot(1.0, t),
        })

    n_cb = max(1, int(round(sample_dt / dt)))
    evolve(integ, Y, state0.t, t_end, dt=dt, callback=sample, callback_every=n_cb)

    ratios = np.array([r["ratio_l2"] for r in rows])
    lin_ratios = np.array([r["ratio_lin_l2"] for r in rows])
    devs = np.array([r["rel_deviation"] for r in rows])
    summary = {
        "C1": c1,
        "horizon": min(t_end, c0 / eps),
        "ratio_min": float(ratios.min()),
        "ratio_max": float(ratios.max()),
        "lin_ratio_min": float(lin_ratios.min()),
        "lin_ratio_max": float(lin_ratios.max()),
        "lin_within_C1": bool(lin_ratios.min() >= 1.0 / c1 - 1e-9
                              and lin_ratios.max() <= c1 + 1e-9),
        "max_rel_deviation": float(devs.max()),
        "symbol_variant": symbol_variant,
    }
    return rows, summary


def route_equivalence_run(state0: MHDState, alpha: float, t_end: float,
                          dt: float = 0.01, symbol_variant: str = "derived",
                          nu: float = 0.0, kappa: float = 0.0):
    """Evolve the same data through both formulations; return relative gaps.

    The gap is measured in both charts: tailored variables of the vb-route
    state against the ptilde-route state, and back in (v, b).
    """
    from .spectral import l2_norm

    g = state0.grid
    vb = VBIntegrator(g, alpha, nu, kappa)
    pt = PtildeIntegrator(g, alpha, nu, kappa, symbol_variant=symbol_variant)
    _, Yvb = evolve(vb, vb.pack(state0), state0.t, t_end, dt=dt, fixed_dt=True)
    ts0 = state_to_tailored(state0, alpha)
    _, Ypt = evolve(pt, pt.pack(ts0), state0.t, t_end, dt=dt, fixed_dt=True)

    st_vb = vb.unpack(Yvb, t_end)
    ts_vb = state_to_tailored(st_vb, alpha)
    ts_pt = pt.unpack(Ypt, t_end)
    st_pt = tailored_to_state(ts_pt, alpha)

    scale_pt = max(ts_pt.norm(), ts_vb.norm())
    gap_pt = l2_norm(g, *(ts_vb.ptilde - ts_pt.ptilde),
                     ts_vb.v_eq - ts_pt.v_eq, ts_vb.b_eq - ts_pt.b_eq) / scale_pt
    scale_vb = max(st_pt.norm(), st_vb.norm())
    gap_vb = l2_norm(g, *(st_vb.v - st_pt.v), *(st_vb.b - st_pt.b)) / scale_vb
    return {"gap_tailored": float(gap_pt), "gap_vb": float(gap_vb),
            "symbol_variant": symbol_variant}
