"""Norms, energies, bootstrap quantities, the energy-derivative identity
and growth-law fitting.

Exponentially weighted norms are accumulated with log-sum-exp; ``*_log``
helpers return log-values for ranges where the plain value overflows.

The energy-derivative identity implemented in :func:`identity_sides` is the
exact time derivative of E = ||A (ptilde, v_eq, b_eq)||^2:

    dE/dt + 2|dlam| ||Lambda^{s/2} A X||^2
          + 2 sum (d_t q / q) A Atilde |X|^2        (signed)
          + 2 ||sqrt(-d_t m / m) A X||^2
    = 2 Re<A ptilde_1, S A ptilde_2> + 2 NL + 2 ONL,

with NL the commutator-form quadratic pairing and ONL the two tailored
correction pairings.  The q-term carries the geometric-mean weight A*Atilde
(differentiating J produces J~/J times A^2) and the lambda/m terms carry A;
the q factor is signed because q decreases on the approach to each
resonance.  Branch corners of q make E only piecewise-C^1, so finite
differencing of E must avoid stencils that straddle a corner time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import Grid, ProductWorkspace, shear_symbols, l2_norm
from .unknowns import (MHDState, TailoredState, curl_t, hminus1_norm,
                       ptilde_correction_symbol, tailored_to_state)
from .weights import MultiplierSet, WeightParams
from .dynamics import ptilde_coupling_symbol, quadratic_terms


# ---------------------------------------------------------------------------
# weighted norms
# ---------------------------------------------------------------------------

def _logsumexp(vals: np.ndarray) -> float:
    vals = vals[np.isfinite(vals)]
    if vals.size == 0:
        return -np.inf
    m = float(np.max(vals))
    return m + float(np.log(np.sum(np.exp(vals - m))))


def weighted_l2_log(grid: Grid, log_weight: np.ndarray, *tables: np.ndarray) -> float:
    """log of sqrt((1/Ly) sum exp(2*log_weight) |fhat|^2)."""
    logs = []
    for c in tables:
        mag = np.abs(c)
        nz = mag > 0
        if np.any(nz):
            lw = np.broadcast_to(log_weight, c.shape)
            logs.append((2.0 * lw[nz] + 2.0 * np.log(mag[nz])).ravel())
    if not logs:
        return -np.inf
    total = _logsumexp(np.concatenate(logs))
    return 0.5 * (total - np.log(grid.Ly))


def weighted_l2(grid: Grid, log_weight: np.ndarray, *tables: np.ndarray) -> float:
    return float(np.exp(weighted_l2_log(grid, log_weight, *tables)))


def gevrey_log_weight(grid: Grid, lam: float, s: float, N: int) -> np.ndarray:
    mag2 = grid.K**2 + grid.ETA**2
    return 0.5 * N * np.log1p(mag2) + lam * mag2 ** (0.5 * s)


def gevrey_norm(grid: Grid, tables, lam: float, s: float, N: int) -> float:
    """Gevrey norm sqrt((1/Ly) sum <k,eta>^{2N} e^{2 lam |k,eta|^s} |fhat|^2)."""
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    lw = gevrey_log_weight(grid, lam, s, N)
    if isinstance(tables, np.ndarray) and tables.ndim == 2:
        tables = [tables]
    return weighted_l2(grid, lw, *tables)


def state_gevrey_norm(state: MHDState, lam: float, s: float, N: int) -> float:
    return gevrey_norm(state.grid, [state.v[0], state.v[1], state.b[0], state.b[1]],
                       lam, s, N)


# ---------------------------------------------------------------------------
# energies and bootstrap terms
# ---------------------------------------------------------------------------

def _tailored_tables(ts: TailoredState):
    """(2d tables with their log-A, 1d average columns with their log-A)."""
    return (ts.ptilde[0], ts.ptilde[1]), (ts.v_eq, ts.b_eq)


def energy_E(ts: TailoredState, mset: MultiplierSet):
    """(E, E0) of the run: A-weighted and Alo-weighted squared norms."""
    g = ts.grid
    two_d, one_d = _tailored_tables(ts)
    logA0 = mset.log_A[0, :]
    e_log = 2.0 * weighted_l2_log(g, mset.log_A, *two_d)
    avg_log = 2.0 * weighted_l2_log(g, logA0, *one_d)
    E = float(np.exp(_logsumexp(np.array([e_log, avg_log]))))
    E0 = float(np.exp(2.0 * weighted_l2_log(g, mset.log_Alo, *one_d)))
    return E, E0


def dissipation_terms(ts: TailoredState, mset: MultiplierSet):
    """Instantaneous bootstrap integrands for the E and E0 lines.

    Returns (|dlam| ||Lambda^{s/2} A X||^2, |||dq/q|^{1/2} Atilde X||^2,
    and the two A^lo analogues on the averages).
    """
    g = ts.grid
    p = mset.params
    two_d, one_d = _tailored_tables(ts)
    mag2 = g.K**2 + g.ETA**2
    log_lam_s = 0.25 * p.s * np.log(np.where(mag2 > 0, mag2, 1.0))
    log_lam_s1 = log_lam_s[0, :]
    adl = abs(mset.dlam)
    t_lam = adl * (weighted_l2(g, mset.log_A + log_lam_s, *two_d) ** 2
                   + weighted_l2(g, mset.log_A[0, :] + log_lam_s1, *one_d) ** 2)
    absq = np.abs(mset.dtq_over_q)
    with np.errstate(divide="ignore"):
        log_sq = 0.5 * np.log(np.where(absq > 0, absq, 1.0))
    log_sq = np.where(absq > 0, log_sq, -np.inf)
    t_q = (weighted_l2(g, mset.log_Atilde + log_sq, *two_d) ** 2
           + weighted_l2(g, mset.log_Atilde[0, :] + log_sq[0, :], *one_d) ** 2)
    t_lam_lo = adl * weighted_l2(g, mset.log_Alo + log_lam_s1, *one_d) ** 2
    t_q_lo = weighted_l2(g, mset.log_Alo + log_sq[0, :], *one_d) ** 2
    return t_lam, t_q, t_lam_lo, t_q_lo


@dataclass
class DiagnosticsRecord:
    t: float
    l2_vb: float
    hminus1_vb: float
    l2_wj: float
    gevrey_vb: float
    E: float
    E0: float
    int_lam: float = 0.0
    int_q: float = 0.0
    int_lam_lo: float = 0.0
    int_q_lo: float = 0.0
    energy_residual: float = float("nan")

    FIELDS = ("t", "l2_vb", "hminus1_vb", "l2_wj", "gevrey_vb", "E", "E0",
              "int_lam", "int_q", "int_lam_lo", "int_q_lo", "energy_residual")

    def row(self):
        return [getattr(self, f) for f in self.FIELDS]

    def validate_against(self, prev: "DiagnosticsRecord | None"):
        vals = self.row()
        if any((not np.isfinite(v)) and i != len(vals) - 1 for i, v in enumerate(vals)):
            raise ValueError("non-finite diagnostics entry")
        if any(v < 0 for v in vals[:-1]):
            raise ValueError("diagnostics entries must be nonnegative")
        if prev is not None and self.t <= prev.t:
            raise ValueError("time must increase strictly across records")


def make_record(state: MHDState, ts: TailoredState, mset: MultiplierSet,
                lam2: float, integrals=(0.0, 0.0, 0.0, 0.0)) -> DiagnosticsRecord:
    g = state.grid
    w = curl_t(g, state.v, state.t)
    j = curl_t(g, state.b, state.t)
    E, E0 = energy_E(ts, mset)
    return DiagnosticsRecord(
        t=state.t,
        l2_vb=state.norm(),
        hminus1_vb=hminus1_norm(g, state.v[0], state.v[1], state.b[0], state.b[1]),
        l2_wj=l2_norm(g, w, j),
        gevrey_vb=state_gevrey_norm(state, lam2, mset.params.s, mset.params.N),
        E=E, E0=E0,
        int_lam=integrals[0], int_q=integrals[1],
        int_lam_lo=integrals[2], int_q_lo=integrals[3],
    )


def bootstrap_monitor(records, params: WeightParams, c_star: float = 1.0):
    """Ratios of the two bootstrap lines to their stated budgets."""
    eps, c0 = params.eps, params.c0
    out = []
    for r in records:
        line1 = (r.E + r.int_lam + r.int_q) / (c_star * eps**2)
        budget2 = c_star * np.log(np.e + r.t) ** 2 * eps**4 / c0**2
        line2 = (r.E0 + r.int_lam_lo + r.int_q_lo) / budget2
        out.append({"t": r.t, "ratio_E_line": float(line1),
                    "ratio_E0_line": float(line2)})
    summary = {
        "c_star": c_star,
        "max_ratio_E_line": max(r["ratio_E_line"] for r in out) if out else 0.0,
        "max_ratio_E0_line": max(r["ratio_E0_line"] for r in out) if out else 0.0,
    }
    return out, summary


# ---------------------------------------------------------------------------
# energy-derivative identity
# ---------------------------------------------------------------------------

def _advect(grid: Grid, a: np.ndarray, c: np.ndarray, t: float,
            ws: ProductWorkspace) -> np.ndarray:
    """(a . grad_t) c for vector tables a, c; dealiased exact product."""
    sym = shear_symbols(grid, t)
    a1, a2 = ws.phys(a[0]), ws.phys(a[1])
    out = []
    for i in (0, 1):
        gx = ws.phys(sym.ikx * c[i])
        gy = ws.phys(sym.idyt * c[i])
        out.append(ws.spec(a1 * gx + a2 * gy))
    return np.stack(out)


def _pair(grid: Grid, x, y) -> float:
    """(1/Ly) Re sum conj(x) y accumulated over matching tables."""
    s = 0.0
    for xc, yc in zip(x, y):
        s += float(np.sum((np.conj(xc) * yc).real))
    return s / grid.Ly


def identity_sides(ts: TailoredState, params: WeightParams, alpha: float,
                   symbol_variant: str = "derived", ws: ProductWorkspace | None = None):
    """All analytic terms of the energy identity at the state's time.

    Returns a dict with the left-side weight terms (lam_term, q_term, m_term)
    and the right-side pairings (L_pair, NL, ONL); the identity reads
    dE/dt = -2*(lam_term + q_term + m_term) + 2*(L_pair + NL + ONL).
    """
    g, t = ts.grid, ts.t
    mset = MultiplierSet(g, t, params)
    if float(np.max(mset.log_A)) > 300.0:
        raise OverflowError("weights too large for direct pairing; reduce lam0/rho")
    if ws is None:
        ws = ProductWorkspace(g)
    A = mset.A
    A0 = A[0, :]
    pt1, pt2 = ts.ptilde
    # left-side weight terms
    mag2 = g.K**2 + g.ETA**2
    lam_s = mag2 ** (0.5 * params.s)
    dens2d = np.abs(pt1) ** 2 + np.abs(pt2) ** 2
    dens1d = np.abs(ts.v_eq) ** 2 + np.abs(ts.b_eq) ** 2
    adl = abs(mset.dlam)
    lam_term = adl * (np.sum(lam_s * A**2 * dens2d)
                      + np.sum(lam_s[0, :] * A0**2 * dens1d)) / g.Ly
    AAt = np.exp(mset.log_A + mset.log_Atilde)
    q_term = (np.sum(mset.dtq_over_q * AAt * dens2d)
              + np.sum(mset.dtq_over_q[0, :] * AAt[0, :] * dens1d)) / g.Ly
    m_term = (np.sum(-mset.dtm_over_m * A**2 * dens2d)) / g.Ly  # m = 1 at k = 0
    # right side: linear pairing
    S = ptilde_coupling_symbol(g, t, alpha, symbol_variant)
    L_pair = _pair(g, [A * pt1], [S * (A * pt2)])
    # right side: nonlinear pairings in commutator form
    st = tailored_to_state(ts, alpha)
    v, b = st.v, st.b
    nlv, nlb = quadratic_terms(g, v, b, t, ws)
    Av = np.stack([A * v[0], A * v[1]])
    Ab = np.stack([A * b[0], A * b[1]])
    NL = (_pair(g, Av, A * nlv - _advect(g, b, Ab, t, ws) + _advect(g, v, Av, t, ws))
          + _pair(g, Ab, A * nlb - _advect(g, b, Av, t, ws) + _advect(g, v, Ab, t, ws)))
    # right side: tailored corrections
    sym = shear_symbols(g, t)
    lam2 = np.where(sym.lam2 > 0, sym.lam2, 1.0)
    dyt_invlap = 1j * sym.u / lam2  # d_y^t Lambda_t^{-2}
    Wb = np.stack([dyt_invlap * b[0] / alpha, dyt_invlap * b[1] / alpha])
    nlv_neq = nlv.copy()
    nlv_neq[:, 0, :] = 0.0
    ONL1 = _pair(g, [A * Wb[0], A * Wb[1]], [A * nlv_neq[0], A * nlv_neq[1]])
    inv_lam = np.where(sym.lam > 0, 1.0 / np.where(sym.lam > 0, sym.lam, 1.0), 0.0)
    n2 = inv_lam * curl_t(g, nlb, t)
    n2[0, :] = 0.0
    corr = ptilde_correction_symbol(g, alpha, t)
    ONL2 = _pair(g, [A * pt1], [A * (corr * n2)])
    return {"lam_term": float(lam_term), "q_term": float(q_term),
            "m_term": float(m_term), "L_pair": float(L_pair),
            "NL": float(NL), "ONL": float(ONL1 + ONL2)}


def q_corner_times(grid: Grid, t_max: float) -> np.ndarray:
    """All q branch-corner times of the grid's eta values in (0, t_max]."""
    times = set()
    for eta in np.abs(grid.eta):
        if eta <= 1.0:
            continue
        k0 = int(np.floor(np.sqrt(eta)))
        for k in range(1, k0 + 1):
            for val in (0.5 * (eta / k + eta / (k + 1)), eta / k):
                if 0 < val <= t_max:
                    times.add(round(val, 12))
        if 2 * eta <= t_max:
            times.add(round(2 * eta, 12))
    return np.array(sorted(times))


def energy_identity_residuals(ts0: TailoredState, params: WeightParams,
                              alpha: float, t_end: float, dt: float,
                              stride: int = 5, symbol_variant: str = "derived"):
    """Evolve the tailored form and measure the identity residual.

    E is sampled every ``stride`` steps and differentiated with the 4th-order
    5-point centered stencil; stencil windows containing a q branch corner of
    any grid eta are skipped (E is only piecewise smooth there).  Returns the
    list of (t, residual) pairs; residuals are relative to the identity scale.
    """
    from .dynamics import PtildeIntegrator, evolve

    g = ts0.grid
    integ = PtildeIntegrator(g, alpha, symbol_variant=symbol_variant)
    ws = integ.ws
    samples = []

    def cb(t, Y):
        samples.append((t, integ.unpack(Y, t)))

    evolve(integ, integ.pack(ts0), ts0.t, t_end, dt=dt, fixed_dt=True,
           callback=cb, callback_every=stride)
    h = stride * dt
    energies = []
    for t, st in samples:
        mset = MultiplierSet(g, t, params)
        E, _ = energy_E(st, mset)
        energies.append(E)
    corners = q_corner_times(g, t_end + h)
    out = []
    for i in range(2, len(samples) - 2):
        t_i = samples[i][0]
        if corners.size and np.any((corners > t_i - 2.5 * h) & (corners < t_i + 2.5 * h)):
            continue
        dE = (-energies[i + 2] + 8 * energies[i + 1]
              - 8 * energies[i - 1] + energies[i - 2]) / (12 * h)
        terms = identity_sides(samples[i][1], params, alpha, symbol_variant, ws)
        lhs = dE + 2 * (terms["lam_term"] + terms["q_term"] + terms["m_term"])
        rhs = 2 * (terms["L_pair"] + terms["NL"] + terms["ONL"])
        scale = max(abs(dE), 2 * abs(terms["lam_term"]) + 2 * abs(terms["q_term"])
                    + 2 * abs(terms["m_term"]), abs(rhs), 1e-300)
        out.append((t_i, abs(lhs - rhs) / scale))
    return out


# ---------------------------------------------------------------------------
# growth fit
# ---------------------------------------------------------------------------

def growth_fit(times, wj_norms, hminus1_in: float):
    """Least-squares fit of ||(w,j)||(t) against <t> = sqrt(1+t^2).

    Returns (slope/hminus1_in, intercept, r_squared, degenerate_flag).
    """
    times = np.asarray(times, dtype=float)
    y = np.asarray(wj_norms, dtype=float)
    if times.size < 10:
        raise ValueError("need at least 10 samples")
    x = np.hypot(1.0, times)
    var = float(np.var(y))
    if var == 0.0 or hminus1_in == 0.0:
        return 0.0, float(y[0]) if y.size else 0.0, 0.0, True
    coef = np.polyfit(x, y, 1)
    resid = y - np.polyval(coef, x)
    r2 = 1.0 - float(np.sum(resid**2)) / float(np.sum((y - y.mean()) ** 2))
    return float(coef[0] / hminus1_in), float(coef[1]), float(r2), False
