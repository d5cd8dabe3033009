"""Frequency decomposition of the main nonlinearity into reaction,
transport, remainder and average pieces, as a verifiable partition.

Quadruples (k, eta, l, xi) label the paired summand: output mode (k, eta),
input mode (l, xi), middle-factor mode (k-l, eta-xi).  The k = l diagonal is
the average piece NL_eq.  Off the diagonal the three indicator sets are

    T:  8 |k-l, eta-xi| <= |l, xi|
    R:  |k-l, eta-xi| >= 8 |l, xi|  and  GammaTilde
    Rem: everything else,

with GammaTilde = {4 <k> <= |eta| and 4 |k-l| <= |eta-xi|}.  Taken as
written the three comparisons overlap where the factor-8 thresholds hold
with equality (and the nominal remainder set carries both closed
boundaries); the implementation assigns boundaries by the precedence T, R,
remainder-as-complement, which coincides with the nominal sets off those
measure-zero boundaries and makes the tiling exactly disjoint and
exhaustive.
"""

from __future__ import annotations

import numpy as np

from .spectral import Grid, ProductWorkspace, shear_symbols
from .unknowns import MHDState
from .weights import MultiplierSet, WeightParams

LABEL_T, LABEL_R, LABEL_REM, LABEL_EQ = 0, 1, 2, 3
LABEL_NAMES = {LABEL_T: "transport", LABEL_R: "reaction",
               LABEL_REM: "remainder", LABEL_EQ: "average"}


def gamma_tilde(k, eta, l, xi):
    k = np.asarray(k, dtype=float)
    eta = np.asarray(eta, dtype=float)
    return ((4.0 * np.hypot(1.0, k) <= np.abs(eta))
            & (4.0 * np.abs(k - l) <= np.abs(eta - xi)))


def omega_labels(k, eta, l, xi):
    """Partition label for each quadruple; the diagonal k = l maps to EQ."""
    k = np.asarray(k, dtype=float)
    l = np.asarray(l, dtype=float)
    dmag = np.hypot(k - l, np.asarray(eta) - np.asarray(xi))
    lmag = np.hypot(l, np.asarray(xi, dtype=float))
    labels = np.full(np.broadcast(k, eta, l, xi).shape, LABEL_REM, dtype=np.int8)
    labels[(dmag >= 8.0 * lmag) & gamma_tilde(k, eta, l, xi)] = LABEL_R
    labels[8.0 * dmag <= lmag] = LABEL_T
    labels[k == l] = LABEL_EQ
    return labels


def omega_r_nominal(k, eta, l, xi):
    d = np.hypot(np.asarray(k, dtype=float) - l, np.asarray(eta) - np.asarray(xi))
    return (d >= 8.0 * np.hypot(np.asarray(l, dtype=float), xi)) & gamma_tilde(k, eta, l, xi)


def omega_t_nominal(k, eta, l, xi):
    d = np.hypot(np.asarray(k, dtype=float) - l, np.asarray(eta) - np.asarray(xi))
    return 8.0 * d <= np.hypot(np.asarray(l, dtype=float), xi)


def omega_rem_nominal(k, eta, l, xi):
    d = np.hypot(np.asarray(k, dtype=float) - l, np.asarray(eta) - np.asarray(xi))
    lm = np.hypot(np.asarray(l, dtype=float), xi)
    middle = (d >= lm / 8.0) & (d <= 8.0 * lm)
    return middle | ((~gamma_tilde(k, eta, l, xi)) & (d >= 8.0 * lm))


def _pairing_fft(grid: Grid, A: np.ndarray, a1, a2, a3, t: float,
                 ws: ProductWorkspace) -> float:
    """(1/Ly) Re <A a1, A(a2.grad_t a3) - a2.grad_t(A a3)> via transforms."""
    sym = shear_symbols(grid, t)
    a2p = [ws.phys(a2[0]), ws.phys(a2[1])]
    total = 0.0
    for j in (0, 1):
        adv = ws.spec(a2p[0] * ws.phys(sym.ikx * a3[j])
                      + a2p[1] * ws.phys(sym.idyt * a3[j]))
        adv_w = ws.spec(a2p[0] * ws.phys(sym.ikx * (A * a3[j]))
                        + a2p[1] * ws.phys(sym.idyt * (A * a3[j])))
        total += float(np.sum((np.conj(A * a1[j]) * (A * adv - adv_w)).real))
    return total / grid.Ly


def _pairing_direct(grid: Grid, A: np.ndarray, a1, a2, a3, t: float):
    """Same pairing as a quadruple sum, split by the partition labels.

    Returns an array indexed by LABEL_* with the signed contributions.
    Cost is O(modes^2); intended for small grids.
    """
    keep = grid.dealias_keep
    ki = np.nonzero(np.any(keep, axis=1))[0]
    totals = np.zeros(4)
    kvals = grid.k
    evals = grid.eta
    for ik in ki:
        k = kvals[ik]
        eta_keep = keep[ik]
        etas = evals[eta_keep]
        left = [np.conj(A[ik, eta_keep] * a1[j][ik, eta_keep]) for j in (0, 1)]
        Ak = A[ik, eta_keep]
        for il in ki:
            l = kvals[il]
            dk = int(k - l)
            idx2 = np.where(kvals == dk)[0]
            if idx2.size == 0:
                continue
            i2 = idx2[0]
            xis = evals[keep[il]]
            Al = A[il, keep[il]]
            # middle-mode eta index for each (eta, xi) pair
            n_e = np.round((etas * grid.Ly)).astype(int)
            n_x = np.round((xis * grid.Ly)).astype(int)
            dn = n_e[:, None] - n_x[None, :]
            valid = np.abs(dn) <= grid.Ny / 3.0
            if not np.any(valid):
                continue
            j2 = dn % grid.Ny
            u_mid = (etas[:, None] - xis[None, :]) - dk * t
            labels = omega_labels(k, etas[:, None], l, xis[None, :])
            a2mid = [a2[c][i2, j2] for c in (0, 1)]
            dot = a2mid[0] * (1j * l) + a2mid[1] * (1j * (xis[None, :] - l * t))
            del u_mid
            wdiff = Ak[:, None] - Al[None, :]
            for j in (0, 1):
                summand = (left[j][:, None] * wdiff * dot
                           * a3[j][il, keep[il]][None, :]).real
                summand = np.where(valid, summand, 0.0)
                for lab in (LABEL_T, LABEL_R, LABEL_REM, LABEL_EQ):
                    totals[lab] += float(np.sum(summand[labels == lab]))
    return totals / grid.Ly


def nl_partition_check(state: MHDState, params: WeightParams,
                       rtol: float = 1e-10):
    """Verify R + T + Rem + NL_eq reproduces the transform-computed NL.

    Works on the commutator-form pairing with the full A weight; the state's
    four bilinear terms (b,b | v,v | b,v | v,b) are accumulated with their
    signs.  Returns a report dict; raises nothing (caller asserts).
    """
    g, t = state.grid, state.t
    mset = MultiplierSet(g, t, params)
    if float(np.max(mset.log_A)) > 300.0:
        raise OverflowError("weights too large for direct pairing")
    A = mset.A
    ws = ProductWorkspace(g)
    v, b = state.v, state.b
    terms = [(v, b, b, 1.0), (v, v, v, -1.0), (b, b, v, 1.0), (b, v, b, -1.0)]
    nl_fft = 0.0
    pieces = np.zeros(4)
    for a1, a2, a3, sign in terms:
        nl_fft += sign * _pairing_fft(g, A, a1, a2, a3, t, ws)
        pieces += sign * _pairing_direct(g, A, a1, a2, a3, t)
    total = float(pieces.sum())
    scale = max(abs(nl_fft), sum(abs(p) for p in pieces), 1e-300)
    report = {
        "NL": nl_fft,
        "reaction": float(pieces[LABEL_R]),
        "transport": float(pieces[LABEL_T]),
        "remainder": float(pieces[LABEL_REM]),
        "average": float(pieces[LABEL_EQ]),
        "sum_of_pieces": total,
        "mismatch": abs(total - nl_fft),
        "rel_mismatch": abs(total - nl_fft) / scale,
        "passes": bool(abs(total - nl_fft) <= rtol * scale),
    }
    return report


def partition_exactness_sample(rng: np.random.Generator, n: int = 2000):
    """Random quadruples: labels are one-hot and match the nominal sets
    off the factor-8 equality boundaries."""
    k = rng.integers(-20, 21, size=n)
    l = rng.integers(-20, 21, size=n)
    eta = rng.uniform(-30, 30, size=n)
    xi = rng.uniform(-30, 30, size=n)
    labels = omega_labels(k, eta, l, xi)
    disp = np.stack([omega_t_nominal(k, eta, l, xi),
                     omega_r_nominal(k, eta, l, xi),
                     omega_rem_nominal(k, eta, l, xi)])
    covered = disp.any(axis=0) | (k == l)
    d = np.hypot(k - l, eta - xi)
    lm = np.hypot(l, xi)
    on_boundary = (np.isclose(d, 8 * lm) | np.isclose(8 * d, lm)) & (k != l)
    agree = np.ones(n, dtype=bool)
    off = ~on_boundary & (k != l)
    agree[off & (labels == LABEL_T)] = disp[0][off & (labels == LABEL_T)]
    agree[off & (labels == LABEL_R)] = disp[1][off & (labels == LABEL_R)]
    agree[off & (labels == LABEL_REM)] = disp[2][off & (labels == LABEL_REM)]
    return {"all_covered": bool(covered.all()),
            "nominal_agrees_off_boundary": bool(agree.all()),
            "n_boundary": int(on_boundary.sum())}
