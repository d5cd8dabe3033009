"""Time-dependent Fourier multipliers: q, J, Jtilde, m, mtilde, lambda(t), A.

All exponentially large multipliers are handled as natural logs; ``log_*``
functions return log-values and plain-named ones exponentiate when safe.

The piecewise weight q(t, eta) is built per resonant interval
[t_k, t_{k-1}], t_k = (eta/k + eta/(k+1))/2, t_0 = 2|eta|, k = 1..floor(sqrt(|eta|)):
within each interval q dips from the plateau value 1 down to (k^2/eta)^rho
at the resonant time eta/k and climbs back, the two branch slopes being
fixed by continuity (1 + slope * half-interval-length = eta/k^2).  Outside
the interval union q is extended by the constant plateau value 1, anchored
at q(2|eta|) = 1.  For |eta| <= 1 there are no resonant intervals and q = 1.
Branch corners use the right-derivative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad


@dataclass(frozen=True)
class WeightParams:
    """Scalar parameter set governing every multiplier."""

    rho: float = 0.05
    lam0: float = 13.5
    s: float = 0.6
    N: int = 5
    alpha: float = 1.0
    c0: float = 0.05
    eps: float = 1e-3

    def __post_init__(self):
        if self.rho <= 0:
            raise ValueError("rho must be positive")
        if not (0.5 < self.s <= 1.0):
            raise ValueError("s must lie in (1/2, 1]")
        if self.N < 5:
            raise ValueError("N must be an integer >= 5")
        if self.alpha == 0:
            raise ValueError("alpha must be nonzero")
        if not (0 < self.eps < self.c0 < 1):
            raise ValueError("need 0 < eps < c0 < 1")
        if self.lam0 < self.rho * (250.0 + 2.0 / (self.s - 0.5)) - 1e-12:
            raise ValueError("lam0 must satisfy lam0 >= rho*(250 + 2/(s-1/2))")

    @property
    def freq_cut(self) -> float:
        """Frequency cut of m: active for sqrt(|eta|) <= 10*c0/eps."""
        return 10.0 * self.c0 / self.eps


# ---------------------------------------------------------------------------
# q weight
# ---------------------------------------------------------------------------

def q_endpoint(k, eta):
    """Interval endpoint t_{k,eta}; k = 0 gives the anchor 2|eta|."""
    k = np.asarray(k, dtype=float)
    eta = np.abs(np.asarray(eta, dtype=float))
    return np.where(k == 0, 2.0 * eta, 0.5 * (eta / np.where(k == 0, 1, k)
                                              + eta / (k + 1.0)))


def q_slopes(k, eta):
    """Branch slopes (a_k, b_k) fixed by 1 + slope * |endpoint - eta/k| = eta/k^2.

    For k >= 2 these agree with the closed forms 2(k+1)/k*(1-k^2/eta) and
    2(k-1)/k*(1-k^2/eta); at k = 1 the closed b-form degenerates to 0, so
    the continuity-defining value is used throughout.
    """
    k = np.asarray(k, dtype=float)
    eta = np.abs(np.asarray(eta, dtype=float))
    res = eta / k
    gain = eta / k**2 - 1.0
    a = gain / (res - q_endpoint(k, eta))
    b = gain / (q_endpoint(k - 1, eta) - res)
    return a, b


def _q_piece(t, eta, rho):
    """(log q, d/dt log q) for scalar t and scalar |eta| > 1."""
    eta = abs(eta)
    k0 = int(math.floor(math.sqrt(eta)))
    t_low = 0.5 * (eta / k0 + eta / (k0 + 1))
    if t < t_low or t >= 2.0 * eta:
        return 0.0, 0.0
    # locate k with t in [t_k, t_{k-1}), right-open so corners take the
    # right-derivative of the next branch
    k_guess = int(math.floor(eta / t - 0.5)) if t > 0 else k0
    for k in range(min(max(k_guess + 2, 1), k0), 0, -1):
        tk = 0.5 * (eta / k + eta / (k + 1))
        tk1 = 2.0 * eta if k == 1 else 0.5 * (eta / (k - 1) + eta / k)
        if tk <= t < tk1:
            res = eta / k
            gain = eta / k**2 - 1.0
            if t < res:  # approaching the resonance: q decreasing
                a = gain / (res - tk)
                z = 1.0 + a * (res - t)
                return rho * (math.log(k**2 / eta) + math.log(z)), -rho * a / z
            b = gain / (tk1 - res)
            z = 1.0 + b * (t - res)
            return rho * (math.log(k**2 / eta) + math.log(z)), rho * b / z
    return 0.0, 0.0


_q_piece_vec = np.vectorize(_q_piece, otypes=[float, float])


def log_q(t, eta, params: WeightParams):
    """log q(t, eta); q = 1 for |eta| <= 1 and outside the construction range."""
    t = np.asarray(t, dtype=float)
    eta = np.asarray(eta, dtype=float)
    small = np.abs(eta) <= 1.0
    lq, _ = _q_piece_vec(t, np.where(small, 2.0, np.abs(eta)), params.rho)
    return np.where(small, 0.0, lq)


def q_value(t, eta, params: WeightParams):
    return np.exp(log_q(t, eta, params))


def dtq_over_q(t, eta, params: WeightParams):
    """Signed d_t q / q by analytic branch differentiation (right-derivative)."""
    t = np.asarray(t, dtype=float)
    eta = np.asarray(eta, dtype=float)
    small = np.abs(eta) <= 1.0
    _, dq = _q_piece_vec(t, np.where(small, 2.0, np.abs(eta)), params.rho)
    return np.where(small, 0.0, dq)


def q_growth_ratio(t, eta, params: WeightParams):
    """|d_t q|/q on the resonant range 2*sqrt|eta| <= t <= 2|eta|, else 0."""
    t = np.asarray(t, dtype=float)
    eta = np.asarray(eta, dtype=float)
    ratio = np.abs(dtq_over_q(t, eta, params))
    in_range = (t >= 2.0 * np.sqrt(np.abs(eta))) & (t <= 2.0 * np.abs(eta))
    return np.where(in_range, ratio, 0.0)


# ---------------------------------------------------------------------------
# m and mtilde
# ---------------------------------------------------------------------------

def _m_active(k, eta, params: WeightParams):
    return (np.asarray(k) != 0) & (np.sqrt(np.abs(eta)) <= params.freq_cut)


def log_m(t, k, eta, params: WeightParams):
    """log m, with m = exp(-(1/(alpha|k|)) * int_0^t dtau/(1+(eta/k-tau)^2))."""
    k = np.asarray(k, dtype=float)
    eta = np.asarray(eta, dtype=float)
    ksafe = np.where(k == 0, 1.0, k)
    ratio = eta / ksafe
    integral = np.arctan(ratio) - np.arctan(ratio - t)
    out = -integral / (params.alpha * np.abs(ksafe))
    return np.where(_m_active(k, eta, params), out, 0.0)


def m_value(t, k, eta, params: WeightParams):
    return np.exp(log_m(t, k, eta, params))


def dtm_over_m(t, k, eta, params: WeightParams):
    k = np.asarray(k, dtype=float)
    eta = np.asarray(eta, dtype=float)
    ksafe = np.where(k == 0, 1.0, k)
    val = -1.0 / (params.alpha * np.abs(ksafe) * (1.0 + (eta / ksafe - t) ** 2))
    return np.where(_m_active(k, eta, params), val, 0.0)


def _asinh_kernel_antiderivative(u):
    # int (1+u^2)^{-2} du = (u/(1+u^2) + arctan u)/2
    u = np.asarray(u, dtype=float)
    return 0.5 * (u / (1.0 + u**2) + np.arctan(u))


def log_mtilde(t, k, eta, params: WeightParams):
    """log mtilde with the squared-denominator integrand; requires k != 0."""
    k = np.asarray(k, dtype=float)
    if np.any(k == 0):
        raise ValueError("mtilde is defined only for k != 0")
    eta = np.asarray(eta, dtype=float)
    shift = eta / k
    integral = _asinh_kernel_antiderivative(t - shift) - _asinh_kernel_antiderivative(-shift)
    return integral / (params.alpha * np.abs(k))


def mtilde_value(t, k, eta, params: WeightParams):
    return np.exp(log_mtilde(t, k, eta, params))


def log_mtilde_grid(t, K, ETA, params: WeightParams):
    """Grid-wide log mtilde with the k = 0 column set to 0 (mtilde = 1)."""
    ksafe = np.where(K == 0, 1.0, K)
    shift = ETA / ksafe
    integral = _asinh_kernel_antiderivative(t - shift) - _asinh_kernel_antiderivative(-shift)
    return np.where(K == 0, 0.0, integral / (params.alpha * np.abs(ksafe)))


# ---------------------------------------------------------------------------
# lambda(t)
# ---------------------------------------------------------------------------

@lru_cache(maxsize=100000)
def _lambda_integral(t: float, s: float) -> float:
    p = 0.75 + 0.5 * s

    def f(tau):
        return (1.0 + tau * tau) ** (-0.5 * p)

    split = 32.0
    if t <= split:
        val, _ = quad(f, 0.0, t, epsabs=1e-13, epsrel=1e-13, limit=200)
        return val
    head, _ = quad(f, 0.0, split, epsabs=1e-13, epsrel=1e-13, limit=200)
    # log substitution keeps the slowly decaying tail well behaved
    tail, _ = quad(lambda u: f(math.exp(u)) * math.exp(u),
                   math.log(split), math.log(t), epsabs=1e-13, epsrel=1e-13,
                   limit=200)
    return head + tail


def lambda_of_t(t, params: WeightParams):
    """lambda(t) = lam0 - rho * int_0^t <tau>^{-(3/4 + s/2)} dtau."""
    tt = np.asarray(t, dtype=float)
    vals = np.array([_lambda_integral(float(x), params.s) for x in np.atleast_1d(tt)])
    out = params.lam0 - params.rho * vals
    return out.reshape(tt.shape) if tt.ndim else float(out[0])


def dlambda_dt(t, params: WeightParams):
    t = np.asarray(t, dtype=float)
    return -params.rho * (1.0 + t * t) ** (-0.5 * (0.75 + 0.5 * params.s))


# ---------------------------------------------------------------------------
# J and the assembled multipliers
# ---------------------------------------------------------------------------

def log_jtilde(t, k, eta, params: WeightParams):
    del k
    eta = np.asarray(eta, dtype=float)
    return 8.0 * params.rho * np.sqrt(np.abs(eta)) - log_q(t, eta, params)


def log_j(t, k, eta, params: WeightParams):
    k = np.asarray(k, dtype=float)
    return np.logaddexp(log_jtilde(t, k, eta, params),
                        8.0 * params.rho * np.sqrt(np.abs(k)))


def j_value(t, k, eta, params: WeightParams):
    return np.exp(log_j(t, k, eta, params))


def jtilde_value(t, k, eta, params: WeightParams):
    return np.exp(log_jtilde(t, k, eta, params))


def _log_sobolev_gevrey(k, eta, lam, s, N):
    k = np.asarray(k, dtype=float)
    eta = np.asarray(eta, dtype=float)
    mag2 = k**2 + eta**2
    return 0.5 * N * np.log1p(mag2) + lam * mag2 ** (0.5 * s)


def log_a_multiplier(t, k, eta, params: WeightParams, kind: str = "A", lam=None):
    """log of A, Atilde or Alo at (t, k, eta).

    ``lam`` overrides lambda(t) (used when a caller has already cached it).
    Alo requires k = 0 and carries Sobolev exponent N-1.
    """
    if lam is None:
        lam = lambda_of_t(float(t) if np.ndim(t) == 0 else t, params)
    if kind == "A":
        return (log_m(t, k, eta, params) + log_j(t, k, eta, params)
                + _log_sobolev_gevrey(k, eta, lam, params.s, params.N))
    if kind == "Atilde":
        return (log_m(t, k, eta, params) + log_jtilde(t, k, eta, params)
                + _log_sobolev_gevrey(k, eta, lam, params.s, params.N))
    if kind == "Alo":
        if np.any(np.asarray(k) != 0):
            raise ValueError("Alo is defined on the k = 0 column only")
        return (log_j(t, 0, eta, params)
                + _log_sobolev_gevrey(0, eta, lam, params.s, params.N - 1))
    raise ValueError(f"unknown multiplier kind {kind!r}")


def a_multiplier(t, k, eta, params: WeightParams, kind: str = "A"):
    return np.exp(log_a_multiplier(t, k, eta, params, kind))


class MultiplierSet:
    """Grid-wide weight evaluation at a fixed time, cached for reuse.

    Provides the log tables of A and Atilde over the (k, eta) table, the k=0
    column of Alo, and the analytic time-derivative factors entering the
    energy identity.  Pure: identical inputs give bit-identical outputs.
    """

    def __init__(self, grid, t: float, params: WeightParams):
        self.grid = grid
        self.t = float(t)
        self.params = params
        self.lam = float(lambda_of_t(self.t, params))
        K, ETA = grid.K, grid.ETA
        base = _log_sobolev_gevrey(K, ETA, self.lam, params.s, params.N)
        lq = log_q(self.t, ETA, params) * np.ones_like(base)
        self.log_jtilde = 8.0 * params.rho * np.sqrt(np.abs(ETA)) - lq
        self.log_j = np.logaddexp(self.log_jtilde,
                                  8.0 * params.rho * np.sqrt(np.abs(K)) * np.ones_like(base))
        self.log_m = log_m(self.t, K, ETA, params) * np.ones_like(base)
        self.log_A = self.log_m + self.log_j + base
        self.log_Atilde = self.log_m + self.log_jtilde + base
        eta1 = grid.eta
        self.log_Alo = (log_j(self.t, 0.0, eta1, params)
                        + _log_sobolev_gevrey(0.0, eta1, self.lam, params.s, params.N - 1))
        self.dtq_over_q = dtq_over_q(self.t, ETA, params) * np.ones_like(base)
        self.dtm_over_m = dtm_over_m(self.t, K, ETA, params) * np.ones_like(base)
        self.dlam = float(dlambda_dt(self.t, params))

    @property
    def A(self):
        return np.exp(self.log_A)

    @property
    def Atilde(self):
        return np.exp(self.log_Atilde)

    @property
    def Alo(self):
        return np.exp(self.log_Alo)
