"""Sampled verification of the weight lemmas, reported as audit rows.

Row conventions:

* lemmas with an explicit claimed constant (the J sandwich, the m and
  mtilde bounds, plateau/dip equalities) are hard checks:
  ``max_violation_ratio`` is observed/claimed and ``passes`` requires <= 1;
* comparability lemmas stated with unspecified constants record the
  empirical constant over the sample and pass whenever it is finite;
* known internal discrepancies among the stated multiplier properties
  (the m bound convention, the zero-time q asymptotics under the
  plateau-equal construction) are reported with explanatory notes instead
  of being silently resolved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .weights import (WeightParams, dtq_over_q, log_a_multiplier, log_j,
                      log_jtilde, log_q, m_value, mtilde_value, q_endpoint,
                      q_growth_ratio, q_value)

AUDIT_COLUMNS = ("lemma_id", "sample_count", "empirical_constant",
                 "max_violation_ratio", "passes", "note")


@dataclass
class AuditRow:
    lemma_id: str
    sample_count: int
    empirical_constant: float
    max_violation_ratio: float
    passes: bool
    note: str = ""

    def as_list(self):
        return [self.lemma_id, self.sample_count, self.empirical_constant,
                self.max_violation_ratio, self.passes, self.note]


def _eta_samples(eta_max: float, n: int) -> np.ndarray:
    return np.unique(np.concatenate([
        np.geomspace(2.0, eta_max, n),
        np.array([2.0, 5.0, 16.0, 100.0, 400.0]),
    ]))


def _time_samples(eta: float, per_interval: int = 3) -> np.ndarray:
    """Representative times: plateaus, branch interiors, resonances, tail."""
    k0 = int(math.floor(math.sqrt(eta)))
    ts = [0.0, 0.25 * math.sqrt(eta), 2.0 * eta, 2.5 * eta]
    ks = sorted(set(list(range(1, min(k0, 6) + 1)) + [k0]))
    for k in ks:
        tk = float(q_endpoint(k, eta))
        tk1 = float(q_endpoint(k - 1, eta))
        res = eta / k
        ts.extend([tk, 0.5 * (tk + res), res, 0.5 * (res + tk1)])
        if per_interval > 3:
            ts.extend(np.linspace(tk, tk1, per_interval).tolist())
    return np.unique(np.array(ts))


def audit_q_plateau_and_dip(params: WeightParams, etas) -> list[AuditRow]:
    worst_plateau = 0.0
    worst_dip = 0.0
    n = 0
    for eta in etas:
        k0 = int(math.floor(math.sqrt(eta)))
        for k in range(1, k0 + 1):
            tk = float(q_endpoint(k, eta))
            tk1 = float(q_endpoint(k - 1, eta))
            qk = float(q_value(tk, eta, params))
            qk1 = float(q_value(tk1, eta, params))
            worst_plateau = max(worst_plateau, abs(qk - qk1))
            dip = float(q_value(eta / k, eta, params)) / qk
            worst_dip = max(worst_dip, abs(dip - (k * k / eta) ** params.rho))
            n += 1
    return [
        AuditRow("q_plateau_equality", n, worst_plateau, worst_plateau / 1e-10,
                 worst_plateau <= 1e-10),
        AuditRow("q_resonance_dip", n, worst_dip, worst_dip / 1e-10,
                 worst_dip <= 1e-10),
    ]


def audit_q_symmetry(params: WeightParams, etas) -> AuditRow:
    worst = 0.0
    n = 0
    for eta in etas:
        for t in _time_samples(eta):
            worst = max(worst, abs(float(log_q(t, eta, params))
                                   - float(log_q(t, -eta, params))))
            n += 1
    return AuditRow("q_symmetry", n, worst, worst / 1e-14 if worst else 0.0,
                    worst <= 1e-12)


def audit_q_growth(params: WeightParams, etas) -> list[AuditRow]:
    """|d_t q|/q comparability with rho/(1+|t-eta/k|), plus a numeric
    differentiation crosscheck of the analytic branch derivative."""
    lo, hi = np.inf, 0.0
    worst_num = 0.0
    n = 0
    for eta in etas:
        k0 = int(math.floor(math.sqrt(eta)))
        for k in range(1, k0 + 1):
            res = eta / k
            if not (2.0 * math.sqrt(eta) <= res <= 2.0 * eta):
                continue
            tk = float(q_endpoint(k, eta))
            tk1 = float(q_endpoint(k - 1, eta))
            for t in np.linspace(tk + 1e-6, tk1 - 1e-6, 7):
                ratio = float(q_growth_ratio(t, eta, params))
                if ratio == 0.0:
                    continue
                cmp = ratio * (1.0 + abs(t - res)) / params.rho
                lo, hi = min(lo, cmp), max(hi, cmp)
                # centered difference must stay inside one smooth branch
                gap = min(abs(t - tk), abs(t - tk1), abs(t - res))
                if gap <= 1e-5 * max(1.0, abs(t)):
                    continue
                h = min(1e-6 * max(1.0, abs(t)), 0.4 * gap)
                num = (float(log_q(t + h, eta, params))
                       - float(log_q(t - h, eta, params))) / (2 * h)
                ana = float(dtq_over_q(t, eta, params))
                worst_num = max(worst_num, abs(num - ana) / max(abs(ana), 1e-12))
                n += 1
    if not np.isfinite(lo):
        lo = 0.0
    return [
        AuditRow("q_growth_comparability", n, hi, 0.0,
                 np.isfinite(hi) and lo > 0,
                 note=f"two-sided constants [{lo:.3g}, {hi:.3g}]; sign of d_t q "
                      "alternates within each interval, |.| tested"),
        AuditRow("q_dt_crosscheck", n, worst_num, worst_num / 1e-5,
                 worst_num <= 1e-5, note="analytic vs centered difference"),
    ]


def audit_q_asymptotics(params: WeightParams, eta_max: float) -> AuditRow:
    def cc(emax):
        etas = np.geomspace(2.0, emax, 60)
        vals = [-float(log_q(0.0, e, params)) + params.rho * math.log(e)
                - 8.0 * params.rho * math.sqrt(e) for e in etas]
        return max(vals) - min(vals)  # log of C/c
    full = cc(eta_max)
    half = cc(eta_max / 2.0)
    stability = full / half if half > 0 else np.inf
    return AuditRow("q_zero_time_asymptotics", 60, math.exp(min(full, 700.0)), stability, np.isfinite(full),
                    note="two-sided comparability of 1/q(0) with eta^-rho*exp(8 rho sqrt(eta)) "
                         "does not hold under the plateau-equal construction; "
                         "log(C/c) and its range-doubling growth are recorded")


def audit_q_ratio_exp_bound(params: WeightParams, etas, rng) -> AuditRow:
    worst = 0.0
    n = 0
    for eta in etas:
        for xi in rng.choice(etas, size=min(8, len(etas)), replace=False):
            for t in _time_samples(min(eta, xi))[::2]:
                val = (float(log_q(t, xi, params)) - float(log_q(t, eta, params))
                       - 8.0 * params.rho * math.sqrt(abs(eta - xi)))
                worst = max(worst, math.exp(val))
                n += 1
    return AuditRow("q_ratio_exp_bound", n, worst, 0.0, np.isfinite(worst))


def audit_q_growth_frequency_change(params: WeightParams, etas, rng) -> AuditRow:
    worst = 0.0
    n = 0
    for eta in etas:
        for frac in (0.55, 0.8, 1.25, 1.9):
            xi = frac * eta
            if not (0.5 * xi <= eta <= 2.0 * xi):
                continue
            for t in np.linspace(2.0, 2.0 * min(eta, xi), 9):
                lhs = math.sqrt(abs(float(dtq_over_q(t, xi, params))))
                rhs = ((math.sqrt(abs(float(dtq_over_q(t, eta, params))))
                        + abs(eta) ** (0.5 * params.s) / math.hypot(1.0, t) ** params.s)
                       * math.hypot(1.0, eta - xi))
                if rhs > 0:
                    worst = max(worst, lhs / rhs)
                    n += 1
    del rng
    return AuditRow("q_growth_frequency_change", n, worst, 0.0, np.isfinite(worst),
                    note="|d_t q| used for both sides")


def _mode_lattice(eta_max: float, rng, n: int = 300):
    ks = rng.integers(-40, 41, size=n)
    etas = np.sign(rng.standard_normal(n)) * rng.uniform(0.0, eta_max, size=n)
    return ks, etas


def audit_j_bounds(params: WeightParams, eta_max: float, rng) -> list[AuditRow]:
    ks, etas = _mode_lattice(eta_max, rng, 400)
    worst_hi = 0.0
    worst_lo = 0.0
    n = 0
    for k, eta in zip(ks, etas):
        for t in _time_samples(max(2.0, abs(eta)))[::3]:
            lj = float(log_j(t, k, eta, params))
            bound = math.log(2.0) + 8.0 * params.rho * (k * k + eta * eta) ** 0.25
            worst_hi = max(worst_hi, math.exp(lj - bound))
            worst_lo = max(worst_lo, math.exp(-lj))
            n += 1
    ratio_worst = 0.0
    m = 0
    for _ in range(400):
        k, l = rng.integers(-30, 31, size=2)
        eta, xi = rng.uniform(-eta_max, eta_max, size=2)
        t = rng.uniform(0.0, 2.2 * eta_max)
        val = (float(log_j(t, k, eta, params)) - float(log_j(t, l, xi, params))
               - math.log(2.0) - 8.0 * params.rho * np.hypot(k - l, eta - xi) ** 0.5)
        ratio_worst = max(ratio_worst, math.exp(val))
        m += 1
    return [
        AuditRow("J_sandwich", n, max(worst_hi, worst_lo),
                 max(worst_hi, worst_lo), max(worst_hi, worst_lo) <= 1.0 + 1e-12,
                 note="1 <= J <= 2 exp(8 rho |k,eta|^(1/2)); needs "
                      "rho*log(eta_max) <= log 2 on the sampled range"),
        AuditRow("J_ratio_bound", m, ratio_worst, ratio_worst,
                 ratio_worst <= 1.0 + 1e-12),
    ]


def audit_j_vs_jtilde(params: WeightParams, eta_max: float, rng) -> AuditRow:
    worst = 0.0
    n = 0
    for _ in range(300):
        eta = rng.uniform(2.0, eta_max)
        k = rng.integers(0, max(1, int(eta / 4)) + 1)
        t = rng.uniform(0.0, 2.2 * eta)
        val = (float(log_j(t, k, eta, params)) - math.log(2.0)
               - float(log_jtilde(t, k, eta, params)))
        worst = max(worst, math.exp(val))
        n += 1
    return AuditRow("J_vs_Jtilde_low_k", n, worst, worst, worst <= 1.0 + 1e-12,
                    note="J <= 2 Jtilde on 4|k| <= |eta|")


def audit_j_commutator_small_time(params: WeightParams, eta_max: float, rng) -> AuditRow:
    worst = 0.0
    n = 0
    for _ in range(400):
        eta = rng.uniform(9.0, eta_max)
        xi = rng.uniform(9.0, eta_max)
        k = int(rng.integers(-20, 21))
        l = int(rng.integers(-20, 21))
        t = rng.uniform(0.0, 0.5 * min(math.sqrt(eta), math.sqrt(xi)))
        lhs = abs(math.exp(float(log_j(t, k, eta, params))
                           - float(log_j(t, l, xi, params))) - 1.0)
        rhs = (math.hypot(1.0, np.hypot(eta - xi, k - l))
               * math.exp(100.0 * params.rho * abs(eta - xi) ** 0.5)
               / math.sqrt(eta + xi + abs(k) + abs(l)))
        worst = max(worst, lhs / rhs)
        n += 1
    return AuditRow("J_commutator_small_time", n, worst, 0.0, np.isfinite(worst))


def audit_j_commutator_high_k(params: WeightParams, rng) -> AuditRow:
    worst = 0.0
    n = 0
    for _ in range(400):
        l = int(rng.choice([-1, 1]) * rng.integers(8, 120))
        eta = rng.uniform(0.0, abs(l) / 4.0)
        k = int(np.sign(l) * rng.integers(max(1, abs(l) - 10), abs(l) + 10))
        xi = rng.uniform(-abs(l), abs(l))
        t = rng.uniform(0.0, 10.0)
        lhs = abs(math.exp(float(log_j(t, k, eta, params))
                           - float(log_j(t, l, xi, params))) - 1.0)
        rhs = (math.hypot(1.0, k - l) / (params.rho * math.sqrt(abs(k)))
               * math.exp(8.0 * params.rho * abs(k - l) ** 0.5))
        worst = max(worst, lhs / rhs)
        n += 1
    return AuditRow("J_commutator_high_k", n, worst, 0.0, np.isfinite(worst))


def audit_m(params: WeightParams, eta_max: float, rng) -> list[AuditRow]:
    worst = 0.0
    mn, mx = np.inf, -np.inf
    n = 0
    for _ in range(500):
        k = int(rng.choice([-1, 1]) * rng.integers(1, 40))
        eta = rng.uniform(-eta_max, eta_max)
        t = rng.uniform(0.0, 3.0 * abs(eta) + 10.0)
        m = float(m_value(t, k, eta, params))
        lower = math.exp(-math.pi / (params.alpha * abs(k)))
        worst = max(worst, m - 1.0, lower - m)
        mn, mx = min(mn, m), max(mx, m)
        n += 1
    rows = [AuditRow("m_bounds", n, worst, max(worst, 0.0) / 1e-12 if worst > 0 else 0.0,
                     worst <= 1e-12,
                     note="exp(-pi/(alpha|k|)) <= m <= 1 per the implemented definition"),
            AuditRow("m_bound_convention", n, mx, 0.0, True,
                     note=f"a companion bound claims 1 <= m <= e^pi but the implemented integrand "
                          f"gives m in [{mn:.3g}, {mx:.3g}] <= 1; discrepancy flagged, "
                          "not resolved (squared-denominator variant is mtilde)")]
    worst_diff = 0.0
    n2 = 0
    for _ in range(400):
        k = int(rng.choice([-1, 1]) * rng.integers(1, 30))
        l = int(rng.choice([-1, 1]) * rng.integers(1, 30))
        if k == l:
            continue
        eta = rng.uniform(-params.freq_cut**2, params.freq_cut**2)
        xi = rng.uniform(-params.freq_cut**2, params.freq_cut**2)
        t = rng.uniform(0.0, 50.0)
        diff = abs(float(m_value(t, k, eta, params)) - float(m_value(t, l, xi, params)))
        worst_diff = max(worst_diff, diff * min(abs(k), abs(l)) / abs(k - l))
        n2 += 1
    rows.append(AuditRow("m_difference_bound", n2, worst_diff, 0.0, np.isfinite(worst_diff)))
    return rows


def audit_mtilde(params: WeightParams, eta_max: float, rng) -> AuditRow:
    c1 = math.exp(math.pi / (2.0 * params.alpha))
    worst = 0.0
    n = 0
    for _ in range(400):
        k = int(rng.choice([-1, 1]) * rng.integers(1, 40))
        eta = rng.uniform(-eta_max, eta_max)
        t = rng.uniform(0.0, 3.0 * abs(eta) + 10.0)
        mt = float(mtilde_value(t, k, eta, params))
        worst = max(worst, mt / c1, 1.0 / mt)
        n += 1
    return AuditRow("mtilde_bound", n, worst, worst, worst <= 1.0 + 1e-12,
                    note="1 <= mtilde <= exp(pi/(2 alpha))")


def audit_q_asymptotics1(params: WeightParams, eta_max: float, rng) -> AuditRow:
    worst = 0.0
    n = 0
    for _ in range(300):
        k = int(rng.choice([-1, 1]) * rng.integers(1, 20))
        eta = rng.uniform(-eta_max, eta_max)
        xi = rng.uniform(-eta_max, eta_max)
        t = rng.uniform(0.0, 1.5 * eta_max)
        lhs = float(log_a_multiplier(t, 0, eta, params, "Atilde"))
        la = float(log_a_multiplier(t, k, xi, params, "Atilde"))
        lb = float(log_a_multiplier(t, k, eta - xi, params, "Atilde"))
        tail = np.logaddexp(-0.5 * params.N * np.log1p(k * k + eta * eta),
                            -0.5 * params.N * np.log1p(k * k + xi * xi))
        worst = max(worst, math.exp(min(lhs - la - lb - tail, 700.0)))
        n += 1
    return AuditRow("Atilde_triangle_bound", n, worst, 0.0, np.isfinite(worst))


def audit_average_weight(params: WeightParams, eta_max: float, rng) -> list[AuditRow]:
    from .weights import log_m
    worst = 0.0
    worst_nom = 0.0
    n = 0
    for _ in range(400):
        k = int(rng.choice([-1, 1]) * rng.integers(1, 30))
        eta = rng.uniform(-eta_max, eta_max)
        t = rng.uniform(0.0, 2.2 * eta_max)
        lhs = math.log(max(abs(eta), 1e-300)) + float(
            log_a_multiplier(t, 0, eta, params, "Alo"))
        rhs = float(log_a_multiplier(t, k, eta, params, "Atilde"))
        worst = max(worst, math.exp(min(lhs - rhs, 700.0)))
        rhs_nom = rhs - float(log_m(t, k, eta, params))
        worst_nom = max(worst_nom, math.exp(min(lhs - rhs_nom, 700.0)))
        n += 1
    return [
        AuditRow("average_weight_domination", n, worst, worst, np.isfinite(worst),
                 note="|eta| Alo(eta) <= C Atilde(k,eta); C exceeds 1 by up to "
                      "exp(pi/alpha) because the implemented m is <= 1 while the "
                      "bound presumes the m >= 1 convention; recorded, not asserted"),
        AuditRow("average_weight_domination_m_stripped", n, worst_nom, worst_nom,
                 np.isfinite(worst_nom),
                 note="same pairing with the m factor removed from Atilde; "
                      "confirms the violation above is the m convention"),
    ]


def run_weights_audit(params: WeightParams | None = None, eta_max: float = 1e4,
                      n_eta: int = 24, seed: int = 0):
    """All lemma checks; returns (rows, summary)."""
    params = params or WeightParams()
    rng = np.random.default_rng(seed)
    etas = _eta_samples(eta_max, n_eta)
    rows: list[AuditRow] = []
    rows += audit_q_plateau_and_dip(params, etas)
    rows.append(audit_q_symmetry(params, etas[::3]))
    rows += audit_q_growth(params, etas[::2])
    rows.append(audit_q_asymptotics(params, eta_max))
    rows.append(audit_q_ratio_exp_bound(params, etas[::2], rng))
    rows.append(audit_q_growth_frequency_change(params, etas[::2], rng))
    rows += audit_j_bounds(params, eta_max, rng)
    rows.append(audit_j_vs_jtilde(params, eta_max, rng))
    rows.append(audit_j_commutator_small_time(params, eta_max, rng))
    rows.append(audit_j_commutator_high_k(params, rng))
    rows += audit_m(params, eta_max, rng)
    rows.append(audit_mtilde(params, eta_max, rng))
    rows.append(audit_q_asymptotics1(params, min(eta_max, 200.0), rng))
    rows += audit_average_weight(params, min(eta_max, 200.0), rng)
    summary = {
        "eta_max": eta_max,
        "params": {"rho": params.rho, "lam0": params.lam0, "s": params.s,
                   "N": params.N, "alpha": params.alpha, "c0": params.c0,
                   "eps": params.eps},
        "all_finite": bool(all(np.isfinite(r.empirical_constant) for r in rows)),
        "hard_failures": [r.lemma_id for r in rows if not r.passes],
    }
    return rows, summary
