"""Configuration-driven experiments with reproducible, hash-stamped outputs.

Experiments: linear_modes, nonlinear_ideal, dissipative, norm_inflation,
resonance_chain, weights_audit, nl_partition.  Configs are versioned JSON;
identical configs (seeds included) produce byte-identical CSV artifacts.
"""

from __future__ import annotations

import math
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from . import io as sio
from .diagnostics import (DiagnosticsRecord, MultiplierSet, bootstrap_monitor,
                          dissipation_terms, gevrey_norm, growth_fit,
                          make_record)
from .dynamics import (VBIntegrator, dissipation_phase, evolve,
                       norm_inflation_experiment)
from .partition import nl_partition_check, partition_exactness_sample
from .resonance import ChainConfig, chain_handoff_trajectory, chain_sweep_fit, chain_total_growth
from .spectral import Grid, l2_norm, random_hermitian_coeffs
from .unknowns import (MHDState, hminus1_norm, leray_project_t,
                       perp_grad_t, state_to_tailored)
from .weights import WeightParams
from .weights_audit import AUDIT_COLUMNS, run_weights_audit

EXPERIMENTS = ("linear_modes", "nonlinear_ideal", "dissipative",
               "norm_inflation", "resonance_chain", "weights_audit",
               "nl_partition")

CONFIG_VERSION = 1


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str = "nonlinear_ideal"
    version: int = CONFIG_VERSION
    grid: dict = field(default_factory=lambda: {"Nx": 64, "Ny": 64, "Ly": 1.0})
    params: dict = field(default_factory=lambda: {
        "rho": 0.004, "lam0": 1.1, "s": 0.6, "N": 5, "alpha": 1.0,
        "c0": 0.05, "eps": 1e-3})
    evolution: dict = field(default_factory=lambda: {
        "dt": 0.02, "t_end": 50.0, "form": "vb", "nu": 0.0, "kappa": 0.0,
        "symbol_variant": "derived"})
    initial: dict = field(default_factory=lambda: {
        "kind": "gevrey_random", "seed": 7, "eps": 1e-3, "lam1": 1.2,
        "k": 1, "eta_index": 0, "amplitude": 1e-8, "component": "v",
        "path": ""})
    monitor: dict = field(default_factory=lambda: {
        "lam2": 1.0, "sample_dt": 0.5, "hminus1_gate_K": 0.25,
        "c_star": 1.0})
    audit: dict = field(default_factory=lambda: {
        "eta_max": 1e4, "n_eta": 24, "seed": 0})
    chain: dict = field(default_factory=lambda: {
        "c0": 0.5, "etas": [100.0, 1000.0, 10000.0], "bridge": False})
    output: dict = field(default_factory=lambda: {"snapshots": 0})

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        base = cls()
        unknown = set(data) - set(base.to_dict())
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key, val in data.items():
            cur = getattr(base, key)
            if isinstance(cur, dict):
                bad = set(val) - set(cur)
                if bad:
                    raise ConfigError(f"unknown keys in '{key}': {sorted(bad)}")
                cur.update(val)
            else:
                setattr(base, key, val)
        base.validate()
        return base

    def validate(self):
        if self.version != CONFIG_VERSION:
            raise ConfigError(f"unsupported config version {self.version}")
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment must be one of {EXPERIMENTS}")
        g = self.grid
        try:
            Grid(int(g["Nx"]), int(g["Ny"]), float(g["Ly"]))
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"invalid grid: {exc}") from exc
        try:
            self.weight_params()
        except ValueError as exc:
            raise ConfigError(f"invalid params: {exc}") from exc
        ev = self.evolution
        if ev["dt"] <= 0 or ev["t_end"] < 0:
            raise ConfigError("evolution.dt must be > 0 and t_end >= 0")
        if ev.get("form", "vb") not in ("vb", "ptilde"):
            raise ConfigError("evolution.form must be vb or ptilde")
        if self.initial["kind"] not in ("gevrey_random", "single_mode", "file"):
            raise ConfigError("initial.kind must be gevrey_random, single_mode or file")
        if self.experiment in ("nonlinear_ideal", "dissipative", "norm_inflation"):
            if not (0 < self.initial["eps"] < self.params["c0"]):
                raise ConfigError("stability experiments require 0 < eps < c0")
        if self.experiment == "dissipative" and max(ev["nu"], ev["kappa"]) <= 0:
            raise ConfigError("dissipative experiment requires nu or kappa > 0")

    def weight_params(self) -> WeightParams:
        p = self.params
        return WeightParams(rho=p["rho"], lam0=p["lam0"], s=p["s"], N=int(p["N"]),
                            alpha=p["alpha"], c0=p["c0"], eps=p["eps"])

    def make_grid(self) -> Grid:
        return Grid(int(self.grid["Nx"]), int(self.grid["Ny"]), float(self.grid["Ly"]))


# ---------------------------------------------------------------------------
# initial data
# ---------------------------------------------------------------------------

def gevrey_random_data(grid: Grid, params: WeightParams, seed: int, eps: float,
                       lam1: float) -> MHDState:
    """Random Hermitian data under a Gevrey envelope, divergence- and
    mean-free, rescaled to ||(v,b)||_{G^lam1} = eps exactly."""
    rng = np.random.default_rng(seed)
    mag2 = grid.K**2 + grid.ETA**2
    envelope = np.exp(-lam1 * mag2 ** (0.5 * params.s)
                      - 0.5 * (params.N + 2) * np.log1p(mag2))
    tabs = [random_hermitian_coeffs(grid, rng, envelope) * grid.dealias_keep
            for _ in range(4)]
    v = leray_project_t(grid, np.stack(tabs[:2]), 0.0)
    b = leray_project_t(grid, np.stack(tabs[2:]), 0.0)
    state = MHDState(grid, v, b, 0.0)
    norm = state_gevrey_norm_at(state, lam1, params)
    if norm == 0:
        raise ValueError("degenerate random draw")
    state.v *= eps / norm
    state.b *= eps / norm
    return state


def state_gevrey_norm_at(state: MHDState, lam: float, params: WeightParams) -> float:
    return gevrey_norm(state.grid,
                       [state.v[0], state.v[1], state.b[0], state.b[1]],
                       lam, params.s, params.N)


def single_mode_state(grid: Grid, k: int, eta_index: int, amplitude: float,
                      component: str = "v") -> MHDState:
    """Divergence-free single mode (plus Hermitian partner) in v or b."""
    psi = grid.zeros()
    i = int(k) % grid.Nx
    j = int(eta_index) % grid.Ny
    psi[i, j] = 1.0
    psi[(-int(k)) % grid.Nx, (-int(eta_index)) % grid.Ny] = 1.0
    fld = perp_grad_t(grid, psi, 0.0)
    nrm = l2_norm(grid, fld[0], fld[1])
    if nrm == 0:
        raise ValueError("degenerate mode (0, 0)")
    fld *= amplitude / nrm
    zero = np.stack([grid.zeros(), grid.zeros()])
    if component == "v":
        return MHDState(grid, fld, zero, 0.0)
    if component == "b":
        return MHDState(grid, zero, fld, 0.0)
    raise ValueError("component must be 'v' or 'b'")


def build_initial_state(config: ExperimentConfig, grid: Grid,
                        params: WeightParams) -> MHDState:
    ini = config.initial
    if ini["kind"] == "gevrey_random":
        return gevrey_random_data(grid, params, int(ini["seed"]),
                                  float(ini["eps"]), float(ini["lam1"]))
    if ini["kind"] == "single_mode":
        return single_mode_state(grid, int(ini["k"]), int(ini["eta_index"]),
                                 float(ini["amplitude"]), ini["component"])
    state = sio.read_state_snapshot(ini["path"])
    if state.grid.shape != grid.shape:
        raise ConfigError("snapshot grid does not match configured grid")
    return state


# ---------------------------------------------------------------------------
# experiment bodies
# ---------------------------------------------------------------------------

def _trajectory_run(config: ExperimentConfig, outdir: str, nu: float, kappa: float):
    grid = config.make_grid()
    params = config.weight_params()
    alpha = params.alpha
    state0 = build_initial_state(config, grid, params)
    lam2 = float(config.monitor["lam2"])
    sample_dt = float(config.monitor["sample_dt"])
    ev = config.evolution
    integ = VBIntegrator(grid, alpha, nu, kappa)
    snap_every = int(config.output.get("snapshots", 0))

    hm1_in = hminus1_norm(grid, state0.v[0], state0.v[1], state0.b[0], state0.b[1])
    l2_in = state0.norm()
    records: list[DiagnosticsRecord] = []
    integrals = np.zeros(4)
    prev = {"t": None, "terms": None}

    def sample(t, Y):
        st = integ.unpack(Y, t)
        ts = state_to_tailored(st, alpha)
        mset = MultiplierSet(grid, t, params)
        terms = np.array(dissipation_terms(ts, mset))
        if prev["t"] is not None:
            integrals[:] += 0.5 * (t - prev["t"]) * (terms + prev["terms"])
        prev["t"], prev["terms"] = t, terms
        rec = make_record(st, ts, mset, lam2, tuple(integrals))
        rec.validate_against(records[-1] if records else None)
        records.append(rec)
        if snap_every and (len(records) - 1) % snap_every == 0:
            sio.write_state_snapshot(
                os.path.join(outdir, f"snapshot_{len(records) - 1:05d}.txt"), st)

    n_cb = max(1, int(round(sample_dt / ev["dt"])))
    evolve(integ, integ.pack(state0), 0.0, float(ev["t_end"]), dt=float(ev["dt"]),
           callback=sample, callback_every=n_cb)

    slope, intercept, r2, degenerate = growth_fit(
        [r.t for r in records], [r.l2_wj for r in records], hm1_in)
    _, boot = bootstrap_monitor(records, params, float(config.monitor["c_star"]))
    eps = float(config.initial["eps"])
    gate_K = float(config.monitor["hminus1_gate_K"])
    summary = {
        "hminus1_in": hm1_in,
        "hminus1_gate": {"K": gate_K, "threshold": gate_K * params.c0 * eps,
                         "passes": bool(hm1_in >= gate_K * params.c0 * eps)},
        "growth_fit": {"slope_over_hminus1": slope, "intercept": intercept,
                       "r_squared": r2, "degenerate": degenerate},
        "gevrey_max": max(r.gevrey_vb for r in records),
        "gevrey_bound_10eps": {"value": max(r.gevrey_vb for r in records) / eps,
                               "passes": bool(max(r.gevrey_vb for r in records) <= 10 * eps)},
        "l2_min_ratio": min(r.l2_vb for r in records) / l2_in,
        "bootstrap": boot,
        "nu": nu, "kappa": kappa,
    }
    return records, summary


def run_nonlinear_ideal(config: ExperimentConfig, outdir: str):
    return _trajectory_run(config, outdir, 0.0, 0.0)


def run_dissipative(config: ExperimentConfig, outdir: str):
    ev = config.evolution
    records, summary = _trajectory_run(config, outdir, float(ev["nu"]),
                                       float(ev["kappa"]))
    grid = config.make_grid()
    params = config.weight_params()
    summary["decay_check"] = dissipative_decay_check(
        grid, params.alpha, float(ev["nu"]), seed=int(config.initial["seed"]))
    return records, summary


def dissipative_decay_check(grid: Grid, alpha: float, nu: float,
                            t0: float = 0.0, t1: float = 2.0,
                            steps: int = 100, seed: int = 0) -> dict:
    """Nonlinearity disabled, nu = kappa: per-mode |p|^2 must decay by the
    exact factor exp(-2 nu int Lambda_t^2) relative to the ideal flow."""
    from .dynamics import lawson_rk4_step
    rng = np.random.default_rng(seed)
    mag2 = grid.K**2 + grid.ETA**2
    env = np.exp(-0.5 * mag2 ** 0.5)
    tabs = [random_hermitian_coeffs(grid, rng, env) * grid.dealias_keep
            for _ in range(4)]
    v = leray_project_t(grid, np.stack(tabs[:2]), t0)
    b = leray_project_t(grid, np.stack(tabs[2:]), t0)
    state = MHDState(grid, v, b, t0)
    dt = (t1 - t0) / steps
    ideal = VBIntegrator(grid, alpha, 0.0, 0.0, linear_only=True)
    dissi = VBIntegrator(grid, alpha, nu, nu, linear_only=True)
    Yi = ideal.pack(state)
    Yd = dissi.pack(state)
    worst = 0.0
    t = t0
    for _ in range(steps):
        Yi = ideal.cleanup(lawson_rk4_step(ideal, Yi, t, dt), t + dt)
        Yd = dissi.cleanup(lawson_rk4_step(dissi, Yd, t, dt), t + dt)
        phase = np.exp(-2.0 * nu * dissipation_phase(grid, t0, t + dt))
        ei = np.abs(Yi) ** 2
        ed = np.abs(Yd) ** 2
        sig = ei > (1e-12 * ei.max())
        rate = np.abs(ed[sig] / ei[sig] - np.broadcast_to(phase, ei.shape)[sig])
        ref = np.broadcast_to(phase, ei.shape)[sig]
        worst = max(worst, float(np.max(rate / ref)))
        t += dt
    return {"max_rel_rate_error": worst, "within_1pct": bool(worst <= 0.01),
            "nu": nu, "steps": steps, "t1": t1}


def run_linear_modes(config: ExperimentConfig, outdir: str):
    """Solver-vs-oracle comparison plus the amplitude-scaling exponent."""
    del outdir
    grid = config.make_grid()
    params = config.weight_params()
    alpha = params.alpha
    ev = config.evolution
    amp = float(config.initial["amplitude"])
    state0 = build_initial_state(config, grid, params)
    scale0 = state0.norm()
    state0.v *= amp / scale0
    state0.b *= amp / scale0

    integ = VBIntegrator(grid, alpha)
    t_end = float(ev["t_end"])
    _, Y = evolve(integ, integ.pack(state0), 0.0, t_end, dt=float(ev["dt"]),
                  fixed_dt=True)
    st = integ.unpack(Y, t_end)
    from .unknowns import to_p
    p1_num, p2_num = to_p(st)
    p1_in, p2_in = to_p(state0)
    p1_or, p2_or = oracle_linear_grid(grid, p1_in, p2_in, 0.0, t_end, alpha)

    floor = 1e-6 * max(float(np.max(np.abs(p1_or))), float(np.max(np.abs(p2_or))))
    rows = []
    worst = 0.0
    for pn, po, name in ((p1_num, p1_or, "p1"), (p2_num, p2_or, "p2")):
        sig = np.abs(po) >= floor
        rel = np.abs(pn - po)[sig] / np.abs(po)[sig]
        ks = (grid.K * np.ones(grid.shape))[sig]
        es = (grid.ETA * np.ones(grid.shape))[sig]
        for kk, ee, rr in zip(ks.ravel(), es.ravel(), rel.ravel()):
            rows.append([name, int(kk), float(ee), float(rr)])
        if rel.size:
            worst = max(worst, float(np.max(rel)))

    # amplitude scaling against the same-integrator linearized flow; the
    # shared integrator error cancels in the difference, so a coarse dt and
    # a short horizon suffice for the exponent
    t_short = min(2.0, t_end)
    lin = VBIntegrator(grid, alpha, linear_only=True)
    _, Ylin = evolve(lin, lin.pack(state0), 0.0, t_short, dt=0.01, fixed_dt=True)
    devs = []
    amps = [amp, amp / 2, amp / 4]
    for a in amps:
        sc = a / amp
        nl = VBIntegrator(grid, alpha)
        Y0 = nl.pack(state0) * sc
        _, Ya = evolve(nl, Y0, 0.0, t_short, dt=0.01, fixed_dt=True)
        devs.append(float(np.sqrt(np.sum(np.abs(Ya - sc * Ylin) ** 2))))
    exponents = [math.log2(devs[i] / devs[i + 1]) for i in range(len(devs) - 1)]
    summary = {
        "max_rel_mode_error": worst,
        "floor": floor,
        "modes_compared": len(rows),
        "deviations": dict(zip(map(str, amps), devs)),
        "scaling_exponents": exponents,
        "mean_exponent": float(np.mean(exponents)),
    }
    return rows, summary


def oracle_linear_grid(grid: Grid, p1: np.ndarray, p2: np.ndarray, t0: float,
                       t1: float, alpha: float, tol: float = 1e-10):
    """Adaptive (DOP853) integration of every k != 0 mode, stacked into one
    real ODE system; independent of the PDE solver path."""
    from scipy.integrate import solve_ivp
    mask = grid.dealias_keep & (grid.K * np.ones(grid.shape) != 0)
    idx = np.nonzero(mask)
    kk = grid.k[idx[0]]
    ee = grid.eta[idx[1]]
    z0 = np.stack([p1[idx], p2[idx]])

    def f(t, y):
        n = y.size // 4
        zr = y[:2 * n].reshape(2, n)
        zi = y[2 * n:].reshape(2, n)
        z = zr + 1j * zi
        u = ee - kk * t
        lam2 = kk**2 + u**2
        a = kk * u / lam2
        iak = 1j * alpha * kk
        d0 = a * z[0] + iak * z[1]
        d1 = -a * z[1] + iak * z[0]
        dz = np.stack([d0, d1])
        return np.concatenate([dz.real.ravel(), dz.imag.ravel()])

    y0 = np.concatenate([z0.real.ravel(), z0.imag.ravel()])
    scale = max(1e-300, float(np.max(np.abs(z0))))
    sol = solve_ivp(f, (t0, t1), y0, method="DOP853", rtol=tol, atol=tol * scale * 1e-3)
    if not sol.success:
        raise RuntimeError(f"oracle integration failed: {sol.message}")
    n = kk.size
    y = sol.y[:, -1]
    z = (y[:2 * n] + 1j * y[2 * n:]).reshape(2, n)
    q1, q2 = grid.zeros(), grid.zeros()
    q1[idx] = z[0]
    q2[idx] = z[1]
    return q1, q2


def run_norm_inflation(config: ExperimentConfig, outdir: str):
    del outdir
    grid = config.make_grid()
    params = config.weight_params()
    state0 = build_initial_state(config, grid, params)
    ev = config.evolution
    rows, summary = norm_inflation_experiment(
        state0, params.alpha, params.c0, float(config.initial["eps"]),
        float(ev["t_end"]), dt=float(ev["dt"]),
        sample_dt=float(config.monitor["sample_dt"]),
        symbol_variant=ev.get("symbol_variant", "derived"))
    cols = list(rows[0].keys())
    return [[r[c] for c in cols] for r in rows], {"columns": cols, **summary}


def run_resonance_chain(config: ExperimentConfig, outdir: str):
    del outdir
    ch = config.chain
    c0 = float(ch["c0"])
    rows = []
    for eta in ch["etas"]:
        cfg = ChainConfig(c0, float(eta))
        res = chain_total_growth(cfg)
        cum = 0.0
        for k, amp in res["steps"]:
            cum += math.log(amp)
            rows.append([float(eta), c0, k, amp, cum])
    fit = chain_sweep_fit(c0, ch["etas"])
    summary = {"fit": {k: v for k, v in fit.items() if k != "rows"},
               "sweep": fit["rows"]}
    if ch.get("bridge", False):
        summary["handoff"] = chain_handoff_trajectory(
            ChainConfig(c0, float(min(ch["etas"]))))
    return rows, summary


def run_weights_audit_experiment(config: ExperimentConfig, outdir: str):
    del outdir
    au = config.audit
    rows, summary = run_weights_audit(config.weight_params(),
                                      eta_max=float(au["eta_max"]),
                                      n_eta=int(au["n_eta"]),
                                      seed=int(au["seed"]))
    return [r.as_list() for r in rows], summary


def run_nl_partition(config: ExperimentConfig, outdir: str):
    del outdir
    grid = config.make_grid()
    params = config.weight_params()
    state = build_initial_state(config, grid, params)
    report = nl_partition_check(state, params)
    rng = np.random.default_rng(int(config.initial["seed"]))
    report["indicator_sample"] = partition_exactness_sample(rng)
    rows = [[k, v] for k, v in report.items() if isinstance(v, (int, float, bool))]
    return rows, report


RUNNERS = {
    "linear_modes": run_linear_modes,
    "nonlinear_ideal": run_nonlinear_ideal,
    "dissipative": run_dissipative,
    "norm_inflation": run_norm_inflation,
    "resonance_chain": run_resonance_chain,
    "weights_audit": run_weights_audit_experiment,
    "nl_partition": run_nl_partition,
}

CSV_COLUMNS = {
    "linear_modes": ["component", "k", "eta", "rel_error"],
    "nonlinear_ideal": list(DiagnosticsRecord.FIELDS),
    "dissipative": list(DiagnosticsRecord.FIELDS),
    "resonance_chain": ["eta", "c0", "k", "step_amplification",
                        "cumulative_log_growth"],
    "weights_audit": list(AUDIT_COLUMNS),
    "nl_partition": ["quantity", "value"],
}


def run(config: ExperimentConfig, outdir: str) -> dict:
    """Execute one experiment; writes diagnostics.csv and summary.json."""
    config.validate()
    sio.ensure_dir(outdir)
    cdict = config.to_dict()
    chash = sio.config_hash(cdict)
    header = {"config": cdict, "config_sha256": chash}
    sio.write_json(os.path.join(outdir, "config.json"),
                   {"config": cdict, "config_sha256": chash})
    result, summary = RUNNERS[config.experiment](config, outdir)
    if config.experiment in ("nonlinear_ideal", "dissipative"):
        rows = [r.row() for r in result]
    else:
        rows = result
    cols = (summary.get("columns") or CSV_COLUMNS.get(config.experiment)
            or [f"c{i}" for i in range(len(rows[0]))])
    sio.write_csv(os.path.join(outdir, "diagnostics.csv"), cols, rows, header)
    payload = {"experiment": config.experiment, "config_sha256": chash,
               "summary": _jsonable(summary)}
    sio.write_json(os.path.join(outdir, "summary.json"), payload)
    return payload


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj
