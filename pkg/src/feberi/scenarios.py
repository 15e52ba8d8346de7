"""Scenario runners behind the command line: each writes CSV tables and a manifest."""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import asdict, replace

import numpy as np

from . import __version__
from . import physical as ph
from .analytic import (Arrival, TlsAmplitudes, TrainSpec, correlated_train_probability,
                       modulated_increment, phase_matched_phi0, post_probability,
                       single_increment, train_point_amplitude)
from .config import Model, ScenarioConfig, ScenarioKind
from .coupling import KernelContext, weighed_strength
from .fits import power_law_fit, quadratic_term_test
from .physical import Orientation, TlsSpec, derive_kinematics
from .quantum.grid import build_grid, plan_steps
from .quantum.train import Passage, p2_series, run_train
from .wavepacket import (QewKind, conjugate_z_grid, density_profile, modulation_spectrum,
                         pinem_amplitudes, build_amplitudes)

SCHEMA_VERSION = 1
FLOAT_FMT = "%.17g"

SCHEMAS = {
    "fig2": ("t_bar", "f_parallel", "f_perp"),
    "fig3": ("sigma_over_period", "gamma", "P2_analytic_ground", "P2_quantum_ground",
             "dP1_analytic_superposition", "dP1_quantum_superposition", "dP_quantum_superposition"),
    "fig4": ("electron_index", "P2_in_phase", "P2_uniform_mean", "P2_uniform_std"),
    "fig5": ("t_fs", "P2_unmodulated", "P2_modulated"),
    "fig6": ("electron_index", "P2_correlated", "P2_random_phase_mean", "P2_random_phase_std"),
    "density": ("z_nm", "density_per_nm"),
    "reports": ("electron_index", "P_prev", "dP1", "dP2", "P_post", "clamped"),
    "custom": ("model", "P_prev", "dP1", "dP2", "P_post"),
    "trace": ("t_fs", "P2"),
}


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return FLOAT_FMT % float(v)
    return str(v)


def write_csv(path, columns, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            if len(row) != len(columns):
                raise ValueError(f"row of length {len(row)} for {len(columns)} columns")
            w.writerow([_fmt(v) for v in row])


def clamp01(p: float) -> tuple[float, bool]:
    c = min(1.0, max(0.0, p))
    return c, c != p


def report_rows(reports):
    rows = []
    for k, r in enumerate(reports):
        post, flag = clamp01(r.p_post)
        rows.append((k + 1, r.p_prev, r.dp1, r.dp2, post, flag))
    return rows


class Context:
    """Derived quantities shared by one scenario run."""

    def __init__(self, cfg: ScenarioConfig):
        self.cfg = cfg
        self.kin = derive_kinematics(cfg.beam)
        self.tls: TlsSpec = cfg.tls
        self.kctx = KernelContext.build(self.kin, self.tls)
        self.g = self.kctx.g

    def derived(self) -> dict:
        k = self.kin
        cfg = self.cfg
        d = {
            "gamma0": k.gamma0, "beta0": k.beta0, "v0_nm_per_fs": k.v0, "p0_eV_fs_per_nm": k.p0,
            "transit_time_fs": k.transit_time, "omega21_rad_per_fs": self.tls.omega21,
            "T21_fs": self.tls.period, "g": self.g,
            "sigma_et_fs": cfg.beam.sigma_et, "sigma_bar": cfg.beam.sigma_et / k.transit_time,
            "sigma_over_period": cfg.beam.sigma_et / self.tls.period,
            "drift_length_m": cfg.beam.drift_length,
        }
        if cfg.qew.kind is QewKind.PINEM:
            d["omega_b_rad_per_fs"] = cfg.omega_b
        return d


def constants() -> dict:
    return {"hbar_eV_fs": ph.HBAR, "c_nm_per_fs": ph.C_LIGHT, "rest_energy_eV": ph.REST_ENERGY,
            "alpha": ph.ALPHA, "coulomb_eV_nm": ph.COULOMB, "debye_e_nm": ph.DEBYE}


def grid_estimate(cfg: ScenarioConfig, kin, tls) -> dict:
    qew = cfg.qew_spec()
    ctx = KernelContext.build(kin, tls)
    grid = build_grid(qew, kin, ctx.geom, dz_scale=cfg.solver.dz_scale,
                      guard_sigmas=cfg.solver.guard_sigmas, max_points=cfg.solver.max_points)
    plan = plan_steps(grid, kin, tls.omega21, qew.sigma_et, 0.0, cfg.solver.dt_scale,
                      cfg.solver.kinetic_interval)
    return {"n_z": grid.n, "dz_nm": grid.dz, "span_nm": grid.length, "dt_fs": plan.dt,
            "n_steps": plan.n_steps, "kinetic_stride": plan.kinetic_stride}


# ------------------------------------------------------------------ figures

def run_fig2(ctx: Context, out: str) -> dict:
    cfg = ctx.cfg
    tbar = np.linspace(-10.0, 10.0, 401)
    files, peaks = [], {}
    geom_par = replace(ctx.kctx.geom, orientation=Orientation.LONGITUDINAL)
    geom_perp = replace(ctx.kctx.geom, orientation=Orientation.PERPENDICULAR)
    tls_par = replace(ctx.tls, orientation=Orientation.LONGITUDINAL)
    tls_perp = replace(ctx.tls, orientation=Orientation.PERPENDICULAR)
    for sb in cfg.sigma_bar_list:
        fpar = weighed_strength(tbar, sb, geom_par, tls_par, ctx.kin)
        fperp = weighed_strength(tbar, sb, geom_perp, tls_perp, ctx.kin)
        name = f"fig2_sigma_bar_{sb:g}.csv"
        write_csv(os.path.join(out, name), SCHEMAS["fig2"], zip(tbar, fpar, fperp))
        files.append(name)
        peaks[f"{sb:g}"] = {"max_abs_f_parallel": float(np.max(np.abs(fpar))),
                            "max_abs_f_perp": float(np.max(np.abs(fperp)))}
    return {"files": files, "peaks": peaks}


def run_fig3(ctx: Context, out: str) -> dict:
    cfg = ctx.cfg
    ratios = cfg.sigma_scan or (0.05, 0.25, 0.5, 1.0, 2.0)
    ground = TlsAmplitudes.ground()
    sup = cfg.initial_state
    t0 = cfg.qew.t0
    w = ctx.tls.omega21
    rows = []
    for ratio in ratios:
        sigma = ratio * ctx.tls.period
        qew = replace(cfg.qew_spec(sigma), kind=QewKind.GAUSSIAN, t0=t0)
        gamma = w * sigma
        pa = post_probability(ground, single_increment(ground, t0, qew, ctx.kctx)).p_post
        da = post_probability(sup, single_increment(sup, t0, qew, ctx.kctx)).dp1
        pq = dq1 = dq = math.nan
        if cfg.model.includes(Model.QUANTUM):
            p = Passage(qew, ctx.kctx, cfg.solver)
            pq = p.run(ground, t0).p2
            rs = p.run(sup, t0)
            dq1, dq = rs.first_order(), rs.dp2
        if not cfg.model.includes(Model.ANALYTIC):
            pa = da = math.nan
        rows.append((ratio, gamma, pa, pq, da, dq1, dq))
    write_csv(os.path.join(out, "fig3.csv"), SCHEMAS["fig3"], rows)
    summary = {"files": ["fig3.csv"]}
    if cfg.model.includes(Model.QUANTUM):
        q = np.array([r[3] for r in rows])
        summary["quantum_ground_relative_spread"] = float((q.max() - q.min()) / q.mean())
    return summary


def _fit_summary(n, p):
    try:
        f = power_law_fit(n, p)
        return {"a": f.a, "b": f.b, "b_err": f.b_err, "r2": f.r2}
    except (ValueError, RuntimeError) as exc:
        return {"error": str(exc)}


def run_fig4(ctx: Context, out: str) -> dict:
    cfg = ctx.cfg
    tr = cfg.train
    sigma = cfg.beam.sigma_et
    w = ctx.tls.omega21
    n = np.arange(1, tr.n + 1)
    base = TrainSpec(tr.n, w / tr.harmonic, "in_phase", harmonic=tr.harmonic, seed=cfg.seed, t00=tr.t00)
    seeds = [cfg.seed + s for s in range(tr.ensemble)]
    summary = {"files": []}

    def uniform(seed):
        return replace(base, arrival_law="uniform_random", seed=seed)

    for model in (Model.ANALYTIC, Model.QUANTUM):
        if not cfg.model.includes(model):
            continue
        if model is Model.ANALYTIC:
            res = train_point_amplitude(base, ctx.kctx, sigma)
            inphase = res.p2_history
            write_csv(os.path.join(out, "fig4_analytic_reports.csv"), SCHEMAS["reports"],
                      report_rows(res.reports))
            summary["files"].append("fig4_analytic_reports.csv")
            ens = np.array([train_point_amplitude(uniform(s), ctx.kctx, sigma).p2_history for s in seeds])
        else:
            qew = replace(cfg.qew_spec(), kind=QewKind.GAUSSIAN)
            inphase = p2_series(run_train(base, qew, TlsAmplitudes.ground(), ctx.kctx, options=cfg.solver))
            ens = np.array([p2_series(run_train(uniform(s), qew, TlsAmplitudes.ground(), ctx.kctx,
                                                options=cfg.solver)) for s in seeds])
        name = f"fig4_{model.value}.csv"
        std = ens.std(axis=0, ddof=1) if len(seeds) > 1 else np.zeros(tr.n)
        write_csv(os.path.join(out, name), SCHEMAS["fig4"], zip(n, inphase, ens.mean(axis=0), std))
        summary["files"].append(name)
        qt = quadratic_term_test(n, ens) if len(seeds) > 1 and tr.n >= 3 else None
        summary[model.value] = {
            "ratio_last_first": float(inphase[-1] / inphase[0]),
            "in_phase_fit": _fit_summary(n, inphase) if tr.n >= 2 else None,
            "uniform_quadratic_mean": None if qt is None else qt.mean,
            "uniform_quadratic_stderr": None if qt is None else qt.stderr,
        }
    return summary


def run_fig5(ctx: Context, out: str) -> dict:
    cfg = ctx.cfg
    kin = ctx.kin
    mod = cfg.qew_spec()
    if mod.kind is not QewKind.PINEM:
        raise ValueError("fig5 needs a pinem_modulated QEW")
    unm = replace(mod, kind=QewKind.GAUSSIAN, g_L=0.0, drift_length=0.0)
    spectrum = modulation_spectrum(pinem_amplitudes(mod, kin))
    n = cfg.train.harmonic
    sup = cfg.initial_state
    phi = phase_matched_phi0(sup, spectrum[n], ctx.kctx.m_tilde(), n)
    ground = TlsAmplitudes.ground()
    t0 = mod.t0
    files = []
    amps = pinem_amplitudes(mod.with_arrival(t0, phi), kin)
    z = conjugate_z_grid(amps)
    rho = density_profile(amps, z, t0)
    keep = rho > 1e-12 * rho.max()
    write_csv(os.path.join(out, "fig5_density.csv"), SCHEMAS["density"], zip(z[keep], rho[keep]))
    files.append("fig5_density.csv")
    summary = {"f_n": [spectrum[n].real, spectrum[n].imag], "phi0_matched": phi}
    if cfg.model.includes(Model.ANALYTIC):
        rows = []
        for label, st in (("ground", ground), ("superposition", sup)):
            ru = post_probability(st, single_increment(st, t0, unm, ctx.kctx))
            rm = modulated_increment(st, spectrum, t0, -phi / mod.omega_b, mod.sigma_et, ctx.kctx)
            rows.append((f"{label}_unmodulated", ru.p_prev, ru.dp1, ru.dp2, ru.p_post))
            rows.append((f"{label}_modulated", rm.p_prev, rm.dp1, rm.dp2, rm.p_post))
        write_csv(os.path.join(out, "fig5_analytic.csv"), SCHEMAS["custom"], rows)
        files.append("fig5_analytic.csv")
    if cfg.model.includes(Model.QUANTUM):
        pm = Passage(mod, ctx.kctx, cfg.solver)
        pu = Passage(unm, ctx.kctx, cfg.solver)
        res = {}
        for label, st in (("ground", ground), ("superposition", sup)):
            rm = pm.run(st, Arrival(t0, phi), omega_b=mod.omega_b)
            ru = pu.run(st, t0)
            name = "fig5.csv" if label == "ground" else "fig5_superposition.csv"
            write_csv(os.path.join(out, name), SCHEMAS["fig5"], zip(rm.times, ru.p2_trace, rm.p2_trace))
            files.append(name)
            res[label] = {"P2_unmodulated": ru.p2, "P2_modulated": rm.p2,
                          "dP_unmodulated": ru.dp2, "dP_modulated": rm.dp2}
        summary["quantum"] = res
    summary["files"] = files
    return summary


def run_fig6(ctx: Context, out: str) -> dict:
    cfg = ctx.cfg
    tr = cfg.train
    mod = cfg.qew_spec()
    if mod.kind is not QewKind.PINEM:
        raise ValueError("fig6 needs a pinem_modulated QEW")
    n = np.arange(1, tr.n + 1)
    spectrum = modulation_spectrum(pinem_amplitudes(mod, ctx.kin))
    corr = TrainSpec(tr.n, mod.omega_b, tr.arrival_law, "common_phi0", tr.harmonic, cfg.seed,
                     tr.t00, mod.phi0, tr.arrival_times)
    seeds = [cfg.seed + s for s in range(tr.ensemble)]

    def randomised(seed):
        return replace(corr, phase_law="random_phi0", seed=seed)

    summary = {"files": [], "f_n_abs": abs(spectrum[tr.harmonic])}
    for model in (Model.ANALYTIC, Model.QUANTUM):
        if not cfg.model.includes(model):
            continue
        if model is Model.ANALYTIC:
            res = correlated_train_probability(corr, spectrum, mod.sigma_et, ctx.kctx)
            pc = res.p2_history
            write_csv(os.path.join(out, "fig6_analytic_reports.csv"), SCHEMAS["reports"],
                      report_rows(res.reports))
            summary["files"].append("fig6_analytic_reports.csv")
            ens = np.array([correlated_train_probability(randomised(s), spectrum, mod.sigma_et,
                                                         ctx.kctx).p2_history for s in seeds])
        else:
            pc = p2_series(run_train(corr, mod, TlsAmplitudes.ground(), ctx.kctx, options=cfg.solver))
            ens = np.array([p2_series(run_train(randomised(s), mod, TlsAmplitudes.ground(), ctx.kctx,
                                                options=cfg.solver)) for s in seeds])
        std = ens.std(axis=0, ddof=1) if len(seeds) > 1 else np.zeros(tr.n)
        name = f"fig6_{model.value}.csv"
        write_csv(os.path.join(out, name), SCHEMAS["fig6"], zip(n, pc, ens.mean(axis=0), std))
        summary["files"].append(name)
        qt = quadratic_term_test(n, ens) if len(seeds) > 1 and tr.n >= 3 else None
        summary[model.value] = {
            "correlated_fit": _fit_summary(n, pc) if tr.n >= 2 else None,
            "random_quadratic_mean": None if qt is None else qt.mean,
            "random_quadratic_stderr": None if qt is None else qt.stderr,
        }
    return summary


def run_custom(ctx: Context, out: str) -> dict:
    cfg = ctx.cfg
    qew = cfg.qew_spec()
    st = cfg.initial_state
    rows, files, summary = [], [], {}
    spectrum = None
    if qew.kind is QewKind.PINEM:
        spectrum = modulation_spectrum(build_amplitudes(qew, ctx.kin))
    if cfg.model.includes(Model.ANALYTIC):
        if spectrum is None:
            r = post_probability(st, single_increment(st, qew.t0, qew, ctx.kctx))
        else:
            r = modulated_increment(st, spectrum, qew.t0, -qew.phi0 / qew.omega_b, qew.sigma_et, ctx.kctx)
        rows.append(("analytic", r.p_prev, r.dp1, r.dp2, r.p_post))
        summary["analytic_P2"] = r.p_post
    if cfg.model.includes(Model.QUANTUM):
        rec = Passage(qew, ctx.kctx, cfg.solver).run(st, Arrival(qew.t0, qew.phi0),
                                                     omega_b=qew.omega_b or None)
        dp1 = rec.first_order()
        rows.append(("quantum", rec.rho_in.p2, dp1, rec.dp2 - dp1, rec.p2))
        write_csv(os.path.join(out, "custom_trace.csv"), SCHEMAS["trace"], zip(rec.times, rec.p2_trace))
        files.append("custom_trace.csv")
        summary["quantum_P2"] = rec.p2
    write_csv(os.path.join(out, "custom.csv"), SCHEMAS["custom"], rows)
    files.append("custom.csv")
    summary["files"] = files
    return summary


RUNNERS = {
    ScenarioKind.FIG2: run_fig2,
    ScenarioKind.FIG3: run_fig3,
    ScenarioKind.FIG4: run_fig4,
    ScenarioKind.FIG5: run_fig5,
    ScenarioKind.FIG6: run_fig6,
    ScenarioKind.CUSTOM: run_custom,
}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if hasattr(obj, "value") and not isinstance(obj, (int, float, str)):
        return obj.value
    return obj


def resolved(cfg: ScenarioConfig) -> dict:
    """Full resolved configuration in internal units."""
    return _jsonable({
        "kind": cfg.kind, "model": cfg.model, "seed": cfg.seed,
        "beam": asdict(cfg.beam), "tls": asdict(cfg.tls), "qew": asdict(cfg.qew),
        "train": asdict(cfg.train), "solver": asdict(cfg.solver),
        "initial_state": [cfg.initial_state.c1, cfg.initial_state.c2],
        "sigma_scan": cfg.sigma_scan, "sigma_bar_list": cfg.sigma_bar_list,
        "drift_optimal": cfg.drift_optimal,
    })


def run_scenario(cfg: ScenarioConfig, out: str) -> dict:
    """Run ``cfg`` writing tables and ``manifest.json`` into ``out``; returns the summary."""
    os.makedirs(out, exist_ok=True)
    ctx = Context(cfg)
    summary = RUNNERS[cfg.kind](ctx, out)
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "code_version": __version__,
        "seed": cfg.seed,
        "config": resolved(cfg),
        "source_config": _jsonable(cfg.raw),
        "constants": constants(),
        "derived": ctx.derived(),
        "schemas": {k: list(v) for k, v in SCHEMAS.items()},
        "summary": _jsonable(summary),
    }
    with open(os.path.join(out, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary
