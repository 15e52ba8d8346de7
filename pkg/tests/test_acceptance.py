"""Acceptance suite: one pass/fail line per criterion, tolerances as specified.

Run with ``pytest tests/test_acceptance.py -v``; the lines are repeated in
the "acceptance criteria" section of the terminal summary. The full suite
takes roughly half an hour on one core, most of it in criterion 6.
"""

import math

import numpy as np
import pytest
from scipy import integrate, special

from feberi.analytic import (Arrival, TlsAmplitudes, TrainSpec, correlated_train_probability,
                             modulated_increment, phase_matched_phi0, post_probability, single_increment,
                             train_point_amplitude)
from feberi.coupling import KernelContext, dipole_kernel, geometry_for, kernel_fourier, weighed_strength
from feberi.fits import power_law_fit, quadratic_term_test
from feberi.physical import HBAR, Orientation, TlsSpec
from feberi.quantum import Passage, SolverOptions, TlsDensityMatrix, initial_joint_state, p2_series, run_train
from feberi.quantum.solver import evolve
from feberi.wavepacket import (QewKind, QewSpec, build_amplitudes, conjugate_z_grid, density_at,
                               modulation_spectrum, optimal_drift_length, pinem_amplitudes,
                               position_wavefunction, sideband_cutoff, sideband_momentum)

SUP_3B = TlsAmplitudes.superposition(1.0, 2.0j)
SUP_5C = TlsAmplitudes(math.sin(3 * math.pi / 8), math.cos(3 * math.pi / 8))


def gaussian(tls, ratio, t0=0.0):
    return QewSpec(sigma_et=ratio * tls.period, t0=t0)


@pytest.fixture(scope="module")
def modulated(kin, tls):
    wb = tls.omega21
    return QewSpec(QewKind.PINEM, tls.period, 0.75, wb, 0.0, 0.0, optimal_drift_length(0.75, wb, kin))


@pytest.fixture(scope="module")
def spectrum(modulated, kin):
    return modulation_spectrum(pinem_amplitudes(modulated, kin))


def sinusoid(t0, values, omega):
    """Least-squares ``A sin(w t) + B cos(w t) + c``; returns (A + iB, c, rms residual)."""
    m = np.column_stack([np.sin(omega * t0), np.cos(omega * t0), np.ones_like(t0)])
    coef, *_ = np.linalg.lstsq(m, values, rcond=None)
    resid = values - m @ coef
    return complex(coef[0], coef[1]), coef[2], float(np.sqrt(np.mean(resid**2)))


def quarter_amplitude(f, period):
    """Amplitude of the t0-sinusoid of ``f`` from four quarter-period samples."""
    v = [f(k * period / 4) for k in range(4)]
    return 0.5 * math.hypot(v[0] - v[2], v[1] - v[3])


# --------------------------------------------------------------------------- 1
def test_criterion_1_fig2(kin, acceptance_log):
    t = np.linspace(-6.0, 6.0, 241)
    d = t[t > 0]
    worst = 0.0
    centre_par = []
    sym_ok = True
    peaks = {o: [] for o in Orientation}
    for o in Orientation:
        tls = TlsSpec(2.0, 5.0, o)
        geom = geometry_for(kin, tls)
        scale = abs(dipole_kernel(0.0, geometry_for(kin, TlsSpec(2.0, 5.0)), TlsSpec(2.0, 5.0), kin))
        for sb in (0.5, 1.0, 2.0):
            f = weighed_strength(t, sb, geom, tls, kin)
            peaks[o].append(float(np.max(np.abs(f))))
            if o is Orientation.LONGITUDINAL:
                centre_par.append(abs(weighed_strength(0.0, sb, geom, tls, kin)[0]))
                fp = weighed_strength(d, sb, geom, tls, kin)
                fm = weighed_strength(-d, sb, geom, tls, kin)
                worst = max(worst, float(np.max(np.abs(fp + fm))) / scale)
            else:
                sym_ok &= bool(np.allclose(f, f[::-1], rtol=1e-10, atol=0))
                sym_ok &= int(np.argmax(np.abs(f))) == t.size // 2
    dec = all(p[0] > p[1] > p[2] for p in peaks.values())
    ok = max(centre_par) == 0.0 and worst < 1e-10 and sym_ok and dec
    acceptance_log(1, ok, f"f_par(t0)={max(centre_par):.1e}, asymmetry residual {worst:.1e} (<1e-10), "
                          f"perp symmetric={sym_ok}, peaks decreasing={dec}")
    assert ok


# --------------------------------------------------------------------------- 2
def test_criterion_2_short_qew_agreement(ctx, tls, acceptance_log):
    rows = []
    for ratio in (0.01, 0.02, 0.05):
        q = gaussian(tls, ratio)
        pq = Passage(q, ctx).run(TlsDensityMatrix.ground()).p2
        pa = post_probability(TlsAmplitudes.ground(),
                              single_increment(TlsAmplitudes.ground(), 0.0, q, ctx)).p_post
        rows.append((ratio, pq, pa, abs(pq - pa) / pa))
    ok = all(r[3] <= 0.10 for r in rows)
    detail = ", ".join(f"s/T={r[0]}: quantum {r[1]:.4e} vs analytic {r[2]:.4e} ({100 * r[3]:.2f}%)" for r in rows)
    acceptance_log(2, ok, detail + " (tol 10%)")
    assert ok


# --------------------------------------------------------------------------- 3
def test_criterion_3_size_scan(ctx, tls, acceptance_log):
    w = tls.omega21
    ratios = (0.25, 0.5, 1.0, 2.0)
    pq = np.array([Passage(gaussian(tls, r), ctx).run(TlsDensityMatrix.ground()).p2 for r in ratios])
    pa = np.array([post_probability(TlsAmplitudes.ground(), single_increment(
        TlsAmplitudes.ground(), 0.0, gaussian(tls, r), ctx)).p_post for r in ratios])
    spread = float((pq.max() - pq.min()) / pq.mean())
    gam = w * np.array(ratios) * tls.period
    eq25 = bool(np.allclose(pa, ctx.g**2 * np.exp(-gam**2), rtol=1e-10))
    flat_a = spread < 0.05 and eq25 and pq[-1] / pq[0] > 1e3 * pa[-1] / pa[0]

    # 3b: first-order increments from (|1> + 2i|2>)/sqrt5
    scan = (0.05, 0.25, 0.5, 1.0, 2.0)
    amp_q, amp_a = [], []
    for r in scan:
        q = gaussian(tls, r)
        p = Passage(q, ctx)
        amp_q.append(quarter_amplitude(lambda t0: p.run(SUP_3B, t0).first_order(), tls.period))
        amp_a.append(quarter_amplitude(
            lambda t0: post_probability(SUP_3B, single_increment(SUP_3B, t0, q, ctx)).dp1, tls.period))
    decay = all(np.diff(amp_q) < 0) and all(np.diff(amp_a) < 0)
    q = gaussian(tls, 0.05)
    p = Passage(q, ctx)
    t0 = np.linspace(0.0, tls.period, 8, endpoint=False)
    vq = np.array([p.run(SUP_3B, t).first_order() for t in t0])
    va = np.array([post_probability(SUP_3B, single_increment(SUP_3B, t, q, ctx)).dp1 for t in t0])
    cq, _, rq = sinusoid(t0, vq, w)
    ca, _, ra = sinusoid(t0, va, w)
    rel = abs(cq - ca) / abs(ca)
    periodic = rq < 1e-2 * abs(cq) and ra < 1e-9 * abs(ca)
    sign = bool(np.all(np.sign(vq[np.abs(va) > 0.2 * abs(ca)]) == np.sign(va[np.abs(va) > 0.2 * abs(ca)])))
    ok_b = decay and rel <= 0.10 and periodic and sign
    ok = flat_a and ok_b
    acceptance_log(3, ok, f"(a) quantum spread {100 * spread:.2f}% (<5%), analytic e^-G^2 decay={eq25}; "
                          f"(b) amplitudes quantum {', '.join(f'{x:.2e}' for x in amp_q)} / analytic "
                          f"{', '.join(f'{x:.2e}' for x in amp_a)} decaying={decay}, "
                          f"short-QEW sinusoid mismatch {100 * rel:.3f}% (<10%), sign agrees={sign}")
    assert ok


# --------------------------------------------------------------------------- 4
def test_criterion_4_point_train(ctx, tls, acceptance_log):
    w = tls.omega21
    sigma = 0.05 * tls.period
    n = np.arange(1, 21)
    ana = train_point_amplitude(TrainSpec(20, w, "in_phase", seed=1), ctx, sigma).p2_history
    ratio = ana[-1] / ana[0]
    ok_ratio = abs(ratio - 400.0) <= 1e-9 * 400.0

    q = gaussian(tls, 0.05)
    inphase = p2_series(run_train(TrainSpec(20, w, "in_phase", seed=1), q, TlsDensityMatrix.ground(), ctx))
    fit = power_law_fit(n, inphase)
    ok_fit = abs(fit.b - 2.0) <= 0.1

    ens = np.array([p2_series(run_train(TrainSpec(20, w, "uniform_random", seed=s), q,
                                        TlsDensityMatrix.ground(), ctx)) for s in range(20)])
    qt = quadratic_term_test(n, ens)
    finals = [train_point_amplitude(TrainSpec(400, w, "uniform_random", seed=s), ctx, sigma).p2
              for s in range(200)]
    ratio400 = float(np.mean(finals)) / ana[-1]
    ok = ok_ratio and ok_fit and qt.consistent_with_zero() and abs(ratio400 - 1) <= 0.15
    acceptance_log(4, ok, f"analytic P2(20)/P2(1) = {ratio:.10g}; quantum in-phase exponent "
                          f"{fit.b:.4f} +- {fit.b_err:.4f} (2 +- 0.1); uniform quadratic term "
                          f"{qt.mean:.2e} +- {qt.stderr:.2e} (|z| = {abs(qt.z):.2f} <= 2); "
                          f"<P2(400 uniform)>/P2(20 in-phase) = {ratio400:.3f} (within 15%)")
    assert ok


# --------------------------------------------------------------------------- 5
def test_criterion_5_single_modulated(ctx, kin, tls, modulated, spectrum, acceptance_log):
    w = tls.omega21
    unmod = QewSpec(sigma_et=modulated.sigma_et)
    pm, pu = Passage(modulated, ctx), Passage(unmod, ctx)
    g_mod = pm.run(TlsAmplitudes.ground(), Arrival(0.0, 0.0), omega_b=w)
    g_unm = pu.run(TlsAmplitudes.ground(), 0.0)
    same = abs(g_mod.p2 - g_unm.p2) / g_unm.p2

    phi = phase_matched_phi0(SUP_5C, spectrum[1], ctx.m_tilde(), 1)
    s_mod = pm.run(SUP_5C, Arrival(0.0, phi), omega_b=w)
    s_unm = pu.run(SUP_5C, 0.0)
    gamma = w * modulated.sigma_et
    need = math.exp(gamma**2 / 2)
    enh = abs(s_mod.dp2) / abs(s_unm.dp2)
    a_mod = modulated_increment(SUP_5C, spectrum, 0.0, -phi / w, modulated.sigma_et, ctx)
    a_unm = post_probability(SUP_5C, single_increment(SUP_5C, 0.0, unmod, ctx))
    enh_a = abs(a_mod.dp) / abs(a_unm.dp)

    # steps in P2(t) against microbunch arrivals of the density at the TLS
    t, p = g_mod.times, g_mod.p2_trace
    rate = np.diff(p) / np.diff(t)
    tm = 0.5 * (t[1:] + t[:-1])
    steps = [tm[i] for i in range(1, rate.size - 1)
             if rate[i] > rate[i - 1] and rate[i] >= rate[i + 1] and rate[i] > 0.2 * rate.max()]
    amps = pinem_amplitudes(modulated, kin)
    tau = np.linspace(t[0], t[-1], 4001)
    rho = density_at(amps, -kin.v0 * tau, 0.0)
    bunches = [tau[i] for i in range(1, rho.size - 1)
               if rho[i] > rho[i - 1] and rho[i] >= rho[i + 1] and rho[i] > 0.2 * rho.max()]
    tb = 2 * math.pi / modulated.omega_b
    aligned = [s for s in steps if min(abs(s - b) for b in bunches) <= tb / 4]
    ok_steps = len(aligned) >= 3
    ok = same <= 0.05 and enh >= need and ok_steps
    acceptance_log(5, ok, f"ground P2 modulated {g_mod.p2:.4e} vs unmodulated {g_unm.p2:.4e} "
                          f"({100 * same:.2f}%, <5%); superposition |dP| ratio quantum {enh:.4g}, "
                          f"analytic {enh_a:.4g}, required e^(G^2/2) = {need:.4g}; "
                          f"{len(aligned)}/{len(steps)} P2 steps within T_b/4 of microbunch arrivals (>=3)")
    assert ok


# --------------------------------------------------------------------------- 6
def test_criterion_6_correlated_train(ctx, tls, modulated, spectrum, acceptance_log):
    w = tls.omega21
    n = np.arange(1, 21)
    corr = TrainSpec(20, w, "uniform_random", "common_phi0", seed=6)
    pc = p2_series(run_train(corr, modulated, TlsDensityMatrix.ground(), ctx))
    fit = power_law_fit(n, pc)
    ens = np.array([p2_series(run_train(TrainSpec(20, w, "uniform_random", "random_phi0", seed=s), modulated,
                                        TlsDensityMatrix.ground(), ctx)) for s in range(20)])
    qt = quadratic_term_test(n, ens)
    ana = correlated_train_probability(corr, spectrum, modulated.sigma_et, ctx).p2
    eq46 = 400 * ctx.g**2 * abs(spectrum[1]) ** 2
    ok_ana = abs(ana - eq46) <= 1e-6 * eq46
    ok = abs(fit.b - 2.0) <= 0.15 and fit.r2 > 0.99 and qt.consistent_with_zero() and ok_ana
    acceptance_log(6, ok, f"correlated exponent {fit.b:.4f} (2 +- 0.15), R^2 {fit.r2:.5f} (>0.99); "
                          f"random-phase quadratic term {qt.mean:.2e} +- {qt.stderr:.2e} "
                          f"(|z| = {abs(qt.z):.2f} <= 2); analytic P2(20)/(N^2 g^2 |f1|^2) = {ana / eq46:.9f}")
    assert ok


# --------------------------------------------------------------------------- 7
def _fourier_oracle(q, geom, tls, kin):
    f = lambda z: dipole_kernel(z, geom, tls, kin)  # noqa: E731
    c, _ = integrate.quad(lambda z: f(z) + f(-z), 0, np.inf, weight="cos", wvar=q)
    s, _ = integrate.quad(lambda z: f(z) - f(-z), 0, np.inf, weight="sin", wvar=q)
    return c + 1j * s


def test_criterion_7_properties(ctx, kin, tls, modulated, spectrum, acceptance_log):
    w = tls.omega21
    checks = {}

    # unitarity over a full passage, mixed start
    p1 = Passage(gaussian(tls, 1.0), ctx)
    st = initial_joint_state(build_amplitudes(p1.qew, kin), TlsDensityMatrix([[0.7, 0.2j], [-0.2j, 0.3]]),
                             p1.grid, p1.plan.t_start)
    res = evolve(st, ctx, p1.plan, table=p1.table)
    checks["norm drift"] = (res.norm_drift, res.norm_drift <= 1e-9)

    # reduced density matrices from a few passages
    outs = [p1.run(TlsDensityMatrix.maximally_mixed(), 0.3).rho_b.rho,
            Passage(modulated, ctx).run(SUP_5C, Arrival(0.0, 0.7), omega_b=w).rho_b.rho]
    herm = max(np.max(np.abs(r - r.conj().T)) for r in outs)
    trace = max(abs(np.trace(r) - 1) for r in outs)
    neg = max(max(0.0, -np.linalg.eigvalsh(r).min()) for r in outs)
    checks["rho Hermitian/trace/positive"] = (max(herm, trace, neg), max(herm, trace, neg) <= 1e-10)

    # Parseval on the conjugate grid
    amps = build_amplitudes(gaussian(tls, 0.5), kin)
    z = conjugate_z_grid(amps)
    pars = abs(np.sum(np.abs(position_wavefunction(amps, z, 0.0)) ** 2) * (z[1] - z[0]) - 1.0)
    checks["Parseval"] = (pars, pars <= 1e-9)

    m = np.arange(-sideband_cutoff(0.75) - 40, sideband_cutoff(0.75) + 41)
    bes = abs(np.sum(special.jv(m, 1.5) ** 2) - 1.0)
    checks["Bessel sum"] = (bes, bes <= 1e-10)

    worst = 0.0
    for o in Orientation:
        t = TlsSpec(2.0, 5.0, o)
        geom = geometry_for(kin, t)
        q = w / kin.v0
        worst = max(worst, abs(kernel_fourier(q, geom, t, kin) - _fourier_oracle(q, geom, t, kin))
                    / abs(kernel_fourier(q, geom, t, kin)))
    checks["kernel_fourier vs quadrature"] = (worst, worst <= 1e-6)

    dpl = sideband_momentum(modulated.omega_b, kin)
    theta = dpl**2 * modulated.drift_length / (2 * kin.longitudinal_mass * HBAR * kin.v0)
    mm = np.arange(-40, 41)
    oracle = np.sum(special.jv(mm, 1.5) * special.jv(mm + 1, 1.5) * np.exp(-1j * (2 * mm + 1) * theta))
    dev = abs(abs(spectrum[1]) - abs(oracle))
    checks["|f_1| vs Bessel-sum oracle"] = (dev, dev <= 1e-3)

    # convergence: halve dz and dt together
    fine = SolverOptions(dz_scale=0.5, dt_scale=0.5)
    cases = [(gaussian(tls, r), TlsAmplitudes.ground(), 0.0) for r in (0.05, 0.25, 1.0, 2.0)]
    cases += [(gaussian(tls, 0.05), SUP_3B, 0.2), (modulated, TlsAmplitudes.ground(), Arrival(0.0, 0.0)),
              (modulated, SUP_5C, Arrival(0.0, phase_matched_phi0(SUP_5C, spectrum[1], ctx.m_tilde(), 1)))]
    conv_p, conv_dp = 0.0, 0.0
    for q, s, arr in cases:
        wb = w if q.kind is QewKind.PINEM else None
        a = Passage(q, ctx).run(s, arr, omega_b=wb)
        b = Passage(q, ctx, fine).run(s, arr, omega_b=wb)
        conv_p = max(conv_p, abs(a.p2 - b.p2) / b.p2)
        conv_dp = max(conv_dp, abs(a.dp2 - b.dp2) / abs(b.dp2))
    checks["dt/dz halving, P2"] = (conv_p, conv_p < 1e-2)

    # perturbative amplitude match at mu/100
    weak = KernelContext.build(kin, TlsSpec(2.0, 0.05))
    pert = 0.0
    for s, t0 in ((TlsAmplitudes.ground(), 0.0), (SUP_3B, 0.37)):
        q = gaussian(tls, 0.05, t0)
        dq = Passage(q, weak).run(s, t0).coherent_increment()
        da = single_increment(s, t0, q, weak)
        pert = max(pert, abs(abs(dq) / abs(da) - 1), abs(np.angle(dq / da)))
    checks["perturbative modulus/phase"] = (pert, pert <= 1e-2)

    ok = all(v[1] for v in checks.values())
    detail = "; ".join(f"{k} {v[0]:.2e}{'' if v[1] else ' FAILED'}" for k, v in checks.items())
    acceptance_log(7, ok, detail + f" (increment change under halving {conv_dp:.2e}, informational)")
    assert ok


# --------------------------------------------------------------------------- 8
def test_criterion_8_coupling_scale(ctx, tls, acceptance_log):
    g = ctx.g
    p = Passage(gaussian(tls, 0.25), ctx).run(TlsDensityMatrix.ground()).p2
    ok = 1e-4 < g < 1e-2 and 1e-7 < p < 1e-5
    acceptance_log(8, ok, f"g = {g:.4e} (1e-4 < g < 1e-2); single-electron P2 = {p:.3e} (order 1e-6)")
    assert ok
