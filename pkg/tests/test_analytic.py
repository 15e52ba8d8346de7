import math
import warnings

import mpmath as mp
import numpy as np
import pytest

from feberi.analytic import (Arrival, TlsAmplitudes, TrainSpec, ValidityWarning, arrival_transform,
                             correlated_train_probability, modulated_increment, phase_matched_phi0,
                             post_probability, single_increment, train_point_amplitude)
from feberi.fits import linear_vs_quadratic, quadratic_term_test
from feberi.physical import ParameterError
from feberi.wavepacket import ModulationSpectrum, QewSpec


def spectrum(wb, f1=0.58 * np.exp(0.4j), f2=0.2 * np.exp(-1.1j)):
    """Synthetic bunching spectrum with two harmonics."""
    h = np.array([np.conj(f2), np.conj(f1), 1.0, f1, f2], dtype=complex)
    return ModulationSpectrum(h, wb, 2)


def dc2(amps, t0, sigma, ctx):
    return single_increment(amps, t0, QewSpec(sigma_et=sigma), ctx)


class TestAmplitudes:
    def test_validation(self):
        with pytest.raises(ParameterError):
            TlsAmplitudes(1.0, 1.0)
        s = TlsAmplitudes.superposition(1, 2j)
        assert s.norm == pytest.approx(1.0)
        assert s.phase == pytest.approx(math.pi / 2)

    def test_update(self):
        s = TlsAmplitudes.ground().updated(0.1, 0.2, renormalize=True)
        assert s.norm == pytest.approx(1.0)
        raw = TlsAmplitudes.ground().updated(0.1, 0.2)
        assert raw.norm == pytest.approx(1.1**2 + 0.04)


class TestSingleIncrement:
    def test_no_source(self, ctx, tls):
        assert dc2(TlsAmplitudes.excited(), 0.3, 0.1 * tls.period, ctx) == 0
        assert single_increment(TlsAmplitudes.ground(), 0.3, QewSpec(sigma_et=1.0), ctx, level=1) == 0

    def test_point_limit_is_g(self, ctx):
        assert abs(dc2(TlsAmplitudes.ground(), 0.0, 1e-9, ctx)) == pytest.approx(ctx.g, rel=1e-12)
        rep = post_probability(TlsAmplitudes.ground(), dc2(TlsAmplitudes.ground(), 0.0, 1e-9, ctx))
        assert rep.p_post == pytest.approx(ctx.g**2, rel=1e-12)

    def test_gaussian_factor(self, ctx, tls):
        sigma = 1.0 / tls.omega21  # Gamma = 1
        assert abs(dc2(TlsAmplitudes.ground(), 0.7, sigma, ctx)) == pytest.approx(ctx.g * math.exp(-0.5))

    @pytest.mark.parametrize("ratio", [0.05, 0.25, 1.0])
    def test_eq25_decay(self, ctx, tls, ratio):
        sigma = ratio * tls.period
        p = post_probability(TlsAmplitudes.ground(), dc2(TlsAmplitudes.ground(), 0.0, sigma, ctx)).p_post
        assert p == pytest.approx(ctx.g**2 * math.exp(-(tls.omega21 * sigma) ** 2), rel=1e-12)

    def test_superposition_sinusoid(self, ctx, tls, sup3b):
        sigma = 0.05 * tls.period
        w = tls.omega21
        t0 = np.linspace(0, tls.period, 17)
        dp1 = np.array([post_probability(sup3b, dc2(sup3b, t, sigma, ctx)).dp1 for t in t0])
        assert dp1[0] == pytest.approx(dp1[-1], rel=1e-9)
        amp = 2 * ctx.g * math.exp(-0.5 * (w * sigma) ** 2) * abs(sup3b.c1 * sup3b.c2)
        zeta = np.array([sup3b.zeta(w, t) for t in t0])
        # sign convention: dP1 = -2 g exp(-Gamma^2/2) |C1 C2| sin(zeta)
        assert np.allclose(dp1, -amp * np.sin(zeta), rtol=0, atol=1e-12 * amp)

    def test_zero_at_zeta_zero(self, ctx, tls, sup3b):
        t0 = sup3b.phase / tls.omega21
        assert sup3b.zeta(tls.omega21, t0) == pytest.approx(0.0, abs=1e-15)
        rep = post_probability(sup3b, dc2(sup3b, t0, 0.1 * tls.period, ctx))
        assert abs(rep.dp1) < 1e-15

    def test_report_closes(self, ctx, sup3b):
        d = dc2(sup3b, 0.13, 0.2, ctx)
        rep = post_probability(sup3b, d)
        assert rep.p_post == pytest.approx(abs(sup3b.c2 + d) ** 2, rel=1e-14)

    def test_gaussian_only(self, ctx, tls):
        from feberi.wavepacket import QewKind
        with pytest.raises(ParameterError):
            single_increment(TlsAmplitudes.ground(), 0.0,
                             QewSpec(QewKind.PINEM, 2.0, 0.5, tls.omega21), ctx)


class TestArrival:
    def test_exact_reduction(self):
        w, wb = 3.0385348959922552, 3.0385348959922552 / 2
        a = Arrival(0.2 + 987654 * 2 * math.pi / wb, 0.0, 0.2, 987654)
        mp.mp.dps = 40
        exact = mp.mpf(w) * (mp.mpf(0.2) + 987654 * 2 * mp.pi / mp.mpf(wb))
        ref = float(mp.fmod(exact, 2 * mp.pi))
        got = math.fmod(a.phase(w, wb), 2 * math.pi)
        assert abs(got - ref) < 1e-12

    def test_transform_gaussian(self, tls):
        d = arrival_transform(tls.omega21, 0.4, 0.3)
        assert d == pytest.approx(np.exp(1j * tls.omega21 * 0.4 - 0.5 * (tls.omega21 * 0.3) ** 2))


class TestModulated:
    def test_dc_reduces_to_single(self, ctx, tls, sup3b):
        sigma = 0.3 * tls.period
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ValidityWarning)
            a = modulated_increment(sup3b, ModulationSpectrum.unmodulated(tls.omega21), 0.21, 0.0, sigma, ctx)
        b = post_probability(sup3b, dc2(sup3b, 0.21, sigma, ctx))
        assert a.dc2 == pytest.approx(b.dc2, rel=1e-13)
        assert a.dp1 == pytest.approx(b.dp1, rel=1e-12)

    @pytest.mark.parametrize("mult", [1.0, 2.0, 5.0])
    def test_resonance_independent_of_size(self, ctx, tls, mult):
        sp = spectrum(tls.omega21)
        rep = modulated_increment(TlsAmplitudes.ground(), sp, 0.37, 0.1, mult * tls.period, ctx, harmonic=1)
        assert rep.dp2 == pytest.approx(ctx.g**2 * abs(sp[1]) ** 2, rel=1e-12)
        full = modulated_increment(TlsAmplitudes.ground(), sp, 0.37, 0.1, mult * tls.period, ctx)
        assert full.dp2 == pytest.approx(rep.dp2, rel=1e-6)

    def test_second_harmonic(self, ctx, tls):
        sp = spectrum(tls.omega21 / 2)
        rep = modulated_increment(TlsAmplitudes.ground(), sp, 0.0, 0.0, 3 * tls.period, ctx, harmonic=2)
        assert rep.dp2 == pytest.approx(ctx.g**2 * abs(sp[2]) ** 2, rel=1e-12)

    def test_detuning(self, ctx, tls):
        sigma = 2 * tls.period
        wb = tls.omega21 - 2.0 / sigma
        sp = spectrum(wb)
        rep = modulated_increment(TlsAmplitudes.ground(), sp, 0.0, 0.0, sigma, ctx, harmonic=1)
        assert rep.dp2 == pytest.approx(ctx.g**2 * abs(sp[1]) ** 2 * math.exp(-4), rel=1e-12)

    def test_retained_harmonic_agreement(self, ctx, tls, sup3b):
        sp = spectrum(tls.omega21)
        sigma = 4 * math.pi / tls.omega21  # sigma omega_b = 4 pi
        for t0, tl in ((0.0, 0.0), (0.33, -0.2), (1.7, 0.5)):
            a = modulated_increment(sup3b, sp, t0, tl, sigma, ctx)
            b = modulated_increment(sup3b, sp, t0, tl, sigma, ctx, harmonic=1)
            assert abs(a.p_post - b.p_post) <= 1e-4 * abs(b.dp1 + b.dp2)

    def test_laser_phase_only(self, ctx, tls, sup3b):
        # at resonance the centroid drops out; only the laser reference matters
        sp = spectrum(tls.omega21)
        a = modulated_increment(sup3b, sp, 0.0, 0.1, 2 * tls.period, ctx, harmonic=1)
        b = modulated_increment(sup3b, sp, 0.77, 0.1, 2 * tls.period, ctx, harmonic=1)
        assert a.dp1 == pytest.approx(b.dp1, rel=1e-12)

    def test_wide_envelope_warning(self, ctx, tls):
        with pytest.warns(ValidityWarning):
            modulated_increment(TlsAmplitudes.ground(), spectrum(tls.omega21), 0.0, 0.0, 0.5 * tls.period, ctx)

    def test_phase_matching(self, ctx, tls):
        st = TlsAmplitudes(math.sin(3 * math.pi / 8), math.cos(3 * math.pi / 8))
        sp = spectrum(tls.omega21)
        wb = tls.omega21

        def dp1(phi):
            return modulated_increment(st, sp, 0.0, -phi / wb, 2 * tls.period, ctx, harmonic=1).dp1

        best = phase_matched_phi0(st, sp[1], ctx.m_tilde(), 1)
        worst = phase_matched_phi0(st, sp[1], ctx.m_tilde(), 1, sign=-1)
        grid = np.linspace(0, 2 * math.pi, 73)
        vals = [dp1(p) for p in grid]
        assert dp1(best) >= max(vals) - 1e-15
        assert dp1(worst) <= min(vals) + 1e-15
        amp = 2 * ctx.g * abs(sp[1]) * abs(st.c1 * st.c2)
        assert dp1(best) == pytest.approx(amp, rel=1e-12)


class TestTrains:
    def test_single_electron(self, ctx, tls):
        spec = TrainSpec(1, tls.omega21, "uniform_random", seed=4)
        res = train_point_amplitude(spec, ctx, 0.05 * tls.period)
        arr = res.arrivals[0]
        ref = post_probability(TlsAmplitudes.ground(), dc2(TlsAmplitudes.ground(), arr.t0, 0.05 * tls.period, ctx))
        assert res.p2 == pytest.approx(ref.p_post, rel=1e-12)

    def test_in_phase_quadratic(self, ctx, tls):
        spec = TrainSpec(20, tls.omega21, "in_phase", seed=8)
        h = train_point_amplitude(spec, ctx, 0.05 * tls.period).p2_history
        assert h[-1] / h[0] == pytest.approx(400.0, rel=1e-9)
        assert np.allclose(h / h[0], np.arange(1, 21) ** 2, rtol=1e-9)

    def test_uniform_linear(self, ctx, tls):
        sigma = 0.05 * tls.period
        inphase = train_point_amplitude(TrainSpec(20, tls.omega21, "in_phase"), ctx, sigma).p2
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ValidityWarning)
            finals = [train_point_amplitude(TrainSpec(400, tls.omega21, "uniform_random", seed=s), ctx, sigma).p2
                      for s in range(200)]
        assert np.mean(finals) == pytest.approx(inphase, rel=0.15)

    def test_small_signal_warning(self, ctx, tls):
        with pytest.warns(ValidityWarning):
            train_point_amplitude(TrainSpec(600, tls.omega21), ctx, 1e-3)

    def test_draws(self, tls):
        a = TrainSpec(10, tls.omega21, "uniform_random", "random_phi0", seed=5)
        b = TrainSpec(30, tls.omega21, "uniform_random", "random_phi0", seed=5)
        assert a.arrivals() == b.arrivals()[:10]
        assert all(0 <= x.t0 < a.period and 0 <= x.phi0 < 2 * math.pi for x in b.arrivals())
        f = TrainSpec(2, tls.omega21, "fixed_list", arrival_times=(0.1, 0.2))
        assert [x.t0 for x in f.arrivals()] == [0.1, 0.2]
        with pytest.raises(ParameterError):
            TrainSpec(3, tls.omega21, "fixed_list", arrival_times=(0.1,))
        with pytest.raises(ParameterError):
            TrainSpec(0, tls.omega21)

    def test_renormalized_train_stays_normalized(self, ctx, tls):
        res = train_point_amplitude(TrainSpec(50, tls.omega21, "in_phase"), ctx, 0.05 * tls.period,
                                    renormalize=True)
        assert abs(res.c1) ** 2 + abs(res.c2) ** 2 == pytest.approx(1.0, abs=1e-12)


class TestCorrelated:
    def test_single_equals_modulated(self, ctx, tls):
        sp = spectrum(tls.omega21)
        spec = TrainSpec(1, tls.omega21, "uniform_random", seed=3, phi0=0.4)
        res = correlated_train_probability(spec, sp, tls.period, ctx)
        arr = res.arrivals[0]
        ref = modulated_increment(TlsAmplitudes.ground(), sp, arr.t0, -0.4 / tls.omega21, tls.period, ctx)
        assert res.p2 == pytest.approx(ref.dp2, rel=1e-12)

    @pytest.mark.parametrize("seed", [0, 1, 99])
    def test_common_phase_quadratic(self, ctx, tls, seed):
        sp = spectrum(tls.omega21)
        spec = TrainSpec(20, tls.omega21, "uniform_random", "common_phi0", seed=seed)
        h = correlated_train_probability(spec, sp, tls.period, ctx).p2_history
        assert h[-1] / h[0] == pytest.approx(400.0, rel=1e-6)
        assert h[-1] == pytest.approx(400 * ctx.g**2 * abs(sp[1]) ** 2, rel=1e-6)

    def test_random_phase_linear(self, ctx, tls):
        sp = spectrum(tls.omega21)
        n = np.arange(1, 21)
        ens = np.array([correlated_train_probability(
            TrainSpec(20, tls.omega21, "uniform_random", "random_phi0", seed=s), sp, tls.period, ctx).p2_history
            for s in range(50)])
        assert quadratic_term_test(n, ens).consistent_with_zero()
        r_lin, r_quad = linear_vs_quadratic(n, ens.mean(axis=0))
        assert r_lin < r_quad

    def test_omega_b_mismatch(self, ctx, tls):
        with pytest.raises(ParameterError):
            correlated_train_probability(TrainSpec(2, tls.omega21), spectrum(1.0), tls.period, ctx)
