"""Closed-form targets: trapping probabilities, weights, optima."""

import math

import numpy as np
import pytest

from bicsim import ModelParams, analytics, mps


class TestTrappingProbability:
    def test_flagship_values(self):
        # Gamma = 0.625 gamma, tau = 4 / gamma
        assert analytics.p_bic_analytic(0.625, 1.0, 4.0) == pytest.approx(
            0.543014, abs=1e-6
        )
        assert analytics.p_bell_analytic(0.625, 1.0, 4.0) == pytest.approx(
            0.181005, abs=1e-6
        )

    def test_formula_structure(self):
        gamma_band, tau = 1.2564, 2.0
        want = 2 * (1 - math.exp(-gamma_band * tau / 2)) ** 2 / (
            gamma_band * (1 + tau / 2)
        )
        assert analytics.p_bic_analytic(gamma_band, 1.0, tau) == pytest.approx(want)

    def test_bell_is_bic_over_qubit_share(self):
        w = analytics.bic_weights(1.0, 4.0, math.pi)
        p_bic = analytics.p_bic_analytic(0.625, 1.0, 4.0)
        p_bell = analytics.p_bell_analytic(0.625, 1.0, 4.0)
        assert p_bell == pytest.approx(p_bic * w.qubit_share)
        assert p_bell == pytest.approx(p_bic / (1 + 2.0))

    def test_rejects_nonpositive_bandwidth(self):
        with pytest.raises(ValueError):
            analytics.p_bic_analytic(0.0, 1.0, 1.0)

    def test_overlap_amplitude_reproduces_probability(self):
        # independent route: |overlap|^2 must equal the closed form when
        # the input parity matches the carrier phase
        gamma_band, tau = 0.625, 4.0
        amp = analytics.overlap_amplitude(gamma_band, 1.0, tau, math.pi, 1)
        assert abs(amp) ** 2 == pytest.approx(
            analytics.p_bic_analytic(gamma_band, 1.0, tau), rel=1e-12
        )

    def test_overlap_vanishes_for_opposite_parity(self):
        amp = analytics.overlap_amplitude(0.625, 1.0, 4.0, math.pi, 0)
        assert abs(amp) <= 1e-15


class TestWeights:
    def test_qubit_photon_split(self):
        w = analytics.bic_weights(1.0, 2.0, math.pi)
        assert w.qubit_share == pytest.approx(0.5)
        assert w.photon_share == pytest.approx(0.5)
        w4 = analytics.bic_weights(1.0, 4.0, math.pi)
        assert w4.qubit_share == pytest.approx(1.0 / 3.0)
        assert w4.photon_share == pytest.approx(2.0 / 3.0)

    def test_parity_from_phase(self):
        assert analytics.bic_weights(1.0, 1.0, math.pi).parity == 1
        assert analytics.bic_weights(1.0, 1.0, 2 * math.pi).parity == -1


class TestOptimalBandwidth:
    def test_fixed_point_equation(self):
        u = analytics.bandwidth_fixed_point()
        assert math.exp(u / 2) - 1 == pytest.approx(u, abs=1e-9)
        assert u == pytest.approx(2.5128624172, abs=1e-9)

    def test_optimal_bandwidth_scales_inversely(self):
        u = analytics.bandwidth_fixed_point()
        assert analytics.optimal_bandwidth(4.0) == pytest.approx(u / 4.0)

    def test_peak_coefficient(self):
        assert analytics.peak_coefficient() == pytest.approx(0.4072644, abs=1e-6)

    def test_peak_dominates_neighbours(self):
        u = analytics.bandwidth_fixed_point()
        tau = 2.0
        best = analytics.p_bic_analytic(u / tau, 1.0, tau)
        for off in (0.9, 1.1):
            assert analytics.p_bic_analytic(off * u / tau, 1.0, tau) < best

    def test_peak_probability_factorizes(self):
        tau = 2.0
        p_bic, p_bell = analytics.peak_probabilities(1.0, tau)
        want = analytics.peak_coefficient() * tau / (1 + tau / 2)
        assert p_bic == pytest.approx(want)
        assert p_bell == pytest.approx(p_bic / (1 + tau / 2))


class TestRelaxation:
    def test_baselines(self):
        p_bic, p_bell = analytics.relaxation_baselines(1.0, 2.0)
        assert p_bic == pytest.approx(0.25)
        assert p_bell == pytest.approx(0.125)


class TestInference:
    def test_round_trip(self):
        p_bell = analytics.p_bell_analytic(0.625, 1.0, 4.0)
        assert analytics.infer_p_bic_from_bell(p_bell, 1.0, 4.0) == pytest.approx(
            analytics.p_bic_analytic(0.625, 1.0, 4.0)
        )

    def test_rejects_invalid_population(self):
        with pytest.raises(ValueError):
            analytics.infer_p_bic_from_bell(1.5, 1.0, 1.0)


class TestContinuumDensity:
    def test_interference_pattern(self):
        k0 = math.pi / 2
        assert analytics.continuum_bic_density(0.0, k0) == pytest.approx(0.0)
        assert analytics.continuum_bic_density(1.0, k0) == pytest.approx(2.0)
        xs = np.linspace(0, 2 * math.pi / k0, 10001)
        mean = np.trapezoid(
            [analytics.continuum_bic_density(x, k0) for x in xs], xs
        ) / (2 * math.pi / k0)
        assert mean == pytest.approx(1.0, abs=1e-6)


class TestDiscretizedState:
    def make(self, **kw):
        base = dict(dt=0.04, ell=10, phi=math.pi, n_bins=60, steps=40)
        base.update(kw)
        return ModelParams(**base)

    def test_unit_norm(self):
        p = self.make()
        state = analytics.discretized_bic_state(p, 20)
        assert mps.norm(state) == pytest.approx(1.0, abs=1e-12)

    def test_exact_discrete_close_to_continuum_weights(self):
        p = self.make()
        a = analytics.discretized_bic_state(p, 20, exact_discrete=False)
        b = analytics.discretized_bic_state(p, 20, exact_discrete=True)
        overlap = abs(mps.inner_product(a, b)) ** 2
        assert overlap >= 1.0 - 1e-4
        assert overlap <= 1.0 + 1e-12

    def test_requires_resonant_phase(self):
        p = self.make(phi=1.0)
        with pytest.raises(ValueError):
            analytics.discretized_bic_state(p, 20)

    def test_window_must_fit_lattice(self):
        p = self.make()
        with pytest.raises(ValueError):
            analytics.discretized_bic_state(p, -1)  # window leaves the lattice
