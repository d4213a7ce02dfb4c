import math

import numpy as np
import pytest

from qmetro import correlations as co
from qmetro import fock, gaussian, protocol

R1 = math.asinh(1.0)


class TestProtocolConfig:
    def test_requires_one_of_nbar_r(self):
        with pytest.raises(ValueError):
            protocol.ProtocolConfig(phi=0.1)

    def test_consistent_pair_accepted(self):
        config = protocol.ProtocolConfig(phi=0.1, n_bar=1.0, r=R1)
        assert config.n_bar_value == pytest.approx(1.0)

    def test_inconsistent_pair_rejected(self):
        with pytest.raises(ValueError):
            protocol.ProtocolConfig(phi=0.1, n_bar=1.0, r=0.5)

    def test_conversion(self):
        config = protocol.ProtocolConfig(phi=0.1, r=0.5)
        assert config.n_bar_value == pytest.approx(math.sinh(0.5) ** 2)
        config = protocol.ProtocolConfig(phi=0.1, n_bar=2.0)
        assert config.r_value == pytest.approx(math.asinh(math.sqrt(2.0)))

    def test_ranges(self):
        with pytest.raises(ValueError):
            protocol.ProtocolConfig(phi=0.1, n_bar=1.0, eta1=1.5)
        with pytest.raises(ValueError):
            protocol.ProtocolConfig(phi=-0.1, n_bar=1.0)
        with pytest.raises(ValueError):
            protocol.ProtocolConfig(phi=0.1, n_bar=1.0, engine="exact")

    def test_digest_keys_runs(self):
        a = protocol.ProtocolConfig(phi=0.1, n_bar=1.0)
        b = protocol.ProtocolConfig(phi=0.1, r=R1)
        c = protocol.ProtocolConfig(phi=0.2, n_bar=1.0)
        assert a.digest() == b.digest()
        assert a.digest() != c.digest()

    def test_default_cutoff_policy(self):
        assert protocol.default_cutoff(1.0) == 16
        assert protocol.default_cutoff(2.5) == 28
        assert protocol.default_cutoff(1e4) == 128


class TestRunGaussian:
    def test_reference_point(self):
        result = protocol.run_gaussian(protocol.ProtocolConfig(phi=math.pi / 2, n_bar=1.0))
        assert result.signal == pytest.approx(8.0, rel=1e-12)
        assert result.variance == pytest.approx(144.0, rel=1e-12)
        assert result.phase_error is None  # signal extremum

    def test_zero_phase_lossless(self):
        result = protocol.run_gaussian(protocol.ProtocolConfig(phi=0.0, n_bar=1.0))
        assert result.signal == pytest.approx(0.0, abs=1e-12)
        assert result.variance == pytest.approx(0.0, abs=1e-12)
        assert result.phase_error == 0.25
        assert result.phase_error_is_limit

    def test_zero_phase_with_loss_refused(self):
        with pytest.raises(gaussian.SingularOperatingPointError):
            protocol.run_gaussian(protocol.ProtocolConfig(phi=0.0, n_bar=1.0, eta1=0.9, eta2=0.9))

    def test_unequal_etas_use_error_propagation(self):
        config = protocol.ProtocolConfig(phi=0.3, n_bar=1.0, eta1=0.95, eta2=0.85)
        result = protocol.run_gaussian(config)
        assert result.phase_error is not None and result.phase_error > 0


class TestRunFock:
    def test_zero_phase_returns_vacuum(self):
        result = protocol.run_fock(protocol.ProtocolConfig(phi=0.0, r=R1, cutoff=64))
        assert result.signal == pytest.approx(0.0, abs=1e-8)
        assert result.trace_deficit < 1e-8

    def test_reference_signal(self):
        result = protocol.run_fock(protocol.ProtocolConfig(phi=math.pi / 2, r=R1, cutoff=96))
        assert result.signal == pytest.approx(8.0, rel=1e-8)

    def test_final_state_is_vacuum_at_zero_phase(self):
        state = fock.squeeze(fock.squeeze(fock.vacuum(64), R1), -R1)
        assert fock.fidelity(fock.vacuum(64), state) >= 1.0 - 1e-8

    def test_truncation_diagnostics_name_the_stage(self):
        with pytest.raises(fock.TruncationOverflowError, match="squeeze stage"):
            protocol.run_fock(protocol.ProtocolConfig(phi=0.1, n_bar=4.0, cutoff=12))

    def test_unequal_etas_match_moment_engine(self):
        config = protocol.ProtocolConfig(phi=0.2, r=0.5, eta1=0.95, eta2=0.9, cutoff=60)
        report = protocol.run_both(config)
        assert report.rel_deviation("signal") < 1e-6
        assert report.rel_deviation("variance") < 1e-6

    @pytest.mark.parametrize("eta1,eta2", [(1.0, 0.9), (0.9, 1.0), (0.95, 0.8)])
    def test_unequal_eta_pairs_match_moment_engine(self, eta1, eta2):
        config = protocol.ProtocolConfig(phi=0.3, r=0.5, eta1=eta1, eta2=eta2, cutoff=60)
        report = protocol.run_both(config)
        assert report.rel_deviation("signal") < 1e-6
        assert report.rel_deviation("variance") < 1e-6
        assert report.moment_aa_deviation() < 1e-6

    def test_zero_phase_moments_agree_even_with_loss(self):
        # only the phase error is singular at phi = 0; the moments are not
        for r in (0.2, 0.5, 0.8814):
            for eta in (1.0, 0.95, 0.8):
                expected = gaussian.protocol_moments(r, 0.0, eta, eta)
                state = fock.squeeze(fock.vacuum(60), r)
                if eta < 1.0:
                    state = fock.loss(state, eta)
                state = fock.squeeze(state, -r, grow=True)
                if eta < 1.0:
                    state = fock.loss(state, eta)
                m_n = fock.expectation(state, "n")
                m_aa = fock.expectation(state, "a2")
                assert abs(expected.m_n - m_n) <= 1e-6 * max(abs(m_n), 1.0)
                assert abs(expected.m_aa - m_aa) <= 1e-6 * max(abs(m_aa), 1.0)

    def test_outputs_stay_gaussian(self):
        # normally ordered fourth moment factorises: <a+a+aa> = 2 m_n^2 + |m_aa|^2
        for r, phi, eta in [(0.5, 0.3, 1.0), (0.8814, 1.0, 0.95), (0.2, 0.05, 0.8)]:
            state = fock.vacuum(60)
            state = fock.squeeze(state, r)
            state = fock.phase_shift(state, -phi)
            if eta < 1.0:
                state = fock.loss(state, eta)
            state = fock.squeeze(state, -r, grow=True)
            if eta < 1.0:
                state = fock.loss(state, eta)
            fourth = fock.expectation(state, "adag2a2")
            m_n = fock.expectation(state, "n")
            m_aa = fock.expectation(state, "a2")
            factorised = 2.0 * m_n**2 + abs(m_aa) ** 2
            assert abs(fourth - factorised) <= 1e-6 * max(abs(fourth), abs(factorised), 1.0)

    def test_trace_deficit_monotone_in_cutoff(self):
        deficits = [
            protocol.run_fock(
                protocol.ProtocolConfig(phi=0.3, r=0.8814, eta1=0.9, eta2=0.9, cutoff=c)
            ).trace_deficit
            for c in (48, 64, 96)
        ]
        assert deficits[0] >= deficits[1] >= deficits[2]

    def test_loss_commutes_with_phase(self):
        # placing the first loss before or after the phase shift is equivalent
        state = fock.squeezed_vacuum(0.6, 0.0, 40)
        after = fock.loss(fock.phase_shift(state, 0.37), 0.8)
        before = fock.phase_shift(fock.loss(state, 0.8), 0.37)
        np.testing.assert_allclose(after.matrix, before.matrix, atol=1e-14)


class TestComparisonReport:
    def test_deviations_recomputed(self):
        report = protocol.run_both(
            protocol.ProtocolConfig(phi=0.3, r=0.5, eta1=0.9, eta2=0.9, cutoff=60)
        )
        g, f = report.gaussian_result, report.fock_result
        assert report.abs_deviation("signal") == abs(g.signal - f.signal)
        assert report.rel_deviation("signal") < 1e-6
        assert report.moment_aa_deviation() < 1e-6
        assert report.trace_deficit < 1e-8
        assert report.cutoff == 60


class TestErrorPropagation:
    def test_lossless_limit(self):
        curve = protocol.gaussian_signal_curve(protocol.ProtocolConfig(phi=1e-4, n_bar=1.0))
        assert protocol.error_propagation(curve, 1e-4) == pytest.approx(0.25, rel=1e-4)

    def test_brighter_probe(self):
        curve = protocol.gaussian_signal_curve(protocol.ProtocolConfig(phi=1e-4, n_bar=5.0))
        assert protocol.error_propagation(curve, 1e-4) == pytest.approx(
            1.0 / math.sqrt(240.0), rel=1e-4
        )

    def test_extremum_has_no_information(self):
        curve = protocol.gaussian_signal_curve(protocol.ProtocolConfig(phi=0.3, n_bar=1.0))
        with pytest.raises(protocol.VanishingDerivativeError):
            protocol.error_propagation(curve, math.pi / 2)

    def test_matches_closed_form_chain(self):
        # propagated error along the moment curve equals the closed form
        for phi in (0.1, 0.4, 0.7):
            config = protocol.ProtocolConfig(phi=phi, n_bar=1.0)
            curve = protocol.gaussian_signal_curve(config)
            propagated = protocol.error_propagation(curve, phi)
            closed = gaussian.phase_error(1.0, phi, 1.0)
            assert propagated == pytest.approx(closed, rel=1e-4)

    def test_fock_curve_route(self):
        config = protocol.ProtocolConfig(phi=0.2, r=0.5, eta1=0.9, eta2=0.9, cutoff=48)
        propagated = protocol.error_propagation(protocol.fock_signal_curve(config), 0.2)
        closed = gaussian.phase_error(config.n_bar_value, 0.2, 0.9)
        assert propagated == pytest.approx(closed, rel=1e-5)


class TestIntensityMeasurementOptimality:
    def test_photon_counting_reaches_quantum_bound(self):
        config = protocol.ProtocolConfig(phi=0.01, n_bar=1.0, cutoff=96)
        curve = protocol.lossless_output_distribution(config)
        fisher = co.classical_fisher_information(curve, 0.01)
        assert fisher == pytest.approx(16.0, rel=1e-2)
