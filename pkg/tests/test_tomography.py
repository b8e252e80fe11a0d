import numpy as np
import pytest

from teleportsim.channels import adc, apply_local
from teleportsim.entanglement import fef, teleport_fidelity
from teleportsim.states import (
    DensityMatrix,
    PAULI_X,
    bell_state,
    state_fidelity,
    werner_state,
)
from teleportsim.teleport import AXIAL_KETS
from teleportsim.tomography import (
    ChiMatrix,
    MeasurementRecord,
    avg_fidelity_from_chi,
    composite_teleport_fidelity,
    log_likelihood,
    monte_carlo_fidelity_error,
    pauli_settings,
    process_tomo,
    read_records_csv,
    setting_projector,
    simulate_counts,
    state_tomo_linear,
    state_tomo_mle,
    write_records_csv,
)

from _helpers import ginibre_density

PHI = bell_state("phi+").to_density_matrix()


def kraus_map(channel):
    return lambda rho: sum(k @ rho @ k.conj().T for k in channel.kraus_ops)


def exact_records(rho, n=10**6):
    """Counts equal to the rounded expected rates (noise-free frequencies)."""
    return [
        MeasurementRecord(label, round(n * float(
            np.trace(setting_projector(label) @ rho.matrix).real)))
        for label in pauli_settings(rho.num_qubits)
    ]


def six_state_channel_fidelity(channel_map):
    """Independent oracle: channel fidelity averaged over the axial states."""
    total = 0.0
    for ket in AXIAL_KETS.values():
        rho = np.outer(ket, ket.conj())
        total += np.vdot(ket, channel_map(rho) @ ket).real
    return total / len(AXIAL_KETS)


class TestSettings:
    def test_counts(self):
        assert len(pauli_settings(1)) == 6
        assert len(pauli_settings(2)) == 36

    def test_projector(self):
        assert np.allclose(setting_projector("Z+"), np.diag([1.0, 0.0]))
        proj = setting_projector("X+Z-")
        ket = np.kron([1, 1] / np.sqrt(2), [0, 1])
        assert np.allclose(proj, np.outer(ket, ket))

    def test_bad_label(self):
        with pytest.raises(ValueError):
            setting_projector("Q+")

    def test_negative_counts_rejected(self):
        with pytest.raises(ValueError):
            MeasurementRecord("Z+", -1)


class TestSimulateCounts:
    def test_zero_mean_gives_zero(self):
        rho = DensityMatrix(np.diag([1.0, 0.0]))
        records = simulate_counts(rho, ["Z-"], 10**6, seed=1)
        assert records[0].counts == 0

    def test_statistical_sanity(self):
        rho = DensityMatrix(np.eye(2) / 2)
        n = 10**6
        records = simulate_counts(rho, ["Z+"], n, seed=2)
        sigma = np.sqrt(n * 0.5)
        assert abs(records[0].counts - 0.5 * n) < 3 * sigma

    def test_determinism(self):
        rho = werner_state(0.6)
        a = simulate_counts(rho, pauli_settings(2), 1000, seed=7)
        b = simulate_counts(rho, pauli_settings(2), 1000, seed=7)
        assert [r.counts for r in a] == [r.counts for r in b]
        c = simulate_counts(rho, pauli_settings(2), 1000, seed=8)
        assert [r.counts for r in a] != [r.counts for r in c]


class TestLinearInversion:
    def test_exact_pure_state(self):
        rho = DensityMatrix(np.diag([1.0, 0.0]))
        est = state_tomo_linear(exact_records(rho))
        assert np.max(np.abs(est.matrix - rho.matrix)) < 1e-10

    def test_exact_werner(self):
        rho = werner_state(0.8)
        est = state_tomo_linear(exact_records(rho))
        assert np.max(np.abs(est.matrix - rho.matrix)) < 1e-10

    def test_incomplete_settings(self):
        records = [MeasurementRecord("Z+", 10), MeasurementRecord("Z-", 10)]
        with pytest.raises(ValueError, match="incomplete"):
            state_tomo_linear(records)

    def test_finite_counts_always_physical(self):
        rho = DensityMatrix(np.outer([1, 1], [1, 1]) / 2.0)
        for seed in range(5):
            records = simulate_counts(rho, pauli_settings(1), 50, seed=seed)
            est = state_tomo_linear(records)  # repair mode inside
            assert np.linalg.eigvalsh(est.matrix)[0] >= -1e-12


class TestMleReconstruction:
    def test_exact_plus_state(self):
        plus = DensityMatrix(np.outer([1, 1], [1, 1]) / 2.0)
        est = state_tomo_mle(exact_records(plus))
        assert state_fidelity(est, plus) > 1.0 - 1e-6

    def test_statistical_benchmark(self):
        truth = werner_state(0.8)
        records = simulate_counts(truth, pauli_settings(2), 10**4, seed=42)
        mle = state_tomo_mle(records)
        linear = state_tomo_linear(records)
        assert state_fidelity(mle, truth) >= 0.99
        # single cross-validation against the linear-inversion estimate
        assert state_fidelity(linear, truth) >= 0.99

    def test_likelihood_beats_projected_linear(self):
        for seed in range(5):
            records = simulate_counts(werner_state(0.7), pauli_settings(2),
                                      500, seed=seed)
            mle = state_tomo_mle(records)
            linear = state_tomo_linear(records)
            assert log_likelihood(records, mle) >= log_likelihood(records, linear) - 1e-6

    def test_always_physical(self):
        records = simulate_counts(PHI, pauli_settings(2), 200, seed=3)
        est = state_tomo_mle(records)
        assert abs(np.trace(est.matrix) - 1.0) < 1e-10
        assert np.linalg.eigvalsh(est.matrix)[0] >= -1e-12


class TestChiMatrix:
    def test_rejects_non_hermitian(self):
        bad = np.zeros((4, 4), dtype=complex)
        bad[0, 1] = 1.0
        with pytest.raises(ValueError):
            ChiMatrix(bad)

    def test_identity_process(self):
        chi = process_tomo(lambda rho: rho)
        expected = np.zeros((4, 4))
        expected[0, 0] = 1.0
        assert np.max(np.abs(chi.matrix - expected)) < 1e-12
        assert chi.trace_preservation_defect() < 1e-10
        assert abs(avg_fidelity_from_chi(chi) - 1.0) < 1e-10

    def test_x_gate(self):
        chi = process_tomo(lambda rho: PAULI_X @ rho @ PAULI_X)
        assert abs(chi.matrix[1, 1] - 1.0) < 1e-12
        assert abs(chi.element("X", "X") - 1.0) < 1e-12

    def test_adc_leading_element(self):
        for p in (0.0, 0.25, 0.5, 1.0):
            chi = process_tomo(kraus_map(adc(p)))
            predicted = ((1.0 + np.sqrt(1.0 - p)) / 2.0) ** 2
            assert abs(chi.matrix[0, 0].real - predicted) < 1e-12

    def test_reconstruction_property(self):
        rng = np.random.default_rng(41)
        channel = kraus_map(adc(0.35))
        chi = process_tomo(channel)
        for _ in range(20):
            rho = ginibre_density(1, rng).matrix
            assert np.max(np.abs(chi.apply(rho) - channel(rho))) < 1e-8

    def test_average_fidelity_values(self):
        chi_full_decay = process_tomo(kraus_map(adc(1.0)))
        assert abs(avg_fidelity_from_chi(chi_full_decay) - 0.5) < 1e-10
        classical = np.zeros((4, 4))
        classical[0, 0] = 0.5
        assert abs(avg_fidelity_from_chi(ChiMatrix(classical)) - 2.0 / 3.0) < 1e-15

    def test_matches_six_state_average(self):
        for p in np.linspace(0.0, 1.0, 11):
            channel = kraus_map(adc(p))
            chi = process_tomo(channel)
            assert abs(avg_fidelity_from_chi(chi)
                       - six_state_channel_fidelity(channel)) < 1e-9

    def test_counts_mode(self):
        chi = process_tomo(lambda rho: rho, n_per_setting=10**4, seed=11)
        assert chi.matrix[0, 0].real > 0.99


class TestCompositeFidelity:
    def test_perfect_resource(self):
        assert abs(composite_teleport_fidelity(PHI) - 1.0) < 1e-12

    def test_damped_family_matches_law(self):
        for p_a, p_b in [(0.0, 0.3), (0.5, 0.5), (0.8, 0.1)]:
            res = apply_local(adc(p_b), apply_local(adc(p_a), PHI, 0), 1)
            expected = teleport_fidelity(fef(res).f, 2)
            assert abs(composite_teleport_fidelity(res) - expected) < 1e-9

    def test_werner_surrogate(self):
        assert abs(composite_teleport_fidelity(werner_state(0.8)) - 0.9) < 1e-9

    def test_counts_mode_close(self):
        value = composite_teleport_fidelity(werner_state(0.8),
                                            n_per_setting=10**4, seed=9)
        assert abs(value - 0.9) < 0.02


class TestMonteCarlo:
    def test_determinism(self):
        res = werner_state(0.8)
        a = monte_carlo_fidelity_error(res, 2000, 5, seed=21)
        b = monte_carlo_fidelity_error(res, 2000, 5, seed=21)
        assert a == b

    def test_containment(self):
        res = werner_state(0.8)
        mean, std = monte_carlo_fidelity_error(res, 10**4, 100, seed=22)
        exact = composite_teleport_fidelity(res)
        assert abs(exact - mean) <= 4.0 * std

    def test_requires_two_resamples(self):
        with pytest.raises(ValueError):
            monte_carlo_fidelity_error(werner_state(0.8), 100, 1, seed=0)


class TestRecordFiles:
    def test_round_trip_and_reuse(self, tmp_path):
        records = simulate_counts(werner_state(0.8), pauli_settings(2),
                                  5000, seed=13)
        path = tmp_path / "counts.csv"
        write_records_csv(records, path)
        loaded = read_records_csv(path)
        assert loaded == records
        est = state_tomo_mle(loaded)
        assert state_fidelity(est, werner_state(0.8)) > 0.98

    def test_missing_columns(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("setting,counts\nZ+,3\n")
        with pytest.raises(ValueError):
            read_records_csv(path)
