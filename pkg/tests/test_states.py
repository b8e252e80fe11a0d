import json

import numpy as np
import pytest

from teleportsim.states import (
    DensityMatrix,
    PAULI_X,
    PureState,
    bell_state,
    eig_hermitian,
    load_density_matrix,
    partial_trace,
    save_density_matrix,
    state_fidelity,
    tensor_product,
    werner_state,
)

from _helpers import ginibre_density, ginibre_matrix, random_pure_ket

SQ = np.sqrt(0.5)


def one_sided_damped_bell(p):
    """|phi+> after amplitude damping of strength p on the first qubit."""
    a = np.sqrt(1.0 - p)
    mat = 0.5 * np.array(
        [
            [1.0, 0.0, 0.0, a],
            [0.0, p, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0],
            [a, 0.0, 0.0, 1.0 - p],
        ],
        dtype=complex,
    )
    return DensityMatrix(mat)


class TestTensorProduct:
    def test_identity(self):
        assert np.array_equal(tensor_product(np.eye(2), np.eye(2)), np.eye(4))

    def test_basis_order(self):
        # |0><0| x |1><1| occupies the |01> slot
        p0 = np.diag([1.0, 0.0]).astype(complex)
        p1 = np.diag([0.0, 1.0]).astype(complex)
        assert np.allclose(tensor_product(p0, p1), np.diag([0, 1, 0, 0]))

    def test_damping_kraus_embedding(self):
        k1 = np.array([[1.0, 0.0], [0.0, SQ]])
        expected = np.diag([1.0, 1.0, SQ, SQ])
        assert np.allclose(tensor_product(k1, np.eye(2)), expected, atol=1e-15)

    def test_associativity(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            a, b, c = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
                       for _ in range(3))
            left = tensor_product(tensor_product(a, b), c)
            right = tensor_product(a, tensor_product(b, c))
            assert np.max(np.abs(left - right)) < 1e-14


class TestPartialTrace:
    def test_bell_marginal(self):
        rho = bell_state("phi+").to_density_matrix()
        reduced = partial_trace(rho, [1])
        assert np.allclose(reduced.matrix, np.eye(2) / 2, atol=1e-12)

    def test_product_state(self):
        rng = np.random.default_rng(5)
        a = ginibre_matrix(1, rng)
        b = ginibre_matrix(1, rng)
        joint = DensityMatrix(tensor_product(a, b))
        assert np.allclose(partial_trace(joint, [0]).matrix, a, atol=1e-12)
        assert np.allclose(partial_trace(joint, [1]).matrix, b, atol=1e-12)

    def test_damped_bell_population(self):
        reduced = partial_trace(one_sided_damped_bell(0.5), [0])
        assert np.allclose(reduced.matrix, np.diag([0.75, 0.25]), atol=1e-12)

    def test_trace_preserved_random(self):
        rng = np.random.default_rng(6)
        for _ in range(10):
            rho = ginibre_density(3, rng)
            for keep in ([0], [2], [0, 1], [1, 2]):
                reduced = partial_trace(rho, keep)
                assert abs(np.trace(reduced.matrix) - 1.0) < 1e-12

    @pytest.mark.parametrize("keep", [[], [0, 1], [2], [-1]])
    def test_invalid_subset(self, keep):
        rho = ginibre_density(2, np.random.default_rng(0))
        with pytest.raises(ValueError):
            partial_trace(rho, keep)


class TestEigHermitian:
    def test_diagonal(self):
        w, _ = eig_hermitian(np.diag([2.0, 1.0]).astype(complex))
        assert np.allclose(w, [1.0, 2.0])

    def test_pauli_x(self):
        w, _ = eig_hermitian(PAULI_X)
        assert np.allclose(w, [-1.0, 1.0])

    def test_damped_bell_spectrum(self):
        # hand result: coherent block has trace 3/4 and zero determinant
        w, _ = eig_hermitian(one_sided_damped_bell(0.5).matrix)
        assert np.allclose(sorted(w), [0.0, 0.0, 0.25, 0.75], atol=1e-12)

    def test_reconstruction(self):
        rng = np.random.default_rng(7)
        g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        herm = g + g.conj().T
        w, v = eig_hermitian(herm)
        rebuilt = (v * w) @ v.conj().T
        assert np.linalg.norm(rebuilt - herm) < 1e-9

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            eig_hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]))


class TestStateFidelity:
    def test_self_fidelity(self):
        rho = ginibre_density(2, np.random.default_rng(8))
        assert abs(state_fidelity(rho, rho) - 1.0) < 1e-10

    def test_orthogonal_pure_states(self):
        zero = DensityMatrix(np.diag([1.0, 0.0]))
        one = DensityMatrix(np.diag([0.0, 1.0]))
        assert state_fidelity(zero, one) < 1e-12

    def test_bell_vs_werner(self):
        phi = bell_state("phi+").to_density_matrix()
        assert abs(state_fidelity(phi, werner_state(0.8)) - 0.85) < 1e-12

    def test_symmetry_and_range(self):
        rng = np.random.default_rng(9)
        for _ in range(15):
            rho = ginibre_density(2, rng)
            sigma = ginibre_density(2, rng)
            f_rs = state_fidelity(rho, sigma)
            f_sr = state_fidelity(sigma, rho)
            assert abs(f_rs - f_sr) < 1e-10
            assert 0.0 <= f_rs <= 1.0 + 1e-10

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            state_fidelity(ginibre_density(1, np.random.default_rng(0)),
                           ginibre_density(2, np.random.default_rng(0)))


class TestBellStates:
    def test_phi_plus_amplitudes(self):
        assert np.allclose(bell_state("phi+").amplitudes, [SQ, 0, 0, SQ])

    def test_psi_minus_amplitudes(self):
        assert np.allclose(bell_state("psi-").amplitudes, [0, SQ, -SQ, 0])

    def test_orthogonality(self):
        overlap = np.vdot(bell_state("phi+").amplitudes,
                          bell_state("psi+").amplitudes)
        assert abs(overlap) < 1e-15

    def test_unknown_label(self):
        with pytest.raises(ValueError):
            bell_state("chi+")


class TestWernerState:
    def test_endpoints(self):
        phi = bell_state("phi+").to_density_matrix()
        assert np.allclose(werner_state(1.0).matrix, phi.matrix, atol=1e-15)
        assert np.allclose(werner_state(0.0).matrix, np.eye(4) / 4, atol=1e-15)

    def test_bell_fidelity(self):
        phi = bell_state("phi+").to_density_matrix()
        assert abs(state_fidelity(werner_state(0.8), phi) - 0.85) < 1e-12

    @pytest.mark.parametrize("v", [-0.1, 1.1])
    def test_out_of_range(self, v):
        with pytest.raises(ValueError):
            werner_state(v)


class TestValidation:
    def test_eigenvalues_sum_to_one(self):
        rng = np.random.default_rng(10)
        for n in (1, 2, 3):
            rho = ginibre_density(n, rng)
            assert abs(np.linalg.eigvalsh(rho.matrix).sum() - 1.0) < 1e-9

    def test_strict_rejects_non_hermitian(self):
        mat = np.array([[0.5, 0.5], [0.0, 0.5]], dtype=complex)
        with pytest.raises(ValueError, match="Hermitian"):
            DensityMatrix(mat)

    def test_strict_rejects_bad_trace(self):
        with pytest.raises(ValueError, match="trace"):
            DensityMatrix(np.diag([0.8, 0.8]))

    def test_strict_rejects_negative_eigenvalue(self):
        with pytest.raises(ValueError, match="negative"):
            DensityMatrix(np.diag([1.5, -0.5]))

    def test_repair_projects(self):
        repaired = DensityMatrix(np.diag([1.2, -0.2]), mode="repair")
        assert np.allclose(repaired.matrix, np.diag([1.0, 0.0]), atol=1e-12)

    def test_repair_keeps_valid_states(self):
        rho = ginibre_density(2, np.random.default_rng(12))
        again = DensityMatrix(rho.matrix, mode="repair")
        assert np.max(np.abs(again.matrix - rho.matrix)) < 1e-12

    def test_immutable(self):
        rho = werner_state(0.5)
        with pytest.raises(AttributeError):
            rho.matrix = np.eye(4) / 4
        with pytest.raises(ValueError):
            rho.matrix[0, 0] = 2.0

    def test_pure_state_norm(self):
        with pytest.raises(ValueError):
            PureState([1.0, 1.0])
        ket = PureState(random_pure_ket(2, np.random.default_rng(13)))
        assert ket.num_qubits == 2


class TestJsonFormat:
    def test_round_trip(self, tmp_path):
        rho = ginibre_density(2, np.random.default_rng(14))
        path = tmp_path / "state.json"
        save_density_matrix(rho, path)
        loaded = load_density_matrix(path)
        assert np.max(np.abs(loaded.matrix - rho.matrix)) < 1e-15

    def test_reader_is_strict(self, tmp_path):
        path = tmp_path / "bad.json"
        payload = {"num_qubits": 1, "re": [[1.5, 0.0], [0.0, -0.5]],
                   "im": [[0.0, 0.0], [0.0, 0.0]]}
        path.write_text(json.dumps(payload))
        with pytest.raises(ValueError):
            load_density_matrix(path)

    def test_reader_rejects_malformed(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"num_qubits": 2, "re": [[1.0]]}')
        with pytest.raises(ValueError):
            load_density_matrix(path)
