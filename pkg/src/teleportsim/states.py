"""Dense state primitives and linear algebra for one to three qubits.

Ordering convention used everywhere in this package: the first tensor
factor is the most significant qubit, so the two-qubit computational
basis reads |00>, |01>, |10>, |11>.
"""

from __future__ import annotations

import json

import numpy as np

HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-9
PURE_NORM_TOL = 1e-12
MAX_QUBITS = 3

I2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)

#: Single-qubit operator basis {I, X, Y, Z}; satisfies Tr(E_m E_n) = 2 delta_mn.
PAULIS = (I2, PAULI_X, PAULI_Y, PAULI_Z)
PAULI_LABELS = ("I", "X", "Y", "Z")


def _num_qubits_for_dim(dim: int) -> int:
    n = int(round(np.log2(dim)))
    if 2**n != dim or not (1 <= n <= MAX_QUBITS):
        raise ValueError(
            f"dimension {dim} is not 2**n for n in 1..{MAX_QUBITS}"
        )
    return n


def _simplex_projection(w: np.ndarray) -> np.ndarray:
    """Euclidean projection of a real vector onto the probability simplex."""
    u = np.sort(w)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, len(w) + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(w - theta, 0.0)


def project_to_physical(matrix: np.ndarray) -> np.ndarray:
    """Nearest (Frobenius) Hermitian, PSD, unit-trace matrix.

    Hermitizes the input, then projects its eigenvalues onto the
    probability simplex while keeping the eigenvectors.
    """
    herm = 0.5 * (matrix + matrix.conj().T)
    w, v = np.linalg.eigh(herm)
    w = _simplex_projection(w.real)
    return (v * w) @ v.conj().T


class DensityMatrix:
    """Mixed state of 1-3 qubits: a Hermitian, unit-trace, PSD matrix.

    ``mode="strict"`` rejects matrices violating the invariants
    (Hermiticity within 1e-10, trace within 1e-10 of one, eigenvalues
    above -1e-9); ``mode="repair"`` projects to the nearest physical
    state instead, which is the standard fix-up for linear-inversion
    tomography output.
    """

    __slots__ = ("num_qubits", "matrix")

    def __init__(self, matrix, mode: str = "strict"):
        mat = np.array(matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {mat.shape}")
        n = _num_qubits_for_dim(mat.shape[0])
        if mode == "strict":
            herm_dev = np.max(np.abs(mat - mat.conj().T))
            if herm_dev > HERMITICITY_TOL:
                raise ValueError(f"matrix is not Hermitian (deviation {herm_dev:.3e})")
            trace_dev = abs(np.trace(mat) - 1.0)
            if trace_dev > TRACE_TOL:
                raise ValueError(f"trace deviates from 1 by {trace_dev:.3e}")
            min_eig = np.linalg.eigvalsh(0.5 * (mat + mat.conj().T))[0]
            if min_eig < -PSD_TOL:
                raise ValueError(f"matrix has negative eigenvalue {min_eig:.3e}")
        elif mode == "repair":
            mat = project_to_physical(mat)
        else:
            raise ValueError(f"unknown validation mode {mode!r}")
        mat.setflags(write=False)
        object.__setattr__(self, "num_qubits", n)
        object.__setattr__(self, "matrix", mat)

    def __setattr__(self, name, value):
        raise AttributeError("DensityMatrix is immutable")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __repr__(self) -> str:
        return f"DensityMatrix(num_qubits={self.num_qubits})"


class PureState:
    """Normalized state vector on n qubits."""

    __slots__ = ("num_qubits", "amplitudes")

    def __init__(self, amplitudes):
        amps = np.array(amplitudes, dtype=complex).reshape(-1)
        n = _num_qubits_for_dim(amps.shape[0])
        norm_dev = abs(np.vdot(amps, amps).real - 1.0)
        if norm_dev > PURE_NORM_TOL:
            raise ValueError(f"squared norm deviates from 1 by {norm_dev:.3e}")
        amps.setflags(write=False)
        object.__setattr__(self, "num_qubits", n)
        object.__setattr__(self, "amplitudes", amps)

    def __setattr__(self, name, value):
        raise AttributeError("PureState is immutable")

    def to_density_matrix(self) -> DensityMatrix:
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))

    def __repr__(self) -> str:
        return f"PureState(num_qubits={self.num_qubits})"


def _as_matrix(state) -> np.ndarray:
    if isinstance(state, DensityMatrix):
        return state.matrix
    if isinstance(state, PureState):
        return np.outer(state.amplitudes, state.amplitudes.conj())
    return np.asarray(state, dtype=complex)


def tensor_product(a, b) -> np.ndarray:
    """Kronecker product with the left factor on the most significant qubit."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Reduced state on the qubits listed in ``keep`` (ascending output order).

    ``keep`` must be a nonempty proper subset of the qubit indices.
    """
    if isinstance(keep, int):
        keep = (keep,)
    keep = sorted(set(int(q) for q in keep))
    n = rho.num_qubits
    if not keep or len(keep) >= n or keep[0] < 0 or keep[-1] >= n:
        raise ValueError(
            f"keep={keep} is not a nonempty proper subset of qubits 0..{n - 1}"
        )
    tensor = rho.matrix.reshape((2,) * (2 * n))
    letters = "abcdefghijkl"
    row = list(letters[:n])
    col = list(letters[n : 2 * n])
    for q in range(n):
        if q not in keep:
            col[q] = row[q]
    out = "".join(row[q] for q in keep) + "".join(letters[n + q] for q in keep)
    reduced = np.einsum("".join(row + col) + "->" + out, tensor)
    d = 2 ** len(keep)
    return DensityMatrix(reduced.reshape(d, d))


def eig_hermitian(matrix: np.ndarray):
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvectors in columns.
    Raises if the input deviates from Hermiticity by more than 1e-8.
    """
    mat = _as_matrix(matrix)
    dev = np.max(np.abs(mat - mat.conj().T))
    if dev > 1e-8:
        raise ValueError(f"matrix is not Hermitian (deviation {dev:.3e})")
    return np.linalg.eigh(mat)


def sqrtm_psd(matrix: np.ndarray) -> np.ndarray:
    """Hermitian matrix square root for PSD-within-tolerance inputs.

    Eigenvalues below a relative floor are zeroed before the root;
    otherwise numerically-zero eigenvalues (~1e-16) would each leak
    ~1e-8 into downstream traces through the square root.
    """
    mat = _as_matrix(matrix)
    w, v = np.linalg.eigh(0.5 * (mat + mat.conj().T))
    cutoff = max(float(w[-1]), 0.0) * 1e-12
    w = np.where(w > cutoff, w, 0.0)
    return (v * np.sqrt(w)) @ v.conj().T


def state_fidelity(rho, sigma) -> float:
    """Uhlmann fidelity F = (Tr sqrt(sqrt(rho) sigma sqrt(rho)))**2.

    Symmetric in its arguments; equals <psi|sigma|psi> when rho is the
    pure state |psi><psi|.
    """
    a = _as_matrix(rho)
    b = _as_matrix(sigma)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    root = sqrtm_psd(a)
    inner = sqrtm_psd(root @ b @ root)
    fid = np.trace(inner).real ** 2
    return float(max(fid, 0.0))


_BELL_AMPLITUDES = {
    "phi+": np.array([1.0, 0.0, 0.0, 1.0]) / np.sqrt(2.0),
    "phi-": np.array([1.0, 0.0, 0.0, -1.0]) / np.sqrt(2.0),
    "psi+": np.array([0.0, 1.0, 1.0, 0.0]) / np.sqrt(2.0),
    "psi-": np.array([0.0, 1.0, -1.0, 0.0]) / np.sqrt(2.0),
}


def bell_state(label: str) -> PureState:
    """One of the four Bell states, by label 'phi+', 'phi-', 'psi+' or 'psi-'."""
    key = label.lower()
    if key not in _BELL_AMPLITUDES:
        raise ValueError(f"unknown Bell label {label!r}; expected one of "
                         f"{sorted(_BELL_AMPLITUDES)}")
    return PureState(_BELL_AMPLITUDES[key])


def werner_state(visibility: float) -> DensityMatrix:
    """v |phi+><phi+| + (1 - v) I/4, the standard noisy-singlet surrogate."""
    v = float(visibility)
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"visibility must lie in [0, 1], got {v}")
    phi = bell_state("phi+").amplitudes
    return DensityMatrix(v * np.outer(phi, phi.conj()) + (1.0 - v) * np.eye(4) / 4.0)


def save_density_matrix(rho: DensityMatrix, path) -> None:
    """Write a density matrix as JSON {num_qubits, re, im}, row-major."""
    payload = {
        "num_qubits": rho.num_qubits,
        "re": rho.matrix.real.tolist(),
        "im": rho.matrix.imag.tolist(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def load_density_matrix(path, mode: str = "strict") -> DensityMatrix:
    """Read a density matrix from the JSON format written by save_density_matrix."""
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    try:
        n = int(payload["num_qubits"])
        mat = np.array(payload["re"], dtype=float) + 1j * np.array(payload["im"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed density-matrix file {path}: {exc}") from exc
    if mat.shape != (2**n, 2**n):
        raise ValueError(
            f"matrix shape {mat.shape} inconsistent with num_qubits={n}"
        )
    return DensityMatrix(mat, mode=mode)
