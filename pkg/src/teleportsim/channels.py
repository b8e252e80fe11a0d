"""Amplitude- and phase-damping channels in Kraus and dilation form.

Also holds the experiment-facing pieces: the waveplate-angle
parametrizations of the damping strengths, the two-pure-state mixture
that realizes sender-side amplitude damping, and the best-fit damping
estimator used for calibration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space

from .states import DensityMatrix, I2, state_fidelity, tensor_product

COMPLETENESS_TOL = 1e-10

KET_ENV_A = np.array([1.0, 0.0], dtype=complex)  # interferometer mode a, |0>
KET_ENV_B = np.array([0.0, 1.0], dtype=complex)  # interferometer mode b, |1>


class KrausChannel:
    """Trace-preserving map rho -> sum_j K_j rho K_j^dagger.

    Construction enforces the completeness relation
    sum_j K_j^dagger K_j = I to within 1e-10.
    """

    __slots__ = ("dim", "kraus_ops", "label")

    def __init__(self, kraus_ops, label: str = ""):
        ops = tuple(np.array(k, dtype=complex) for k in kraus_ops)
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        dim = ops[0].shape[0]
        for k in ops:
            if k.shape != (dim, dim):
                raise ValueError(f"Kraus operators must all be {dim}x{dim}")
            k.setflags(write=False)
        total = sum(k.conj().T @ k for k in ops)
        dev = np.max(np.abs(total - np.eye(dim)))
        if dev > COMPLETENESS_TOL:
            raise ValueError(
                f"Kraus completeness sum deviates from identity by {dev:.3e}"
            )
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "kraus_ops", ops)
        object.__setattr__(self, "label", label)

    def __setattr__(self, name, value):
        raise AttributeError("KrausChannel is immutable")

    def __repr__(self) -> str:
        return f"KrausChannel({self.label or 'unnamed'}, {len(self.kraus_ops)} ops)"


@dataclass(frozen=True)
class CalibrationPoint:
    """One waveplate setting with its damping strength, for either party."""

    control_angle: float  # degrees
    damping: float
    side: str  # "alice" or "bob"

    def __post_init__(self):
        if not 0.0 <= self.damping <= 1.0:
            raise ValueError(f"damping must lie in [0, 1], got {self.damping}")
        if self.side not in ("alice", "bob"):
            raise ValueError(f"side must be 'alice' or 'bob', got {self.side!r}")


def _check_p(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"damping strength must lie in [0, 1], got {p}")
    return p


def adc(p: float) -> KrausChannel:
    """Amplitude damping with decay probability p: |1> relaxes toward |0>."""
    p = _check_p(p)
    k1 = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - p)]], dtype=complex)
    k2 = np.array([[0.0, np.sqrt(p)], [0.0, 0.0]], dtype=complex)
    return KrausChannel([k1, k2], label=f"adc(p={p:g})")


def pdc(p: float) -> KrausChannel:
    """Phase damping with strength p: coherences decay, populations do not."""
    p = _check_p(p)
    k1 = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - p)]], dtype=complex)
    k2 = np.array([[0.0, 0.0], [0.0, np.sqrt(p)]], dtype=complex)
    return KrausChannel([k1, k2], label=f"pdc(p={p:g})")


CHANNEL_FAMILIES = {"adc": adc, "pdc": pdc}


def apply(channel: KrausChannel, rho: DensityMatrix) -> DensityMatrix:
    """Act with a channel on a state of matching dimension."""
    if channel.dim != rho.dim:
        raise ValueError(
            f"channel dimension {channel.dim} does not match state dimension {rho.dim}"
        )
    out = np.zeros_like(rho.matrix)
    for k in channel.kraus_ops:
        out = out + k @ rho.matrix @ k.conj().T
    return DensityMatrix(out)


def _embed_single_qubit(op: np.ndarray, num_qubits: int, target: int) -> np.ndarray:
    left = np.eye(2**target, dtype=complex)
    right = np.eye(2 ** (num_qubits - target - 1), dtype=complex)
    return tensor_product(tensor_product(left, op), right)


def apply_local(channel: KrausChannel, rho: DensityMatrix, target: int) -> DensityMatrix:
    """Act with a single-qubit channel on one qubit of a multi-qubit state."""
    if channel.dim != 2:
        raise ValueError("apply_local expects a single-qubit channel")
    if not 0 <= target < rho.num_qubits:
        raise ValueError(
            f"target {target} out of range for {rho.num_qubits} qubits"
        )
    if rho.num_qubits == 1:
        return apply(channel, rho)
    out = np.zeros_like(rho.matrix)
    for k in channel.kraus_ops:
        big = _embed_single_qubit(k, rho.num_qubits, target)
        out = out + big @ rho.matrix @ big.conj().T
    return DensityMatrix(out)


def _complete_isometry(columns: dict) -> np.ndarray:
    """Unitary whose listed columns are fixed; the rest span the complement.

    The free columns receive zero input amplitude in the dilation, so any
    orthonormal completion gives the same reduced dynamics.
    """
    dim = len(next(iter(columns.values())))
    fixed = np.column_stack([columns[i] for i in sorted(columns)])
    comp = null_space(fixed.conj().T)
    u = np.zeros((dim, dim), dtype=complex)
    free = [i for i in range(dim) if i not in columns]
    for i, col in columns.items():
        u[:, i] = col
    for j, i in enumerate(free):
        u[:, i] = comp[:, j]
    return u


def _dilation_unitary_adc(p: float) -> np.ndarray:
    # basis |system, path>: |0a>, |0b>, |1a>, |1b>
    c0 = np.array([1.0, 0.0, 0.0, 0.0], dtype=complex)
    c2 = np.array([0.0, np.sqrt(p), np.sqrt(1.0 - p), 0.0], dtype=complex)
    return _complete_isometry({0: c0, 2: c2})


def _dilation_unitary_pdc(p: float) -> np.ndarray:
    c0 = np.array([1.0, 0.0, 0.0, 0.0], dtype=complex)
    c2 = np.array([0.0, 0.0, np.sqrt(1.0 - p), np.sqrt(p)], dtype=complex)
    return _complete_isometry({0: c0, 2: c2})


def _dilate(unitary: np.ndarray, rho: DensityMatrix) -> DensityMatrix:
    if rho.num_qubits != 1:
        raise ValueError("dilation acts on a single-qubit state")
    joint = tensor_product(rho.matrix, np.outer(KET_ENV_A, KET_ENV_A.conj()))
    evolved = unitary @ joint @ unitary.conj().T
    # trace out the path qubit (least significant factor)
    reduced = evolved.reshape(2, 2, 2, 2)
    return DensityMatrix(np.einsum("abcb->ac", reduced))


def dilation_adc(p: float, rho: DensityMatrix) -> DensityMatrix:
    """Amplitude damping realized as a system+path unitary plus path trace.

    The polarization qubit enters a Sagnac loop on path |a>; the excited
    component is routed into path |b> with probability p before the paths
    are recombined incoherently. Equals the Kraus form to machine precision.
    """
    return _dilate(_dilation_unitary_adc(_check_p(p)), rho)


def dilation_pdc(p: float, rho: DensityMatrix) -> DensityMatrix:
    """Phase damping via the same loop with the recombination rotation removed."""
    return _dilate(_dilation_unitary_pdc(_check_p(p)), rho)


def apply_local_dilated(family: str, p: float, rho: DensityMatrix,
                        target: int) -> DensityMatrix:
    """Dilation-form damping on qubit ``target`` of a two-qubit state.

    Adjoins the path qubit as a third, least-significant factor, applies the
    dilation unitary on (target, path), and traces the path out again. Only
    target 1 (the receiver's qubit) is supported, which is the arrangement
    the interferometer realizes.
    """
    if rho.num_qubits != 2:
        raise ValueError("apply_local_dilated expects a two-qubit state")
    if target != 1:
        raise ValueError("the path-qubit dilation is only wired to qubit 1")
    build = _dilation_unitary_adc if family == "adc" else _dilation_unitary_pdc
    if family not in ("adc", "pdc"):
        raise ValueError(f"unknown channel family {family!r}")
    u = tensor_product(I2, build(_check_p(p)))
    joint = tensor_product(rho.matrix, np.outer(KET_ENV_A, KET_ENV_A.conj()))
    evolved = u @ joint @ u.conj().T
    reduced = evolved.reshape(4, 2, 4, 2)
    return DensityMatrix(np.einsum("abcb->ac", reduced))


def pb_from_alpha(alpha_deg: float) -> float:
    """Receiver-side damping from the loop waveplate angle: sin^2(2 alpha)."""
    return float(np.sin(2.0 * np.radians(alpha_deg)) ** 2)


def pa_from_theta(theta_deg: float) -> float:
    """Sender-side damping from the pump waveplate angle: 2 - 1/sin^2(2 theta).

    Valid for angles between 22.5 and 45 degrees, which map to p in [0, 1].
    """
    theta = float(theta_deg)
    if not 22.5 - 1e-9 <= theta <= 45.0 + 1e-9:
        raise ValueError(
            f"theta must lie in [22.5, 45] degrees, got {theta}"
        )
    p = 2.0 - 1.0 / np.sin(2.0 * np.radians(theta)) ** 2
    return float(min(max(p, 0.0), 1.0))


def alice_mixture(p_a: float, base: DensityMatrix | None = None) -> DensityMatrix:
    """Sender-side amplitude damping as a two-pure-state weighted average.

    Mixes, with weights (1 - p_a/2, p_a/2), a rebalanced entangled state
    (amplitude ratio set by sin(phi) = 1/sqrt(2 - p_a)) and the product
    state |01><01|. With ``base=None`` the rebalanced state is the ideal
    sin(phi)|00> + cos(phi)|11>, and the mixture reproduces amplitude
    damping on qubit 0 of |phi+> exactly. With a supplied base state the
    rebalancing filter acts on the base instead, mimicking how the pump
    rotation reshapes an imperfect source.
    """
    p_a = _check_p(p_a)
    sin_phi = 1.0 / np.sqrt(2.0 - p_a)
    cos_phi = np.sqrt((1.0 - p_a) / (2.0 - p_a))
    if base is None:
        vec = np.zeros(4, dtype=complex)
        vec[0] = sin_phi
        vec[3] = cos_phi
        rho1 = np.outer(vec, vec.conj())
    else:
        if base.num_qubits != 2:
            raise ValueError("base must be a two-qubit state")
        filt = tensor_product(
            np.sqrt(2.0) * np.diag([sin_phi, cos_phi]).astype(complex), I2
        )
        raw = filt @ base.matrix @ filt.conj().T
        rho1 = raw / np.trace(raw).real
    rho2 = np.zeros((4, 4), dtype=complex)
    rho2[1, 1] = 1.0
    return DensityMatrix((1.0 - 0.5 * p_a) * rho1 + 0.5 * p_a * rho2)


def _golden_max(fun, lo: float, hi: float, xtol: float = 1e-6) -> float:
    """Golden-section maximization of a unimodal scalar function."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fun(c), fun(d)
    while b - a > xtol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fun(d)
    return 0.5 * (a + b)


def estimate_p(measured: DensityMatrix, family: str, side: int,
               base: DensityMatrix, grid_points: int = 51) -> float:
    """Best-fit damping strength of a measured state against a prediction family.

    Maximizes the fidelity between ``measured`` and the family
    p -> apply_local(family(p), base, side) over p in [0, 1]. A coarse
    grid locates the basin, then golden-section search refines it; the
    result is accurate to well within 1e-4 in p.
    """
    if family not in CHANNEL_FAMILIES:
        raise ValueError(f"unknown channel family {family!r}")
    make = CHANNEL_FAMILIES[family]

    def objective(p: float) -> float:
        return state_fidelity(measured, apply_local(make(p), base, side))

    grid = np.linspace(0.0, 1.0, grid_points)
    values = [objective(p) for p in grid]
    best = int(np.argmax(values))
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, grid_points - 1)]
    return _golden_max(objective, lo, hi)


def parse_channel_descriptor(desc: dict):
    """Decode a config-file channel entry into ``(family, p)``.

    Accepts {"family": "adc"|"pdc"} together with exactly one of "p",
    "alpha_deg" (loop waveplate) or "theta_deg" (pump waveplate); angles
    are converted to damping strengths on load.
    """
    if not isinstance(desc, dict) or "family" not in desc:
        raise ValueError("channel descriptor must be an object with a 'family' key")
    family = desc["family"]
    if family not in CHANNEL_FAMILIES:
        raise ValueError(f"unknown channel family {family!r}")
    keys = [k for k in ("p", "alpha_deg", "theta_deg") if k in desc]
    if len(keys) != 1:
        raise ValueError(
            "channel descriptor needs exactly one of 'p', 'alpha_deg', 'theta_deg'"
        )
    if keys[0] == "p":
        p = _check_p(desc["p"])
    elif keys[0] == "alpha_deg":
        p = pb_from_alpha(desc["alpha_deg"])
    else:
        p = pa_from_theta(desc["theta_deg"])
    return family, p
