"""Fully entangled fraction, its damping closed forms, and the fidelity link.

The fully entangled fraction f of a two-qubit state is its maximum overlap
with any maximally entangled pure state; teleportation through the state
beats the classical limit exactly when f > 1/2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ThresholdNotFoundError
from .states import DensityMatrix, PureState

# Columns are the phase-adjusted Bell basis (e1..e4) in which every real
# unit combination is maximally entangled, reducing the overlap
# maximization to a symmetric eigenvalue problem.
_MAGIC_BASIS = np.array(
    [
        [1.0, 1.0j, 0.0, 0.0],
        [0.0, 0.0, 1.0j, 1.0],
        [0.0, 0.0, 1.0j, -1.0],
        [1.0, -1.0j, 0.0, 0.0],
    ],
    dtype=complex,
) / np.sqrt(2.0)


@dataclass(frozen=True)
class FefResult:
    """Fully entangled fraction with the maximally entangled state achieving it."""

    f: float
    maximizer: PureState
    method: str  # "closed_form" or "brute_force"


def fef(rho: DensityMatrix) -> FefResult:
    """Fully entangled fraction via the magic-basis eigenvalue closed form.

    f equals the largest eigenvalue of the real part of the state
    expressed in the magic basis; the leading eigenvector rebuilds the
    maximizing maximally entangled state.
    """
    if rho.num_qubits != 2:
        raise ValueError("the fully entangled fraction is defined for two qubits")
    m = _MAGIC_BASIS.conj().T @ rho.matrix @ _MAGIC_BASIS
    real_part = 0.5 * (m.real + m.real.T)
    w, v = np.linalg.eigh(real_part)
    amps = _MAGIC_BASIS @ v[:, -1].astype(complex)
    return FefResult(f=float(w[-1]), maximizer=PureState(amps), method="closed_form")


def _entangled_ket(angles: np.ndarray) -> np.ndarray:
    """(U x I)|phi+> for U = Rz(a) Ry(b) Rz(c); rows of U flattened over sqrt(2)."""
    a, b, c = angles
    za = np.exp(-0.5j * a)
    zc = np.exp(-0.5j * c)
    cb = np.cos(0.5 * b)
    sb = np.sin(0.5 * b)
    u = np.array(
        [
            [za * zc * cb, -za * np.conj(zc) * sb],
            [np.conj(za) * zc * sb, np.conj(za) * np.conj(zc) * cb],
        ]
    )
    return u.reshape(-1) / np.sqrt(2.0)


def fef_bruteforce(rho: DensityMatrix, n_starts: int = 32, tol: float = 1e-8,
                   seed: int = 7) -> FefResult:
    """Fully entangled fraction by direct overlap maximization.

    Parametrizes the maximally entangled states as (U x I)|phi+> with U a
    three-angle rotation and runs multi-start coordinate ascent. Along
    each coordinate the overlap is a pure sinusoid, so each line search
    is solved exactly from three samples. Independent of the eigenvalue
    route, which makes it a usable cross-check oracle.
    """
    if rho.num_qubits != 2:
        raise ValueError("the fully entangled fraction is defined for two qubits")
    if n_starts < 1:
        raise ValueError("n_starts must be at least 1")
    mat = rho.matrix

    def overlap(angles: np.ndarray) -> float:
        ket = _entangled_ket(angles)
        return float(np.real(np.vdot(ket, mat @ ket)))

    rng = np.random.default_rng(seed)
    starts = [np.zeros(3)]
    starts += [rng.uniform(0.0, 2.0 * np.pi, size=3) for _ in range(n_starts - 1)]

    third = 2.0 * np.pi / 3.0
    best_val = -np.inf
    best_angles = starts[0]
    for angles in starts:
        angles = angles.copy()
        current = overlap(angles)
        for _ in range(200):
            previous = current
            for k in range(3):
                f0 = current
                shifted = angles.copy()
                shifted[k] = angles[k] + third
                f1 = overlap(shifted)
                shifted[k] = angles[k] + 2.0 * third
                f2 = overlap(shifted)
                # fit f(delta) = a0 + b0 cos(delta) + c0 sin(delta)
                b0 = (2.0 * f0 - f1 - f2) / 3.0
                c0 = (f1 - f2) / np.sqrt(3.0)
                angles[k] = angles[k] + np.arctan2(c0, b0)
                current = overlap(angles)
            if current - previous < tol:
                break
        if current > best_val:
            best_val = current
            best_angles = angles
    return FefResult(
        f=best_val,
        maximizer=PureState(_entangled_ket(best_angles)),
        method="brute_force",
    )


def teleport_fidelity(f: float, d: int = 2) -> float:
    """Average teleportation fidelity (f d + 1)/(d + 1) from the entangled fraction."""
    if not isinstance(d, (int, np.integer)) or d < 2:
        raise ValueError(f"local dimension d must be an integer >= 2, got {d}")
    if not -1e-12 <= f <= 1.0 + 1e-12:
        raise ValueError(f"entangled fraction must lie in [0, 1], got {f}")
    return (f * d + 1.0) / (d + 1.0)


def _check_range(name: str, p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {p}")
    return p


def f_adc_single(p: float) -> float:
    """Entangled fraction of |phi+> after amplitude damping on one qubit."""
    p = _check_range("p", p)
    return 0.25 * (1.0 + np.sqrt(1.0 - p)) ** 2


def f_adc_both(p_a: float, p_b: float) -> float:
    """Entangled fraction with amplitude damping of strengths p_a, p_b on both qubits."""
    p_a = _check_range("p_a", p_a)
    p_b = _check_range("p_b", p_b)
    s = np.sqrt((1.0 - p_a) * (1.0 - p_b))
    return 0.25 * (p_a * p_b + (1.0 + s) ** 2)


def f_adc_pdc(p_a: float, p_b: float) -> float:
    """Entangled fraction with amplitude damping on one side, phase damping on the other."""
    p_a = _check_range("p_a", p_a)
    p_b = _check_range("p_b", p_b)
    s = np.sqrt((1.0 - p_a) * (1.0 - p_b))
    return 0.5 * (1.0 + s - 0.5 * p_a)


def f_pdc_both(p_a: float, p_b: float) -> float:
    """Entangled fraction with phase damping on both qubits."""
    p_a = _check_range("p_a", p_a)
    p_b = _check_range("p_b", p_b)
    return 0.5 * (1.0 + np.sqrt((1.0 - p_a) * (1.0 - p_b)))


def dfdpb(p_a: float, p_b: float) -> float:
    """Partial derivative of f_adc_both with respect to the receiver-side damping.

    Singular at p_b = 1 (for p_a < 1), where a domain error is raised so
    sweep outputs stay finite.
    """
    p_a = _check_range("p_a", p_a)
    p_b = _check_range("p_b", p_b)
    if p_b >= 1.0:
        raise ValueError("dfdpb is singular at p_b = 1")
    s = np.sqrt((1.0 - p_a) * (1.0 - p_b))
    ratio = np.sqrt((1.0 - p_a) / (1.0 - p_b))
    return 0.25 * (p_a - (1.0 + s) * ratio)


def classical_threshold(f_curve, tol: float = 1e-6) -> float:
    """Damping strength at which an entangled-fraction curve crosses 1/2.

    Bisects f_curve(p) - 1/2 on [0, 1]. If the curve only touches 1/2 at
    an endpoint, that endpoint is returned; with no sign change at all a
    ThresholdNotFoundError is raised.
    """
    lo, hi = 0.0, 1.0
    g_lo = f_curve(lo) - 0.5
    g_hi = f_curve(hi) - 0.5
    if g_lo == 0.0:
        return lo
    if g_hi == 0.0:
        return hi
    if g_lo * g_hi > 0.0:
        if abs(g_hi) < 1e-9:
            return hi
        if abs(g_lo) < 1e-9:
            return lo
        raise ThresholdNotFoundError(
            f"no crossing of 1/2 on [0, 1]: endpoints {g_lo + 0.5:.6f}, {g_hi + 0.5:.6f}"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        g_mid = f_curve(mid) - 0.5
        if g_mid == 0.0:
            return mid
        if g_lo * g_mid < 0.0:
            hi = mid
        else:
            lo, g_lo = mid, g_mid
    return 0.5 * (lo + hi)
