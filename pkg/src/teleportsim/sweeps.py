"""Reproducible parameter sweeps: every dataset the command line can emit.

Each sweep point is a pure function of (config, point, derived seed), so
results are identical across runs and across worker counts; per-point
seeds are derived from the master seed and the point index, never from
scheduling order.
"""

from __future__ import annotations

import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from ._version import __version__
from .channels import (
    adc,
    alice_mixture,
    apply_local,
    apply_local_dilated,
    pa_from_theta,
    pb_from_alpha,
    pdc,
    estimate_p,
)
from .entanglement import dfdpb, f_adc_both, fef
from .errors import ConfigError
from .states import DensityMatrix, bell_state, load_density_matrix, werner_state
from .teleport import average_fidelity_direct
from .tomography import (
    composite_teleport_fidelity,
    monte_carlo_fidelity_error,
    pauli_settings,
    simulate_counts,
    state_tomo_mle,
)

SWEEP_KINDS = (
    "fef_contour",
    "sensitivity",
    "calib_alice",
    "calib_bob",
    "fidelity_adc",
    "fidelity_pdc",
    "enhancement_search",
)

CRITICAL_P = 2.0 * np.sqrt(2.0) - 2.0
FLAT_LINE_P_A = 0.76


@dataclass
class SweepConfig:
    """Declarative description of one sweep run."""

    kind: str
    resource: str = "ideal"
    grid: dict = field(default_factory=dict)
    stats: str = "exact"
    seed: int = 0
    fmt: str = "csv"
    out: str | None = None
    workers: int = 1
    alice_mode: str = "direct"
    family: str = "adc"
    series: list | None = None

    def validate(self) -> None:
        if self.kind not in SWEEP_KINDS:
            raise ConfigError(f"unknown sweep kind {self.kind!r}")
        if self.fmt not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.fmt!r}")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.alice_mode not in ("direct", "mixture", "both"):
            raise ConfigError(
                f"alice_mode must be direct, mixture or both, got {self.alice_mode!r}"
            )
        if self.family not in ("adc", "pdc"):
            raise ConfigError(f"family must be adc or pdc, got {self.family!r}")
        if self.seed < 0:
            raise ConfigError("seed must be nonnegative")
        self.parsed_stats()
        _resource_prefix(self.resource)

    def parsed_stats(self):
        """('exact',) or ('counts', n_per_setting, n_resamples)."""
        if self.stats == "exact":
            return ("exact",)
        parts = self.stats.split(":")
        if len(parts) == 3 and parts[0] == "counts":
            try:
                n, resamples = int(parts[1]), int(parts[2])
            except ValueError:
                n, resamples = 0, 0
            if n >= 1 and resamples >= 2:
                return ("counts", n, resamples)
        raise ConfigError(
            f"stats must be 'exact' or 'counts:<n>:<resamples>', got {self.stats!r}"
        )


def _resource_prefix(spec: str) -> str:
    if spec == "ideal":
        return "ideal"
    if spec.startswith("werner:") or spec.startswith("file:"):
        return spec.split(":", 1)[0]
    raise ConfigError(
        f"resource must be 'ideal', 'werner:<v>' or 'file:<path>', got {spec!r}"
    )


def load_resource(spec: str) -> DensityMatrix:
    """Resolve a resource spec string into the two-qubit base state."""
    kind = _resource_prefix(spec)
    if kind == "ideal":
        return bell_state("phi+").to_density_matrix()
    arg = spec.split(":", 1)[1]
    if kind == "werner":
        try:
            v = float(arg)
        except ValueError:
            raise ConfigError(f"bad werner visibility {arg!r}")
        if not 0.0 <= v <= 1.0:
            raise ConfigError(f"werner visibility must lie in [0, 1], got {v}")
        return werner_state(v)
    try:
        return load_density_matrix(arg)
    except OSError as exc:
        raise ConfigError(f"cannot read resource file {arg!r}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"invalid resource file {arg!r}: {exc}") from exc


def _axis(grid: dict, name: str, default_start: float, default_stop: float,
          default_points: int) -> np.ndarray:
    spec = grid.get(name, {})
    if not isinstance(spec, dict):
        raise ConfigError(f"grid axis {name!r} must be an object")
    start = float(spec.get("start", default_start))
    stop = float(spec.get("stop", default_stop))
    points = int(spec.get("points", default_points))
    if points < 2:
        raise ConfigError(f"grid axis {name!r} needs at least 2 points")
    if stop <= start:
        raise ConfigError(f"grid axis {name!r} needs stop > start")
    return np.linspace(start, stop, points)


@dataclass
class SweepResult:
    """Tabulated sweep output plus metadata (config echo, version, seed)."""

    columns: list
    rows: list
    metadata: dict

    def to_csv_text(self) -> str:
        lines = ["# metadata: " + json.dumps(self.metadata, sort_keys=True)]
        lines.append(",".join(self.columns))
        for row in self.rows:
            lines.append(",".join(_format_cell(cell) for cell in row))
        return "\n".join(lines) + "\n"

    def to_json_text(self) -> str:
        payload = {
            "metadata": self.metadata,
            "columns": list(self.columns),
            "rows": [list(row) for row in self.rows],
        }
        return json.dumps(payload, sort_keys=True) + "\n"

    def write(self, out: str | None, fmt: str) -> None:
        text = self.to_csv_text() if fmt == "csv" else self.to_json_text()
        if out is None or out == "-":
            sys.stdout.write(text)
        else:
            with open(out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)


def _format_cell(cell) -> str:
    if cell is None:
        return ""
    if isinstance(cell, str):
        return cell
    if isinstance(cell, (int, np.integer)):
        return str(int(cell))
    return f"{float(cell):.12g}"


def _metadata(cfg: SweepConfig, **extra) -> dict:
    meta = {
        "config": asdict(cfg),
        "code_version": __version__,
        "seed": cfg.seed,
    }
    meta.update(extra)
    return meta


def _map_points(fn, items, workers: int):
    if workers <= 1 or len(items) < 2:
        return [fn(item) for item in items]
    chunk = max(1, len(items) // (workers * 4))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunk))


# ---------------------------------------------------------------------------
# point evaluators (module level so worker processes can import them)

def _fef_point(args):
    p_a, p_b, base_matrix = args
    if base_matrix is None:
        return f_adc_both(p_a, p_b)
    state = DensityMatrix(base_matrix)
    state = apply_local(adc(p_a), state, 0)
    state = apply_local(adc(p_b), state, 1)
    return fef(state).f


def _damped_resource(base_matrix, ideal: bool, p_a: float, p_b: float,
                     bob_family: str, alice_mode: str) -> DensityMatrix:
    base = DensityMatrix(base_matrix)
    if alice_mode == "mixture":
        state = alice_mixture(p_a, None if ideal else base)
    else:
        state = apply_local(adc(p_a), base, 0)
    bob = adc(p_b) if bob_family == "adc" else pdc(p_b)
    return apply_local(bob, state, 1)


def _fidelity_point(args):
    (base_matrix, ideal, p_a, p_b, bob_family, alice_mode, stats, seed,
     index) = args
    resource = _damped_resource(base_matrix, ideal, p_a, p_b, bob_family,
                                alice_mode)
    if stats[0] == "exact":
        return composite_teleport_fidelity(resource), None
    _, n_per_setting, n_resamples = stats
    mean, std = monte_carlo_fidelity_error(
        resource, n_per_setting, n_resamples, seed=(seed, index)
    )
    return mean, std


def _calibration_point(args):
    (base_matrix, ideal, side, family, angle, stats, seed, index) = args
    base = DensityMatrix(base_matrix)
    if side == "bob":
        p_true = pb_from_alpha(angle)
        damped = apply_local_dilated(family, p_true, base, 1)
        target = 1
    else:
        p_true = pa_from_theta(angle)
        damped = alice_mixture(p_true, None if ideal else base)
        target = 0
    if stats[0] == "exact":
        return p_true, estimate_p(damped, family, target, base), None
    _, n_per_setting, n_resamples = stats
    estimates = []
    for r in range(n_resamples):
        records = simulate_counts(
            damped, pauli_settings(2), n_per_setting, (seed, index, r)
        )
        reconstructed = state_tomo_mle(records)
        estimates.append(estimate_p(reconstructed, family, target, base))
    return p_true, float(np.mean(estimates)), float(np.std(estimates, ddof=1))


def _enhancement_fidelity(args):
    base_matrix, ideal, p_a, p_b, alice_mode = args
    resource = _damped_resource(base_matrix, ideal, p_a, p_b, "adc", alice_mode)
    return average_fidelity_direct(resource)


# ---------------------------------------------------------------------------
# sweeps

def run_fef_contour(cfg: SweepConfig) -> SweepResult:
    """Fully entangled fraction over the (p_a, p_b) damping plane.

    Ideal resources use the two-sided closed form; otherwise the channels
    are applied to the configured base state and the general fraction is
    computed. The two reference lines (p_a = 0.76 and the single-sided
    classical-threshold value) ride along in the metadata.
    """
    cfg.validate()
    ideal = cfg.resource == "ideal"
    base_matrix = None if ideal else load_resource(cfg.resource).matrix
    pa_axis = _axis(cfg.grid, "p_a", 0.0, 1.0, 101)
    pb_axis = _axis(cfg.grid, "p_b", 0.0, 1.0, 101)
    items = [(p_a, p_b, base_matrix) for p_a in pa_axis for p_b in pb_axis]
    values = _map_points(_fef_point, items, cfg.workers)
    rows = [
        (item[0], item[1], value) for item, value in zip(items, values)
    ]
    lines = {}
    for name, line_pa in (("p_a_flat", FLAT_LINE_P_A), ("p_a_critical", CRITICAL_P)):
        line = [
            [float(p_b), _fef_point((line_pa, p_b, base_matrix))]
            for p_b in pb_axis
        ]
        lines[name] = {"p_a": float(line_pa), "points": line}
    meta = _metadata(cfg, reference_lines=lines,
                     grid_size=len(pa_axis) * len(pb_axis))
    return SweepResult(columns=["p_a", "p_b", "fef"], rows=rows, metadata=meta)


def run_sensitivity(cfg: SweepConfig) -> SweepResult:
    """Derivative of the two-sided damping fraction where it stays above 1/2.

    Points with fraction at or below 1/2 keep their grid row but carry an
    absent metric. The 1/2 contour trace is reported in the metadata.
    """
    cfg.validate()
    if cfg.resource != "ideal":
        raise ConfigError("the sensitivity sweep is defined for the ideal resource")
    pa_axis = _axis(cfg.grid, "p_a", 0.0, 1.0, 101)
    pb_axis = _axis(cfg.grid, "p_b", 0.0, 1.0, 101)
    rows = []
    for p_a in pa_axis:
        for p_b in pb_axis:
            if p_b < 1.0 and f_adc_both(p_a, p_b) > 0.5:
                rows.append((p_a, p_b, dfdpb(p_a, p_b)))
            else:
                rows.append((p_a, p_b, None))
    contour = []
    for p_a in pa_axis:
        contour.extend([float(p_a), p_b] for p_b in _half_crossings(p_a, pb_axis))
    meta = _metadata(cfg, half_contour=contour,
                     grid_size=len(pa_axis) * len(pb_axis))
    return SweepResult(columns=["p_a", "p_b", "dfdpb"], rows=rows, metadata=meta)


def _half_crossings(p_a: float, pb_axis: np.ndarray):
    crossings = []
    g_prev = f_adc_both(p_a, pb_axis[0]) - 0.5
    for lo, hi in zip(pb_axis[:-1], pb_axis[1:]):
        g_hi = f_adc_both(p_a, hi) - 0.5
        if g_prev == 0.0:
            crossings.append(float(lo))
        elif g_prev * g_hi < 0.0:
            a, b, g_a = lo, hi, g_prev
            while b - a > 1e-6:
                mid = 0.5 * (a + b)
                g_mid = f_adc_both(p_a, mid) - 0.5
                if g_a * g_mid <= 0.0:
                    b = mid
                else:
                    a, g_a = mid, g_mid
            crossings.append(0.5 * (a + b))
        g_prev = g_hi
    if g_prev == 0.0:
        crossings.append(float(pb_axis[-1]))
    return crossings


def run_calibration(cfg: SweepConfig) -> SweepResult:
    """Waveplate-angle calibration round trip for either party.

    Synthesizes the damped state at each angle (path-qubit dilation on the
    receiver side, two-state mixture on the sender side), optionally adds
    count noise, and tabulates the best-fit damping against the analytic
    angle law.
    """
    cfg.validate()
    side = "bob" if cfg.kind == "calib_bob" else "alice"
    if side == "alice" and cfg.family != "adc":
        raise ConfigError("sender-side calibration only models amplitude damping")
    base = load_resource(cfg.resource)
    ideal = cfg.resource == "ideal"
    if side == "bob":
        angles = _axis(cfg.grid, "alpha_deg", 0.0, 45.0, 46)
    else:
        angles = _axis(cfg.grid, "theta_deg", 22.5, 45.0, 24)
    stats = cfg.parsed_stats()
    items = [
        (base.matrix, ideal, side, cfg.family, float(angle), stats, cfg.seed, i)
        for i, angle in enumerate(angles)
    ]
    results = _map_points(_calibration_point, items, cfg.workers)
    with_err = stats[0] == "counts"
    columns = ["angle_deg", "p_theory", "p_est"] + (["err"] if with_err else [])
    rows = []
    for angle, (p_true, p_est, err) in zip(angles, results):
        row = (float(angle), p_true, p_est) + ((err,) if with_err else ())
        rows.append(row)
    meta = _metadata(cfg, side=side, grid_size=len(angles))
    return SweepResult(columns=columns, rows=rows, metadata=meta)


_DEFAULT_SERIES = {
    "fidelity_adc": [0.0, 0.7, "pb"],
    "fidelity_pdc": [0.0, 0.5],
}


def _series_label(entry) -> str:
    return "pa=pb" if entry == "pb" else f"pa={float(entry):g}"


def _run_fidelity(cfg: SweepConfig, bob_family: str) -> SweepResult:
    cfg.validate()
    base = load_resource(cfg.resource)
    ideal = cfg.resource == "ideal"
    pb_axis = _axis(cfg.grid, "p_b", 0.0, 1.0, 101)
    series = cfg.series if cfg.series is not None else _DEFAULT_SERIES[cfg.kind]
    for entry in series:
        if entry != "pb" and not isinstance(entry, (int, float)):
            raise ConfigError(f"series entries must be numbers or 'pb', got {entry!r}")
    modes = ["direct", "mixture"] if cfg.alice_mode == "both" else [cfg.alice_mode]
    stats = cfg.parsed_stats()
    with_err = stats[0] == "counts"

    items = []
    keys = []
    index = 0
    for entry in series:
        for mode in modes:
            for p_b in pb_axis:
                p_a = float(p_b) if entry == "pb" else float(entry)
                items.append((base.matrix, ideal, p_a, float(p_b), bob_family,
                              mode, stats, cfg.seed, index))
                keys.append((_series_label(entry), mode, p_a, float(p_b)))
                index += 1
    values = _map_points(_fidelity_point, items, cfg.workers)

    columns = ["series", "alice_mode", "p_a", "p_b", "fidelity"]
    if with_err:
        columns.append("err")
    rows = []
    for (label, mode, p_a, p_b), (fid, err) in zip(keys, values):
        row = (label, mode, p_a, p_b, fid) + ((err,) if with_err else ())
        rows.append(row)

    meta = _metadata(cfg, bob_family=bob_family,
                     grid_size=len(pb_axis) * len(series) * len(modes))
    if len(modes) == 2:
        diffs = {}
        for label in {k[0] for k in keys}:
            direct = [r[4] for r in rows if r[0] == label and r[1] == "direct"]
            mixture = [r[4] for r in rows if r[0] == label and r[1] == "mixture"]
            diffs[label] = float(np.max(np.abs(np.array(direct) - np.array(mixture))))
        meta["alice_mode_max_abs_diff"] = diffs
    return SweepResult(columns=columns, rows=rows, metadata=meta)


def run_fidelity_adc(cfg: SweepConfig) -> SweepResult:
    """Teleportation fidelity under two-sided amplitude damping.

    Default series fix the sender damping at 0 and 0.7 and tie it to the
    receiver damping on the diagonal.
    """
    return _run_fidelity(cfg, "adc")


def run_fidelity_pdc(cfg: SweepConfig) -> SweepResult:
    """Teleportation fidelity with receiver-side phase damping.

    Default series fix the sender amplitude damping at 0 and 0.5.
    """
    return _run_fidelity(cfg, "pdc")


def run_enhancement_search(cfg: SweepConfig) -> dict:
    """Locate the classical crossing and the damping-induced optimum.

    Finds p_b_star where the p_a = 0 fidelity curve crosses 2/3 by
    bisection, then scans p_a over a 201-point grid at that fixed p_b and
    reports the grid argmax. With no crossing, the report marks it absent
    and carries the boundary fidelities instead.
    """
    cfg.validate()
    if cfg.parsed_stats()[0] != "exact":
        raise ConfigError("the enhancement search runs in exact mode only")
    mode = "direct" if cfg.alice_mode == "both" else cfg.alice_mode
    base = load_resource(cfg.resource)
    ideal = cfg.resource == "ideal"

    def fidelity(p_a: float, p_b: float) -> float:
        return _enhancement_fidelity((base.matrix, ideal, p_a, p_b, mode))

    report = {
        "p_b_star": None,
        "p_a_opt": None,
        "F_max": None,
        "F_at_pa0": None,
        "crossing_found": False,
        "metadata": _metadata(cfg, alice_mode=mode),
    }

    coarse = np.linspace(0.0, 1.0, 101)
    g_values = [fidelity(0.0, p) - 2.0 / 3.0 for p in coarse]
    bracket = None
    for (lo, g_lo), (hi, g_hi) in zip(zip(coarse, g_values),
                                      zip(coarse[1:], g_values[1:])):
        if g_lo == 0.0:
            bracket = (lo, lo)
            break
        if g_lo * g_hi < 0.0:
            bracket = (lo, hi)
            break
    if bracket is None:
        report["boundary_F"] = {
            "p_b=0": fidelity(0.0, 0.0),
            "p_b=1": fidelity(0.0, 1.0),
        }
        return report

    lo, hi = bracket
    g_lo = fidelity(0.0, lo) - 2.0 / 3.0
    while hi - lo > 1e-4:
        mid = 0.5 * (lo + hi)
        g_mid = fidelity(0.0, mid) - 2.0 / 3.0
        if g_lo * g_mid <= 0.0:
            hi = mid
        else:
            lo, g_lo = mid, g_mid
    p_b_star = 0.5 * (lo + hi)

    scan = np.linspace(0.0, 1.0, 201)
    values = [fidelity(p_a, p_b_star) for p_a in scan]
    best = int(np.argmax(values))
    report.update(
        p_b_star=float(p_b_star),
        p_a_opt=float(scan[best]),
        F_max=float(values[best]),
        F_at_pa0=float(values[0]),
        crossing_found=True,
        scan_p_a=[float(p) for p in scan],
        scan_F=[float(v) for v in values],
    )
    return report


SWEEP_RUNNERS = {
    "fef_contour": run_fef_contour,
    "sensitivity": run_sensitivity,
    "calib_alice": run_calibration,
    "calib_bob": run_calibration,
    "fidelity_adc": run_fidelity_adc,
    "fidelity_pdc": run_fidelity_pdc,
    "enhancement_search": run_enhancement_search,
}
