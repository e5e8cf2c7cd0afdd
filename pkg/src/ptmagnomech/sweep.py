"""Deterministic (optionally threaded) parameter sweeps and spectral feature extraction."""
from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import Optional

import numpy as np
from scipy.signal import find_peaks

from . import __version__
from .dispersion import g_b_from_power, group_delay_arrays
from .model import PARAM_NAMES, SystemParams, build_heff, min_pairwise_gap, valid_mask
from .response import principal_phase, response_arrays
from .stability import DEFAULT_MARGIN, char_poly, drift_matrix, hurwitz_determinants, routh_hurwitz_stable

__all__ = [
    "AXIS_NAMES",
    "Axis",
    "GridTooCoarseWarning",
    "SWEEP_FIELDS",
    "SpectrumFeatures",
    "SweepGrid",
    "SweepResult",
    "extract_features",
    "run_sweep",
    "spectrum_features",
]

SWEEP_FIELDS = ("t_mag", "t_mag2", "phase", "tau_g", "stable", "min_gap", "max_re_eig")
AXIS_NAMES = PARAM_NAMES + ("delta_p", "power")
REASON_CODES = ("pole", "zero-transmission", "eig-fail", "invalid-params")

# Fixed so that the partition of the grid never depends on the worker count.
CHUNK_SIZE = 2048


@dataclass(frozen=True)
class Axis:
    name: str
    start: float
    stop: float
    count: int

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise ValueError(f"unknown sweep axis {self.name!r}")
        if int(self.count) != self.count or self.count < 2:
            raise ValueError(f"axis {self.name}: count must be an integer >= 2, got {self.count!r}")
        if self.start == self.stop:
            raise ValueError(f"axis {self.name}: start and stop coincide")

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, int(self.count))


@dataclass(frozen=True)
class SweepGrid:
    """One or two swept axes on top of a base parameter set.

    ``probe_detuning`` is the probe detuning used when ``delta_p`` is not an
    axis.  A ``power`` axis rescales ``g_b`` as ``sqrt(P / power_ref)``.
    """

    axis1: Axis
    axis2: Optional[Axis] = None
    base: SystemParams = field(default_factory=SystemParams)
    fields_requested: tuple = ("t_mag", "t_mag2", "phase")
    probe_detuning: float = 0.0
    power_ref: float = 1.0
    heff_convention: str = "as_printed"
    external_coupling_ratio: float = 1.0
    symmetrize_mech_coupling: bool = False
    margin: float = DEFAULT_MARGIN

    def __post_init__(self):
        unknown = [f for f in self.fields_requested if f not in SWEEP_FIELDS]
        if unknown:
            raise ValueError(f"unknown sweep field(s) {unknown}; expected some of {SWEEP_FIELDS}")
        if not self.fields_requested:
            raise ValueError("no fields requested")
        if self.axis2 is not None and self.axis2.name == self.axis1.name:
            raise ValueError("the two axes must differ")

    @property
    def axes(self) -> tuple:
        return (self.axis1,) if self.axis2 is None else (self.axis1, self.axis2)

    @property
    def shape(self) -> tuple:
        return tuple(int(a.count) for a in self.axes)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))


@dataclass
class SweepResult:
    """Column table of a sweep, rows in grid-index order (first axis outermost).

    ``reasons`` maps each field to an array of reason codes, empty where the
    cell holds a value.
    """

    grid: SweepGrid
    coords: dict
    data: dict
    reasons: dict
    provenance: dict

    def columns(self) -> list:
        return list(self.coords.items()) + [(f, self.data[f]) for f in self.grid.fields_requested]

    def row_reasons(self) -> np.ndarray:
        out = np.full(self.grid.size, "", dtype=object)
        for f in self.grid.fields_requested:
            r = self.reasons[f]
            for i in np.flatnonzero(r != ""):
                codes = set(filter(None, str(out[i]).split(";"))) | {str(r[i])}
                out[i] = ";".join(sorted(codes))
        return out.astype(str)

    def table_bytes(self) -> bytes:
        return b"".join(np.ascontiguousarray(col).tobytes() for _, col in self.columns())

    def as_grid(self, name: str) -> np.ndarray:
        col = self.coords[name] if name in self.coords else self.data[name]
        return col.reshape(self.grid.shape)


def _coordinates(grid: SweepGrid, idx: np.ndarray) -> dict:
    coords = {}
    if grid.axis2 is None:
        coords[grid.axis1.name] = grid.axis1.values()[idx]
    else:
        n2 = int(grid.axis2.count)
        coords[grid.axis1.name] = grid.axis1.values()[idx // n2]
        coords[grid.axis2.name] = grid.axis2.values()[idx % n2]
    return coords


def _eigvals_tolerant(mats: np.ndarray):
    try:
        return np.linalg.eigvals(mats), np.zeros(mats.shape[0], dtype=bool)
    except np.linalg.LinAlgError:
        ev = np.full(mats.shape[:-1], np.nan, dtype=complex)
        failed = np.zeros(mats.shape[0], dtype=bool)
        for i, m in enumerate(mats):
            try:
                ev[i] = np.linalg.eigvals(m)
            except np.linalg.LinAlgError:
                failed[i] = True
        return ev, failed


def _evaluate(grid: SweepGrid, idx: np.ndarray):
    n = idx.size
    coords = _coordinates(grid, idx)
    changes = {}
    dp = grid.probe_detuning
    for name, vals in coords.items():
        if name == "delta_p":
            dp = vals
        elif name == "power":
            changes["g_b"] = g_b_from_power(vals, grid.base.g_b, grid.power_ref)
            if grid.base.g_mb is not None:
                changes["g_mb"] = g_b_from_power(vals, grid.base.g_mb, grid.power_ref)
        else:
            changes[name] = vals
    p = replace(grid.base, **changes)
    ok = np.broadcast_to(valid_mask(p), (n,))
    if not ok.all():
        # invalid rows are evaluated at the defaults and blanked afterwards
        safe = SystemParams()
        p = replace(p, **{
            name: np.where(ok, np.broadcast_to(np.asarray(getattr(p, name), dtype=float), (n,)), getattr(safe, name))
            for name in PARAM_NAMES
            if getattr(p, name) is not None
        })
    dp = np.broadcast_to(np.asarray(dp, dtype=float), (n,))

    data, reasons = {}, {}

    def put(name, values, bad, code):
        values = np.array(np.broadcast_to(values, (n,)), dtype=float)
        r = np.full(n, "", dtype="<U17")
        r[np.broadcast_to(bad, (n,))] = code
        r[~ok] = "invalid-params"
        values[r != ""] = np.nan
        data[name] = values
        reasons[name] = r

    wanted = set(grid.fields_requested)
    with np.errstate(all="ignore"):
        if wanted & {"t_mag", "t_mag2", "phase"}:
            _, _, _, t, pole = response_arrays(p, dp, grid.external_coupling_ratio)
            if "t_mag" in wanted:
                put("t_mag", np.abs(t), pole, "pole")
            if "t_mag2" in wanted:
                put("t_mag2", t.real**2 + t.imag**2, pole, "pole")
            if "phase" in wanted:
                put("phase", principal_phase(t), pole, "pole")
        if "tau_g" in wanted:
            tau, bad = group_delay_arrays(p, dp, grid.external_coupling_ratio)
            _, _, _, _, pole = response_arrays(p, dp, grid.external_coupling_ratio)
            r_pole = np.broadcast_to(pole, (n,))
            put("tau_g", tau, bad, "zero-transmission")
            reasons["tau_g"][r_pole & ok] = "pole"
        if wanted & {"stable", "max_re_eig"}:
            a = np.broadcast_to(drift_matrix(p, grid.symmetrize_mech_coupling), (n, 6, 6))
            ev, failed = _eigvals_tolerant(a)
            max_re = ev.real.max(axis=-1)
            if "stable" in wanted:
                cp = char_poly(a)
                stable = routh_hurwitz_stable(cp.s, hurwitz_determinants(cp)).astype(float)
                put("stable", stable, failed, "eig-fail")
            if "max_re_eig" in wanted:
                put("max_re_eig", max_re, failed, "eig-fail")
        if "min_gap" in wanted:
            h = np.broadcast_to(build_heff(p, grid.heff_convention), (n, 3, 3))
            ev, failed = _eigvals_tolerant(h)
            put("min_gap", min_pairwise_gap(ev), failed, "eig-fail")
    return coords, data, reasons


def run_sweep(grid: SweepGrid, workers: int = 1) -> SweepResult:
    """Evaluate every requested field at every grid point.

    The grid is cut into fixed-size chunks written into pre-allocated slots,
    so the output is bitwise identical for any ``workers``.  Singular or
    invalid points become NaN cells with a reason code.
    """
    size = grid.size
    coords = {a.name: np.empty(size) for a in grid.axes}
    data = {f: np.empty(size) for f in grid.fields_requested}
    reasons = {f: np.empty(size, dtype="<U17") for f in grid.fields_requested}
    chunks = [np.arange(lo, min(lo + CHUNK_SIZE, size)) for lo in range(0, size, CHUNK_SIZE)]

    def work(idx):
        c, d, r = _evaluate(grid, idx)
        sl = slice(int(idx[0]), int(idx[-1]) + 1)
        for k, v in c.items():
            coords[k][sl] = v
        for k, v in d.items():
            data[k][sl] = v
            reasons[k][sl] = r[k]

    if workers <= 1:
        for idx in chunks:
            work(idx)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(work, chunks))

    provenance = {
        "software": "ptmagnomech",
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "base": grid.base.as_dict(),
    }
    return SweepResult(grid=grid, coords=coords, data=data, reasons=reasons, provenance=provenance)


class GridTooCoarseWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SpectrumFeatures:
    window_count: int
    window_centers: list
    max_gain: float
    asymmetry: float


def spectrum_features(delta_p, t_mag2, prominence_fraction: float = 0.05) -> SpectrumFeatures:
    """Count transparency windows as prominent interior maxima of ``t_mag2``.

    A maximum counts when its prominence exceeds ``prominence_fraction`` of
    the column's dynamic range.  ``asymmetry`` is the peak height on the
    positive-detuning side minus that on the negative side.
    """
    x = np.asarray(delta_p, dtype=float)
    y = np.asarray(t_mag2, dtype=float)
    finite = np.isfinite(y)
    span = np.ptp(y[finite]) if finite.any() else 0.0
    if span > 0:
        filled = np.where(finite, y, np.nanmin(y))
        peaks, _ = find_peaks(filled, prominence=prominence_fraction * span)
    else:
        peaks = np.array([], dtype=int)
    if peaks.size > 1 and np.diff(peaks).min() < 3:
        warnings.warn("transparency windows closer than 3 samples; refine the grid", GridTooCoarseWarning)
    pos, neg = y[(x > 0) & finite], y[(x < 0) & finite]
    asym = pos.max() - neg.max() if pos.size and neg.size else float("nan")
    return SpectrumFeatures(
        window_count=int(peaks.size),
        window_centers=[float(v) for v in x[peaks]],
        max_gain=float(np.nanmax(y)) if finite.any() else float("nan"),
        asymmetry=float(asym),
    )


def extract_features(spectrum: SweepResult, prominence_fraction: float = 0.05) -> SpectrumFeatures:
    grid = spectrum.grid
    if grid.axis2 is not None or grid.axis1.name != "delta_p":
        raise ValueError("feature extraction needs a 1D sweep over delta_p")
    if "t_mag2" not in spectrum.data:
        raise ValueError("feature extraction needs the t_mag2 column")
    return spectrum_features(spectrum.coords["delta_p"], spectrum.data["t_mag2"], prominence_fraction)
