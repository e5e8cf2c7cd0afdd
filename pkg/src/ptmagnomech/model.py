"""System parameters, effective Hamiltonian and its eigenstructure.

All frequencies, rates and couplings are dimensionless: they are expressed in
units of one reference frequency (by default the mechanical frequency, so
``omega_b = 1``).  The microscopic helpers at the bottom of the module are the
only place where SI quantities appear.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from typing import Optional

import numpy as np
from scipy import constants

__all__ = [
    "PARAM_NAMES",
    "ComplexCoupling",
    "EigenReport",
    "MicroscopicInputs",
    "ParameterError",
    "SystemParams",
    "build_heff",
    "composite_coupling",
    "eigen_report",
    "find_exceptional_point",
    "microscopic_couplings",
    "thermal_occupation",
    "validate_microscopic",
    "validate_params",
]

HEFF_CONVENTIONS = ("as_printed", "langevin_consistent")


class ParameterError(ValueError):
    """A parameter record violates one of its invariants.

    ``field`` names the offending entry.
    """

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class SystemParams:
    """Rates, detunings and couplings of the cavity-magnon-phonon system.

    The defaults are the Hermitian double-window base set used by the figure
    presets (see :mod:`ptmagnomech.presets`), in units of ``omega_b``.

    ``g_mb`` is the magnon-side magnomechanical coefficient.  ``None`` ties it
    to ``g_b``; use :attr:`g_mb_value` to read the effective number.

    Fields may hold numpy arrays instead of floats; the sweep engine relies on
    this to evaluate many grid points in one vectorized call.
    """

    delta_a: float = 100.0
    delta_m: float = 100.0
    omega_b: float = 1.0
    kappa_a: float = 8.0
    kappa_m: float = 8.0
    gamma_b: float = 0.1
    g_a: float = 200.0
    g_b: float = 10.0
    g_mb: Optional[float] = None
    gamma_nh: float = 0.0
    theta: float = 0.0
    eta_p: float = 1.0

    @property
    def g_mb_value(self):
        return self.g_b if self.g_mb is None else self.g_mb

    def with_values(self, **changes) -> "SystemParams":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


PARAM_NAMES = tuple(f.name for f in fields(SystemParams))

_STRICTLY_POSITIVE = ("omega_b", "kappa_a", "kappa_m", "gamma_b", "eta_p")
_NON_NEGATIVE = ("g_a", "g_b", "g_mb", "gamma_nh")


def validate_params(raw: SystemParams) -> SystemParams:
    """Return ``raw`` unchanged if every invariant holds.

    Raises
    ------
    ParameterError
        For the first violated invariant, in field order.
    """
    for name in PARAM_NAMES:
        value = getattr(raw, name)
        if value is None:
            continue
        if not isinstance(value, (int, float, np.floating, np.integer)) or isinstance(value, bool):
            raise ParameterError(name, f"expected a real number, got {value!r}")
        if not math.isfinite(value):
            raise ParameterError(name, f"must be finite, got {value!r}")
        if name in _STRICTLY_POSITIVE and not value > 0:
            raise ParameterError(name, f"must be strictly positive, got {value!r}")
        if name in _NON_NEGATIVE and not value >= 0:
            raise ParameterError(name, f"must be non-negative, got {value!r}")
    return raw


def valid_mask(p: SystemParams) -> np.ndarray:
    """Elementwise version of :func:`validate_params` for array-valued records."""
    ok = True
    for name in PARAM_NAMES:
        value = getattr(p, name)
        if value is None:
            continue
        value = np.asarray(value, dtype=float)
        ok = ok & np.isfinite(value)
        if name in _STRICTLY_POSITIVE:
            ok = ok & (value > 0)
        elif name in _NON_NEGATIVE:
            ok = ok & (value >= 0)
    return np.asarray(ok)


@dataclass(frozen=True)
class ComplexCoupling:
    """Cavity-magnon coupling ``i G_a + Gamma exp(i theta)`` (Langevin convention)."""

    value: complex

    @property
    def k_r(self) -> float:
        return self.value.real

    @property
    def k_i(self) -> float:
        return self.value.imag


def _coupling(p: SystemParams):
    return 1j * p.g_a + p.gamma_nh * np.exp(1j * p.theta)


def composite_coupling(p: SystemParams) -> ComplexCoupling:
    if p.gamma_nh == 0:
        # exp(i theta) drops out exactly
        return ComplexCoupling(complex(0.0, p.g_a))
    return ComplexCoupling(complex(_coupling(p)))


def build_heff(p: SystemParams, convention: str = "as_printed") -> np.ndarray:
    """Effective 3x3 Hamiltonian in the (cavity, magnon, phonon) basis.

    ``as_printed`` puts ``G_a + i Gamma e^{i theta}`` on the cavity-magnon
    entries.  ``langevin_consistent`` uses ``G_a - i Gamma e^{i theta}``,
    which is ``-i`` times the coupling that appears in the equations of
    motion and the probe response.

    Array-valued parameter records give a stack of shape ``(..., 3, 3)``.
    """
    if convention == "as_printed":
        k = p.g_a + 1j * p.gamma_nh * np.exp(1j * p.theta)
    elif convention == "langevin_consistent":
        k = p.g_a - 1j * p.gamma_nh * np.exp(1j * p.theta)
    else:
        raise ValueError(f"unknown Hamiltonian convention {convention!r}; expected one of {HEFF_CONVENTIONS}")
    d1 = p.delta_a + 1j * p.kappa_a
    d2 = p.delta_m + 1j * p.kappa_m
    d3 = p.omega_b + 1j * p.gamma_b
    d1, d2, d3, k, gb, gmb = np.broadcast_arrays(d1, d2, d3, k, p.g_b, p.g_mb_value)
    h = np.zeros(d1.shape + (3, 3), dtype=complex)
    h[..., 0, 0] = d1
    h[..., 1, 1] = d2
    h[..., 2, 2] = d3
    h[..., 0, 1] = k
    h[..., 1, 0] = k
    h[..., 1, 2] = gb
    h[..., 2, 1] = gmb
    return h


@dataclass(frozen=True)
class EigenReport:
    eigenvalues: np.ndarray
    min_gap: float
    pt_residual: float


# parity: a <-> -m, phonon untouched
_PARITY = np.array([[0, -1, 0], [-1, 0, 0], [0, 0, 1]], dtype=complex)
_MAGNON_FLIP = np.diag([1, -1, 1]).astype(complex)


def sort_eigenvalues(ev: np.ndarray) -> np.ndarray:
    """Order by real part, then imaginary part (last axis)."""
    ev = np.asarray(ev)
    order = np.lexsort((ev.imag, ev.real), axis=-1)
    return np.take_along_axis(ev, order, axis=-1)


def min_pairwise_gap(ev: np.ndarray) -> np.ndarray:
    ev = np.asarray(ev)
    diff = np.abs(ev[..., :, None] - ev[..., None, :])
    n = ev.shape[-1]
    iu = np.triu_indices(n, k=1)
    return diff[..., iu[0], iu[1]].min(axis=-1)


def pt_transform(h: np.ndarray, magnon_sign_flip: bool = False) -> np.ndarray:
    """Return ``U conj(H) U^-1`` with U the signed cavity-magnon swap.

    With ``magnon_sign_flip`` the time-reversal step also maps m -> -m.
    """
    u = _MAGNON_FLIP @ _PARITY if magnon_sign_flip else _PARITY
    return u @ np.conj(h) @ np.linalg.inv(u)


def eigen_report(h: np.ndarray, magnon_sign_flip: bool = False) -> EigenReport:
    h = np.asarray(h, dtype=complex)
    if not np.all(np.isfinite(h)):
        raise np.linalg.LinAlgError("Hamiltonian has non-finite entries")
    ev = sort_eigenvalues(np.linalg.eigvals(h))
    residual = np.abs(pt_transform(h, magnon_sign_flip) - h).max()
    return EigenReport(eigenvalues=ev, min_gap=float(min_pairwise_gap(ev)), pt_residual=float(residual))


def _golden_section(f, a: float, b: float, max_iter: int = 200) -> float:
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if abs(b - a) <= 4 * np.finfo(float).eps * max(abs(a), abs(b), 1.0):
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return c if fc <= fd else d


def find_exceptional_point(
    p: SystemParams,
    vary: str,
    bounds: tuple[float, float],
    threshold: float = 1e-6,
    seeds: int = 64,
    convention: str = "as_printed",
) -> Optional[float]:
    """Locate the value of ``vary`` in ``bounds`` where two eigenvalues meet.

    A coarse scan over ``seeds`` evenly spaced values picks the smallest
    eigenvalue gap; golden-section search then refines inside the two
    neighbouring scan cells.  Returns ``None`` when the refined gap is still
    above ``threshold``.
    """
    if vary not in PARAM_NAMES:
        raise ParameterError(vary, "not a SystemParams field")
    lo, hi = sorted(float(x) for x in bounds)
    if not lo < hi:
        raise ValueError("empty scan range")

    def gap(x: float) -> float:
        ev = np.linalg.eigvals(build_heff(replace(p, **{vary: x}), convention))
        return float(min_pairwise_gap(ev))

    xs = np.linspace(lo, hi, seeds)
    gaps = np.array([gap(x) for x in xs])
    i = int(np.argmin(gaps))
    a = xs[max(i - 1, 0)]
    b = xs[min(i + 1, seeds - 1)]
    x_best = _golden_section(gap, a, b)
    if gap(x_best) > gaps[i]:
        x_best = float(xs[i])
    if gap(x_best) > threshold:
        return None
    return float(x_best)


# --- microscopic helpers (SI in, reference units out) ---------------------

DEFAULT_MECHANICAL_FREQUENCY = 2 * math.pi * 9.88e6  # rad/s


@dataclass(frozen=True)
class MicroscopicInputs:
    """SI inputs for the magnon drive and photon-magnon coupling.

    ``volume`` is the sample volume (``N = spin_density * volume``) and
    ``v_s`` the cavity mode volume.
    """

    b0: float = 1e-3
    spin_density: float = 2e28
    volume: float = 4.0 / 3.0 * math.pi * (125e-6) ** 3
    gyro: float = 2 * math.pi * 28e9
    g_s: float = 2.0
    mu_b: float = constants.physical_constants["Bohr magneton"][0]
    mu_0: float = constants.mu_0
    omega_c: float = 2 * math.pi * 10e9
    v_s: float = 4.0 / 3.0 * math.pi * (125e-6) ** 3
    temperature: float = 10e-3


def validate_microscopic(m: MicroscopicInputs) -> MicroscopicInputs:
    for f in fields(m):
        value = getattr(m, f.name)
        if not math.isfinite(value):
            raise ParameterError(f.name, "must be finite")
        # zero bias field and zero temperature are meaningful limits
        if f.name in ("b0", "temperature"):
            if value < 0:
                raise ParameterError(f.name, f"must be non-negative, got {value!r}")
        elif not value > 0:
            raise ParameterError(f.name, f"must be strictly positive, got {value!r}")
    return m


def microscopic_couplings(
    m: MicroscopicInputs, reference_frequency: float = DEFAULT_MECHANICAL_FREQUENCY
) -> tuple[float, float, float]:
    """Magnon drive rate, photon-magnon coupling and spin number.

    Returns ``(eta, g_a, n_total)`` with the two rates divided by
    ``reference_frequency`` (rad/s).  The coupling is the collective one,
    ``(g_s mu_B / 2 hbar) * sqrt(mu_0 hbar omega_c N / V_mode)``.
    """
    validate_microscopic(m)
    n_total = m.spin_density * m.volume
    eta = math.sqrt(5.0) / 4.0 * m.gyro * math.sqrt(n_total) * m.b0
    g_a = m.g_s * m.mu_b / (2 * constants.hbar) * math.sqrt(
        m.mu_0 * constants.hbar * m.omega_c * n_total / m.v_s
    )
    return eta / reference_frequency, g_a / reference_frequency, n_total


def thermal_occupation(omega, temperature):
    """Bose-Einstein occupation for angular frequency ``omega`` (rad/s) at ``temperature`` (K)."""
    omega = np.asarray(omega, dtype=float)
    temperature = np.asarray(temperature, dtype=float)
    if np.any(omega <= 0):
        raise ValueError("omega must be positive")
    if np.any(temperature < 0):
        raise ValueError("temperature must be non-negative")
    with np.errstate(divide="ignore", over="ignore"):
        x = constants.hbar * omega / (constants.k * temperature)
        n = np.where(temperature > 0, 1.0 / np.expm1(x), 0.0)
    return n[()] if n.ndim == 0 else n
