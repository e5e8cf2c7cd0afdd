"""Group delay from the transmission phase."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .model import SystemParams, _coupling
from .response import chi_b, principal_phase, response_arrays

__all__ = [
    "DEFAULT_FD_STEP",
    "DelayPoint",
    "ZeroTransmissionError",
    "central_phase_derivative",
    "delay_profile",
    "g_b_from_power",
    "group_delay_analytic",
    "group_delay_arrays",
    "group_delay_fd",
]

DEFAULT_FD_STEP = 1e-5
ZERO_T_ATOL = 1e-14


class ZeroTransmissionError(ArithmeticError):
    """Transmission vanishes, so its phase (and the delay) is undefined."""


@dataclass(frozen=True)
class DelayPoint:
    delta_p: float
    tau_g_analytic: float
    tau_g_fd: float
    phase_unwrapped: float


def group_delay_arrays(p: SystemParams, delta_p, external_coupling_ratio: float = 1.0):
    """Vectorized ``Im(T'/T)``; returns ``(tau, bad)`` with ``bad`` marking poles or T = 0.

    The derivative of ``u = chi_m / D`` simplifies to
    ``(i chi_m**2 - k**2 chi_m') / D**2`` once ``D' = -i chi_m + (kappa_a + i delta) chi_m'``
    is substituted.
    """
    xm, ratio, eout, t, pole = response_arrays(p, delta_p, external_coupling_ratio)
    xb = chi_b(p, delta_p)
    with np.errstate(divide="ignore", invalid="ignore"):
        dxb = -2 * delta_p - 1j * p.gamma_b
        dxm = -1j - 1j * p.g_mb_value * p.g_b * p.omega_b * dxb / xb**2
        k2 = _coupling(p) ** 2
        den = (p.kappa_a + 1j * (p.delta_a - delta_p)) * xm - k2
        du = (1j * xm**2 - k2 * dxm) / den**2
        dt = -np.sqrt(2 * external_coupling_ratio * p.kappa_a) * du
        tau = (dt / t).imag
    zero = np.abs(t) < ZERO_T_ATOL * (1 + np.abs(eout))
    return tau, pole | zero | ~np.isfinite(tau)


def group_delay_analytic(p: SystemParams, delta_p: float, external_coupling_ratio: float = 1.0) -> float:
    tau, bad = group_delay_arrays(p, delta_p, external_coupling_ratio)
    if np.any(bad):
        raise ZeroTransmissionError(f"transmission phase undefined at delta_p={delta_p!r}")
    return tau[()] if isinstance(tau, np.ndarray) else tau


def central_phase_derivative(phase_fn, x, h: float):
    """Central difference of a phase with 2 pi jump correction."""
    if not h > 0:
        raise ValueError("finite-difference step must be positive")
    jump = phase_fn(x + h) - phase_fn(x - h)
    jump = np.where(np.abs(jump) > np.pi, jump - 2 * np.pi * np.round(jump / (2 * np.pi)), jump)
    return (jump / (2 * h))[()]


def group_delay_fd(
    p: SystemParams, delta_p, h: float = DEFAULT_FD_STEP, external_coupling_ratio: float = 1.0
):
    def phase(x):
        return principal_phase(response_arrays(p, x, external_coupling_ratio)[3])

    return central_phase_derivative(phase, delta_p, h)


def delay_profile(
    p: SystemParams, delta_p, h: float = DEFAULT_FD_STEP, external_coupling_ratio: float = 1.0
) -> DelayPoint:
    """Both delay estimates plus the unwrapped phase along a probe-detuning grid."""
    delta_p = np.asarray(delta_p, dtype=float)
    tau, _ = group_delay_arrays(p, delta_p, external_coupling_ratio)
    phase = principal_phase(response_arrays(p, delta_p, external_coupling_ratio)[3])
    return DelayPoint(
        delta_p=delta_p,
        tau_g_analytic=tau,
        tau_g_fd=group_delay_fd(p, delta_p, h, external_coupling_ratio),
        phase_unwrapped=np.unwrap(phase) if np.ndim(phase) else phase,
    )


def g_b_from_power(power, g_b_ref: float, power_ref: float = 1.0):
    """Magnomechanical coupling at input power ``power``: ``G_b,ref * sqrt(P / P_ref)``.

    G_b is proportional to the steady magnon amplitude, hence to the square
    root of the drive power.
    """
    power = np.asarray(power, dtype=float)
    if np.any(power < 0) or not power_ref > 0:
        raise ValueError("power must be non-negative and power_ref positive")
    return (g_b_ref * np.sqrt(power / power_ref))[()]


def params_at_power(p: SystemParams, power: float, power_ref: float = 1.0) -> SystemParams:
    """``p`` with ``g_b`` (and a tied ``g_mb``) rescaled to ``power``."""
    changes = {"g_b": g_b_from_power(power, p.g_b, power_ref)}
    if p.g_mb is not None:
        changes["g_mb"] = g_b_from_power(power, p.g_mb, power_ref)
    return replace(p, **changes)
