"""Probe response: susceptibilities, intracavity sideband and transmission."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import SystemParams, _coupling

__all__ = [
    "MechanicalPoleError",
    "ProbeResponse",
    "ResponsePoleError",
    "c_minus",
    "chi_b",
    "chi_m",
    "decoupled_response",
    "probe_response",
    "response_arrays",
]

POLE_RTOL = 1e-14


class ResponsePoleError(ArithmeticError):
    """The response denominator vanishes (lasing threshold / instability point)."""


class MechanicalPoleError(ArithmeticError):
    """The mechanical susceptibility vanishes."""


@dataclass(frozen=True)
class ProbeResponse:
    delta_p: float
    c_minus: complex
    transmission: complex
    output_field: complex
    t_mag2: float
    t_mag: float
    phase: float


def chi_b(p: SystemParams, delta_p):
    return p.omega_b**2 - delta_p**2 - 1j * p.gamma_b * delta_p


def _chi_m(p, delta_p, xb):
    return p.kappa_m + 1j * (p.delta_m - delta_p) + 1j * p.g_mb_value * p.g_b * p.omega_b / xb


def _mechanical_pole(p, xb):
    return np.abs(xb) < POLE_RTOL * p.omega_b**2


def chi_m(p: SystemParams, delta_p):
    xb = chi_b(p, delta_p)
    if np.any(_mechanical_pole(p, xb)):
        raise MechanicalPoleError(f"mechanical susceptibility vanishes at delta_p={delta_p!r}")
    return _chi_m(p, delta_p, xb)


def _denominator(p, delta_p, xm):
    cav = (p.kappa_a + 1j * (p.delta_a - delta_p)) * xm
    k2 = _coupling(p) ** 2
    den = cav - k2
    return den, np.abs(den) < POLE_RTOL * (np.abs(cav) + np.abs(k2))


def response_arrays(p: SystemParams, delta_p, external_coupling_ratio: float = 1.0):
    """Vectorized core of the response chain; never raises on poles.

    Returns ``(xm, ratio, output_field, transmission, pole)`` where
    ``ratio = c_-/eta_p`` and ``pole`` flags mechanical or response poles.
    Parameter fields and ``delta_p`` broadcast against each other.
    """
    xb = chi_b(p, delta_p)
    mech_pole = _mechanical_pole(p, xb)
    with np.errstate(divide="ignore", invalid="ignore"):
        xm = _chi_m(p, delta_p, xb)
        den, resp_pole = _denominator(p, delta_p, xm)
        ratio = xm / den
        eout = np.sqrt(2 * external_coupling_ratio * p.kappa_a) * ratio
    return xm, ratio, eout, 1 - eout, mech_pole | resp_pole


def c_minus(p: SystemParams, delta_p):
    xm = chi_m(p, delta_p)
    den, pole = _denominator(p, delta_p, xm)
    if np.any(pole):
        raise ResponsePoleError(f"response denominator vanishes at delta_p={delta_p!r}")
    return p.eta_p * (xm / den)


def probe_response(p: SystemParams, delta_p, external_coupling_ratio: float = 1.0) -> ProbeResponse:
    """Transmission ``T = 1 - sqrt(2 kappa_a) c_-/eta_p`` and derived quantities.

    ``eta_p`` cancels exactly: the output field is built from ``c_-/eta_p``
    without ever multiplying by the probe amplitude.  Accepts a scalar or an
    array of probe detunings.
    """
    xb = chi_b(p, delta_p)
    if np.any(_mechanical_pole(p, xb)):
        raise MechanicalPoleError(f"mechanical susceptibility vanishes at delta_p={delta_p!r}")
    _, ratio, eout, t, pole = response_arrays(p, delta_p, external_coupling_ratio)
    if np.any(pole):
        raise ResponsePoleError(f"response denominator vanishes at delta_p={delta_p!r}")
    return ProbeResponse(
        delta_p=delta_p,
        c_minus=p.eta_p * ratio,
        transmission=t,
        output_field=eout,
        t_mag2=t.real**2 + t.imag**2,
        t_mag=np.abs(t),
        phase=principal_phase(t),
    )


def principal_phase(t):
    """``arg(t)`` folded into (-pi, pi]."""
    phase = np.angle(t)
    return np.where(phase == -np.pi, np.pi, phase)[()]


def decoupled_response(p: SystemParams, delta_p):
    """Bare-cavity transmission kernel ``sqrt(2 kappa_a) / (kappa_a + i(Delta_a - Delta_p))``."""
    return np.sqrt(2 * p.kappa_a) / (p.kappa_a + 1j * (p.delta_a - delta_p))
