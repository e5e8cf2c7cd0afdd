"""Parameter sets and grids for each figure class.

Everything is in units of the mechanical frequency.  The detunings are set
to ``DETUNING_SCALE = 100`` so that, with the caption ratio
``kappa/Delta = 0.08``, the damping (``kappa = 8``) exceeds the largest
non-Hermitian strength used in the density maps (``Gamma = 4``).  That keeps
every map below the gain threshold and inside the Routh-Hurwitz stable
region, and it keeps the bare cavity passive (``kappa_a >= 1/2``).
"""
from __future__ import annotations

from .model import SystemParams
from .sweep import Axis

DETUNING_SCALE = 100.0
DAMPING_RATIO = 0.08
MECHANICAL_DAMPING = 0.1


def hermitian_base(g_a_over_delta_a: float = 2.0, g_b_over_delta_m: float = 0.0) -> SystemParams:
    d = DETUNING_SCALE
    return SystemParams(
        delta_a=d,
        delta_m=d,
        omega_b=1.0,
        kappa_a=DAMPING_RATIO * d,
        kappa_m=DAMPING_RATIO * d,
        gamma_b=MECHANICAL_DAMPING,
        g_a=g_a_over_delta_a * d,
        g_b=g_b_over_delta_m * d,
        gamma_nh=0.0,
        theta=0.0,
    )


def fig2(g_a_over_delta_a: float = 2.0, g_b_over_delta_m: float = 0.0) -> SystemParams:
    """Hermitian single window (``g_b = 0``) or doublet (``g_b > 0``)."""
    return hermitian_base(g_a_over_delta_a, g_b_over_delta_m)


def fig3(gamma_over_omega_b: float = 2.0, g_b_over_delta_m: float = 0.1) -> SystemParams:
    p = hermitian_base(2.0, g_b_over_delta_m)
    return p.with_values(gamma_nh=gamma_over_omega_b * p.omega_b)


def fig4(g_b_over_delta_m: float) -> SystemParams:
    return fig3(2.0, g_b_over_delta_m)


def fig5(delta_a_over_kappa_a: float) -> SystemParams:
    p = hermitian_base()
    k = p.kappa_a
    return p.with_values(delta_a=delta_a_over_kappa_a * k, gamma_nh=2 * k, g_a=2 * k, g_b=0.1 * k)


def fig6(gamma_over_omega_b: float) -> SystemParams:
    return fig3(gamma_over_omega_b, 0.1)


def fig7(g_b_over_delta_m: float = 0.1, gamma_over_kappa_a: float = 0.0) -> SystemParams:
    p = hermitian_base(2.0, g_b_over_delta_m)
    return p.with_values(gamma_nh=gamma_over_kappa_a * p.kappa_a)


def fig8(g_b_over_kappa_a: float = 0.1) -> SystemParams:
    p = hermitian_base(2.0)
    return p.with_values(g_b=g_b_over_kappa_a * p.kappa_a)


WIDE_SPECTRUM = Axis("delta_p", -2 * DETUNING_SCALE, 4 * DETUNING_SCALE, 2000)
MECHANICAL_SPECTRUM = Axis("delta_p", -3.0, 3.0, 400)
FANO_MAP = (
    Axis("delta_p", -2 * DETUNING_SCALE, 4 * DETUNING_SCALE, 100),
    Axis("delta_m", -2 * DETUNING_SCALE, 4 * DETUNING_SCALE, 100),
)
# the double-window families turn unstable near P = 2.15 P_ref
POWER_AXIS = Axis("power", 0.0, 2.0, 200)
DELAY_MAP = (
    Axis("g_a", 0.0, 4 * DAMPING_RATIO * DETUNING_SCALE, 100),
    Axis("gamma_nh", 0.0, 4 * DAMPING_RATIO * DETUNING_SCALE, 100),
)

# Gamma values of the delay families, in units of omega_b.  Read as multiples
# of kappa_a they would all sit past the instability threshold at this scale.
DELAY_FAMILY_GAMMAS = (0.0, 1.0, 2.0, 4.0)

# name -> (params, axes) used by the command line ``preset`` key
PRESETS = {
    "fig2a": (fig2(2.0, 0.0), (WIDE_SPECTRUM,)),
    "fig2c": (fig2(2.0, 0.1), (WIDE_SPECTRUM,)),
    "fig3": (fig3(), (MECHANICAL_SPECTRUM,)),
    "fig4": (fig4(0.2), (MECHANICAL_SPECTRUM,)),
    "fig5": (fig5(1.0), (Axis("delta_p", -40.0, 40.0, 800),)),
    "fig6a": (fig6(0.0), FANO_MAP),
    "fig6b": (fig6(2.0), FANO_MAP),
    "fig6c": (fig6(4.0), FANO_MAP),
    "fig7a": (fig7(0.05), (POWER_AXIS,)),
    "fig7b": (fig7(0.1), (POWER_AXIS,)),
    "fig8a": (fig8(0.05), DELAY_MAP),
    "fig8b": (fig8(0.1), DELAY_MAP),
}

# extra run settings implied by a preset
PRESET_SETTINGS = {
    "fig7a": {"gamma_values": DELAY_FAMILY_GAMMAS},
    "fig7b": {"gamma_values": DELAY_FAMILY_GAMMAS},
}
