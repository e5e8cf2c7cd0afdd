"""Invariant suite behind ``ptmagnomech validate``.

Each check returns a :class:`Check`; the suite combines checks at the
configured parameter set with seeded random draws, so its verdict is
reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .config import RunConfig, config_lines, parse_config
from .dispersion import group_delay_arrays, group_delay_fd
from .model import SystemParams, build_heff, eigen_report
from .response import probe_response
from .stability import DEFAULT_MARGIN, char_poly, drift_matrix, hurwitz_determinants, routh_hurwitz_stable
from .sweep import Axis, SweepGrid, run_sweep

__all__ = [
    "Check",
    "closed_form_two_mode",
    "mechanical_gain_bound",
    "passive_hermitian_draw",
    "random_params",
    "run_checks",
]

SEED = 20240917


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str


def mechanical_gain_bound(omega_b, gamma_b):
    """Upper bound of ``gamma_b x / |chi_b(x)|**2`` over ``x > 0``.

    Below ``omega_b/2`` the real part of ``chi_b`` dominates the denominator;
    above it the damping term does.
    """
    return np.maximum(8 * gamma_b / (9 * omega_b**3), 2 / (gamma_b * omega_b))


def passive_hermitian_draw(rng: np.random.Generator) -> SystemParams:
    """Random ``Gamma = 0`` parameters for which ``|T| <= 1`` is guaranteed.

    With real photon-magnon coupling the response reduces to
    ``1 - sqrt(2 kappa_a) / (K + i y)`` with ``K >= kappa_a`` whenever
    ``Re chi_m >= 0``; that holds if ``g_mb g_b omega_b`` times
    :func:`mechanical_gain_bound` stays below ``kappa_m``, and then
    ``kappa_a >= 1/2`` is enough.
    """
    omega_b = rng.uniform(0.5, 2.0)
    gamma_b = rng.uniform(0.01, 1.0)
    kappa_m = rng.uniform(0.1, 10.0)
    limit = kappa_m / (omega_b * mechanical_gain_bound(omega_b, gamma_b))
    product = rng.uniform(0.0, 1.0) * limit
    share = rng.uniform(0.2, 5.0)
    return SystemParams(
        delta_a=rng.uniform(-10.0, 10.0),
        delta_m=rng.uniform(-10.0, 10.0),
        omega_b=omega_b,
        kappa_a=rng.uniform(0.5, 10.0),
        kappa_m=kappa_m,
        gamma_b=gamma_b,
        g_a=rng.uniform(0.0, 10.0),
        g_b=np.sqrt(product * share),
        g_mb=np.sqrt(product / share),
        gamma_nh=0.0,
        theta=rng.uniform(-np.pi, np.pi),
    )


def random_params(rng: np.random.Generator) -> SystemParams:
    """Unrestricted random draw (stable and unstable sets alike)."""
    return SystemParams(
        delta_a=rng.uniform(-5.0, 5.0),
        delta_m=rng.uniform(-5.0, 5.0),
        omega_b=rng.uniform(0.2, 3.0),
        kappa_a=rng.uniform(0.05, 3.0),
        kappa_m=rng.uniform(0.05, 3.0),
        gamma_b=rng.uniform(0.01, 1.0),
        g_a=rng.uniform(0.0, 4.0),
        g_b=rng.uniform(0.0, 2.0),
        g_mb=rng.uniform(0.0, 2.0),
        gamma_nh=rng.uniform(0.0, 4.0),
        theta=rng.uniform(-np.pi, np.pi),
    )


def closed_form_two_mode(p: SystemParams, convention: str = "as_printed") -> np.ndarray:
    """Eigenvalues of the cavity-magnon block by the quadratic formula, plus the phonon."""
    h = build_heff(replace(p, g_b=0.0, g_mb=0.0), convention)
    a, d, k = h[0, 0], h[1, 1], h[0, 1]
    root = np.sqrt(((a - d) / 2) ** 2 + k * k + 0j)
    return np.array([(a + d) / 2 + root, (a + d) / 2 - root, h[2, 2]])


def _check_passivity(cfg: RunConfig) -> Check:
    rng = np.random.default_rng(SEED)
    worst = -np.inf
    for _ in range(20):
        p = passive_hermitian_draw(rng)
        span = 3 * (abs(p.delta_a) + abs(p.delta_m) + p.omega_b + p.kappa_a)
        dp = np.linspace(-span, span, 400)
        worst = max(worst, float(np.max(probe_response(p, dp).t_mag2)))
    return Check("hermitian_passivity", worst <= 1 + 1e-9, f"max t_mag2 = {worst:.12g} over 20 draws")


def _delay_points(cfg: RunConfig):
    if cfg.axis == "delta_p" and cfg.grid is not None:
        return np.linspace(cfg.grid[0], cfg.grid[1], 100)
    return np.linspace(-3.0, 3.0, 100)


def _check_group_delay(cfg: RunConfig) -> Check:
    p = cfg.params
    dp = _delay_points(cfg)
    tau, bad = group_delay_arrays(p, dp, cfg.external_coupling_ratio)
    keep = ~bad
    if not keep.any():
        return Check("group_delay_oracle", False, "no evaluable points")
    h = cfg.fd_step
    fd = group_delay_fd(p, dp[keep], h, cfg.external_coupling_ratio)
    fd2 = group_delay_fd(p, dp[keep], 2 * h, cfg.external_coupling_ratio)
    scale = np.maximum(np.abs(tau[keep]), 1e-3 * np.abs(tau[keep]).max())
    rel = float(np.max(np.abs(fd - tau[keep]) / scale))
    return Check(
        "group_delay_oracle",
        rel <= 1e-6,
        f"max relative difference {rel:.3g} at {int(keep.sum())} points (h = {h:g}, 2h error {float(np.max(np.abs(fd2 - tau[keep]) / scale)):.3g})",
    )


def _check_routh_hurwitz(cfg: RunConfig) -> Check:
    rng = np.random.default_rng(SEED + 1)
    draws = [cfg.params] + [random_params(rng) for _ in range(300)]
    a = np.stack([drift_matrix(p, cfg.symmetrize_mech_coupling) for p in draws])
    cp = char_poly(a)
    rh = routh_hurwitz_stable(cp.s, hurwitz_determinants(cp))
    max_re = np.linalg.eigvals(a).real.max(axis=-1)
    outside = np.abs(max_re) > max(cfg.margin, DEFAULT_MARGIN)
    mismatch = int(np.sum(rh[outside] != (max_re[outside] < 0)))
    return Check(
        "routh_hurwitz_vs_eigenvalues",
        mismatch == 0,
        f"{mismatch} disagreements in {int(outside.sum())} decided draws",
    )


def _check_char_poly(cfg: RunConfig) -> Check:
    a = drift_matrix(cfg.params, cfg.symmetrize_mech_coupling)
    ref = np.real(np.poly(np.linalg.eigvals(a)))[1:]
    got = char_poly(a).s
    err = float(np.max(np.abs(got - ref)) / np.abs(ref).max())
    return Check("char_poly_vs_eigenvalues", err <= 1e-8, f"max scaled difference {err:.3g}")


def _check_two_mode(cfg: RunConfig) -> Check:
    p = replace(cfg.params, g_b=0.0, g_mb=0.0)
    ev = eigen_report(build_heff(p, cfg.heff_convention)).eigenvalues
    ref = closed_form_two_mode(p, cfg.heff_convention)
    # match each closed-form root to its nearest numerical eigenvalue
    err = max(float(np.min(np.abs(ev - r))) for r in ref)
    scale = max(1.0, float(np.abs(ref).max()))
    return Check("two_mode_closed_form", err <= 1e-10 * scale, f"max eigenvalue error {err:.3g}")


def _check_decoupled(cfg: RunConfig) -> Check:
    p = replace(cfg.params, g_a=0.0, g_b=0.0, g_mb=0.0, gamma_nh=0.0)
    h = build_heff(p, cfg.heff_convention)
    ev = eigen_report(h).eigenvalues
    diag = np.sort_complex(np.diag(h))
    err = float(np.max(np.abs(np.sort_complex(ev) - diag)))
    return Check("decoupled_eigenvalues", err <= 1e-12 * max(1.0, float(np.abs(diag).max())), f"max error {err:.3g}")


def _check_probe_cancels(cfg: RunConfig) -> Check:
    dp = _delay_points(cfg)
    t1 = probe_response(replace(cfg.params, eta_p=1.0), dp).transmission
    t2 = probe_response(replace(cfg.params, eta_p=7.25), dp).transmission
    same = bool(np.array_equal(t1, t2))
    return Check("probe_amplitude_cancels", same, "transmission identical for eta_p = 1 and 7.25" if same else "transmission depends on eta_p")


def _check_determinism(cfg: RunConfig) -> Check:
    grid = SweepGrid(
        Axis("delta_p", -3.0, 3.0, 60),
        Axis("gamma_nh", 0.0, 4.0, 60),
        base=cfg.params,
        fields_requested=("t_mag2", "phase", "stable"),
    )
    a = run_sweep(grid, workers=1).table_bytes()
    b = run_sweep(grid, workers=4).table_bytes()
    return Check("sweep_determinism", a == b, "1 and 4 workers give identical bytes" if a == b else "worker count changes the table")


def _check_round_trip(cfg: RunConfig) -> Check:
    again = parse_config("\n".join(config_lines(cfg)))
    ok = again == cfg
    return Check("config_round_trip", ok, "echoed config re-parses identically" if ok else "echoed config differs")


CHECKS = (
    _check_passivity,
    _check_group_delay,
    _check_routh_hurwitz,
    _check_char_poly,
    _check_two_mode,
    _check_decoupled,
    _check_probe_cancels,
    _check_determinism,
    _check_round_trip,
)


def run_checks(cfg: RunConfig) -> list:
    out = []
    for fn in CHECKS:
        try:
            out.append(fn(cfg))
        except (ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
            out.append(Check(fn.__name__.removeprefix("_check_"), False, f"raised {type(exc).__name__}: {exc}"))
    return out
