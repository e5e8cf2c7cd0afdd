"""Linear stability of the quadrature fluctuations (Routh-Hurwitz with an eigenvalue cross-check)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import SystemParams

__all__ = [
    "DEFAULT_MARGIN",
    "CharPoly6",
    "StabilityReport",
    "char_poly",
    "drift_matrix",
    "hurwitz_determinants",
    "hurwitz_matrix",
    "routh_hurwitz_stable",
    "stability_arrays",
    "stability_report",
]

DEFAULT_MARGIN = 1e-9
SQRT2 = np.sqrt(2.0)


def drift_matrix(p: SystemParams, symmetrize_mech_coupling: bool = False) -> np.ndarray:
    """6x6 real drift matrix in the basis (X_a, Y_a, X_m, Y_m, q, p).

    ``K_r = Gamma cos(theta)`` and ``K_i = G_a + Gamma sin(theta)`` are the
    real and imaginary parts of the cavity-magnon coupling.  With
    ``symmetrize_mech_coupling`` both mechanical entries become
    ``sqrt(2) G_b``.  Array-valued records give shape ``(..., 6, 6)``.
    """
    kr = p.gamma_nh * np.cos(p.theta)
    ki = p.g_a + p.gamma_nh * np.sin(p.theta)
    g_ym = -SQRT2 * p.g_b if symmetrize_mech_coupling else -p.g_mb_value
    g_p = SQRT2 * p.g_b
    arrs = np.broadcast_arrays(
        p.kappa_a, p.kappa_m, p.gamma_b, p.delta_a, p.delta_m, p.omega_b, kr, ki, g_ym, g_p
    )
    ka, km, gb, da, dm, wb, kr, ki, g_ym, g_p = (np.asarray(a, dtype=float) for a in arrs)
    a = np.zeros(ka.shape + (6, 6))
    a[..., 0, :4] = np.stack([-ka, da, -kr, ki], axis=-1)
    a[..., 1, :4] = np.stack([-da, -ka, -ki, -kr], axis=-1)
    a[..., 2, :4] = np.stack([-kr, ki, -km, dm], axis=-1)
    a[..., 3, :5] = np.stack([-ki, -kr, -dm, -km, g_ym], axis=-1)
    a[..., 4, 5] = wb
    a[..., 5, 2] = g_p
    a[..., 5, 4] = -wb
    a[..., 5, 5] = -gb
    return a


@dataclass(frozen=True)
class CharPoly6:
    """Coefficients ``s_1..s_n`` of ``det(lambda I - A) = lambda^n + s_1 lambda^(n-1) + ... + s_n``."""

    s: np.ndarray

    def __getitem__(self, j: int):
        # 1-based, to match s_1..s_6
        return self.s[..., j - 1]

    def monic(self) -> np.ndarray:
        ones = np.ones(self.s.shape[:-1] + (1,), dtype=self.s.dtype)
        return np.concatenate([ones, self.s], axis=-1)


def char_poly(a) -> CharPoly6:
    """Characteristic coefficients by the Faddeev-LeVerrier trace recurrence.

    ``M_1 = I``, ``s_k = -tr(A M_k) / k``, ``M_{k+1} = A M_k + s_k I``.
    Works on stacks ``(..., n, n)`` and on object arrays of
    ``fractions.Fraction`` for exact arithmetic.  Float input is carried in
    extended precision: the last coefficients come out of heavy cancellation
    and lose up to ~1e-8 relative in plain doubles.
    """
    a = np.asarray(a)
    exact = a.dtype == object
    if not exact:
        a = a.astype(np.longdouble)
    n = a.shape[-1]
    eye = np.eye(n, dtype=int).astype(object) if exact else np.eye(n, dtype=a.dtype)
    m = np.broadcast_to(eye, a.shape).copy()
    coeffs = []
    for k in range(1, n + 1):
        am = a @ m
        s_k = -np.trace(am, axis1=-2, axis2=-1) / k
        coeffs.append(s_k)
        m = am + np.asarray(s_k)[..., None, None] * eye
    s = np.stack(coeffs, axis=-1)
    return CharPoly6(s if exact else s.astype(float))


def hurwitz_matrix(s) -> np.ndarray:
    """Hurwitz matrix with entry (i, j) = a_(2i - j) (1-based), a_0 = 1."""
    s = np.asarray(s, dtype=float)
    n = s.shape[-1]
    a = np.concatenate([np.ones(s.shape[:-1] + (1,)), s], axis=-1)
    h = np.zeros(s.shape[:-1] + (n, n))
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            idx = 2 * i - j
            if 0 <= idx <= n:
                h[..., i - 1, j - 1] = a[..., idx]
    return h


def hurwitz_determinants(c) -> np.ndarray:
    """Leading principal minors Delta_1..Delta_n of the Hurwitz matrix."""
    s = c.s if isinstance(c, CharPoly6) else np.asarray(c, dtype=float)
    h = hurwitz_matrix(s)
    n = h.shape[-1]
    return np.stack([np.linalg.det(h[..., :k, :k]) for k in range(1, n + 1)], axis=-1)


def routh_hurwitz_stable(s, dets) -> np.ndarray:
    return np.all(np.asarray(s) > 0, axis=-1) & np.all(np.asarray(dets) > 0, axis=-1)


@dataclass(frozen=True)
class StabilityReport:
    coeffs: CharPoly6
    hurwitz: np.ndarray
    stable_rh: bool
    max_re_eig: float
    stable_eig: bool
    agree: bool
    margin: float = DEFAULT_MARGIN

    @property
    def indeterminate(self) -> bool:
        """True inside the +-margin band around the stability boundary."""
        return abs(self.max_re_eig) <= self.margin

    @property
    def verdict(self) -> str:
        if self.indeterminate:
            return "indeterminate"
        return "stable" if self.stable_eig else "unstable"


def stability_arrays(p: SystemParams, symmetrize_mech_coupling: bool = False):
    """Vectorized RH verdict and largest eigenvalue real part for array-valued records."""
    a = drift_matrix(p, symmetrize_mech_coupling)
    cp = char_poly(a)
    dets = hurwitz_determinants(cp)
    max_re = np.linalg.eigvals(a).real.max(axis=-1)
    return routh_hurwitz_stable(cp.s, dets), max_re


def stability_report(
    p: SystemParams, margin: float = DEFAULT_MARGIN, symmetrize_mech_coupling: bool = False
) -> StabilityReport:
    a = drift_matrix(p, symmetrize_mech_coupling)
    cp = char_poly(a)
    dets = hurwitz_determinants(cp)
    stable_rh = bool(routh_hurwitz_stable(cp.s, dets))
    max_re = float(np.linalg.eigvals(a).real.max())
    stable_eig = max_re < -margin
    return StabilityReport(
        coeffs=cp,
        hurwitz=dets,
        stable_rh=stable_rh,
        max_re_eig=max_re,
        stable_eig=stable_eig,
        agree=stable_rh == stable_eig,
        margin=margin,
    )
