"""Acceptance criteria 1-9, each at its stated tolerance and time budget.

Every test records a one-line verdict that the terminal summary prints
under "acceptance criteria".
"""
import cmath
import time

import numpy as np
from hypothesis import given, settings, strategies as st

from ptmagnomech.cli import main
from ptmagnomech.config import parse_config
from ptmagnomech.dispersion import group_delay_arrays, group_delay_fd
from ptmagnomech.model import SystemParams, build_heff, eigen_report
from ptmagnomech.response import probe_response
from ptmagnomech.stability import char_poly, drift_matrix, hurwitz_determinants, routh_hurwitz_stable
from ptmagnomech.sweep import Axis, SweepGrid, extract_features, run_sweep

CAPTION_BASE = """
reference = "omega_b"
delta_a = 100.0
delta_m = 100.0
kappa_a_over_delta_a = 0.08
kappa_m_over_delta_m = 0.08
g_a_over_delta_a = 2.0
"""


def caption_params(**ratios) -> SystemParams:
    text = CAPTION_BASE + "\n".join(f"{k} = {float(v)!r}" for k, v in ratios.items())
    return parse_config(text).params


# --- criterion 1 -----------------------------------------------------------

def _passive_set(omega_b, gamma_b, kappa_a, kappa_m, frac, share, delta_a, delta_m, g_a, theta):
    # Re chi_m >= 0 needs g_mb g_b omega_b * sup_x[gamma_b x / |chi_b(x)|^2] <= kappa_m;
    # the supremum is below max(8 gamma_b / (9 omega_b^3), 2 / (gamma_b omega_b))
    sup = max(8 * gamma_b / (9 * omega_b**3), 2 / (gamma_b * omega_b))
    product = frac * kappa_m / (omega_b * sup)
    return SystemParams(
        delta_a=delta_a, delta_m=delta_m, omega_b=omega_b, kappa_a=kappa_a, kappa_m=kappa_m,
        gamma_b=gamma_b, g_a=g_a, g_b=np.sqrt(product * share), g_mb=np.sqrt(product / share),
        gamma_nh=0.0, theta=theta,
    )


hermitian_sets = st.builds(
    _passive_set,
    omega_b=st.floats(0.5, 2.0),
    gamma_b=st.floats(0.01, 1.0),
    kappa_a=st.floats(0.5, 10.0),
    kappa_m=st.floats(0.1, 10.0),
    frac=st.floats(0.0, 1.0),
    share=st.floats(0.2, 5.0),
    delta_a=st.floats(-10.0, 10.0),
    delta_m=st.floats(-10.0, 10.0),
    g_a=st.floats(0.0, 10.0),
    theta=st.floats(-np.pi, np.pi),
)


def test_criterion_1_hermitian_passivity(record_criterion):
    worst = []

    @settings(max_examples=20, derandomize=True, deadline=None, database=None)
    @given(hermitian_sets)
    def prop(p):
        span = 3 * (abs(p.delta_a) + abs(p.delta_m) + p.omega_b + p.kappa_a)
        t2 = probe_response(p, np.linspace(-span, span, 400)).t_mag2
        worst.append(float(t2.max()))
        assert t2.max() <= 1 + 1e-9

    t0 = time.perf_counter()
    try:
        prop()
        ok = True
    except AssertionError:
        ok = False
    dt = time.perf_counter() - t0
    ok = ok and dt < 1.0
    record_criterion(1, "Hermitian passivity", ok, f"max t_mag2 = {max(worst):.12g} over {len(worst)} sets, {dt:.2f} s")
    assert ok


# --- criterion 2 -----------------------------------------------------------

def _wide_spectrum(p):
    grid = SweepGrid(Axis("delta_p", -200.0, 400.0, 2000), base=p, fields_requested=("t_mag2",))
    return extract_features(run_sweep(grid))


def test_criterion_2_fig2_windows(record_criterion):
    t0 = time.perf_counter()
    single = _wide_spectrum(caption_params(gamma_nh=0.0, g_b=0.0))
    double = _wide_spectrum(caption_params(gamma_nh=0.0, g_b_over_delta_m=0.1))
    dt = time.perf_counter() - t0
    ok = single.window_count == 1 and double.window_count == 2 and dt < 1.0
    record_criterion(
        2, "Fig.-2 window structure", ok,
        f"window_count {single.window_count} (G_b = 0) and {double.window_count} (G_b/Delta_m = 0.1), {dt:.2f} s",
    )
    assert ok


# --- criterion 3 -----------------------------------------------------------

def test_criterion_3_fig3_gain_and_asymmetry(record_criterion):
    t0 = time.perf_counter()
    p = caption_params(g_b_over_delta_m=0.1, gamma_over_omega_b=2.0)
    grid = SweepGrid(Axis("delta_p", -3.0, 3.0, 400), base=p, fields_requested=("t_mag2",))
    feats = extract_features(run_sweep(grid))
    dt = time.perf_counter() - t0
    ok = feats.max_gain > 1 and abs(feats.asymmetry) > 0.01 and dt < 1.0
    record_criterion(
        3, "Fig.-3 gain and asymmetry", ok,
        f"max t_mag2 = {feats.max_gain:.6g}, asymmetry = {feats.asymmetry:+.6g}, {dt:.2f} s",
    )
    assert ok


# --- criterion 4 -----------------------------------------------------------

def test_criterion_4_fig6_contrast(record_criterion):
    t0 = time.perf_counter()
    contrast = []
    for gamma in (0.0, 2.0, 4.0):
        p = caption_params(g_b_over_delta_m=0.1, gamma_over_omega_b=gamma)
        grid = SweepGrid(
            Axis("delta_p", -200.0, 400.0, 100),
            Axis("delta_m", -200.0, 400.0, 100),
            base=p,
            fields_requested=("t_mag2",),
        )
        t2 = run_sweep(grid).data["t_mag2"]
        contrast.append(float(np.nanmax(t2) - np.nanmin(t2)))
    dt = time.perf_counter() - t0
    ok = contrast[0] < contrast[1] < contrast[2] and dt < 5.0
    record_criterion(
        4, "Fig.-6 contrast ordering", ok,
        "contrast " + " < ".join(f"{c:.6g}" for c in contrast) + f" for Gamma = 0, 2, 4, {dt:.2f} s",
    )
    assert ok


# --- criterion 5 -----------------------------------------------------------

def test_criterion_5_derivative_oracle(record_criterion):
    t0 = time.perf_counter()
    p = caption_params(g_b_over_delta_m=0.1, gamma_over_omega_b=2.0)
    x = np.linspace(-3.0, 3.0, 100)
    tau, bad = group_delay_arrays(p, x)
    fd = group_delay_fd(p, x, 1e-5)
    rel = float(np.max(np.abs(fd - tau) / np.abs(tau)))
    x0 = 0.5
    exact = group_delay_arrays(p, x0)[0]
    errs = [abs(group_delay_fd(p, x0, h) - exact) for h in (4e-3, 2e-3, 1e-3)]
    ratios = (errs[0] / errs[1], errs[1] / errs[2])
    dt = time.perf_counter() - t0
    ok = not bad.any() and rel <= 1e-6 and all(3.5 <= r <= 4.5 for r in ratios) and dt < 1.0
    record_criterion(
        5, "Derivative oracle", ok,
        f"max relative difference {rel:.3g}; error ratios {ratios[0]:.4f}, {ratios[1]:.4f}; {dt:.2f} s",
    )
    assert ok


# --- criterion 6 -----------------------------------------------------------

def _random_batch(rng, n):
    def logu(size):
        return 10 ** rng.uniform(-2, 1, size)

    return SystemParams(
        delta_a=rng.uniform(-5, 5, n), delta_m=rng.uniform(-5, 5, n), omega_b=logu(n),
        kappa_a=logu(n), kappa_m=logu(n), gamma_b=logu(n), g_a=logu(n), g_b=logu(n),
        g_mb=logu(n), gamma_nh=logu(n), theta=rng.uniform(-np.pi, np.pi, n),
    )


def test_criterion_6_routh_hurwitz_equals_eigenvalues(record_criterion):
    t0 = time.perf_counter()
    a = drift_matrix(_random_batch(np.random.default_rng(6), 1000))
    cp = char_poly(a)
    rh = routh_hurwitz_stable(cp.s, hurwitz_determinants(cp))
    max_re = np.linalg.eigvals(a).real.max(axis=-1)
    outside = np.abs(max_re) > 1e-9
    agree = rh[outside] == (max_re[outside] < 0)
    dt = time.perf_counter() - t0
    ok = bool(agree.all()) and dt < 2.0
    record_criterion(
        6, "Routh-Hurwitz equals eigenvalues", ok,
        f"{int(agree.sum())}/{int(outside.sum())} decided draws agree "
        f"({int(rh.sum())} stable, {1000 - int(outside.sum())} in margin band), {dt:.2f} s",
    )
    assert ok


# --- criterion 7 -----------------------------------------------------------

def test_criterion_7_char_poly_oracle(record_criterion):
    t0 = time.perf_counter()
    a = drift_matrix(_random_batch(np.random.default_rng(7), 100))
    got = char_poly(a).s
    ref = np.array([np.real(np.poly(np.linalg.eigvals(m)))[1:] for m in a])
    rel_random = float(np.max(np.abs(got - ref) / np.abs(ref)))

    rng = np.random.default_rng(70)
    rel_dec = 0.0
    for _ in range(20):
        ka, km, gb, da, dm, wb = rng.uniform(0.1, 3.0, 6)
        p = SystemParams(delta_a=da, delta_m=dm, omega_b=wb, kappa_a=ka, kappa_m=km, gamma_b=gb,
                         g_a=0.0, g_b=0.0, g_mb=0.0, gamma_nh=0.0)
        prod = np.polymul(np.polymul([1, 2 * ka, ka**2 + da**2], [1, 2 * km, km**2 + dm**2]), [1, gb, wb**2])
        s = char_poly(drift_matrix(p)).s
        rel_dec = max(rel_dec, float(np.max(np.abs(s - prod[1:]) / np.abs(prod[1:]))))
    dt = time.perf_counter() - t0
    ok = rel_random <= 1e-8 and rel_dec <= 1e-10 and dt < 1.0
    record_criterion(
        7, "Characteristic-polynomial oracle", ok,
        f"random {rel_random:.3g} (tol 1e-8), factorized {rel_dec:.3g} (tol 1e-10), {dt:.2f} s",
    )
    assert ok


# --- criterion 8 -----------------------------------------------------------

def test_criterion_8_two_mode_closed_form(record_criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(100):
        da, dm = rng.uniform(-5, 5, 2)
        ka, km, gamma_b, omega_b = rng.uniform(0.01, 3, 4)
        g_a, gamma, theta = rng.uniform(0, 4), rng.uniform(0, 4), rng.uniform(-np.pi, np.pi)
        p = SystemParams(delta_a=da, delta_m=dm, omega_b=omega_b, kappa_a=ka, kappa_m=km, gamma_b=gamma_b,
                         g_a=g_a, g_b=0.0, g_mb=0.0, gamma_nh=gamma, theta=theta)
        d1, d2 = complex(da, ka), complex(dm, km)
        k = g_a + 1j * gamma * cmath.exp(1j * theta)
        root = cmath.sqrt(((d1 - d2) / 2) ** 2 + k * k)
        expected = [(d1 + d2) / 2 + root, (d1 + d2) / 2 - root, complex(omega_b, gamma_b)]
        ev = eigen_report(build_heff(p)).eigenvalues
        for e in expected:
            worst = max(worst, float(np.min(np.abs(ev - e))) / max(1.0, abs(e)))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-10 and dt < 1.0
    record_criterion(8, "Closed-form 2x2 eigenvalues", ok, f"max relative error {worst:.3g}, {dt:.2f} s")
    assert ok


# --- criterion 9 -----------------------------------------------------------

def test_criterion_9_determinism(record_criterion, tmp_path):
    common = ["map2d", "--grid=-200:400:200", "--set", "grid2=-200:400:200", "--set", "gamma_nh=2.0"]
    one, eight = tmp_path / "w1.csv", tmp_path / "w8.csv"
    assert main(common + ["--workers", "1", "--out", str(one)]) == 0
    t0 = time.perf_counter()
    assert main(common + ["--workers", "8", "--out", str(eight)]) == 0
    dt = time.perf_counter() - t0
    a, b = one.read_bytes(), eight.read_bytes()
    rows = sum(1 for line in a.splitlines() if not line.startswith(b"#")) - 1
    ok = a == b and rows == 40000 and dt < 5.0
    record_criterion(
        9, "Determinism", ok,
        f"{rows} rows, CSV bytes {'identical' if a == b else 'differ'} for 1 and 8 workers, 8-worker run {dt:.2f} s",
    )
    assert ok
