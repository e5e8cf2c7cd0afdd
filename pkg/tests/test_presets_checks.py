import numpy as np
import pytest

from ptmagnomech.checks import (
    CHECKS,
    closed_form_two_mode,
    mechanical_gain_bound,
    passive_hermitian_draw,
    random_params,
    run_checks,
)
from ptmagnomech.config import RunConfig
from ptmagnomech.dispersion import params_at_power
from ptmagnomech.model import validate_params
from ptmagnomech.presets import DELAY_FAMILY_GAMMAS, POWER_AXIS, PRESETS, fig3, fig7
from ptmagnomech.response import chi_b, probe_response
from ptmagnomech.stability import stability_report


# --- presets -----------------------------------------------------------------------

@pytest.mark.parametrize("name", sorted(PRESETS))
def test_presets_valid(name):
    params, axes = PRESETS[name]
    validate_params(params)
    assert 1 <= len(axes) <= 2


@pytest.mark.parametrize("name", sorted(set(PRESETS) - {"fig4"}))
def test_presets_stable(name):
    assert stability_report(PRESETS[name][0]).stable_eig


def test_strong_mechanical_coupling_preset_unstable():
    report = stability_report(PRESETS["fig4"][0])
    assert not report.stable_eig and report.agree


def test_caption_ratios():
    p = fig3()
    assert p.kappa_a / p.delta_a == pytest.approx(0.08)
    assert p.g_a / p.delta_a == pytest.approx(2.0)
    assert p.g_b / p.delta_m == pytest.approx(0.1)
    assert p.gamma_nh / p.omega_b == pytest.approx(2.0)


@pytest.mark.parametrize("g_b_ratio", [0.05, 0.1])
@pytest.mark.parametrize("gamma", DELAY_FAMILY_GAMMAS)
def test_delay_families_stable_over_power_axis(g_b_ratio, gamma):
    base = fig7(g_b_ratio).with_values(gamma_nh=gamma)
    for power in np.linspace(POWER_AXIS.start, POWER_AXIS.stop, 21):
        assert stability_report(params_at_power(base, power)).stable_eig


def test_delay_family_turns_unstable_past_axis():
    assert not stability_report(params_at_power(fig7(0.1), 2.5)).stable_eig


# --- check helpers -------------------------------------------------------------------

def test_mechanical_gain_bound_dominates():
    rng = np.random.default_rng(3)
    for _ in range(200):
        w, g = rng.uniform(0.5, 2), rng.uniform(0.01, 1)
        x = np.linspace(1e-6, 20 * w, 200001)
        from ptmagnomech.model import SystemParams

        gain = g * x / np.abs(chi_b(SystemParams(omega_b=w, gamma_b=g), x)) ** 2
        assert gain.max() <= mechanical_gain_bound(w, g) * (1 + 1e-12)


def test_passive_draws_stay_passive():
    rng = np.random.default_rng(11)
    x = np.linspace(-30, 30, 3001)
    for _ in range(30):
        p = passive_hermitian_draw(rng)
        assert p.gamma_nh == 0 and p.kappa_a >= 0.5
        assert probe_response(p, x).t_mag2.max() <= 1 + 1e-12


def test_random_params_valid():
    rng = np.random.default_rng(5)
    for _ in range(50):
        validate_params(random_params(rng))


def test_closed_form_two_mode_hermitian_splitting():
    from ptmagnomech.model import SystemParams

    p = SystemParams(delta_a=1.0, delta_m=1.0, kappa_a=0.0, kappa_m=0.0, g_a=0.5, gamma_nh=0.0, g_b=0.0)
    lam = np.sort_complex(closed_form_two_mode(p)[:2])
    assert np.allclose(lam.real, [0.5, 1.5]) and np.allclose(lam.imag, 0)


def test_run_checks_default_all_pass():
    results = run_checks(RunConfig())
    assert len(results) == len(CHECKS)
    assert all(c.passed for c in results), [c for c in results if not c.passed]


def test_run_checks_fig3():
    assert all(c.passed for c in run_checks(RunConfig(params=fig3())))


def test_run_checks_turns_exceptions_into_failures(monkeypatch):
    import ptmagnomech.checks as checks

    def boom(cfg):
        raise ValueError("kaput")

    boom.__name__ = "_check_boom"
    monkeypatch.setattr(checks, "CHECKS", (boom,))
    (result,) = checks.run_checks(RunConfig())
    assert not result.passed and "kaput" in result.detail
