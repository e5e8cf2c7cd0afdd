"""Command-line front end: ``ptmagnomech {spectrum,delay,eigen,stability,map2d,validate}``.

Every subcommand writes one CSV file (or stdout) made of ``#`` comment lines,
a header row and data rows.  The ``# key = value`` comments hold the fully
resolved configuration, so feeding them back through ``--config`` reproduces
the run.

Exit status: 0 on success, 1 when ``validate`` finds a failing property,
2 on configuration errors, 3 on numerical failures that prevent any output.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import replace

import numpy as np

from . import __version__
from .checks import run_checks
from .config import ConfigError, RunConfig, config_lines, fmt, parse_config
from .dispersion import group_delay_fd
from .model import ParameterError, build_heff, eigen_report, find_exceptional_point
from .stability import char_poly, hurwitz_determinants, routh_hurwitz_stable
from .sweep import Axis, SweepGrid, extract_features, run_sweep

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

DEFAULT_GRIDS = {
    "spectrum": ("delta_p", (-3.0, 3.0, 400)),
    "delay": ("delta_p", (-3.0, 3.0, 400)),
    "stability": (None, None),
    "eigen": (None, None),
    "map2d": ("delta_p", (-200.0, 400.0, 100)),
}
DEFAULT_MAP_AXIS2 = ("delta_m", (-200.0, 400.0, 100))
DEFAULT_FIELDS = {
    "spectrum": ("t_mag", "t_mag2", "phase"),
    "map2d": ("t_mag2",),
}


class NumericalFailure(RuntimeError):
    pass


def _cell(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return fmt(v)


def format_csv(cfg: RunConfig, command: str, header, rows) -> str:
    buf = io.StringIO()
    buf.write(f"# ptmagnomech {__version__}\n")
    buf.write(f"# command: {command}\n")
    buf.write(f"# units: every rate and frequency is in units of {cfg.reference}\n")
    for line in config_lines(cfg):
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _axis(cfg: RunConfig, command: str, second: bool = False):
    if second:
        name = cfg.axis2 or DEFAULT_MAP_AXIS2[0]
        grid = cfg.grid2 or DEFAULT_MAP_AXIS2[1]
    else:
        default_name, default_grid = DEFAULT_GRIDS[command]
        name = cfg.axis or default_name
        grid = cfg.grid or default_grid
        if name is None:
            return None
        if grid is None:
            raise ConfigError(f"grid: axis {name!r} needs a grid")
    try:
        return Axis(name, *grid)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _grid(cfg: RunConfig, axis1, axis2=None, fields=("t_mag2",)) -> SweepGrid:
    try:
        return SweepGrid(
            axis1,
            axis2,
            base=cfg.params,
            fields_requested=tuple(fields),
            probe_detuning=cfg.probe_detuning,
            power_ref=cfg.power_ref,
            heff_convention=cfg.heff_convention,
            external_coupling_ratio=cfg.external_coupling_ratio,
            symmetrize_mech_coupling=cfg.symmetrize_mech_coupling,
            margin=cfg.margin,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _sweep_table(result):
    header = [name for name, _ in result.columns()]
    cols = [col for _, col in result.columns()]
    reasons = result.row_reasons()
    if np.any(reasons != ""):
        header.append("reason")
        cols.append(reasons)
    return header, list(zip(*cols))


def cmd_spectrum(cfg: RunConfig):
    axis = _axis(cfg, "spectrum")
    if axis.name != "delta_p":
        raise ConfigError(f"axis: spectrum sweeps delta_p, got {axis.name!r}")
    fields = cfg.fields or DEFAULT_FIELDS["spectrum"]
    result = run_sweep(_grid(cfg, axis, fields=fields), workers=cfg.workers)
    header, rows = _sweep_table(result)
    notes = []
    if "t_mag2" in result.data:
        feats = extract_features(result, cfg.prominence)
        centers = ", ".join(f"{c:.6g}" for c in feats.window_centers)
        notes.append(
            f"windows: {feats.window_count} [{centers}]  max t_mag2: {feats.max_gain:.6g}  asymmetry: {feats.asymmetry:.6g}"
        )
    return header, rows, notes


def cmd_delay(cfg: RunConfig):
    axis = _axis(cfg, "delay")
    gammas = cfg.gamma_values or (cfg.params.gamma_nh,)
    fields = ("t_mag2", "phase", "tau_g", "stable")
    header = ["gamma_nh", axis.name, "t_mag2", "phase", "phase_unwrapped", "tau_g", "stable"]
    if axis.name == "delta_p":
        header.append("tau_g_fd")
    rows, any_reason = [], False
    blocks = []
    for g in gammas:
        sub = replace(cfg, params=replace(cfg.params, gamma_nh=float(g)))
        result = run_sweep(_grid(sub, axis, fields=fields), workers=cfg.workers)
        phase = result.data["phase"]
        unwrapped = np.full_like(phase, np.nan)
        ok = np.isfinite(phase)
        unwrapped[ok] = np.unwrap(phase[ok])
        cols = [np.full(axis.count, float(g)), result.coords[axis.name], result.data["t_mag2"], phase, unwrapped]
        cols += [result.data["tau_g"], result.data["stable"]]
        if axis.name == "delta_p":
            with np.errstate(all="ignore"):
                cols.append(group_delay_fd(sub.params, result.coords["delta_p"], cfg.fd_step, cfg.external_coupling_ratio))
        reasons = result.row_reasons()
        any_reason |= bool(np.any(reasons != ""))
        blocks.append((cols, reasons))
    if any_reason:
        header.append("reason")
    for cols, reasons in blocks:
        if any_reason:
            cols = cols + [reasons]
        rows.extend(zip(*cols))
    return header, rows, []


def _eigen_row(p, cfg):
    h = build_heff(p, cfg.heff_convention)
    try:
        rep = eigen_report(h, cfg.magnon_sign_flip)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigenvalue solver failed: {exc}") from None
    return rep


def cmd_eigen(cfg: RunConfig):
    notes = []
    if cfg.ep_vary is not None:
        if cfg.ep_range is None:
            raise ConfigError("ep_range: required together with ep_vary")
        try:
            ep = find_exceptional_point(cfg.params, cfg.ep_vary, cfg.ep_range, cfg.ep_threshold, convention=cfg.heff_convention)
        except ParameterError as exc:
            raise ConfigError(str(exc)) from None
        notes.append(f"exceptional point: {cfg.ep_vary} = {ep:.12g}" if ep is not None else "exceptional point: none found")
    axis = _axis(cfg, "eigen")
    if axis is None:
        rep = _eigen_row(cfg.params, cfg)
        header = ["index", "re", "im", "min_gap", "pt_residual"]
        rows = [(i + 1, ev.real, ev.imag, rep.min_gap, rep.pt_residual) for i, ev in enumerate(rep.eigenvalues)]
        return header, rows, notes
    if axis.name in ("delta_p", "power"):
        raise ConfigError(f"axis: eigen sweeps a SystemParams field, got {axis.name!r}")
    header = [axis.name, "re_1", "im_1", "re_2", "im_2", "re_3", "im_3", "min_gap", "pt_residual"]
    rows = []
    for x in axis.values():
        try:
            rep = _eigen_row(replace(cfg.params, **{axis.name: float(x)}), cfg)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        ev = rep.eigenvalues
        rows.append((x, ev[0].real, ev[0].imag, ev[1].real, ev[1].imag, ev[2].real, ev[2].imag, rep.min_gap, rep.pt_residual))
    return header, rows, notes


def cmd_stability(cfg: RunConfig):
    from .stability import drift_matrix

    axis = _axis(cfg, "stability")
    if axis is None:
        xs, records = [None], [cfg.params]
    else:
        if axis.name in ("delta_p", "power"):
            raise ConfigError(f"axis: stability sweeps a SystemParams field, got {axis.name!r}")
        xs = list(axis.values())
        records = [replace(cfg.params, **{axis.name: float(x)}) for x in xs]
    a = np.stack([drift_matrix(p, cfg.symmetrize_mech_coupling) for p in records])
    if not np.all(np.isfinite(a)):
        raise NumericalFailure("drift matrix has non-finite entries")
    cp = char_poly(a)
    dets = hurwitz_determinants(cp)
    rh = routh_hurwitz_stable(cp.s, dets)
    max_re = np.linalg.eigvals(a).real.max(axis=-1)
    header = ([axis.name] if axis else []) + [f"s_{k}" for k in range(1, 7)] + [f"hurwitz_{k}" for k in range(1, 7)]
    header += ["stable_rh", "max_re_eig", "verdict"]
    rows = []
    for i, x in enumerate(xs):
        if abs(max_re[i]) <= cfg.margin:
            verdict = "indeterminate"
        else:
            verdict = "stable" if max_re[i] < 0 else "unstable"
        row = ([x] if axis else []) + list(cp.s[i]) + list(dets[i]) + [bool(rh[i]), max_re[i], verdict]
        rows.append(row)
    notes = [] if axis else [f"verdict: {rows[0][-1]}"]
    return header, rows, notes


def cmd_map2d(cfg: RunConfig):
    axis1 = _axis(cfg, "map2d")
    axis2 = _axis(cfg, "map2d", second=True)
    fields = cfg.fields or DEFAULT_FIELDS["map2d"]
    result = run_sweep(_grid(cfg, axis1, axis2, fields), workers=cfg.workers)
    header, rows = _sweep_table(result)
    notes = []
    for f in fields:
        col = result.data[f]
        if np.any(np.isfinite(col)):
            notes.append(f"{f}: min {np.nanmin(col):.6g}  max {np.nanmax(col):.6g}  contrast {np.nanmax(col) - np.nanmin(col):.6g}")
    return header, rows, notes


def cmd_validate(cfg: RunConfig):
    checks = run_checks(cfg)
    header = ["property", "passed", "detail"]
    rows = [(c.name, c.passed, c.detail) for c in checks]
    notes = [f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.detail}" for c in checks]
    return header, rows, notes, all(c.passed for c in checks)


COMMANDS = {
    "spectrum": (cmd_spectrum, "probe transmission versus probe detuning"),
    "delay": (cmd_delay, "group delay along an axis, optionally for several gamma_nh values"),
    "eigen": (cmd_eigen, "eigenvalues of the effective Hamiltonian (and exceptional-point search)"),
    "stability": (cmd_stability, "Routh-Hurwitz coefficients and eigenvalue verdict of the drift matrix"),
    "map2d": (cmd_map2d, "two-axis sweep of response or stability fields"),
    "validate": (cmd_validate, "run the invariant suite"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ptmagnomech", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_text, description=help_text)
        sp.add_argument("--config", metavar="PATH", help="flat TOML configuration file")
        sp.add_argument("--set", metavar="KEY=VALUE", action="append", default=[], help="override a configuration key (repeatable)")
        sp.add_argument("--out", metavar="PATH", help="CSV output path (default: stdout)")
        sp.add_argument("--workers", metavar="N", type=int, help="worker threads for sweeps")
        sp.add_argument("--grid", metavar="START:STOP:COUNT", help="grid of the first sweep axis")
    return parser


def load_config(args) -> RunConfig:
    text = ""
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"config: cannot read {args.config}: {exc.strerror}") from None
    overrides = list(args.set)
    if args.grid is not None:
        overrides.append(f"grid={args.grid}")
    if args.out is not None:
        overrides.append({"out": args.out})
    if args.workers is not None:
        overrides.append({"workers": args.workers})
    return parse_config(text, overrides)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        fn = COMMANDS[args.command][0]
        with np.errstate(all="ignore"):
            out = fn(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    header, rows, notes = out[:3]
    text = format_csv(cfg, args.command, header, rows)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        for line in notes:
            print(line)
    else:
        sys.stdout.write(text)
        for line in notes:
            print(line, file=sys.stderr)
    if args.command == "validate" and not out[3]:
        return EXIT_CHECK_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
