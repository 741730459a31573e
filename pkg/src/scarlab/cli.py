"""Command-line entry point: ``scarlab <subcommand> [--config ...]``."""

from __future__ import annotations

import argparse
import math
import os
import sys
import time

import numpy as np

from .config import RunConfig, load_config, validate
from .errors import ConfigError, ToleranceNotMet
from .report import Report, emit_report

EXIT_OK, EXIT_CONFIG, EXIT_TOL, EXIT_INVARIANT = 0, 2, 3, 4


class InvariantViolation(Exception):
    def __init__(self, report: Report):
        super().__init__(report.summary.get("violation", "invariant violated"))
        self.report = report


def _finish(report: Report, ok: bool, what: str) -> Report:
    report.status = "ok" if ok else "violation"
    if not ok:
        report.summary["violation"] = what
        raise InvariantViolation(report)
    return report


# ---------------------------------------------------------------------------
# subcommands

TRANSFORM_COLUMNS = ["s", "h_model", "h_model_from_g", "model_rel", "h_windowed", "h_from_g_roundtrip",
                     "windowed_rel", "abs_err"]


def cmd_transform_check(cfg: RunConfig) -> Report:
    from .kernel import default_triple
    from .spectral import transform_check

    w = cfg.window()
    s = np.linspace(w.r - 5 * w.K, w.r + 5 * w.K, cfg.n_samples)
    d = transform_check(w, s)
    abs_err = np.abs(d["windowed_numeric"] - d["windowed_convolved"])
    rows = list(zip(s, d["model_closed"], d["model_numeric"], d["model_rel"], d["windowed_convolved"],
                    d["windowed_numeric"], d["windowed_rel"], abs_err))
    tri = default_triple(w)
    summary = {"max_model_rel": float(d["model_rel"].max()),
               "max_windowed_rel": float(d["windowed_rel"].max()),
               "max_abs_err": float(abs_err.max()),
               "decay_constant": tri.decay_constant, "tail_budget": tri.h_tail_budget,
               "model_tol": 1e-8, "windowed_tol": 1e-6}
    rep = Report("transform-check", cfg.as_dict(), summary, TRANSFORM_COLUMNS, rows)
    if summary["max_model_rel"] > 1e-8 or summary["max_windowed_rel"] > 1e-6:
        raise ToleranceNotMet("transform pair mismatch", summary["max_model_rel"], summary["max_windowed_rel"])
    return rep


def _fd_hessian(t, alpha, h=1e-4):
    from .hyperbolic import phase

    f = lambda n, a: phase(n, t, a)
    pnn = (f(h, alpha) - 2 * f(0, alpha) + f(-h, alpha)) / h ** 2
    paa = (f(0, alpha + h) - 2 * f(0, alpha) + f(0, alpha - h)) / h ** 2
    pna = (f(h, alpha + h) - f(h, alpha - h) - f(-h, alpha + h) + f(-h, alpha - h)) / (4 * h * h)
    return pnn, pna, paa


def phase_check_rows(n_t: int):
    from .hyperbolic import phase, phase_hessian

    rows = []
    for t in np.linspace(-2.0, 2.0, n_t):
        H0 = phase_hessian(0.0, t, 0.0)
        H1 = phase_hessian(0.0, t, math.pi / 2)
        closed = (2 * math.exp(-t), -2 * math.exp(t), 2 * math.exp(2 * t) - 2, 2.0)
        got = (H0[0, 1], H1[0, 1], H1[1, 1], H1[0, 0])
        fd0 = _fd_hessian(t, 0.0)
        fd1 = _fd_hessian(t, math.pi / 2)
        fd = (fd0[1], fd1[1], fd1[2], fd1[0])
        rows.append((float(t), phase(0.0, t, 0.0) - t, phase(0.0, t, math.pi / 2) + t,
                     max(abs(a - b) for a, b in zip(got, closed)),
                     max(abs(a - b) for a, b in zip(fd, closed))))
    return rows


def cmd_phase_check(cfg: RunConfig) -> Report:
    rows = phase_check_rows(cfg.n_t)
    cols = ["t", "phase_up_minus_t", "phase_down_plus_t", "hessian_closed_err", "hessian_fd_err"]
    arr = np.array(rows)
    summary = {"max_phase_err": float(np.max(np.abs(arr[:, 1:3]))),
               "max_hessian_closed_err": float(arr[:, 3].max()),
               "max_hessian_fd_err": float(arr[:, 4].max())}
    rep = Report("phase-check", cfg.as_dict(), summary, cols, rows)
    ok = (summary["max_phase_err"] <= 1e-12 and summary["max_hessian_closed_err"] <= 1e-10
          and summary["max_hessian_fd_err"] <= 1e-4)
    return _finish(rep, ok, "phase identities")


def cmd_kernel_eval(cfg: RunConfig) -> Report:
    from .hyperbolic import NakPoint
    from .kernel import evaluate_lift_field

    w = cfg.window()
    s = cfg.s if cfg.s is not None else w.r
    field = evaluate_lift_field(w, [NakPoint(cfg.x, cfg.t, cfg.theta)], cfg.variant, s,
                                cfg.mode, cfg.tol, cfg.threads)
    cols = ["x", "t", "theta", "re", "im", "err_est"]
    rows = list(field.rows())
    v = rows[0]
    summary = {"variant": cfg.variant, "mode": cfg.mode, "s": s, "value_re": v[3], "value_im": v[4],
               "err_est": v[5]}
    return Report("kernel-eval", cfg.as_dict(), summary, cols, rows)


def _grid(cfg):
    from .experiments import GridSpec

    return GridSpec(cfg.grid_tau, cfg.grid_y, cfg.grid_theta)


def _collar(cfg, w):
    from .groups import CollarSpec

    return CollarSpec(w, angle_bound=cfg.angle_bound)


def cmd_mass(cfg: RunConfig) -> Report:
    from .experiments import measure_collar_mass

    w = cfg.window()
    cells = []
    rep = measure_collar_mass(cfg.load_group(), w, _collar(cfg, w), _grid(cfg), cfg.eta,
                              cfg.n_validate, cfg.seed, cells=cells, validate_tol=cfg.validate_tol)
    summary = rep.as_dict()
    summary.pop("window")
    val = summary.pop("validation") or {}
    summary["validation"] = {k: v for k, v in val.items() if k != "rows"}
    summary["collar_mass_log_r"] = rep.collar_mass * w.log_r
    summary["total_mass_log_r"] = rep.total_mass * w.log_r
    out = Report("mass", cfg.as_dict(), summary, ["region", "tau", "theta", "mass"], cells)
    ok = val.get("passed", True)
    return _finish(out, ok, "asymptotic and quadrature projections disagree beyond the remainder budget")


def cmd_defect(cfg: RunConfig) -> Report:
    from .experiments import measure_defect, narrow_window_defects

    w = cfg.window()
    cells = []
    rep = measure_defect(cfg.load_group(), w, _grid(cfg), _collar(cfg, w), cells=cells)
    summary = rep.as_dict()
    summary.pop("window")
    summary["narrow_window"] = narrow_window_defects(w)
    out = Report("defect", cfg.as_dict(), summary, ["region", "tau", "theta", "mass"], cells)
    return _finish(out, rep.route_gap <= 0.05, "lift and closed-form defect routes differ by more than 5%")


def cmd_collar_injectivity(cfg: RunConfig) -> Report:
    from .groups import check_collar_injectivity

    w = cfg.window()
    res = check_collar_injectivity(cfg.load_group(), _collar(cfg, w), cfg.pairs, cfg.seed)
    rows = sorted((k, v) for k, v in res.items() if np.isscalar(v))
    out = Report("collar-injectivity", cfg.as_dict(), dict(rows), ["key", "value"], rows)
    return _finish(out, res["total_violations"] == 0, "collar injectivity violated")


def cmd_dilute(cfg: RunConfig) -> Report:
    from .experiments import dilute, measure_collar_mass, measure_defect

    w = cfg.window()
    G = cfg.load_group()
    coll = _collar(cfg, w)
    mass = measure_collar_mass(G, w, coll, _grid(cfg), cfg.eta)
    dfx = measure_defect(G, w, _grid(cfg), coll)
    # unit-normalized k-bar
    scar_defect = dfx.defect_norm / dfx.base_norm
    scar_mass = mass.ratio
    cols = ["epsilon", "delta2", "combined_defect_bound", "bound_over_eps",
            "combined_defect_measured", "combined_collar_mass_lower", "amplitude_lower", "concentrates"]
    rows = []
    for f in (0.25, 0.5, 1.0, 2.0, 4.0):
        eps = cfg.epsilon * f
        d = dilute(cfg.base_defect, cfg.base_mass_on_collar, scar_defect, scar_mass,
                   cfg.eigen_gap, eps, cfg.C_prime, cfg.K_weyl, w.r)
        rows.append((eps, d.delta2, d.combined_defect_bound, d.bound_over_eps,
                     d.combined_defect_measured, d.combined_collar_mass_lower, d.amplitude_lower,
                     d.concentrates))
    main = dilute(cfg.base_defect, cfg.base_mass_on_collar, scar_defect, scar_mass,
                  cfg.eigen_gap, cfg.epsilon, cfg.C_prime, cfg.K_weyl, w.r)
    summary = main.as_dict()
    summary.update(scar_defect=scar_defect, scar_collar_mass=scar_mass)
    out = Report("dilute", cfg.as_dict(), summary, cols, rows)
    ok = all(row[3] <= 1 + 1e-12 for row in rows)
    return _finish(out, ok, "combined defect bound exceeds epsilon r/log r")


COMMANDS = {
    "transform-check": cmd_transform_check,
    "phase-check": cmd_phase_check,
    "kernel-eval": cmd_kernel_eval,
    "mass": cmd_mass,
    "defect": cmd_defect,
    "collar-injectivity": cmd_collar_injectivity,
    "dilute": cmd_dilute,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="scarlab", description="Geodesic quasimode laboratory")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="key = value config file (defaults if omitted)")
    ap.add_argument("--out", help="output directory (overrides config 'out')")
    ap.add_argument("--threads", help="worker threads, integer or 'auto'")
    ap.add_argument("--seed", type=int, help="seed for low-discrepancy samplers")
    return ap


def _threads(v):
    if v == "auto":
        return os.cpu_count() or 1
    n = int(v)
    if n < 1:
        raise ValueError
    return n


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        cfg = load_config(args.config) if args.config else validate(RunConfig())
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("--seed must be a nonnegative integer")
            cfg.seed = args.seed
        if args.threads is not None:
            try:
                cfg.threads = _threads(args.threads)
            except ValueError:
                raise ConfigError(f"--threads must be a positive integer or 'auto', got {args.threads!r}")
        if args.out is not None:
            cfg.out = args.out
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    code = EXIT_OK
    try:
        report = COMMANDS[args.command](cfg)
    except InvariantViolation as exc:
        report = exc.report
        print(f"invariant violation: {exc}", file=sys.stderr)
        code = EXIT_INVARIANT
    except ToleranceNotMet as exc:
        print(f"tolerance not met: {exc}", file=sys.stderr)
        return EXIT_TOL
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    report.wall_time = time.perf_counter() - t0
    paths = emit_report(report, cfg.out)
    print(f"{args.command}: {report.status}; wrote {paths['manifest']} and {paths['data']}")
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
