"""Command-line harness: one subcommand per study, all file output here.

    axialwave evolve         --config run.toml [--out DIR] [--jobs N] [--scheme {2,4}]
    axialwave verify         ... writes identities.json + redshift_cert.json
    axialwave decay          ... writes energies.csv with slice-flux columns
    axialwave converge       ... writes convergence.csv order table
    axialwave normalize-kerr ... writes kerr_fit.json

Every run ends by writing manifest.json: the configuration hash, the parsed
configuration itself, any command-line overrides, study summaries, and a
sha256 per output file.  Runs are deterministic, so rerunning a config
reproduces every artifact byte for byte.

Exit codes: 0 success (and every verification check passed); 1 a check
failed (verify) or the profile was rejected (normalize-kerr); 2 the
configuration or study setup is invalid; 3 the evolved signal reached the
grid boundary.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import dataclasses
import functools
import hashlib
import json
import math
import sys
from pathlib import Path

from .config import ConfigError, RunConfig, load_config
from .energy import (
    RedshiftConstructionError,
    build_redshift,
    write_bulk_csv,
    write_energies_csv,
    write_redshift_json,
)
from .evolution import (
    BoundaryContactError,
    Trajectory,
    evolve_mode,
    make_initial_data,
    reduced_potential,
    write_snapshot_csv,
)
from .fields import (
    generate_consistent_initial_data,
    run_axial_system,
    write_kerr_fit_json,
    write_residuals_csv,
)
from .geometry import RadialGrid
from .harmonics import ModeIndex
from .identities import run_all, write_report
from .studies import (
    StudyError,
    convergence_run,
    convergence_study,
    decay_study,
    default_boundary,
    kerr_study,
    morawetz_windows,
    snapshot_energy_row,
    write_convergence_csv,
)


# ---------------------------------------------------------------------------
# shared plumbing


def _build_grid(cfg: RunConfig) -> RadialGrid:
    g = cfg.grid
    return RadialGrid.build(
        mass=g.mass, r_star_min=g.r_star_min, r_star_max=g.r_star_max,
        spacing=g.spacing,
    )


def _redshift_kwargs(cfg: RunConfig) -> dict:
    mass = cfg.grid.mass if cfg.grid is not None else 1.0
    rs = cfg.redshift
    return dict(mass=mass, r0=rs.r0, R0=rs.R0, delta1=rs.delta1, delta2=rs.delta2)


def _pick_snapshot(trajectory: Trajectory, t: float):
    for snap in trajectory.snapshots:
        if abs(snap.time - t) <= 1e-9 * max(1.0, abs(t)):
            return snap
    raise StudyError("run holds no snapshot at t = %g" % t)


def _fmt_time(t: float) -> str:
    return ("%g" % t).replace("-", "m").replace(".", "p")


def _json_safe(value):
    if isinstance(value, float) and math.isnan(value):
        return None
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def _file_sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_manifest(out_dir: Path, cfg: RunConfig, overrides: dict, extras: dict) -> None:
    names = sorted(
        p.name for p in out_dir.iterdir()
        if p.is_file() and p.name != "manifest.json"
    )
    payload = {
        "schema": "axialwave.run/1",
        "study": cfg.study,
        "config_sha256": cfg.sha256,
        "config": cfg.raw,
        "overrides": overrides,
        "seed": cfg.seed,
        "scheme": cfg.scheme,
        "outputs": {name: _file_sha256(out_dir / name) for name in names},
    }
    payload.update(_json_safe(extras))
    (out_dir / "manifest.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n"
    )


# ---------------------------------------------------------------------------
# evolve


def _single_field_parts(cfg: RunConfig, grid: RadialGrid):
    parts = []
    for spec in cfg.modes:
        mode = ModeIndex(spec.spin, spec.ell)
        parts.append(make_initial_data(spec.kind, grid, mode, **spec.params))
    return parts


def _morawetz_source(cfg: RunConfig, grid: RadialGrid):
    if cfg.coupled is not None:
        for profile in cfg.coupled.alpha:
            return make_initial_data(
                "gaussian-bump", grid, ModeIndex(2, profile.ell), **profile.params
            )
    for spec in cfg.modes:
        if spec.spin == 2 and spec.kind == "gaussian-bump":
            return make_initial_data(
                spec.kind, grid, ModeIndex(spec.spin, spec.ell), **spec.params
            )
    raise ConfigError("[morawetz] needs a spin-2 gaussian-bump to drive")


def run_evolve(cfg: RunConfig, out_dir: Path, jobs: int = 1):
    grid = _build_grid(cfg)
    t_final = cfg.time.t_final
    snap_times = tuple(cfg.output.snapshots or (0.0, t_final))
    rows = []
    extras: dict = {}

    if cfg.coupled is not None:
        spec = cfg.coupled
        alpha = {
            p.ell: make_initial_data(
                "gaussian-bump", grid, ModeIndex(2, p.ell), **p.params
            ).f
            for p in spec.alpha
        }
        beta = {
            p.ell: make_initial_data(
                "gaussian-bump", grid, ModeIndex(1, p.ell), **p.params
            ).f
            for p in spec.beta
        }
        data = generate_consistent_initial_data(
            grid, alpha=alpha, beta=beta, beta1_c1=spec.beta1_c1
        )
        boundary = {1: "hold"} if spec.beta1_c1 != 0.0 else "error"
        solution = run_axial_system(
            data, t_final, boundary=boundary, dt=cfg.time.dt, cfl=cfg.time.cfl,
            scheme=cfg.scheme, residual_times=spec.residual_times,
            snapshot_times=snap_times,
        )
        # one energies row per (time, ell): the spin-2 field where one is
        # carried, the lowest spin-1 field for ell = 1
        for run in solution.modes:
            traj = run.alpha if run.alpha is not None else run.beta
            for t in snap_times:
                snap = _pick_snapshot(traj, t)
                rows.append(snapshot_energy_row(snap, grid, traj.mode))
                write_snapshot_csv(
                    snap, grid,
                    out_dir / ("snapshot_s%dl%d_t%s.csv"
                               % (traj.mode.spin, traj.mode.ell, _fmt_time(t))),
                )
        write_residuals_csv(solution.residual_rows, out_dir / "residuals.csv")
        extras["kerr_amplitude"] = solution.kerr_amplitude
    else:
        for part in _single_field_parts(cfg, grid):
            mode = part.mode
            traj = evolve_mode(
                part, reduced_potential(grid, mode), t_final, cfg.time.dt,
                cfl=cfg.time.cfl, scheme=cfg.scheme, snapshot_times=snap_times,
                boundary=default_boundary(part),
            )
            for t in snap_times:
                snap = _pick_snapshot(traj, t)
                rows.append(snapshot_energy_row(snap, grid, mode))
                write_snapshot_csv(
                    snap, grid,
                    out_dir / ("snapshot_s%dl%d_t%s.csv"
                               % (mode.spin, mode.ell, _fmt_time(t))),
                )
        write_residuals_csv([], out_dir / "residuals.csv")

    rows.sort(key=lambda row: (row["tau"], row["ell"]))
    write_energies_csv(out_dir / "energies.csv", rows)

    if cfg.morawetz is not None:
        reports = morawetz_windows(
            _morawetz_source(cfg, grid), cfg.morawetz.windows,
            dt=cfg.time.dt, cfl=cfg.time.cfl, scheme=cfg.scheme,
        )
        write_bulk_csv(out_dir / "bulk.csv", reports)
        extras["morawetz"] = [
            {
                "window": list(report.window),
                "ratio_to_et0": report.ratio_to_et0,
                "min_pointwise": report.min_pointwise,
            }
            for report in reports
        ]
    return 0, extras


# ---------------------------------------------------------------------------
# verify


def run_verify(cfg: RunConfig, out_dir: Path, jobs: int = 1):
    reports = run_all(
        spin2_numerator=cfg.verify.spin2_numerator,
        post_numerator=cfg.verify.post_numerator,
        with_quadrature=cfg.verify.with_quadrature,
    )
    write_report(out_dir / "identities.json", reports)
    identities_ok = all(r.passed for r in reports)

    cert_ok = True
    try:
        mult, cert = build_redshift(**_redshift_kwargs(cfg))
        write_redshift_json(out_dir / "redshift_cert.json", mult, cert)
    except RedshiftConstructionError as exc:
        cert_ok = False
        (out_dir / "redshift_cert.json").write_text(
            json.dumps({"certified": False, "error": str(exc)},
                       indent=2, sort_keys=True) + "\n"
        )
    extras = {
        "identities_passed": identities_ok,
        "redshift_certified": cert_ok,
        "failed_checks": sorted(r.name for r in reports if not r.passed),
    }
    return (0 if identities_ok and cert_ok else 1), extras


# ---------------------------------------------------------------------------
# decay


def run_decay(cfg: RunConfig, out_dir: Path, jobs: int = 1):
    grid = _build_grid(cfg)
    parts = _single_field_parts(cfg, grid)
    mult, cert = build_redshift(**_redshift_kwargs(cfg))
    study = decay_study(
        parts, taus=cfg.output.slice_taus, t_final=cfg.time.t_final,
        dt=cfg.time.dt, cfl=cfg.time.cfl, scheme=cfg.scheme,
        multiplier=mult, certificate=cert,
        null_margin=cfg.foliation.null_margin, blend=cfg.foliation.blend,
        families=cfg.output.families,
    )
    write_energies_csv(out_dir / "energies.csv", study.rows)
    write_redshift_json(out_dir / "redshift_cert.json", mult, cert)
    extras = {
        "decay": {
            "t_final": study.t_final,
            "t_backward": study.t_backward,
            "families": list(cfg.output.families),
            "taus": list(study.taus),
            "modes": [
                {
                    "spin": res.spin,
                    "ell": res.ell,
                    "excluded": res.excluded,
                    "sigma_ratio_max": res.sigma_ratio_max,
                    "tilde_bounded": res.tilde_bounded,
                    "sup_bounded": res.sup_bounded,
                    "sigma_valid_min": res.sigma_valid_min,
                    "tilde_valid_min": res.tilde_valid_min,
                    "base_energy": res.energies.base,
                    "first_energy": res.energies.first,
                    "second_energy": res.energies.second,
                }
                for res in study.results
            ],
        }
    }
    return 0, extras


# ---------------------------------------------------------------------------
# converge


def run_converge(cfg: RunConfig, out_dir: Path, jobs: int = 1):
    kwargs = dict(
        mass=cfg.grid.mass,
        r_star_min=cfg.grid.r_star_min,
        r_star_max=cfg.grid.r_star_max,
        t_final=cfg.time.t_final,
        cfl=cfg.time.cfl,
        scheme=cfg.scheme,
    )
    if cfg.modes:
        lead = cfg.modes[0]
        kwargs["ell"] = lead.ell
        for key in ("center", "sigma", "amplitude"):
            if key in lead.params:
                kwargs[key] = lead.params[key]
    worker = functools.partial(convergence_run, **kwargs)
    spacings = cfg.converge.spacings
    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(
            max_workers=min(jobs, len(spacings))
        ) as pool:
            runs = list(pool.map(worker, spacings))
    else:
        runs = [worker(h) for h in spacings]
    study = convergence_study(runs)
    write_convergence_csv(out_dir / "convergence.csv", study)
    extras = {
        "converge": {
            "spacings": list(study.spacings),
            "orders": {row["quantity"]: row["order_fit"] for row in study.rows},
            "drift": {("%g" % run.spacing): run.drift for run in study.runs},
        }
    }
    return 0, extras


# ---------------------------------------------------------------------------
# normalize-kerr


def run_normalize_kerr(cfg: RunConfig, out_dir: Path, jobs: int = 1):
    grid = _build_grid(cfg)
    study = kerr_study(
        grid, c1=cfg.kerr.c1, c2=cfg.kerr.c2,
        drift_t_final=cfg.kerr.drift_t_final,
        cfl=cfg.time.cfl if cfg.time is not None else 0.5,
        scheme=cfg.scheme,
    )
    write_kerr_fit_json(study.fit, out_dir / "kerr_fit.json")
    accepted = study.fit.verdict == "kerr-normalized"
    extras = {
        "kerr": {
            "verdict": study.fit.verdict,
            "expected_amplitude": study.expected_amplitude,
            "fitted_amplitude": study.fit.amplitude,
            "refit_increment": study.refit_increment,
            "drift": study.drift,
        }
    }
    return (0 if accepted else 1), extras


# ---------------------------------------------------------------------------
# entry point


_RUNNERS = {
    "evolve": run_evolve,
    "verify": run_verify,
    "decay": run_decay,
    "converge": run_converge,
    "normalize-kerr": run_normalize_kerr,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="axialwave",
        description="Evolution, verification, and decay studies for axial"
                    " waves on the Schwarzschild exterior.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _RUNNERS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="TOML run configuration")
        p.add_argument("--out", default=None, help="output directory"
                       " (overrides [run] out)")
        p.add_argument("--jobs", type=int, default=1,
                       help="parallel resolution jobs (converge)")
        p.add_argument("--scheme", type=int, choices=(2, 4), default=None,
                       help="override the integrator order")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if cfg.study != args.command:
            raise ConfigError(
                "config study %r does not match subcommand %r"
                % (cfg.study, args.command)
            )
        if args.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
        overrides = {}
        if args.scheme is not None and args.scheme != cfg.scheme:
            cfg = dataclasses.replace(cfg, scheme=args.scheme)
            overrides["scheme"] = args.scheme
        out = args.out if args.out is not None else cfg.out
        if out is None:
            raise ConfigError("no output directory: give --out or set [run] out")
        out_dir = Path(out)
        out_dir.mkdir(parents=True, exist_ok=True)
        code, extras = _RUNNERS[args.command](cfg, out_dir, jobs=args.jobs)
        _write_manifest(out_dir, cfg, overrides, extras)
        return code
    except BoundaryContactError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 3
    except (ValueError, RedshiftConstructionError) as exc:
        # ConfigError and StudyError are ValueErrors; so are the setup
        # errors raised by the library on impossible requests
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
