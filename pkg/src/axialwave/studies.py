"""Study recipes: the orchestration layer behind the command-line harness.

Each study evolves modes with the core integrator, measures energies and
residuals, and returns plain rows ready for the CSV writers.  The heavy
acceptance budgets live here so the command line and the test suite share
one implementation; everything is a pure function of its inputs plus the
files it is asked to write.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .energy import (
    InitialEnergies,
    RedshiftCertificate,
    RedshiftMultiplier,
    build_redshift,
    initial_energies,
    merge_slices,
    morawetz_bulk,
    n_energy,
    t_energy,
    z_energy,
)
from .evolution import (
    ModeField,
    SliceRequest,
    Snapshot,
    evolve_mode,
    make_initial_data,
    reduced_potential,
)
from .fields import (
    AxialModeRun,
    KerrFit,
    decaying_branch,
    generate_consistent_initial_data,
    growing_branch,
    kerr_beta_coefficient,
    normalize_kerr,
    run_axial_mode,
    verify_beta1_static,
)
from .geometry import RadialGrid, build_foliation
from .harmonics import ModeIndex


class StudyError(ValueError):
    """A study could not run as configured (budget or coverage problem)."""


# ---------------------------------------------------------------------------
# flat-slice energy rows


def snapshot_energy_row(
    snapshot: Snapshot, grid: RadialGrid, mode: ModeIndex
) -> dict:
    """One energies-table row from a constant-time snapshot.

    Foliation-slice columns are zero here: they are populated by the decay
    study, which gathers the graph slices this row has no access to."""
    sup = float(np.max(np.abs(snapshot.f))) if snapshot.f.size else 0.0
    return {
        "tau": float(snapshot.time),
        "ell": mode.ell,
        "E_T": t_energy(snapshot, grid, mode),
        "E_N_sigma": 0.0,
        "E_N_tilde": 0.0,
        "E_Z": z_energy(snapshot, grid, mode, weighted=False),
        "E_Zw": z_energy(snapshot, grid, mode, weighted=True),
        "sup_abs_f": sup,
        "tau2_EN": 0.0,
        "tau_sup": 0.0,
    }


# ---------------------------------------------------------------------------
# decay / boundedness study


@dataclass(frozen=True)
class ModeDecayResult:
    """Per-mode slice table plus the boundedness verdicts taken on it."""

    spin: int
    ell: int
    rows: list
    energies: InitialEnergies
    sigma_ratio_max: float
    tilde_bounded: bool | None
    sup_bounded: bool | None
    excluded: bool
    sigma_valid_min: float
    tilde_valid_min: float


@dataclass(frozen=True)
class DecayStudy:
    taus: tuple
    t_final: float
    t_backward: float
    results: list

    @property
    def rows(self) -> list:
        merged = [row for res in self.results for row in res.rows]
        return sorted(merged, key=lambda row: (row["tau"], row["ell"]))


def _half_split_bounded(values: list) -> bool:
    """Max over the later half does not exceed the max over the earlier half
    (boundedness with upper-bound semantics: faster decay passes)."""
    n = len(values)
    if n < 2:
        return True
    first, last = values[: n // 2], values[n // 2 :]
    lo, hi = max(first), max(last)
    return hi <= lo * (1.0 + 1e-12) + 1e-300


def default_boundary(part: ModeField) -> str:
    """Boundary policy a field needs: globally supported static seeds must
    be pinned ("hold"), compact bumps walled ("error")."""
    static = bool(np.all(part.f_t == 0.0)) and float(np.abs(part.f[-1])) > 0.0
    return "hold" if static else "error"


def decay_study(
    parts: list,
    *,
    taus,
    t_final: float,
    dt: float | None = None,
    cfl: float = 0.5,
    scheme: int = 2,
    boundary=None,
    multiplier: RedshiftMultiplier | None = None,
    certificate: RedshiftCertificate | None = None,
    null_margin: float = 4.0,
    blend=(3.0, 20.0),
    families=("sigma", "tilde"),
) -> DecayStudy:
    """Gather the requested slice families at the requested labels and
    tabulate every energy column, per mode.

    parts are independent single-field initial states on one shared grid.
    Slices whose crossing times dip below the initial time are completed by
    a backward pass from the same data (the integrator is time-reversible),
    and near-horizon points whose crossing exceeds the final time are
    truncated; the omitted field content is exponentially small for compact
    data and the per-family valid fractions are reported.  families may be
    restricted to ("sigma",) for boundedness runs whose budget cannot reach
    the later hyperboloidal slices (their heights start ~25 grid masses up);
    columns of a family that is not gathered stay zero.

    The lowest spin-1 mode is tabulated but flagged excluded: its content is
    removed by the rotation normalization, not propagated by decay claims.
    """
    if not parts:
        return DecayStudy(tuple(taus), t_final, 0.0, [])
    grid = parts[0].grid
    for part in parts:
        if part.grid is not grid and part.grid.spacing != grid.spacing:
            raise StudyError("decay study parts must share one grid")
    taus = tuple(sorted(float(t) for t in taus))
    if not taus:
        raise StudyError("decay study needs at least one slice label")
    if taus[-1] >= t_final:
        raise StudyError("slice labels must precede the final time")
    families = tuple(families)
    if not families or any(tag not in ("sigma", "tilde") for tag in families):
        raise StudyError("families must be a nonempty subset of sigma/tilde")

    if multiplier is None or certificate is None:
        multiplier, certificate = build_redshift(mass=grid.mass)
    foliations = {}
    if "sigma" in families:
        foliations["sigma"] = build_foliation("horizon_adapted", grid)
    if "tilde" in families:
        foliations["tilde"] = build_foliation(
            "hyperboloidal", grid, null_margin=null_margin, blend=blend
        )
    requests = [
        SliceRequest(tag=tag, tau=tau, height=fol.height, slope=fol.slope)
        for tag, fol in foliations.items()
        for tau in taus
    ]
    # only the horizon-adapted family dips below t = 0 (outward log droop)
    t_back = 0.0
    if "sigma" in foliations:
        t_back = min(0.0, taus[0] + float(np.min(foliations["sigma"].height)))
    if t_back < 0.0:
        t_back -= 1.0
    back_requests = [req for req in requests if req.tag == "sigma"]

    # cheap coverage pre-check before committing to the long run
    for req in requests:
        crossing = req.tau + req.height
        n_valid = int(np.sum((crossing >= t_back) & (crossing <= t_final)))
        if n_valid < 8:
            raise StudyError(
                "slice %s at tau=%g would gather %d points; raise t_final"
                " above %g or drop the family"
                % (req.tag, req.tau, n_valid, req.tau + float(np.min(req.height)))
            )

    results = []
    for part in parts:
        mode = part.mode
        policy = boundary
        if isinstance(boundary, dict):
            policy = boundary.get((mode.spin, mode.ell))
        if policy is None:
            policy = default_boundary(part)
        pot = reduced_potential(grid, mode)
        fwd = evolve_mode(
            part, pot, t_final, dt, cfl=cfl, scheme=scheme,
            snapshot_times=taus, slice_requests=requests, boundary=policy,
        )
        gathered = {(s.tag, s.tau): s for s in fwd.slices}
        if t_back < 0.0:
            bwd = evolve_mode(
                part, pot, t_back, dt, cfl=cfl, scheme=scheme,
                slice_requests=back_requests, boundary=policy,
            )
            for piece in bwd.slices:
                key = (piece.tag, piece.tau)
                gathered[key] = merge_slices(gathered[key], piece)
        snaps = {round(s.time, 9): s for s in fwd.snapshots}

        e123 = initial_energies([part], multiplier)
        rows = []
        valid_frac = {"sigma": 1.0, "tilde": 1.0}
        for tau in taus:
            snap = snaps[round(tau, 9)]
            row = snapshot_energy_row(snap, grid, mode)
            for tag, fol in foliations.items():
                piece = gathered[(tag, tau)]
                frac = float(piece.valid.mean())
                valid_frac[tag] = min(valid_frac[tag], frac)
                try:
                    value = n_energy(piece, fol, multiplier, mode)
                except ValueError as exc:
                    raise StudyError(
                        "slice %s at tau=%g is not covered by the run: %s"
                        % (tag, tau, exc)
                    ) from exc
                row["E_N_sigma" if tag == "sigma" else "E_N_tilde"] = value
            if "tilde" in foliations:
                tilde_piece = gathered[("tilde", tau)]
                sup = 0.0
                if np.any(tilde_piece.valid):
                    sup = float(np.max(np.abs(tilde_piece.f[tilde_piece.valid])))
                row["sup_abs_f"] = sup
                row["tau2_EN"] = (
                    tau**2 * row["E_N_tilde"] / e123.first
                    if e123.first > 0.0
                    else 0.0
                )
                row["tau_sup"] = tau * sup
            rows.append(row)

        excluded = (mode.spin, mode.ell) == (1, 1)
        first_sigma = rows[0]["E_N_sigma"]
        ratio_max = (
            max(row["E_N_sigma"] for row in rows) / first_sigma
            if first_sigma > 0.0
            else 0.0
        )
        has_tilde = "tilde" in foliations and not excluded
        results.append(
            ModeDecayResult(
                spin=mode.spin,
                ell=mode.ell,
                rows=rows,
                energies=e123,
                sigma_ratio_max=ratio_max,
                tilde_bounded=(
                    _half_split_bounded([r["tau2_EN"] for r in rows])
                    if has_tilde
                    else None
                ),
                sup_bounded=(
                    _half_split_bounded([r["tau_sup"] for r in rows])
                    if has_tilde
                    else None
                ),
                excluded=excluded,
                sigma_valid_min=valid_frac["sigma"],
                tilde_valid_min=valid_frac["tilde"],
            )
        )
    return DecayStudy(taus, float(t_final), float(t_back), results)


# ---------------------------------------------------------------------------
# convergence study


CONVERGENCE_CSV_COLUMNS = (
    "quantity",
    "h_coarse",
    "h_mid",
    "h_fine",
    "err_coarse",
    "err_mid",
    "err_fine",
    "order_coarse_pair",
    "order_fine_pair",
    "order_fit",
)

_RESIDUAL_QUANTITIES = (
    ("res_Rtphi", "radial"),
    ("res_Rrphi", "balance"),
    ("res_Rthetaphi", "transport"),
    ("res_closed", "closure"),
)


@dataclass(frozen=True)
class ConvergenceRun:
    """Everything one resolution contributes to the order table."""

    spacing: float
    drift: float
    e_t0: float
    residual_max: dict
    final_field: np.ndarray
    run: AxialModeRun


@dataclass(frozen=True)
class ConvergenceStudy:
    spacings: tuple
    rows: list
    runs: list

    def row(self, quantity: str) -> dict:
        for row in self.rows:
            if row["quantity"] == quantity:
                return row
        raise KeyError(quantity)

    @property
    def drift_at(self) -> dict:
        return {run.spacing: run.drift for run in self.runs}


def _order_pair(coarse: float, fine: float, ratio: float) -> float:
    if coarse > 0.0 and fine > 0.0:
        return math.log(coarse / fine) / math.log(ratio)
    return float("nan")


def _order_fit(spacings, errs) -> float:
    pts = [(h, e) for h, e in zip(spacings, errs) if e > 0.0 and not math.isnan(e)]
    if len(pts) < 2:
        return float("nan")
    hs = np.log([p[0] for p in pts])
    es = np.log([p[1] for p in pts])
    return float(np.polyfit(hs, es, 1)[0])


def convergence_run(
    spacing: float,
    *,
    mass: float = 1.0,
    r_star_min: float,
    r_star_max: float,
    t_final: float,
    ell: int = 2,
    center: float = 0.0,
    sigma: float = 3.0,
    amplitude: complex = 1.0,
    cfl: float = 0.5,
    scheme: int = 2,
    residual_times=(),
) -> ConvergenceRun:
    """One resolution of the coupled convergence study (top level so the
    harness can farm resolutions out to worker processes)."""
    grid = RadialGrid.build(
        mass=mass, r_star_min=r_star_min, r_star_max=r_star_max, spacing=spacing
    )
    seed = make_initial_data(
        "gaussian-bump", grid, ModeIndex(2, ell),
        center=center, sigma=sigma, amplitude=amplitude,
    )
    data = generate_consistent_initial_data(grid, alpha={ell: seed.f})[0]
    if not residual_times:
        # the transported-profile time derivative needs interior steps on
        # both sides of each recorded time, so stay short of the final time
        residual_times = (0.5 * t_final, 0.9 * t_final)
    run = run_axial_mode(
        data, t_final, cfl=cfl, scheme=scheme,
        residual_times=tuple(residual_times),
        snapshot_times=(0.0, t_final),
    )
    mode = ModeIndex(2, ell)
    e0 = t_energy(run.alpha.snapshots[0], grid, mode)
    e1 = t_energy(run.alpha.snapshots[-1], grid, mode)
    drift = abs(e1 - e0) / e0 if e0 > 0.0 else 0.0
    residual_max = {
        name: max(getattr(row, attr) for row in run.residuals)
        for name, attr in _RESIDUAL_QUANTITIES
    }
    return ConvergenceRun(
        spacing=float(spacing),
        drift=drift,
        e_t0=e0,
        residual_max=residual_max,
        final_field=np.asarray(run.alpha.snapshots[-1].f),
        run=run,
    )


def convergence_study(runs: list) -> ConvergenceStudy:
    """Assemble the order table from three single-resolution runs.

    The solution row compares fields pairwise after restriction to the
    coarsest grid (the windows coincide and the spacings nest, so coarse
    points are a stride of finer ones); drift and residual rows carry one
    error per resolution.  Quantities that are identically zero (zero data)
    get order n/a.
    """
    runs = sorted(runs, key=lambda r: -r.spacing)
    if len(runs) != 3:
        raise StudyError("convergence study needs exactly three resolutions")
    hs = tuple(run.spacing for run in runs)
    for coarse, fine in ((0, 1), (1, 2)):
        ratio = hs[coarse] / hs[fine]
        if abs(ratio - round(ratio)) > 1e-9:
            raise StudyError("spacings must nest (integer refinement ratios)")

    def restrict(run: ConvergenceRun) -> np.ndarray:
        stride = int(round(hs[0] / run.spacing))
        return run.final_field[::stride]

    h = hs[0]
    f_c, f_m, f_f = (restrict(run) for run in runs)
    e_cm = float(np.sqrt(h * np.sum(np.abs(f_c - f_m) ** 2)))
    e_mf = float(np.sqrt(h * np.sum(np.abs(f_m - f_f) ** 2)))
    rows = [
        {
            "quantity": "field",
            "h_coarse": hs[0], "h_mid": hs[1], "h_fine": hs[2],
            "err_coarse": e_cm, "err_mid": e_mf, "err_fine": float("nan"),
            "order_coarse_pair": _order_pair(e_cm, e_mf, hs[0] / hs[1]),
            "order_fine_pair": float("nan"),
            "order_fit": _order_pair(e_cm, e_mf, hs[0] / hs[1]),
        }
    ]

    def error_row(quantity: str, errs) -> dict:
        return {
            "quantity": quantity,
            "h_coarse": hs[0], "h_mid": hs[1], "h_fine": hs[2],
            "err_coarse": errs[0], "err_mid": errs[1], "err_fine": errs[2],
            "order_coarse_pair": _order_pair(errs[0], errs[1], hs[0] / hs[1]),
            "order_fine_pair": _order_pair(errs[1], errs[2], hs[1] / hs[2]),
            "order_fit": _order_fit(hs, errs),
        }

    rows.append(error_row("et_drift", [run.drift for run in runs]))
    for name, _attr in _RESIDUAL_QUANTITIES:
        rows.append(error_row(name, [run.residual_max[name] for run in runs]))
    return ConvergenceStudy(spacings=hs, rows=rows, runs=list(runs))


def _fmt_order_cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, float) and math.isnan(value):
        return "n/a"
    return "%.17g" % value


def write_convergence_csv(path, study: ConvergenceStudy) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CONVERGENCE_CSV_COLUMNS)
        for row in study.rows:
            writer.writerow([_fmt_order_cell(row[c]) for c in CONVERGENCE_CSV_COLUMNS])


# ---------------------------------------------------------------------------
# windowed bulk study


def morawetz_windows(
    field_0: ModeField,
    windows,
    *,
    dt: float | None = None,
    cfl: float = 0.5,
    scheme: int = 2,
    boundary: str = "error",
) -> list:
    """Bulk reports over a family of windows (each re-evolves from the
    carried initial data; windows share the step layout of the longest)."""
    reports = []
    for window in windows:
        reports.append(
            morawetz_bulk(
                field_0, (float(window[0]), float(window[1])),
                dt=dt, cfl=cfl, scheme=scheme, boundary=boundary,
            )
        )
    return reports


# ---------------------------------------------------------------------------
# rotation-normalization study


@dataclass(frozen=True)
class KerrStudy:
    """Fit of a synthetic lowest-mode profile, the idempotence refit, and
    the optional staticity drift of the evolved profile."""

    fit: KerrFit
    expected_amplitude: float
    refit_increment: float
    drift: float | None


def kerr_study(
    grid: RadialGrid,
    *,
    c1: float = 3.0,
    c2: float = 0.0,
    drift_t_final: float | None = 20.0,
    cfl: float = 0.5,
    scheme: int = 2,
) -> KerrStudy:
    profile = c1 * decaying_branch(grid.r, grid.mass)
    if c2:
        profile = profile + c2 * growing_branch(grid.r, grid.mass)
    mode = ModeIndex(1, 1)
    seed = ModeField(mode, grid, profile.astype(complex), np.zeros(grid.size, dtype=complex))
    fit = normalize_kerr(seed, strict=False)
    expected = c1 / (6.0 * grid.mass)

    # the rotation solution of the fitted amplitude cancels the decaying
    # branch, so normalization means adding it to the profile
    leftover = profile + kerr_beta_coefficient(grid.r, grid.mass, fit.amplitude)
    second = normalize_kerr(
        ModeField(mode, grid, leftover.astype(complex), np.zeros(grid.size, dtype=complex)),
        strict=False,
        reference_norm=fit.source_norm,
    )

    drift = None
    if drift_t_final and fit.verdict == "kerr-normalized":
        static = make_initial_data("static-beta1", grid, mode, c1=c1)
        traj = evolve_mode(
            static, reduced_potential(grid, mode), float(drift_t_final),
            cfl=cfl, scheme=scheme, boundary="hold",
            snapshot_times=tuple(np.linspace(0.0, float(drift_t_final), 11)),
        )
        drift = verify_beta1_static(traj)
    return KerrStudy(
        fit=fit,
        expected_amplitude=expected,
        refit_increment=abs(second.amplitude),
        drift=drift,
    )
