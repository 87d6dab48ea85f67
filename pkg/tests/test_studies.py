"""Study-layer checks at toy scale.

The orchestration recipes behind the command-line harness are exercised on
small grids and short horizons: a decay study gathering both slice families,
a backward completion pass for early horizon-adapted labels, the coverage
pre-check, a three-resolution convergence table with its CSV shape, windowed
bulk reports, and the rotation-normalization round trip.  The acceptance
suite runs the same recipes at the advertised budgets.
"""

from __future__ import annotations

import csv
import math

import numpy as np
import pytest

from axialwave.energy import ENERGIES_CSV_COLUMNS, build_redshift
from axialwave.evolution import make_initial_data
from axialwave.geometry import RadialGrid
from axialwave.harmonics import ModeIndex
from axialwave.studies import (
    CONVERGENCE_CSV_COLUMNS,
    _RESIDUAL_QUANTITIES,
    ConvergenceRun,
    StudyError,
    convergence_run,
    convergence_study,
    decay_study,
    kerr_study,
    morawetz_windows,
    snapshot_energy_row,
    write_convergence_csv,
)

MODE2 = ModeIndex(spin=2, ell=2)
MODE11 = ModeIndex(spin=1, ell=1)


@pytest.fixture(scope="module")
def redshift():
    return build_redshift()


# ---------------------------------------------------------------------------
# decay / boundedness study


@pytest.fixture(scope="module")
def toy_decay(redshift):
    grid = RadialGrid.build(mass=1.0, r_star_min=-110.0, r_star_max=110.0,
                            spacing=0.2)
    bump = make_initial_data("gaussian-bump", grid, MODE2, center=0.0,
                             sigma=3.0)
    mult, cert = redshift
    return decay_study([bump], taus=(20.0, 30.0, 40.0), t_final=70.0,
                       multiplier=mult, certificate=cert)


def test_decay_rows_match_energy_schema(toy_decay):
    rows = toy_decay.rows
    assert len(rows) == 3
    assert [row["tau"] for row in rows] == [20.0, 30.0, 40.0]
    for row in rows:
        assert tuple(row.keys()) == ENERGIES_CSV_COLUMNS


def test_decay_tilde_energy_decays(toy_decay):
    rows = toy_decay.rows
    tilde = [row["E_N_tilde"] for row in rows]
    assert all(value > 0.0 for value in tilde)
    assert tilde[0] > tilde[1] > tilde[2]
    sups = [row["sup_abs_f"] for row in rows]
    assert sups[0] > sups[1] > sups[2] > 0.0


def test_decay_verdicts_and_fractions(toy_decay):
    (result,) = toy_decay.results
    assert (result.spin, result.ell) == (2, 2)
    assert not result.excluded
    assert result.tilde_bounded and result.sup_bounded
    assert result.sigma_ratio_max > 0.0
    assert 0.0 < result.sigma_valid_min <= 1.0
    assert 0.0 < result.tilde_valid_min <= 1.0
    assert result.energies.base > 0.0
    assert result.energies.first > 0.0


def test_decay_backward_pass_and_exclusion(redshift):
    grid = RadialGrid.build(mass=1.0, r_star_min=-110.0, r_star_max=110.0,
                            spacing=0.2)
    bump = make_initial_data("gaussian-bump", grid, MODE2, center=0.0,
                             sigma=3.0)
    static = make_initial_data("static-beta1", grid, MODE11, c1=1.0)
    mult, cert = redshift
    study = decay_study([bump, static], taus=(4.0, 10.0), t_final=30.0,
                        families=("sigma",), multiplier=mult,
                        certificate=cert)

    # early labels dip below t = 0 through the outward droop of the
    # horizon-adapted heights, so the backward pass must have run
    assert study.t_backward < 0.0

    by_mode = {(res.spin, res.ell): res for res in study.results}
    assert by_mode[(1, 1)].excluded
    assert not by_mode[(2, 2)].excluded
    # no tilde family gathered: columns stay zero, verdicts stay open
    for res in study.results:
        assert res.tilde_bounded is None and res.sup_bounded is None
        for row in res.rows:
            assert row["E_N_tilde"] == 0.0 and row["tau2_EN"] == 0.0
            assert row["E_N_sigma"] > 0.0

    # slices of a static profile all carry the same energy (the truncated
    # near-horizon stretch is exponentially small in measure)
    static_rows = by_mode[(1, 1)].rows
    e0, e1 = (row["E_N_sigma"] for row in static_rows)
    assert abs(e1 - e0) <= 1e-3 * e0


def test_decay_budget_pre_check(redshift):
    grid = RadialGrid.build(mass=1.0, r_star_min=-60.0, r_star_max=60.0,
                            spacing=0.2)
    bump = make_initial_data("gaussian-bump", grid, MODE2, center=0.0,
                             sigma=3.0)
    mult, cert = redshift
    # hyperboloidal heights start ~20 masses above the label, so this
    # budget cannot reach the slice and the study must refuse up front
    with pytest.raises(StudyError, match="raise t_final"):
        decay_study([bump], taus=(5.0,), t_final=20.0, families=("tilde",),
                    multiplier=mult, certificate=cert)


def test_decay_parameter_validation():
    grid = RadialGrid.build(mass=1.0, r_star_min=-20.0, r_star_max=20.0,
                            spacing=0.5)
    bump = make_initial_data("gaussian-bump", grid, MODE2, center=0.0,
                             sigma=1.0)
    with pytest.raises(StudyError, match="at least one"):
        decay_study([bump], taus=(), t_final=10.0)
    with pytest.raises(StudyError, match="precede"):
        decay_study([bump], taus=(10.0,), t_final=10.0)
    with pytest.raises(StudyError, match="families"):
        decay_study([bump], taus=(5.0,), t_final=10.0, families=("flat",))
    empty = decay_study([], taus=(1.0,), t_final=5.0)
    assert empty.results == [] and empty.rows == []


def test_snapshot_energy_row_schema():
    from axialwave.evolution import evolve_mode, reduced_potential

    grid = RadialGrid.build(mass=1.0, r_star_min=-40.0, r_star_max=40.0,
                            spacing=0.2)
    bump = make_initial_data("gaussian-bump", grid, MODE2, center=0.0,
                             sigma=2.0)
    traj = evolve_mode(bump, reduced_potential(grid, MODE2), 2.0,
                       snapshot_times=(2.0,))
    row = snapshot_energy_row(traj.snapshots[-1], grid, MODE2)
    assert tuple(row.keys()) == ENERGIES_CSV_COLUMNS
    assert row["tau"] == 2.0 and row["ell"] == 2
    assert row["E_T"] > 0.0 and row["E_Z"] > 0.0 and row["E_Zw"] > 0.0
    assert row["sup_abs_f"] > 0.0
    assert row["E_N_sigma"] == 0.0 and row["E_N_tilde"] == 0.0
    assert row["tau2_EN"] == 0.0 and row["tau_sup"] == 0.0


# ---------------------------------------------------------------------------
# convergence study


@pytest.fixture(scope="module")
def conv_study():
    runs = [
        convergence_run(h, r_star_min=-60.0, r_star_max=60.0, t_final=20.0)
        for h in (0.2, 0.1, 0.05)
    ]
    return convergence_study(runs)


def test_convergence_orders_near_two(conv_study):
    assert conv_study.spacings == (0.2, 0.1, 0.05)
    assert 1.8 <= conv_study.row("field")["order_coarse_pair"] <= 2.2
    assert math.isnan(conv_study.row("field")["err_fine"])
    for quantity in ("et_drift", "res_Rtphi", "res_Rthetaphi", "res_closed"):
        assert 1.8 <= conv_study.row(quantity)["order_fit"] <= 2.2, quantity
    # the radial-balance residual is satisfied identically, so its maxima
    # sit at rounding floor and carry no meaningful order
    assert conv_study.row("res_Rrphi")["err_mid"] < 1e-10


def test_convergence_drift_shrinks(conv_study):
    drift = conv_study.drift_at
    assert drift[0.05] < drift[0.1] < drift[0.2]
    assert drift[0.1] < 1e-3


def test_convergence_csv_shape(conv_study, tmp_path):
    path = tmp_path / "convergence.csv"
    write_convergence_csv(path, conv_study)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == CONVERGENCE_CSV_COLUMNS
    assert len(rows) == 1 + len(conv_study.rows)
    field = dict(zip(rows[0], rows[1]))
    assert field["quantity"] == "field"
    assert field["err_fine"] == "n/a" and field["order_fine_pair"] == "n/a"
    assert float(field["order_fit"]) == pytest.approx(2.0, abs=0.2)


def _fake_run(spacing):
    residual_max = {name: spacing**2 for name, _attr in _RESIDUAL_QUANTITIES}
    return ConvergenceRun(spacing=spacing, drift=spacing**2, e_t0=1.0,
                          residual_max=residual_max,
                          final_field=np.zeros(11), run=None)


def test_convergence_study_validation():
    with pytest.raises(StudyError, match="three"):
        convergence_study([_fake_run(0.2), _fake_run(0.1)])
    with pytest.raises(StudyError, match="nest"):
        convergence_study([_fake_run(0.2), _fake_run(0.15), _fake_run(0.1)])


# ---------------------------------------------------------------------------
# windowed bulk study


def test_morawetz_windows_toy():
    grid = RadialGrid.build(mass=1.0, r_star_min=-60.0, r_star_max=60.0,
                            spacing=0.2)
    bump = make_initial_data("gaussian-bump", grid, MODE2, center=0.0,
                             sigma=3.0)
    reports = morawetz_windows(bump, ((0.0, 10.0), (0.0, 20.0)))
    assert [r.window for r in reports] == [(0.0, 10.0), (0.0, 20.0)]
    assert all(r.min_pointwise >= 0.0 for r in reports)
    assert reports[1].lhs_total > reports[0].lhs_total > 0.0
    assert all(r.ratio_to_et0 > 0.0 for r in reports)


# ---------------------------------------------------------------------------
# rotation-normalization study


@pytest.fixture(scope="module")
def kerr_grid():
    return RadialGrid.build(mass=1.0, r_star_min=-40.0, r_star_max=200.0,
                            spacing=0.1)


def test_kerr_study_round_trip(kerr_grid):
    study = kerr_study(kerr_grid, c1=3.0, drift_t_final=10.0)
    assert study.expected_amplitude == 0.5
    assert abs(study.fit.amplitude - 0.5) <= 1e-10
    assert study.fit.verdict == "kerr-normalized"
    assert study.fit.residual_norm <= 1e-10
    assert study.refit_increment <= 1e-12
    assert study.drift is not None and study.drift <= 1e-4


def test_kerr_study_rejects_growing_branch(kerr_grid):
    study = kerr_study(kerr_grid, c1=3.0, c2=0.5, drift_t_final=20.0)
    assert study.fit.verdict == "not-asymptotically-flat"
    assert abs(study.fit.c2 - 0.5) <= 1e-6
    # no staticity run for a rejected profile
    assert study.drift is None
