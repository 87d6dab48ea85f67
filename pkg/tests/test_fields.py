"""Coupled-system tests: section scalings, consistent data, transport,
residual convergence, and the lowest-mode normalization."""

from __future__ import annotations

import json
import math

import numpy as np
import pytest

from axialwave.evolution import ModeField, make_initial_data
from axialwave.fields import (
    AxialModeData,
    ConnectionComponents,
    NotAsymptoticallyFlatError,
    beta1_ode_check,
    decaying_branch,
    fields_from_q,
    generate_consistent_initial_data,
    growing_branch,
    kerr_beta_coefficient,
    kerr_connection,
    kerr_mode_data,
    normalize_kerr,
    q_from_fields,
    reconstruct_gamma,
    run_axial_mode,
    run_axial_system,
    slice_residuals,
    verify_beta1_static,
    write_kerr_fit_json,
    write_residuals_csv,
)
from axialwave.geometry import RadialGrid
from axialwave.harmonics import ModeIndex, sphere_grid


def _grid(span=40.0, h=0.2, mass=1.0):
    return RadialGrid.build(mass=mass, r_star_min=-span, r_star_max=span, spacing=h)


def _bump(grid, ell=2, spin=2, center=0.0, sigma=3.0, amplitude=1.0):
    return make_initial_data(
        "gaussian-bump",
        grid,
        ModeIndex(spin, ell),
        center=center,
        sigma=sigma,
        amplitude=amplitude,
    ).f


# ---------------------------------------------------------------------------
# section scalings


def test_kerr_connection_scales_to_expected_sections():
    sphere = sphere_grid(2)
    r = np.linspace(3.0, 40.0, 60)
    q = kerr_connection(r, sphere, mass=1.0, amplitude=0.7)
    fields = fields_from_q(q, mass=1.0)
    expected = kerr_beta_coefficient(r, 1.0, 0.7)[:, None] * sphere.sin2[None, :]
    assert np.max(np.abs(fields.beta - expected)) <= 1e-14
    assert np.all(fields.alpha == 0.0)
    assert np.all(fields.gamma == 0.0)


def test_fields_round_trip():
    sphere = sphere_grid(3)
    r = np.linspace(2.5, 30.0, 40)
    x = sphere.nodes
    sin = np.sqrt(sphere.sin2)
    # pole-regular inputs: angular factors chosen so each scaled section
    # carries the full sin^(2s) decay of its spin weight
    q02 = np.outer(1.0 / r**3, 0.5 + 0.3 * x)
    q03 = np.outer(np.exp(-((r - 10.0) ** 2) / 16.0), sin * (1.0 - 0.2 * x))
    q23 = np.outer(1.0 / r**2, sin * (0.4 + x**2))
    q = ConnectionComponents(r=r, sphere=sphere, q02=q02, q03=q03, q23=q23)
    fields = fields_from_q(q, mass=1.0)
    back = q_from_fields(fields, mass=1.0)
    for name in ("q02", "q03", "q23"):
        orig = getattr(q, name)
        rec = getattr(back, name)
        assert np.max(np.abs(orig - rec)) <= 1e-12 * max(1.0, np.max(np.abs(orig)))


def test_fields_from_q_rejects_pole_irregular_input():
    sphere = sphere_grid(3)
    r = np.linspace(2.5, 30.0, 40)
    zero = np.zeros((r.size, sphere.order))
    # missing the sin^4 decay entirely: gamma = sin^3 / sin^2 = 1/sin quotient
    bad = np.outer(np.ones(r.size), 1.0 / sphere.sin2)
    q = ConnectionComponents(r=r, sphere=sphere, q02=zero, q03=bad, q23=zero)
    with pytest.raises(ValueError):
        fields_from_q(q, mass=1.0)


def test_connection_components_shape_validation():
    sphere = sphere_grid(2)
    r = np.linspace(3.0, 10.0, 8)
    good = np.zeros((r.size, sphere.order))
    with pytest.raises(ValueError):
        ConnectionComponents(r=r, sphere=sphere, q02=good, q03=good, q23=good[:, :-1])


# ---------------------------------------------------------------------------
# consistent initial data


def test_generate_zero_free_data_gives_empty_slice():
    grid = _grid()
    assert generate_consistent_initial_data(grid) == []


def test_generate_rejects_low_ell_content():
    grid = _grid()
    arr = np.zeros(grid.size)
    with pytest.raises(ValueError):
        generate_consistent_initial_data(grid, alpha={1: arr})
    with pytest.raises(ValueError):
        generate_consistent_initial_data(grid, beta={1: arr})


def test_consistent_slice_residuals_vanish():
    grid = _grid()
    a0 = _bump(grid, center=-5.0, sigma=3.0, amplitude=1.3)
    b0 = _bump(grid, center=4.0, sigma=2.5, amplitude=0.8)
    (data,) = generate_consistent_initial_data(grid, alpha={2: a0}, beta={2: b0})
    row = slice_residuals(data)
    scale = float(np.max(np.abs(b0)))
    assert row.radial <= 1e-12 * scale
    assert row.balance <= 1e-8 * scale
    assert row.transport == 0.0
    assert row.closure <= 1e-12 * scale


def test_kerr_slice_residuals_machine_zero():
    grid = _grid()
    data = kerr_mode_data(grid, amplitude=0.5)
    row = slice_residuals(data)
    scale = float(np.max(np.abs(data.beta.f)))
    assert row.radial <= 1e-12 * scale
    assert row.balance == 0.0
    assert row.transport == 0.0
    assert row.closure == 0.0


def test_slice_residuals_flag_inconsistent_data():
    grid = _grid()
    b0 = _bump(grid, center=0.0, sigma=3.0)
    (data,) = generate_consistent_initial_data(grid, beta={2: b0})
    # corrupt the transported profile; the radial relation must light up
    bad = AxialModeData(
        ell=2,
        ladder=data.ladder,
        grid=grid,
        alpha=data.alpha,
        beta=data.beta,
        gamma0=data.gamma0 + 1e-3 * np.exp(-grid.r_star**2 / 50.0),
    )
    assert slice_residuals(bad).radial > 1e-5


# ---------------------------------------------------------------------------
# evolution, transport, and residual convergence


def _norms_at(h, scheme, t_res=10.0, t_final=12.0):
    grid = _grid(span=40.0, h=h)
    a0 = _bump(grid, center=-4.0, sigma=3.0, amplitude=1.0)
    b0 = _bump(grid, center=3.0, sigma=2.5, amplitude=0.6)
    (data,) = generate_consistent_initial_data(grid, alpha={2: a0}, beta={2: b0})
    run = run_axial_mode(
        data, t_final, scheme=scheme, residual_times=[t_res]
    )
    (row,) = run.residuals
    return np.array([row.radial, row.balance, row.transport, row.closure])


def test_residuals_converge_at_second_order():
    coarse = _norms_at(0.2, 2)
    fine = _norms_at(0.1, 2)
    orders = np.log2(coarse / fine)
    assert np.all(orders > 1.5), orders
    assert np.all(orders < 2.6), orders


def test_residuals_converge_at_fourth_order():
    coarse = _norms_at(0.2, 4)
    fine = _norms_at(0.1, 4)
    orders = np.log2(coarse / fine)
    assert np.all(orders > 3.3), orders
    assert np.all(orders < 4.7), orders


def test_zero_mode_stays_zero_through_transport():
    grid = _grid()
    (data,) = generate_consistent_initial_data(
        grid, alpha={2: np.zeros(grid.size)}
    )
    run = run_axial_mode(data, 8.0, residual_times=[4.0])
    assert all(
        getattr(run.residuals[0], name) == 0.0
        for name in ("radial", "balance", "transport", "closure")
    )
    assert np.all(run.gamma_values[0] == 0.0)


def test_residual_times_must_be_interior():
    grid = _grid()
    b0 = _bump(grid, center=0.0, sigma=3.0)
    (data,) = generate_consistent_initial_data(grid, beta={2: b0})
    with pytest.raises(ValueError):
        run_axial_mode(data, 10.0, residual_times=[0.0])
    with pytest.raises(ValueError):
        run_axial_mode(data, 10.0, residual_times=[10.0])


def test_reconstruct_gamma_standalone_matches_run():
    grid = _grid(span=30.0, h=0.2)
    a0 = _bump(grid, center=0.0, sigma=2.5)
    (data,) = generate_consistent_initial_data(grid, alpha={2: a0})
    series = reconstruct_gamma(
        data.alpha, data.gamma0, 8.0, record_times=[4.0], scheme=2
    )
    run = run_axial_mode(data, 8.0, residual_times=[4.0], scheme=2)
    assert series.times == run.gamma_times
    assert np.max(np.abs(series.values[0] - run.gamma_values[0])) <= 1e-14


def test_kerr_run_residuals_stay_small():
    grid = _grid(span=40.0, h=0.1)
    data = kerr_mode_data(grid, amplitude=0.5)
    run = run_axial_mode(data, 10.0, residual_times=[5.0], boundary="hold")
    scale = float(np.max(np.abs(data.beta.f)))
    (row,) = run.residuals
    assert row.radial <= 1e-2 * scale
    assert row.balance <= 1e-2 * scale


def test_system_runner_per_mode_boundaries():
    grid = _grid(span=40.0, h=0.2)
    a0 = _bump(grid, center=0.0, sigma=3.0)
    data = generate_consistent_initial_data(grid, alpha={2: a0}, beta1_c1=2.0)
    solution = run_axial_system(
        data,
        6.0,
        residual_times=[3.0],
        boundary={1: "hold", 2: "error"},
    )
    assert {run.ell for run in solution.modes} == {1, 2}
    assert all(row.time == pytest.approx(3.0) for row in solution.residual_rows)
    # alpha-only free data seeds no lowest-mode content beyond the explicit one
    only_alpha = generate_consistent_initial_data(grid, alpha={2: a0})
    assert all(item.ell != 1 for item in only_alpha)


# ---------------------------------------------------------------------------
# lowest-mode normalization


def test_normalize_kerr_recovers_amplitude():
    grid = _grid(span=60.0, h=0.2)
    seed = make_initial_data("static-beta1", grid, ModeIndex(1, 1), c1=3.0)
    fit = normalize_kerr(seed)
    assert abs(fit.amplitude - 0.5) <= 1e-10
    assert fit.residual_norm <= 1e-10
    assert fit.verdict == "kerr-normalized"
    # idempotence: refitting the normalized profile yields nothing new
    again = normalize_kerr(fit.profile, grid, reference_norm=fit.source_norm)
    assert abs(again.amplitude) <= 1e-12


def test_normalize_kerr_zero_profile():
    grid = _grid()
    fit = normalize_kerr(np.zeros(grid.size), grid)
    assert fit.amplitude == 0.0
    assert fit.verdict == "kerr-normalized"


def test_normalize_kerr_rejects_growing_branch():
    grid = _grid(span=60.0, h=0.2)
    bad = 1e-3 * growing_branch(grid.r, grid.mass)
    with pytest.raises(NotAsymptoticallyFlatError) as err:
        normalize_kerr(bad, grid)
    assert err.value.fit.verdict == "not-asymptotically-flat"
    lax = normalize_kerr(bad, grid, strict=False)
    assert lax.verdict == "not-asymptotically-flat"


def test_normalize_kerr_from_trajectory():
    # h = 0.05 keeps the integrator drift small enough that its leakage
    # into the growing branch stays under the default flatness gate.
    grid = _grid(span=60.0, h=0.05)
    data = kerr_mode_data(grid, amplitude=0.5)
    run = run_axial_mode(
        data, 10.0, snapshot_times=[5.0, 10.0], boundary="hold"
    )
    drift = verify_beta1_static(run.beta)
    assert drift <= 1e-2 * np.max(np.abs(data.beta.f))
    fit = normalize_kerr(run.beta)
    # The fitted amplitude is corrective: adding a rotating-background
    # perturbation of this amplitude cancels the decaying tail, so data
    # that IS such a perturbation of amplitude 0.5 fits to -0.5.
    assert abs(fit.amplitude + 0.5) <= 1e-2
    assert np.max(np.abs(fit.profile)) <= 1e-2 * np.max(np.abs(data.beta.f))


def test_beta1_drift_converges_at_scheme_order():
    drifts = []
    for h in (0.2, 0.1):
        grid = _grid(span=60.0, h=h)
        data = AxialModeData(
            ell=1,
            ladder=0.0,
            grid=grid,
            alpha=None,
            beta=make_initial_data("static-beta1", grid, ModeIndex(1, 1), c1=3.0),
            gamma0=None,
        )
        run = run_axial_mode(
            data, 10.0, snapshot_times=[5.0, 10.0], boundary="hold"
        )
        drifts.append(verify_beta1_static(run.beta))
    order = math.log2(drifts[0] / drifts[1])
    assert 1.5 < order < 2.6, (drifts, order)


def test_static_ode_oracle():
    report = beta1_ode_check(mass=1.0)
    assert set(report) == {"decaying_branch", "growing_branch", "combined"}
    for value in report.values():
        assert value <= 1e-8, report
    # the two branches are genuinely different solutions
    r = np.linspace(3.0, 50.0, 10)
    assert np.max(np.abs(growing_branch(r, 1.0) - decaying_branch(r, 1.0))) > 1.0


# ---------------------------------------------------------------------------
# export formats


def test_residuals_csv_format(tmp_path):
    grid = _grid()
    b0 = _bump(grid, center=0.0, sigma=3.0)
    (data,) = generate_consistent_initial_data(grid, beta={2: b0})
    run = run_axial_mode(data, 8.0, residual_times=[4.0, 6.0])
    path = tmp_path / "residuals.csv"
    write_residuals_csv(run.residuals, path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "t,ell,res_Rtphi,res_Rrphi,res_Rthetaphi,res_closed"
    assert len(lines) == 3
    first = path.read_bytes()
    write_residuals_csv(run.residuals, path)
    assert path.read_bytes() == first


def test_kerr_fit_json_format(tmp_path):
    grid = _grid(span=60.0, h=0.2)
    seed = make_initial_data("static-beta1", grid, ModeIndex(1, 1), c1=3.0)
    fit = normalize_kerr(seed)
    path = tmp_path / "kerr_fit.json"
    write_kerr_fit_json(fit, path)
    payload = json.loads(path.read_text())
    assert payload["schema"] == "axialwave.kerr_fit/1"
    assert abs(payload["a1"] - 0.5) <= 1e-10
    assert payload["verdict"] == "kerr-normalized"
    assert set(payload) >= {"C1", "C2", "a1", "verdict", "flat_tolerance"}
