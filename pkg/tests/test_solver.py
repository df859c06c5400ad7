from __future__ import annotations

import hashlib
import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracrd.errors import IllPosed, InsufficientSamples, InvalidParams
from fracrd.greens import SpatialGrid, gaussian_density, time_fractional_density
from fracrd.riesz_feller import RieszFellerParams as RF
from fracrd.riesz_feller import TemporalParams as TP
from fracrd.solver import (
    DiffusionProblem,
    SolutionField,
    delta_data,
    moments,
    residual_check,
    solve,
    solve_convolution,
    solve_half_order,
)

GRID = SpatialGrid(20.0, 512)
X = GRID.points


def gauss(center=0.0, width=1.0):
    return np.exp(-(((X - center) / width) ** 2))


def box_source(x, t):
    return np.where(np.abs(x) <= 1.0, 1.0, 0.0) * (1.0 + 0.5 * math.sin(t))


# reductions ---------------------------------------------------------------------------------


def test_delta_data_is_unit_spike():
    d = delta_data(GRID)
    assert np.count_nonzero(d) == 1 and d.sum() * GRID.spacing == pytest.approx(1.0)
    assert X[np.argmax(d)] == 0.0


def test_delta_gives_gaussian():
    grid = SpatialGrid(20.0, 1024)
    prob = DiffusionProblem(RF(2.0, 0.0), TP(1.0, 1.0), grid, [0.5, 1.0], delta_data(grid))
    sol = solve(prob)
    for i, t in enumerate(sol.times):
        assert np.max(np.abs(sol.values[i] - gaussian_density(1.0, t, grid.points))) < 1e-6


def test_half_order_against_series():
    # the discrete delta leaves a cusp error next to the origin; compare away from it
    grid = SpatialGrid(40.0, 4096)
    prob = DiffusionProblem(RF(2.0, 0.0), TP(0.5, 1.0), grid, [1.0], delta_data(grid))
    sol = solve_half_order(prob)
    x = grid.points
    mask = (np.abs(x) > 0.5) & (np.abs(x) < 10)
    ref = time_fractional_density(0.5, 1.0, 1.0, x[mask])
    assert np.max(np.abs(sol.values[0][mask] - ref)) < 1e-6
    assert sol.diagnostics["asymmetry"] < 1e-12


def test_half_order_entry_point_checks_beta():
    prob = DiffusionProblem(RF(2.0, 0.0), TP(0.6, 1.0), GRID, [1.0], gauss())
    with pytest.raises(InvalidParams):
        solve_half_order(prob)


# structure ---------------------------------------------------------------------------------------


def test_zero_data_gives_zero():
    prob = DiffusionProblem(RF(1.3, 0.2), TP(0.7, 1.0), GRID, [0.5, 1.0], np.zeros(X.size))
    assert np.all(solve(prob).values == 0.0)


@given(a=st.floats(-2, 2), b=st.floats(-2, 2))
def test_linearity(a, b):
    rf, tp = RF(1.4, -0.3), TP(0.8, 1.0)
    f1, f2 = gauss(-2.0), gauss(1.0, 2.0)
    one = solve(DiffusionProblem(rf, tp, GRID, [0.3, 1.0], f1)).values
    two = solve(DiffusionProblem(rf, tp, GRID, [0.3, 1.0], f2)).values
    both = solve(DiffusionProblem(rf, tp, GRID, [0.3, 1.0], a * f1 + b * f2)).values
    assert np.max(np.abs(both - (a * one + b * two))) < 1e-12


@given(
    alpha=st.floats(0.4, 2.0),
    frac=st.floats(-0.9, 0.9),
    beta=st.floats(0.3, 1.9),
    mf=st.floats(0.1, 3.0),
    mg=st.floats(-1.0, 1.0),
    ms=st.floats(0.0, 2.0),
)
def test_mass_balance(alpha, frac, beta, mf, mg, ms):
    # k = 0 coefficients: mass(t) = m_f + t m_g + t^beta / Gamma(1 + beta) m_phi
    theta = frac * min(alpha, 2 - alpha, 2 - beta if beta > 1 else 2.0)
    grid = SpatialGrid(20.0, 128)
    bump = np.exp(-grid.points**2) / math.sqrt(math.pi)
    f = mf * bump
    g = mg * bump if beta > 1 else None
    times = np.array([0.2, 1.0, 2.0])
    prob = DiffusionProblem(RF(alpha, theta), TP(beta, 1.0), grid, times, f, g, lambda x, t: ms * bump, source_nodes=16)
    expected = mf + times**beta / math.gamma(1 + beta) * ms + (times * mg if g is not None else 0.0)
    assert np.max(np.abs(solve(prob).masses - expected)) < 1e-9


def test_short_time_continuity():
    f = gauss()
    rf, tp = RF(1.2, 0.3), TP(0.6, 1.0)
    sol = solve(DiffusionProblem(rf, tp, GRID, [1e-3, 1e-2, 1e-1], f))
    gaps = np.max(np.abs(sol.values - f[None, :]), axis=1)
    assert gaps[0] < gaps[1] < gaps[2]
    assert gaps[0] < 0.05


def test_symmetry_and_reflection():
    f = gauss()
    sym = solve(DiffusionProblem(RF(1.1, 0.0), TP(0.9, 1.0), GRID, [1.0], f)).values[0]
    assert np.max(np.abs(sym[1:] - sym[1:][::-1])) < 1e-13
    pos = solve(DiffusionProblem(RF(1.1, 0.5), TP(0.9, 1.0), GRID, [1.0], f)).values[0]
    neg = solve(DiffusionProblem(RF(1.1, -0.5), TP(0.9, 1.0), GRID, [1.0], f)).values[0]
    assert np.max(np.abs(pos[1:] - neg[1:][::-1])) < 1e-13


# independent forms -------------------------------------------------------------------------------


@pytest.mark.parametrize("alpha,theta,beta", [(2.0, 0.0, 1.0), (1.5, 0.3, 0.8), (0.7, -0.4, 0.5), (1.2, 0.0, 1.0)])
def test_transform_vs_convolution(alpha, theta, beta):
    prob = DiffusionProblem(RF(alpha, theta), TP(beta, 1.0), GRID, [0.4, 1.2], gauss(0.5), phi=box_source)
    a, b = solve(prob), solve_convolution(prob)
    assert np.max(np.abs(a.values - b.values)) < 1e-5


def test_convolution_refuses_rate_data():
    prob = DiffusionProblem(RF(2.0, 0.0), TP(1.5, 1.0), GRID, [1.0], gauss(), g=gauss())
    with pytest.raises(IllPosed):
        solve_convolution(prob)


@pytest.mark.parametrize(
    "alpha,theta,beta,tol",
    [(2.0, 0.0, 1.0, 1e-4), (1.5, 0.3, 0.7, 1e-2), (0.8, 0.0, 0.4, 1e-2), (1.8, -0.1, 1.5, 1e-2)],
)
def test_pde_residual(alpha, theta, beta, tol):
    grid = SpatialGrid(20.0, 256)
    x = grid.points
    f = np.exp(-(x**2))
    g = 0.5 * np.exp(-((x - 1) ** 2)) if beta > 1 else None
    times = 0.02 * np.arange(1, 41)
    prob = DiffusionProblem(RF(alpha, theta), TP(beta, 1.0), grid, times, f, g)
    assert residual_check(solve(prob), prob) < tol


def test_pde_residual_with_source():
    grid = SpatialGrid(20.0, 256)
    times = 0.02 * np.arange(1, 41)
    prob = DiffusionProblem(
        RF(2.0, 0.0),
        TP(1.0, 1.0),
        grid,
        times,
        np.exp(-grid.points**2),
        phi=lambda x, t: np.exp(-(x**2)) * (1 + t),
        source_nodes=8,  # linear in time: the product weights are exact
    )
    assert residual_check(solve(prob), prob) < 1e-4


def test_residual_needs_uniform_samples():
    prob = DiffusionProblem(RF(2.0, 0.0), TP(1.0, 1.0), GRID, [0.1, 0.2, 0.3], gauss())
    with pytest.raises(InsufficientSamples):
        residual_check(solve(prob), prob)
    times = np.array([0.1, 0.2, 0.35, 0.4, 0.5, 0.6, 0.7, 0.8])
    prob = DiffusionProblem(RF(2.0, 0.0), TP(1.0, 1.0), GRID, times, gauss())
    with pytest.raises(InsufficientSamples):
        residual_check(solve(prob), prob)


# validation -----------------------------------------------------------------------------------------


def test_rate_data_rules():
    with pytest.raises(IllPosed, match="g required"):
        DiffusionProblem(RF(2.0, 0.0), TP(1.5, 1.0), GRID, [1.0], gauss())
    with pytest.raises(IllPosed, match="g must be absent"):
        DiffusionProblem(RF(2.0, 0.0), TP(0.5, 1.0), GRID, [1.0], gauss(), g=gauss())


def test_growth_condition():
    with pytest.raises(IllPosed, match="2-beta"):
        DiffusionProblem(RF(1.0, 0.8), TP(1.5, 1.0), GRID, [1.0], gauss(), g=gauss())


@pytest.mark.parametrize(
    "kw",
    [
        dict(times=[1.0, 0.5]),
        dict(times=[0.0, 1.0]),
        dict(times=[]),
        dict(f=np.ones(X.size)),  # does not decay at the edges
        dict(f=np.zeros(10)),
        dict(f=np.full(X.size, np.nan)),
        dict(source_nodes=1),
    ],
)
def test_invalid_problems(kw):
    args = dict(rf=RF(2.0, 0.0), tp=TP(1.0, 1.0), grid=GRID, times=[1.0], f=gauss())
    args.update(kw)
    with pytest.raises(InvalidParams):
        DiffusionProblem(**args)


def test_bad_source_samples():
    prob = DiffusionProblem(RF(2.0, 0.0), TP(1.0, 1.0), GRID, [1.0], gauss(), phi=lambda x, t: x * np.nan)
    with pytest.raises(InvalidParams):
        solve(prob)


# I/O and moments ---------------------------------------------------------------------------------


def test_csv_round_trip(tmp_path):
    grid = SpatialGrid(10.0, 64)
    prob = DiffusionProblem(RF(1.3, 0.2), TP(0.7, 1.0), grid, [0.5, 1.0], np.exp(-(grid.points**2)))
    sol = solve(prob)
    path = tmp_path / "s.csv"
    text = sol.to_csv(path)
    back = SolutionField.from_csv(path)
    assert np.array_equal(back.values, sol.values)
    assert np.array_equal(back.times, sol.times)
    assert back.params == sol.params
    assert back.to_csv() == text


def test_manifest(tmp_path):
    prob = DiffusionProblem(RF(2.0, 0.0), TP(1.0, 1.0), GRID, [1.0], gauss())
    sol = solve(prob)
    csv = tmp_path / "s.csv"
    sol.to_csv(csv)
    man = sol.write_manifest(tmp_path / "m.json", extra={"seed": 7}, data_files={"solution": csv})
    loaded = json.loads((tmp_path / "m.json").read_text())
    assert loaded == man
    assert loaded["files"]["solution"]["sha256"] == hashlib.sha256(csv.read_bytes()).hexdigest()
    assert loaded["seed"] == 7 and loaded["grid"]["num_points"] == 512
    assert set(loaded["diagnostics"]) >= {"nyquist_ratio", "data_nyquist_ratio"}


def test_data_resolution_diagnostic():
    smooth = solve(DiffusionProblem(RF(2.0, 0.0), TP(1.0, 1.0), GRID, [1.0], gauss()))
    spike = solve(DiffusionProblem(RF(2.0, 0.0), TP(1.0, 1.0), GRID, [1.0], delta_data(GRID)))
    assert smooth.diagnostics["data_nyquist_ratio"] < 1e-12
    assert spike.diagnostics["data_nyquist_ratio"] == pytest.approx(1.0)


def test_gaussian_moments():
    sol = solve(DiffusionProblem(RF(2.0, 0.0), TP(1.0, 0.5), GRID, [1.0], delta_data(GRID)))
    prof = sol.profile(0)
    assert moments(prof, 0) == pytest.approx(1.0, abs=1e-12)
    assert moments(prof, 1) == pytest.approx(0.0, abs=1e-12)
    assert moments(prof, 2) == pytest.approx(2 * 0.5 * 1.0, abs=1e-9)
    with pytest.raises(InvalidParams):
        moments(prof, 3)


def test_heavy_tail_second_moment_warns():
    sol = solve(DiffusionProblem(RF(1.5, 0.0), TP(1.0, 1.0), GRID, [1.0], gauss()))
    with pytest.warns(RuntimeWarning):
        moments(sol.profile(0), 2)
