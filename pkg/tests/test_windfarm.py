"""Wake physics pins, cone geometry, simulation properties, Monte Carlo data."""

import math

import numpy as np
import pytest

from titlmars.errors import ParseError, ValidationError, WakeDomainError
from titlmars.windfarm import (
    BUILTIN_SCENARIOS,
    FarmConfig,
    WindScenario,
    cell_centers,
    combined_speed,
    load_scenario,
    monte_carlo_power_grid,
    parse_scenario,
    simulate_layout,
    turbine_power,
    upstream_set,
    wake_speed,
)

FARM = FarmConfig()


# --- wake speed ---------------------------------------------------------------

def test_wake_speed_at_rotor_edge_exact():
    assert wake_speed(15.0, 40.0, 40.0) == 15.0 / 3.0
    assert wake_speed(12.0, 40.0, 40.0) == 4.0


def test_wake_speed_double_radius():
    assert wake_speed(15.0, 40.0, 80.0) == 12.5


def test_wake_speed_far_field_limit():
    assert wake_speed(15.0, 40.0, 1e9) == pytest.approx(15.0, rel=1e-12)


def test_wake_speed_inside_disc_rejected():
    with pytest.raises(WakeDomainError):
        wake_speed(15.0, 40.0, 39.9)


def test_wake_speed_positive_range():
    for r in (40.0, 55.0, 100.0, 1e4):
        v = wake_speed(15.0, 40.0, r)
        assert 0.0 < v <= 15.0


# --- combined speed -----------------------------------------------------------

def test_combined_empty_is_freestream():
    assert combined_speed(15.0, []) == 15.0


def test_combined_single_wake_collapses():
    assert combined_speed(15.0, [5.0]) == pytest.approx(5.0, abs=1e-12)


def test_combined_two_equal_deficits():
    v0, d = 10.0, 0.25
    got = combined_speed(v0, [v0 * (1 - d), v0 * (1 - d)])
    assert got == pytest.approx(v0 * (1 - d * math.sqrt(2.0)), rel=1e-12)


def test_combined_clamps_at_zero():
    assert combined_speed(10.0, [1.0] * 9) == 0.0


def test_combined_rejects_bad_speeds():
    with pytest.raises(ValidationError):
        combined_speed(10.0, [11.0])


def test_more_wakes_never_raise_speed(rng):
    for _ in range(50):
        v0 = float(rng.uniform(3, 20))
        speeds = list(rng.uniform(0, v0, size=rng.integers(1, 6)))
        full = combined_speed(v0, speeds)
        fewer = combined_speed(v0, speeds[:-1])
        assert fewer >= full - 1e-12


# --- power curve ----------------------------------------------------------------

def test_power_curve_pins():
    assert turbine_power(1.0) == 0.0
    assert turbine_power(2.0) == pytest.approx(2.4)
    assert turbine_power(10.0) == pytest.approx(300.0)
    assert turbine_power(12.8 - 1e-9) == pytest.approx(629.1456, abs=1e-4)
    assert turbine_power(12.8) == 629.1
    assert turbine_power(15.0) == 629.1
    assert turbine_power(18.0) == 629.1
    assert turbine_power(19.0) == 0.0


def test_power_curve_range(rng):
    for v in rng.uniform(0, 30, size=500):
        p = turbine_power(float(v))
        assert p == 0.0 or 2.4 <= p <= 629.1456 + 1e-9


# --- cone geometry --------------------------------------------------------------

def test_upstream_directly_north():
    pos = np.array([[0.0, 0.0], [0.0, 308.0]])
    ups = upstream_set(pos, 0.0, 0, FARM.rotor_radius, FARM.wake_decay)
    assert len(ups) == 1
    j, dist, cross, wake_r = ups[0]
    assert j == 1
    assert dist == pytest.approx(308.0)
    assert cross == pytest.approx(0.0, abs=1e-9)
    assert wake_r == pytest.approx(FARM.rotor_radius + FARM.wake_decay * 308.0)


def test_upstream_east_neighbor_not_shading():
    pos = np.array([[0.0, 0.0], [308.0, 0.0]])
    assert upstream_set(pos, 0.0, 0, FARM.rotor_radius, FARM.wake_decay) == []


def test_upstream_antisymmetric(rng):
    for _ in range(20):
        pos = rng.uniform(0, 5000, size=(6, 2))
        direction = float(rng.uniform(0, 2 * math.pi))
        members = {
            (i, entry[0])
            for i in range(6)
            for entry in upstream_set(pos, direction, i, FARM.rotor_radius, FARM.wake_decay)
        }
        for i, j in members:
            assert (j, i) not in members


def test_upstream_northeast_diagonal():
    pos = np.array([[0.0, 0.0], [308.0, 308.0]])
    ups = upstream_set(pos, math.pi / 4, 0, FARM.rotor_radius, FARM.wake_decay)
    assert len(ups) == 1 and ups[0][0] == 1
    assert ups[0][1] == pytest.approx(308.0 * math.sqrt(2.0))


# --- layout simulation ------------------------------------------------------------

def test_single_turbine_full_power():
    power = simulate_layout(np.array([[1000.0, 1000.0]]), BUILTIN_SCENARIOS["fw1"], FARM)
    assert power[0] == 629.1


def test_aligned_pair_shades_downwind():
    pos = np.array([[0.0, 0.0], [308.0, 308.0]])
    power = simulate_layout(pos, BUILTIN_SCENARIOS["fw1"], FARM)
    assert power[1] == 629.1
    assert power[0] < 629.1


def test_pair_matches_manual_composition():
    pos = np.array([[0.0, 0.0], [308.0, 308.0]])
    (j, dist, cross, wake_r), = upstream_set(pos, math.pi / 4, 0,
                                             FARM.rotor_radius, FARM.wake_decay)
    v_ij = wake_speed(15.0, FARM.rotor_radius, wake_r)
    v = combined_speed(15.0, [v_ij])
    expect = turbine_power(v)
    got = simulate_layout(pos, BUILTIN_SCENARIOS["fw1"], FARM)[0]
    assert got == pytest.approx(expect, rel=1e-12)


def test_total_power_permutation_invariant(rng):
    pos = cell_centers(FARM)[rng.choice(FARM.n_cells, size=12, replace=False)]
    perm = rng.permutation(12)
    a = simulate_layout(pos, BUILTIN_SCENARIOS["fw2"], FARM)
    b = simulate_layout(pos[perm], BUILTIN_SCENARIOS["fw2"], FARM)
    assert a.sum() == pytest.approx(b.sum(), rel=1e-12)
    assert np.allclose(a[perm], b)


# --- scenarios --------------------------------------------------------------------

def test_builtin_scenario_shapes():
    assert len(BUILTIN_SCENARIOS["fw1"].cases) == 1
    assert len(BUILTIN_SCENARIOS["fw2"].cases) == 4
    assert len(BUILTIN_SCENARIOS["fw3"].cases) == 6
    assert len(BUILTIN_SCENARIOS["fw4"].cases) == 36


def test_scenario_weights_normalized():
    s = WindScenario(((15.0, 0.0, 2.0), (10.0, 1.0, 6.0)))
    assert sum(w for _, _, w in s.cases) == pytest.approx(1.0)
    assert s.cases[0][2] == pytest.approx(0.25)


def test_scenario_rejects_bad_cases():
    with pytest.raises(ValidationError):
        WindScenario(((15.0, 0.0, 0.0),))
    with pytest.raises(ValidationError):
        WindScenario(((-1.0, 0.0, 1.0),))
    with pytest.raises(ValidationError):
        WindScenario(())


def test_parse_scenario_text(tmp_path):
    text = "# cases\n15 0.785398 1\n10 0 1\n"
    s = parse_scenario(text)
    assert len(s.cases) == 2
    p = tmp_path / "wind.scenario"
    p.write_text(text)
    assert load_scenario(str(p)).cases == s.cases


def test_parse_scenario_errors():
    with pytest.raises(ParseError, match="line 2"):
        parse_scenario("15 0 1\n15 0\n")
    with pytest.raises(ParseError):
        parse_scenario("# nothing\n")


def test_load_builtin_by_name():
    assert load_scenario("fw3") is BUILTIN_SCENARIOS["fw3"]


# --- farm config -------------------------------------------------------------------

def test_farm_config_validation():
    with pytest.raises(ValidationError):
        FarmConfig(turbines=0)
    with pytest.raises(ValidationError):
        FarmConfig(cells_per_side=3, turbines=10)
    with pytest.raises(ValidationError):
        FarmConfig(cell_width=-1.0)


# --- Monte Carlo -------------------------------------------------------------------

def test_monte_carlo_single_turbine_single_layout():
    farm = FarmConfig(cells_per_side=5, turbines=1)
    ds = monte_carlo_power_grid(farm, BUILTIN_SCENARIOS["fw1"], 1, seed=3)
    assert ds.n == 1
    assert ds.y[0] == 629.1


def test_monte_carlo_value_range():
    farm = FarmConfig(cells_per_side=15, turbines=10)
    ds = monte_carlo_power_grid(farm, BUILTIN_SCENARIOS["fw2"], 50, seed=1)
    assert (ds.y >= 0.0).all() and (ds.y <= 629.1456).all()


def test_monte_carlo_deterministic():
    farm = FarmConfig(cells_per_side=10, turbines=5)
    a = monte_carlo_power_grid(farm, BUILTIN_SCENARIOS["fw1"], 30, seed=5)
    b = monte_carlo_power_grid(farm, BUILTIN_SCENARIOS["fw1"], 30, seed=5)
    c = monte_carlo_power_grid(farm, BUILTIN_SCENARIOS["fw1"], 30, seed=6)
    assert np.array_equal(a.y, b.y) and np.array_equal(a.X, b.X)
    assert not np.array_equal(a.y, c.y)


def test_monte_carlo_directional_shading_small():
    ds = monte_carlo_power_grid(FARM, BUILTIN_SCENARIOS["fw1"], 300, seed=0)
    north = ds.X[:, 1]
    top = ds.y[north > (FARM.cells_per_side - 5) * FARM.cell_width]
    bottom = ds.y[north < 5 * FARM.cell_width]
    assert top.mean() > bottom.mean()
