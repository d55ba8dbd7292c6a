"""Genetic algorithm: encoding, operators, elitism, reproducibility."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from titlmars.errors import ValidationError
from titlmars.ga import (
    GaParams,
    PRESETS,
    crossover,
    decode,
    mutate,
    optimize,
    preset,
    roulette_select,
)
from titlmars.model import make_model
from titlmars.solver import solve

from conftest import random_model


def test_preset_values():
    g = PRESETS["grefenstette"]
    assert (g.population, g.generations, g.crossover_rate, g.mutation_rate) == (30, 300, 0.9, 0.01)
    m = PRESETS["michalewicz"]
    assert (m.population, m.generations, m.crossover_rate, m.mutation_rate) == (50, 1000, 0.8, 0.15)


def test_preset_unknown():
    with pytest.raises(ValidationError):
        preset("nope")


def test_params_validation():
    with pytest.raises(ValidationError):
        GaParams(population=3)
    with pytest.raises(ValidationError):
        GaParams(population=0)
    with pytest.raises(ValidationError):
        GaParams(crossover_rate=1.5)
    with pytest.raises(ValidationError):
        GaParams(mutation_rate=-0.1)


def test_decode_all_zero_hits_lower():
    x = decode(np.zeros((1, 32), dtype=np.uint8), [-3.0, 1.0], [5.0, 2.0], ["real", "real"], 16)
    assert x[0] == pytest.approx([-3.0, 1.0])


def test_decode_all_one_hits_upper():
    x = decode(np.ones((1, 32), dtype=np.uint8), [-3.0, 1.0], [5.0, 2.0], ["real", "real"], 16)
    assert x[0] == pytest.approx([5.0, 2.0])


def test_decode_two_bit_example():
    x = decode(np.array([[1, 0]], dtype=np.uint8), [0.0], [3.0], ["real"], 2)
    assert x[0, 0] == pytest.approx(2.0)


def test_decode_integer_kind_rounds():
    x = decode(np.array([[1, 0]], dtype=np.uint8), [0.0], [3.0], ["int"], 2)
    assert x[0, 0] == 2.0
    x2 = decode(np.array([[0, 1]], dtype=np.uint8), [0.0], [5.0], ["int"], 2)
    assert x2[0, 0] == round(5.0 / 3.0)


@given(st.integers(min_value=0, max_value=5000))
@settings(max_examples=40)
def test_decode_stays_in_box(seed):
    rng = np.random.default_rng(seed)
    V = int(rng.integers(1, 5))
    lo = rng.uniform(-5, 0, size=V)
    hi = lo + rng.uniform(0.5, 5, size=V)
    bits = rng.integers(0, 2, size=(7, V * 16), dtype=np.uint8)
    X = decode(bits, lo, hi, ["real"] * V, 16)
    assert (X >= lo - 1e-12).all() and (X <= hi + 1e-12).all()


def test_crossover_rate_zero_copies_parents():
    rng = np.random.default_rng(0)
    parents = rng.integers(0, 2, size=(6, 20), dtype=np.uint8)
    kids = crossover(parents, 0.0, rng)
    assert np.array_equal(kids, parents)


def test_crossover_rate_one_swaps_tails():
    rng = np.random.default_rng(1)
    a = np.zeros((2, 10), dtype=np.uint8)
    a[1] = 1
    kids = crossover(a, 1.0, rng)
    # one cut point: child 0 starts as parent 0 and ends as parent 1
    assert kids[0, 0] == 0 and kids[0, -1] == 1
    assert kids[1, 0] == 1 and kids[1, -1] == 0
    assert np.array_equal(kids[0] ^ kids[1], np.ones(10, dtype=np.uint8))


def test_mutation_rate_one_complements():
    rng = np.random.default_rng(2)
    bits = rng.integers(0, 2, size=(4, 15), dtype=np.uint8)
    assert np.array_equal(mutate(bits, 1.0, rng), bits ^ 1)


def test_mutation_rate_zero_is_identity():
    rng = np.random.default_rng(3)
    bits = rng.integers(0, 2, size=(4, 15), dtype=np.uint8)
    assert np.array_equal(mutate(bits, 0.0, rng), bits)


def test_roulette_prefers_dominant_individual():
    rng = np.random.default_rng(4)
    fitness = np.array([1e6] + [0.0] * 9)
    picks = np.concatenate([roulette_select(fitness, rng) for _ in range(1000)])
    assert picks.size == 10_000
    assert (picks == 0).mean() >= 0.99


def test_constant_model_any_seed():
    m = make_model(7.0, [], [], [0.0], [1.0])
    for seed in (0, 1, 99):
        sol = optimize(m, "max", GaParams(population=4, generations=3, seed=seed))
        assert sol.value == 7.0


def test_best_so_far_monotone_in_generations():
    rng = np.random.default_rng(6)
    m = random_model(rng, V=3, max_bases=12)
    prev = -np.inf
    for gens in range(1, 12):
        sol = optimize(m, "max", GaParams(population=10, generations=gens, seed=42))
        assert sol.value >= prev - 1e-12
        prev = sol.value


def test_reproducible_runs(rng):
    m = random_model(rng, V=3, max_bases=10)
    p = GaParams(population=12, generations=30, seed=7)
    a = optimize(m, "min", p)
    b = optimize(m, "min", p)
    assert a.value == b.value and list(a.x) == list(b.x) and a.evals == b.evals


def test_solution_point_in_box(rng):
    for _ in range(5):
        m = random_model(rng, int_vars=True, max_bases=8)
        sol = optimize(m, "max", GaParams(population=8, generations=20, seed=1))
        assert (sol.x >= np.asarray(m.lower) - 1e-12).all()
        assert (sol.x <= np.asarray(m.upper) + 1e-12).all()
        for v, kind in enumerate(m.kinds):
            if kind == "int":
                assert sol.x[v] == round(sol.x[v])


def test_never_beats_certified_optimum(rng):
    for _ in range(5):
        m = random_model(rng, max_bases=12)
        opt = solve(m, "max")
        ga = optimize(m, "max", preset("grefenstette", seed=11))
        assert ga.value <= opt.value + 1e-9 * max(1.0, abs(opt.value))
        opt_min = solve(m, "min")
        ga_min = optimize(m, "min", preset("grefenstette", seed=11))
        assert ga_min.value >= opt_min.value - 1e-9 * max(1.0, abs(opt_min.value))


def test_evals_follow_generation_count():
    m = make_model(1.0, [], [], [0.0], [1.0])
    sol = optimize(m, "max", GaParams(population=6, generations=10, seed=0))
    assert sol.evals == 60
