"""Binary-encoded genetic algorithm baseline for box-constrained model search.

Classic generational GA: fitness-proportional roulette selection on shifted
fitness, single-point crossover per mated pair, per-bit mutation, and
re-injection of the best-ever individual each generation.  One seeded RNG
stream is consumed in a fixed order (selection, crossover, mutation), so a
run is fully reproducible from its seed.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np

from .errors import ValidationError
from .model import Solution, TitlMarsModel, eval_model_many

FITNESS_SHIFT = 1e-12


@dataclass(frozen=True)
class GaParams:
    population: int = 50
    generations: int = 1000
    crossover_rate: float = 0.8
    mutation_rate: float = 0.15
    bits_per_variable: int = 16
    seed: int = 0

    def __post_init__(self):
        if self.population < 2 or self.population % 2:
            raise ValidationError("population must be even and at least 2")
        if not 0.0 <= self.crossover_rate <= 1.0:
            raise ValidationError("crossover rate must lie in [0, 1]")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ValidationError("mutation rate must lie in [0, 1]")
        if self.bits_per_variable < 1:
            raise ValidationError("bits_per_variable must be positive")
        if self.generations < 1:
            raise ValidationError("generations must be positive")


PRESETS = {
    "grefenstette": GaParams(population=30, generations=300,
                             crossover_rate=0.9, mutation_rate=0.01),
    "michalewicz": GaParams(population=50, generations=1000,
                            crossover_rate=0.8, mutation_rate=0.15),
}


def preset(name: str, seed: int = 0) -> GaParams:
    try:
        return replace(PRESETS[name], seed=seed)
    except KeyError:
        raise ValidationError(
            f"unknown preset {name!r}; choose from {sorted(PRESETS)}"
        ) from None


def decode(bits: np.ndarray, lower, upper, kinds, bits_per_variable: int) -> np.ndarray:
    """Map chromosome rows to box points; integer variables round and clamp.

    Each variable occupies ``bits_per_variable`` consecutive bits, most
    significant first; the all-zero slice decodes to the lower bound and the
    all-one slice to the upper bound.
    """
    bits = np.atleast_2d(np.asarray(bits, dtype=np.uint8))
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    V = lower.size
    B = bits_per_variable
    if bits.shape[1] != V * B:
        raise ValidationError(
            f"chromosome length {bits.shape[1]} != {V} variables x {B} bits"
        )
    weights = 2.0 ** np.arange(B - 1, -1, -1)
    levels = bits.reshape(bits.shape[0], V, B) @ weights
    span = (upper - lower) / (2.0**B - 1.0)
    X = lower + levels * span
    for v, kind in enumerate(kinds):
        if kind == "int":
            X[:, v] = np.clip(np.rint(X[:, v]), lower[v], upper[v])
    return X


def roulette_select(fitness: np.ndarray, rng) -> np.ndarray:
    """Indices of len(fitness) parents, proportional to shifted fitness."""
    w = fitness - fitness.min() + FITNESS_SHIFT
    cum = np.cumsum(w)
    draws = rng.random(fitness.size) * cum[-1]
    return np.searchsorted(cum, draws, side="left").clip(0, fitness.size - 1)


def crossover(parents: np.ndarray, rate: float, rng) -> np.ndarray:
    """Single-point crossover applied pairwise: (0,1), (2,3), ..."""
    P, L = parents.shape
    do = rng.random(P // 2) < rate
    cuts = rng.integers(1, L, size=P // 2) if L > 1 else np.ones(P // 2, dtype=int)
    children = parents.copy()
    for i in range(P // 2):
        if not do[i]:
            continue
        a, b = parents[2 * i], parents[2 * i + 1]
        cut = cuts[i]
        children[2 * i, cut:] = b[cut:]
        children[2 * i + 1, cut:] = a[cut:]
    return children


def mutate(bits: np.ndarray, rate: float, rng) -> np.ndarray:
    flips = rng.random(bits.shape) < rate
    return bits ^ flips.astype(np.uint8)


def optimize(model: TitlMarsModel, sense: str, params: GaParams) -> Solution:
    """Run the GA for exactly the configured number of generations and
    return the best individual ever seen."""
    if sense not in ("min", "max"):
        raise ValidationError(f"sense must be 'min' or 'max', got {sense!r}")
    t0 = time.perf_counter()
    sgn = 1.0 if sense == "max" else -1.0
    lower = np.asarray(model.lower)
    upper = np.asarray(model.upper)
    B = params.bits_per_variable
    L = model.dim * B
    rng = np.random.default_rng(params.seed)

    pop = rng.integers(0, 2, size=(params.population, L), dtype=np.uint8)
    X = decode(pop, lower, upper, model.kinds, B)
    fit = sgn * eval_model_many(model, X)
    best_i = int(np.argmax(fit))
    elite_bits = pop[best_i].copy()
    elite_fit = float(fit[best_i])
    elite_x = X[best_i].copy()
    evals = params.population

    for _ in range(params.generations - 1):
        parents = pop[roulette_select(fit, rng)]
        pop = mutate(crossover(parents, params.crossover_rate, rng),
                     params.mutation_rate, rng)
        X = decode(pop, lower, upper, model.kinds, B)
        fit = sgn * eval_model_many(model, X)
        evals += params.population
        worst = int(np.argmin(fit))
        pop[worst] = elite_bits
        X[worst] = elite_x
        fit[worst] = elite_fit
        best_i = int(np.argmax(fit))
        if fit[best_i] > elite_fit:
            elite_fit = float(fit[best_i])
            elite_bits = pop[best_i].copy()
            elite_x = X[best_i].copy()

    return Solution(
        x=elite_x,
        value=sgn * elite_fit,
        sense=sense,
        status="heuristic",
        evals=evals,
        millis=(time.perf_counter() - t0) * 1000.0,
    )
