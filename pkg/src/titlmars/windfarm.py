"""Jensen-wake wind farm simulation and Monte Carlo power-distribution data.

The farm is a square grid of candidate hub cells.  A wind case is (speed,
from-direction, weight) with the bearing measured clockwise from north, so a
case with direction 0 blows from north to south.  A turbine sits inside the
wake cone of an upwind machine when its hub lies within the linearly growing
wake radius; overlapping deficits combine root-sum-square.  Monte Carlo
datasets average each cell's expected power over random layouts that occupy
the cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParseError, ValidationError, WakeDomainError
from .fitter import Dataset, make_dataset

TWO_PI = 2.0 * math.pi

CUT_IN = 2.0
RATED_SPEED = 12.8
CUT_OUT = 18.0
CUBIC_COEFF = 0.3
RATED_POWER = 629.1  # the cubic branch reaches 629.1456 just below rated speed


@dataclass(frozen=True)
class FarmConfig:
    cells_per_side: int = 41
    cell_width: float = 308.0
    rotor_radius: float = 40.0
    wake_decay: float = 0.03  # slow expansion: single wakes stay power-relevant for ~4 cells
    turbines: int = 40

    def __post_init__(self):
        if self.cells_per_side < 1:
            raise ValidationError("cells_per_side must be at least 1")
        if self.cell_width <= 0 or self.rotor_radius <= 0 or self.wake_decay <= 0:
            raise ValidationError("cell width, rotor radius, and wake decay must be positive")
        if not 1 <= self.turbines <= self.cells_per_side**2:
            raise ValidationError(
                f"turbine count must lie in [1, {self.cells_per_side**2}]"
            )

    @property
    def n_cells(self) -> int:
        return self.cells_per_side**2


@dataclass(frozen=True)
class WindScenario:
    """Weighted wind cases (speed m/s, from-bearing rad, weight); weights sum to 1."""

    cases: tuple[tuple[float, float, float], ...]

    def __post_init__(self):
        if not self.cases:
            raise ValidationError("scenario needs at least one wind case")
        total = 0.0
        norm = []
        for speed, direction, weight in self.cases:
            if speed < 0:
                raise ValidationError("wind speed must be nonnegative")
            if weight <= 0:
                raise ValidationError("case weights must be positive")
            total += weight
            norm.append((float(speed), float(direction) % TWO_PI, float(weight)))
        object.__setattr__(
            self, "cases", tuple((s, d, w / total) for s, d, w in norm)
        )


def _uniform(speeds, directions):
    cases = [(s, d, 1.0) for s in speeds for d in directions]
    return WindScenario(tuple(cases))


BUILTIN_SCENARIOS = {
    "fw1": _uniform([15.0], [math.pi / 4]),
    "fw2": _uniform([15.0], [0.0, math.pi, math.pi / 2, 3 * math.pi / 2]),
    "fw3": _uniform([15.0], [k * math.pi / 3 for k in range(6)]),
    "fw4": _uniform([12.0, 10.0, 8.0], [k * math.pi / 6 for k in range(12)]),
}


def parse_scenario(text: str) -> WindScenario:
    """Triples `speed direction weight`, one per line; # starts a comment."""
    cases = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        if len(toks) != 3:
            raise ParseError(
                f"expected 'speed direction weight', got {line!r}", line=lineno
            )
        try:
            cases.append(tuple(float(t) for t in toks))
        except ValueError:
            raise ParseError(f"non-numeric token in {line!r}", line=lineno) from None
    if not cases:
        raise ParseError("scenario file has no cases")
    return WindScenario(tuple(cases))


def load_scenario(name_or_path: str) -> WindScenario:
    if name_or_path in BUILTIN_SCENARIOS:
        return BUILTIN_SCENARIOS[name_or_path]
    with open(name_or_path) as fh:
        return parse_scenario(fh.read())


# ---------------------------------------------------------------------------
# wake physics

def wake_speed(v0: float, rotor_radius: float, wake_radius: float) -> float:
    """Speed behind one turbine: v0 * (1 - (2/3) R^2 / r^2).

    Evaluated as v0*(3r^2 - 2R^2)/(3r^2) so that the rotor-edge case r = R
    lands exactly on v0/3 for representable inputs.
    """
    if rotor_radius <= 0:
        raise ValidationError("rotor radius must be positive")
    if wake_radius < rotor_radius:
        raise WakeDomainError(
            f"wake radius {wake_radius} is inside the rotor disc (R={rotor_radius})"
        )
    r2 = 3.0 * wake_radius * wake_radius
    return v0 * (r2 - 2.0 * rotor_radius * rotor_radius) / r2


def combined_speed(v0: float, waked_speeds) -> float:
    """Root-sum-square deficit combination, clamped at zero."""
    total = 0.0
    for v in waked_speeds:
        if not 0.0 <= v <= v0 + 1e-12:
            raise ValidationError("waked speeds must lie in [0, v0]")
        d = 1.0 - v / v0 if v0 > 0 else 0.0
        total += d * d
    return max(v0 * (1.0 - math.sqrt(total)), 0.0)


def turbine_power(v: float) -> float:
    """Piecewise power curve: cut-in 2, cubic to 12.8, plateau to 18, then cut-out."""
    if v < CUT_IN:
        return 0.0
    if v < RATED_SPEED:
        return CUBIC_COEFF * v**3
    if v <= CUT_OUT:
        return RATED_POWER
    return 0.0


def _power_curve(v: np.ndarray) -> np.ndarray:
    return np.where(
        v < CUT_IN,
        0.0,
        np.where(v < RATED_SPEED, CUBIC_COEFF * v**3, np.where(v <= CUT_OUT, RATED_POWER, 0.0)),
    )


def downwind_unit(direction: float) -> np.ndarray:
    """Unit vector pointing where the wind blows (direction is the FROM bearing)."""
    return np.array([-math.sin(direction), -math.cos(direction)])


def upstream_set(positions: np.ndarray, direction: float, i: int,
                 rotor_radius: float, wake_decay: float):
    """Turbines shading turbine i: strictly upwind and within the wake cone.

    Returns (j, downwind_distance, crosswind_offset, wake_radius) tuples.
    """
    positions = np.asarray(positions, dtype=float)
    d_hat = downwind_unit(direction)
    out = []
    for j in range(positions.shape[0]):
        if j == i:
            continue
        delta = positions[i] - positions[j]
        dist = float(delta @ d_hat)
        if dist <= 0.0:
            continue
        cross = abs(delta[0] * d_hat[1] - delta[1] * d_hat[0])
        wake_r = rotor_radius + wake_decay * dist
        if cross <= wake_r:
            out.append((j, dist, cross, wake_r))
    return out


def simulate_layout(positions: np.ndarray, scenario: WindScenario,
                    farm: FarmConfig) -> np.ndarray:
    """Expected power (kW) of each turbine, weighted over the wind cases."""
    positions = np.asarray(positions, dtype=float)
    T = positions.shape[0]
    delta = positions[:, None, :] - positions[None, :, :]
    R = farm.rotor_radius
    out = np.zeros(T)
    for speed, direction, weight in scenario.cases:
        d_hat = downwind_unit(direction)
        dist = delta @ d_hat
        cross = np.abs(delta[..., 0] * d_hat[1] - delta[..., 1] * d_hat[0])
        wake_r = R + farm.wake_decay * dist
        shaded = (dist > 0.0) & (cross <= wake_r)
        safe_r = np.where(shaded, wake_r, 1.0)
        deficit = np.where(shaded, 2.0 * R * R / (3.0 * safe_r * safe_r), 0.0)
        v = speed * (1.0 - np.sqrt((deficit**2).sum(axis=1)))
        np.maximum(v, 0.0, out=v)
        out += weight * _power_curve(v)
    return out


def cell_centers(farm: FarmConfig) -> np.ndarray:
    """(n_cells, 2) easting/northing of cell centers; row-major from southwest."""
    side = farm.cells_per_side
    coord = (np.arange(side) + 0.5) * farm.cell_width
    east, north = np.meshgrid(coord, coord, indexing="xy")
    return np.column_stack([east.ravel(), north.ravel()])


def random_layouts(farm: FarmConfig, n_layouts: int, seed: int) -> np.ndarray:
    """(n_layouts, turbines) occupied cell indices, drawn uniformly without replacement."""
    if n_layouts < 1:
        raise ValidationError("need at least one layout")
    rng = np.random.default_rng(seed)
    return np.array(
        [rng.choice(farm.n_cells, size=farm.turbines, replace=False) for _ in range(n_layouts)]
    )


def monte_carlo_power_grid(farm: FarmConfig, scenario: WindScenario,
                           n_layouts: int, seed: int) -> Dataset:
    """Mean expected power per occupied cell over random layouts.

    Cells that no layout ever occupies are left out of the dataset.
    """
    centers = cell_centers(farm)
    sums = np.zeros(farm.n_cells)
    counts = np.zeros(farm.n_cells, dtype=np.int64)
    for layout in random_layouts(farm, n_layouts, seed):
        power = simulate_layout(centers[layout], scenario, farm)
        np.add.at(sums, layout, power)
        np.add.at(counts, layout, 1)
    occupied = counts > 0
    X = centers[occupied]
    y = sums[occupied] / counts[occupied]
    return make_dataset(X, y)
