"""Shared generators for randomized suites plus acceptance-line reporting."""

import numpy as np
import pytest

from titlmars.model import BasisFunction, TruncatedTerm, make_model

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    # acceptance criteria report one line each, bypassing output capture
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_model(rng, V=None, max_bases=20, coeff_range=10.0, int_vars=False,
                 knot_values=None, box=None):
    """Random hinge model on a random (or given) box.

    knot_values: optional per-variable arrays; knots are drawn from these
    instead of the continuous box (used when a test needs knots on a grid).
    """
    if V is None:
        V = int(rng.integers(2, 5))
    if box is not None:
        lo = np.asarray(box[0], dtype=float).copy()
        hi = np.asarray(box[1], dtype=float).copy()
    else:
        lo = rng.uniform(-5.0, 0.0, size=V)
        hi = lo + rng.uniform(1.0, 6.0, size=V)
    kinds = ["real"] * V
    if int_vars:
        for v in range(V):
            if rng.random() < 0.4:
                lo[v] = np.floor(lo[v])
                hi[v] = np.ceil(hi[v])
                kinds[v] = "int"
    M = int(rng.integers(1, max_bases + 1))

    def draw_knot(v):
        if knot_values is not None:
            return float(rng.choice(knot_values[v]))
        return float(rng.uniform(lo[v], hi[v]))

    bases = []
    for _ in range(M):
        degree = 2 if (V >= 2 and rng.random() < 0.5) else 1
        vs = rng.choice(V, size=degree, replace=False)
        terms = tuple(
            TruncatedTerm(
                sign=int(rng.choice([-1, 1])), var=int(v), knot=draw_knot(int(v))
            )
            for v in vs
        )
        bases.append(BasisFunction(terms=terms))
    coeffs = rng.uniform(-coeff_range, coeff_range, size=M)
    intercept = float(rng.uniform(-coeff_range, coeff_range))
    return make_model(intercept, coeffs, bases, lo, hi, kinds)


def random_point(rng, model):
    lo = np.asarray(model.lower)
    hi = np.asarray(model.upper)
    x = rng.uniform(lo, hi)
    for v, kind in enumerate(model.kinds):
        if kind == "int":
            x[v] = np.clip(np.rint(x[v]), lo[v], hi[v])
    return x


@pytest.fixture
def rng():
    return np.random.default_rng(20240809)
