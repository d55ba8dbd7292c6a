"""Reformulation of a hinge model as a mixed-integer quadratic program.

Each truncated linear term gets a continuous slot eta (the hinge value) and a
binary indicator y for the sign of its argument; three big-M inequality rows
tie them together so that any feasible (x, eta, y) has eta equal to the hinge
exactly.  One-term bases enter the objective linearly through eta, two-term
bases through the symmetric Q entry of their eta pair.  Decision vector
layout: slot 0 is a constant one, then the x block, then (eta, y) pairs in
basis-then-term order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .model import TitlMarsModel, eval_term

BIG_M_FLOOR = 1e-9


@dataclass(frozen=True)
class LinRow:
    """One linear constraint: sum(coef * z[idx]) relation rhs."""

    coeffs: tuple[tuple[int, float], ...]
    relation: str  # ">=", "<=", "="
    rhs: float

    def value(self, z) -> float:
        return sum(c * z[i] for i, c in self.coeffs)

    def satisfied(self, z, tol: float = 1e-9) -> bool:
        v = self.value(z)
        if self.relation == ">=":
            return v >= self.rhs - tol
        if self.relation == "<=":
            return v <= self.rhs + tol
        return abs(v - self.rhs) <= tol


@dataclass(frozen=True)
class IndexMap:
    """Named handles into the decision vector."""

    const: int
    x: tuple[int, ...]
    eta: dict
    y: dict

    def __post_init__(self):
        object.__setattr__(self, "eta", dict(self.eta))
        object.__setattr__(self, "y", dict(self.y))


@dataclass(frozen=True)
class MiqpProblem:
    dim: int
    Q: dict
    c: np.ndarray
    rows: tuple[LinRow, ...]
    lo: np.ndarray
    hi: np.ndarray
    kinds: tuple[str, ...]  # continuous | integer | binary
    index: IndexMap
    sense: str  # the sense the problem was built for; objective is minimized


def compute_big_m(model: TitlMarsModel) -> dict:
    """Per-term constant bounding |x_v - t| over the box, keyed by (m, k)."""
    out = {}
    for m, basis in enumerate(model.bases):
        for k, term in enumerate(basis.terms):
            lo, hi = model.lower[term.var], model.upper[term.var]
            out[(m, k)] = max(hi - term.knot, term.knot - lo, BIG_M_FLOOR)
    return out


def build_miqp(model: TitlMarsModel, sense: str = "min") -> MiqpProblem:
    """Emit the big-M reformulation; maximization negates the objective."""
    if sense not in ("min", "max"):
        raise ValidationError(f"sense must be 'min' or 'max', got {sense!r}")
    sigma = 1.0 if sense == "min" else -1.0
    V = model.dim
    big_m = compute_big_m(model)

    x_idx = tuple(range(1, 1 + V))
    eta_idx, y_idx = {}, {}
    pos = 1 + V
    for m, basis in enumerate(model.bases):
        for k in range(basis.degree):
            eta_idx[(m, k)] = pos
            y_idx[(m, k)] = pos + 1
            pos += 2
    D = pos

    c = np.zeros(D)
    c[0] = sigma * model.intercept
    Q: dict = {}
    for m, (a, basis) in enumerate(zip(model.coeffs, model.bases)):
        if basis.degree == 1:
            c[eta_idx[(m, 0)]] = sigma * a
        else:
            i, j = eta_idx[(m, 0)], eta_idx[(m, 1)]
            Q[(i, j)] = sigma * a
            Q[(j, i)] = sigma * a

    lo = np.empty(D)
    hi = np.empty(D)
    kinds = ["continuous"] * D
    lo[0] = hi[0] = 1.0
    for v in range(V):
        lo[1 + v] = model.lower[v]
        hi[1 + v] = model.upper[v]
        if model.kinds[v] == "int":
            kinds[1 + v] = "integer"

    rows: list[LinRow] = []
    for m, basis in enumerate(model.bases):
        for k, term in enumerate(basis.terms):
            ex, ey = eta_idx[(m, k)], y_idx[(m, k)]
            xi = 1 + term.var
            M = big_m[(m, k)]
            t = term.knot
            lo[ex], hi[ex] = 0.0, M
            lo[ey], hi[ey] = 0.0, 1.0
            kinds[ey] = "binary"
            if term.sign > 0:
                rows.append(LinRow(((xi, 1.0), (ex, -1.0), (ey, -M)), ">=", t - M))
                rows.append(LinRow(((xi, -1.0), (ex, 1.0)), ">=", -t))
            else:
                rows.append(LinRow(((xi, -1.0), (ex, -1.0), (ey, -M)), ">=", -t - M))
                rows.append(LinRow(((xi, 1.0), (ex, 1.0)), ">=", t))
            rows.append(LinRow(((ex, -1.0), (ey, M)), ">=", 0.0))

    return MiqpProblem(
        dim=D,
        Q=Q,
        c=c,
        rows=tuple(rows),
        lo=lo,
        hi=hi,
        kinds=tuple(kinds),
        index=IndexMap(const=0, x=x_idx, eta=eta_idx, y=y_idx),
        sense=sense,
    )


def objective_at(problem: MiqpProblem, z) -> float:
    """Exact (1/2) z'Qz + c'z."""
    z = np.asarray(z, dtype=float)
    if z.size != problem.dim:
        raise ValidationError(f"point has length {z.size}, problem has dim {problem.dim}")
    quad = 0.0
    for (i, j), q in problem.Q.items():
        quad += q * z[i] * z[j]
    return 0.5 * quad + float(problem.c @ z)


def embed_point(model: TitlMarsModel, problem: MiqpProblem, x) -> np.ndarray:
    """Canonical lift of an x point: eta = hinge value, y = its indicator."""
    x = np.asarray(x, dtype=float)
    z = np.zeros(problem.dim)
    z[problem.index.const] = 1.0
    for v in range(model.dim):
        z[problem.index.x[v]] = x[v]
    for m, basis in enumerate(model.bases):
        for k, term in enumerate(basis.terms):
            arg = term.sign * (x[term.var] - term.knot)
            z[problem.index.eta[(m, k)]] = eval_term(term, x)
            z[problem.index.y[(m, k)]] = 1.0 if arg >= 0 else 0.0
    return z


def violated_rows(problem: MiqpProblem, z, tol: float = 1e-9) -> list[int]:
    return [i for i, row in enumerate(problem.rows) if not row.satisfied(z, tol)]


def substitute(problem: MiqpProblem, fixed: dict) -> tuple:
    """Project the constraint system onto the non-fixed slots.

    Returns (A, senses, b, lo, hi, kept) where kept maps reduced columns to
    original slot indices; constants from fixed slots move to the rhs.
    """
    kept = [i for i in range(problem.dim) if i not in fixed]
    col_of = {slot: j for j, slot in enumerate(kept)}
    A, senses, b = [], [], []
    for row in problem.rows:
        dense = np.zeros(len(kept))
        rhs = row.rhs
        for i, cf in row.coeffs:
            if i in fixed:
                rhs -= cf * fixed[i]
            else:
                dense[col_of[i]] += cf
        A.append(dense)
        senses.append(row.relation)
        b.append(rhs)
    lo = problem.lo[kept]
    hi = problem.hi[kept]
    return np.array(A), senses, np.array(b), lo, hi, kept


def dump_problem(problem: MiqpProblem) -> str:
    """Readable text dump: variables, objective, rows.  For debugging only."""
    names = {0: "one"}
    for v, i in enumerate(problem.index.x):
        names[i] = f"x{v}"
    for (m, k), i in problem.index.eta.items():
        names[i] = f"eta[{m},{k}]"
    for (m, k), i in problem.index.y.items():
        names[i] = f"y[{m},{k}]"
    out = [f"miqp dim {problem.dim} sense {problem.sense} (objective minimized)"]
    for i in range(problem.dim):
        out.append(
            f"var {i} {names[i]} {problem.kinds[i]} [{problem.lo[i]:g}, {problem.hi[i]:g}]"
        )
    for i, ci in enumerate(problem.c):
        if ci != 0.0:
            out.append(f"obj lin {names[i]} {ci:.17g}")
    seen = set()
    for (i, j), q in sorted(problem.Q.items()):
        if (j, i) in seen:
            continue
        seen.add((i, j))
        out.append(f"obj quad {names[i]}*{names[j]} {q:.17g}")
    for r, row in enumerate(problem.rows):
        terms = " + ".join(f"{cf:g}*{names[i]}" for i, cf in row.coeffs)
        out.append(f"row {r}: {terms} {row.relation} {row.rhs:g}")
    return "\n".join(out) + "\n"
