"""Hinge-basis regression models: representation, evaluation, text format,
and a brute-force box-optimum oracle.

A model is an intercept plus a weighted sum of basis functions, each basis
being the product of one or two truncated linear terms max(s*(x_v - t), 0)
on distinct variables.  Within any axis-aligned cell of the knot grid every
hinge is affine, so the model is multilinear there and box extrema sit on
cell vertices; the oracle exploits exactly that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import CapacityError, ParseError, ValidationError

VAR_KINDS = ("real", "int")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class TruncatedTerm:
    """One hinge factor max(sign * (x[var] - knot), 0)."""

    sign: int
    var: int
    knot: float

    def __post_init__(self):
        if self.sign not in (+1, -1):
            raise ValidationError(f"sign must be +1 or -1, got {self.sign!r}")
        if not isinstance(self.var, int) or self.var < 0:
            raise ValidationError(f"variable index must be a nonnegative integer, got {self.var!r}")
        if not math.isfinite(self.knot):
            raise ValidationError("knot must be finite")


@dataclass(frozen=True)
class BasisFunction:
    """Product of 1 or 2 truncated linear terms on distinct variables."""

    terms: tuple[TruncatedTerm, ...]

    def __post_init__(self):
        terms = tuple(self.terms)
        object.__setattr__(self, "terms", terms)
        if not 1 <= len(terms) <= 2:
            raise ValidationError(
                f"interaction order must be 1 or 2, got {len(terms)} terms"
            )
        if len(terms) == 2 and terms[0].var == terms[1].var:
            raise ValidationError(
                f"basis variables must be distinct, got variable {terms[0].var} twice"
            )

    @property
    def degree(self) -> int:
        return len(self.terms)

    def variables(self) -> tuple[int, ...]:
        return tuple(t.var for t in self.terms)


@dataclass(frozen=True)
class TitlMarsModel:
    """Intercept + weighted hinge-product bases over a bounded box."""

    intercept: float
    coeffs: tuple[float, ...]
    bases: tuple[BasisFunction, ...]
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    kinds: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        object.__setattr__(self, "bases", tuple(self.bases))
        object.__setattr__(self, "lower", tuple(float(v) for v in self.lower))
        object.__setattr__(self, "upper", tuple(float(v) for v in self.upper))
        object.__setattr__(self, "kinds", tuple(self.kinds))
        if len(self.coeffs) != len(self.bases):
            raise ValidationError(
                f"coeffs/bases length mismatch: {len(self.coeffs)} vs {len(self.bases)}"
            )
        if not (len(self.lower) == len(self.upper) == len(self.kinds)):
            raise ValidationError("lower/upper/kinds length mismatch")
        if not math.isfinite(self.intercept):
            raise ValidationError("intercept must be finite")
        for c in self.coeffs:
            if not math.isfinite(c):
                raise ValidationError("coefficients must be finite")
        for v, (lo, hi, kind) in enumerate(zip(self.lower, self.upper, self.kinds)):
            if kind not in VAR_KINDS:
                raise ValidationError(f"variable {v}: kind must be one of {VAR_KINDS}")
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise ValidationError(f"variable {v}: bounds must be finite")
            if not lo < hi:
                raise ValidationError(
                    f"variable {v}: lower bound must be strictly below upper bound"
                )
            if kind == "int" and (lo != int(lo) or hi != int(hi)):
                raise ValidationError(f"variable {v}: integer variable bounds must be integers")
        V = len(self.lower)
        for m, basis in enumerate(self.bases):
            for term in basis.terms:
                if term.var >= V:
                    raise ValidationError(
                        f"basis {m}: variable index {term.var} out of range for {V} variables"
                    )
                if not self.lower[term.var] <= term.knot <= self.upper[term.var]:
                    raise ValidationError(
                        f"basis {m}: knot {term.knot} outside variable bounds "
                        f"[{self.lower[term.var]}, {self.upper[term.var]}]"
                    )

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def n_bases(self) -> int:
        return len(self.bases)


def make_model(
    intercept: float,
    coeffs: Sequence[float],
    bases: Sequence[BasisFunction],
    lower: Sequence[float],
    upper: Sequence[float],
    kinds: Sequence[str] | None = None,
) -> TitlMarsModel:
    """Construct a validated model; kinds default to all-real."""
    if kinds is None:
        kinds = ("real",) * len(tuple(lower))
    return TitlMarsModel(
        intercept=float(intercept),
        coeffs=tuple(coeffs),
        bases=tuple(bases),
        lower=tuple(lower),
        upper=tuple(upper),
        kinds=tuple(kinds),
    )


@dataclass
class Solution:
    """Result of an optimization run (solver, oracle, or GA)."""

    x: np.ndarray
    value: float
    sense: str
    bound: float = math.nan
    gap: float = math.nan
    status: str = "optimal"
    nodes: int = 0
    lp_iterations: int = 0
    evals: int = 0
    millis: float = 0.0


# ---------------------------------------------------------------------------
# evaluation

def eval_term(term: TruncatedTerm, x) -> float:
    """max(sign * (x[var] - knot), 0); defined for any point, in or out of box."""
    if term.var >= len(x):
        raise ValidationError(
            f"variable index {term.var} out of range for point of length {len(x)}"
        )
    return max(term.sign * (float(x[term.var]) - term.knot), 0.0)


def eval_basis(basis: BasisFunction, x) -> float:
    out = 1.0
    for term in basis.terms:
        out *= eval_term(term, x)
        if out == 0.0:
            return 0.0
    return out


def eval_model(model: TitlMarsModel, x) -> float:
    if len(x) != model.dim:
        raise ValidationError(f"point has length {len(x)}, model has {model.dim} variables")
    total = model.intercept
    for a, basis in zip(model.coeffs, model.bases):
        total += a * eval_basis(basis, x)
    return total


def basis_matrix(bases: Sequence[BasisFunction], X: np.ndarray) -> np.ndarray:
    """n x M matrix of basis values over the rows of X."""
    X = np.asarray(X, dtype=float)
    out = np.empty((X.shape[0], len(bases)))
    for j, basis in enumerate(bases):
        col = np.ones(X.shape[0])
        for t in basis.terms:
            col = col * np.maximum(t.sign * (X[:, t.var] - t.knot), 0.0)
        out[:, j] = col
    return out


def eval_model_many(model: TitlMarsModel, X: np.ndarray) -> np.ndarray:
    """Vectorized eval_model over the rows of X."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.dim:
        raise ValidationError(f"expected an (n, {model.dim}) array, got shape {X.shape}")
    if not model.bases:
        return np.full(X.shape[0], model.intercept)
    B = basis_matrix(model.bases, X)
    return model.intercept + B @ np.asarray(model.coeffs)


# ---------------------------------------------------------------------------
# knot grid and the vertex oracle

def knot_grid(model: TitlMarsModel) -> tuple[np.ndarray, ...]:
    """Per-variable strictly increasing breakpoints {l_v} | knots on v | {u_v}."""
    knots: list[list[float]] = [[] for _ in range(model.dim)]
    for basis in model.bases:
        for term in basis.terms:
            knots[term.var].append(term.knot)
    grids = []
    for v in range(model.dim):
        g = np.unique(np.array([model.lower[v], model.upper[v]] + knots[v], dtype=float))
        grids.append(g)
    return tuple(grids)


def _oracle_candidates(model: TitlMarsModel) -> list[np.ndarray]:
    """Candidate coordinate values that carry a box extremum, per variable.

    Real variables contribute their breakpoints.  Integer variables
    contribute the bounds plus floor/ceil of every knot, clipped to the box.
    """
    grids = knot_grid(model)
    cands = []
    for v in range(model.dim):
        if model.kinds[v] == "real":
            cands.append(grids[v])
        else:
            lo, hi = model.lower[v], model.upper[v]
            pts = {lo, hi}
            for t in grids[v][1:-1]:
                pts.add(min(max(math.floor(t), lo), hi))
                pts.add(min(max(math.ceil(t), lo), hi))
            cands.append(np.array(sorted(pts), dtype=float))
    return cands


def oracle_optimum(
    model: TitlMarsModel,
    sense: str,
    *,
    vertex_cap: int = 2_000_000,
    chunk: int = 65536,
) -> Solution:
    """Exact box optimum by enumerating all knot-cell vertices.

    Within each knot cell the model is affine in every single coordinate,
    so the extremum over the box is attained on the enumerated grid.
    Raises CapacityError when the vertex count exceeds ``vertex_cap``.
    """
    if sense not in ("min", "max"):
        raise ValidationError(f"sense must be 'min' or 'max', got {sense!r}")
    cands = _oracle_candidates(model)
    sizes = [len(c) for c in cands]
    total = 1
    for s in sizes:
        total *= s
        if total > vertex_cap:
            raise CapacityError(
                f"vertex enumeration needs more than {vertex_cap} points; "
                "use the branch-and-bound solver instead"
            )
    strides = np.ones(model.dim, dtype=np.int64)
    for v in range(model.dim - 2, -1, -1):
        strides[v] = strides[v + 1] * sizes[v + 1]

    best_val = math.inf if sense == "min" else -math.inf
    best_x = None
    better = np.argmin if sense == "min" else np.argmax
    for start in range(0, total, chunk):
        ks = np.arange(start, min(start + chunk, total), dtype=np.int64)
        X = np.empty((len(ks), model.dim))
        for v in range(model.dim):
            X[:, v] = cands[v][(ks // strides[v]) % sizes[v]]
        vals = eval_model_many(model, X)
        i = better(vals)
        if (sense == "min" and vals[i] < best_val) or (sense == "max" and vals[i] > best_val):
            best_val = float(vals[i])
            best_x = X[i].copy()
    return Solution(
        x=best_x,
        value=best_val,
        sense=sense,
        bound=best_val,
        gap=0.0,
        status="optimal",
        evals=total,
    )


# ---------------------------------------------------------------------------
# text format

FORMAT_HEADER = "titl-mars v1"


def serialize_model(model: TitlMarsModel) -> str:
    lines = [FORMAT_HEADER, f"vars {model.dim}"]
    for v in range(model.dim):
        lines.append(
            f"bound {v} {_fmt(model.lower[v])} {_fmt(model.upper[v])} {model.kinds[v]}"
        )
    lines.append(f"intercept {_fmt(model.intercept)}")
    for a, basis in zip(model.coeffs, model.bases):
        parts = [f"basis {_fmt(a)} {basis.degree}"]
        for t in basis.terms:
            parts.append(f"{'+1' if t.sign > 0 else '-1'} {t.var} {_fmt(t.knot)}")
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def _parse_float(tok: str, lineno: int, what: str) -> float:
    try:
        return float(tok)
    except ValueError:
        raise ParseError(f"expected a number for {what}, got {tok!r}", line=lineno) from None


def _parse_int(tok: str, lineno: int, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"expected an integer for {what}, got {tok!r}", line=lineno) from None


def parse_model(text: str) -> TitlMarsModel:
    """Parse the model text format; inverse of serialize_model."""
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        rows.append((lineno, line))
    if not rows:
        raise ParseError("empty document")
    it = iter(rows)

    lineno, line = next(it)
    if line != FORMAT_HEADER:
        raise ParseError(f"expected header {FORMAT_HEADER!r}, got {line!r}", line=lineno)
    try:
        lineno, line = next(it)
    except StopIteration:
        raise ParseError("missing 'vars' line", line=lineno)
    toks = line.split()
    if len(toks) != 2 or toks[0] != "vars":
        raise ParseError(f"expected 'vars V', got {line!r}", line=lineno)
    V = _parse_int(toks[1], lineno, "variable count")
    if V < 1:
        raise ParseError("variable count must be positive", line=lineno)

    lower = [None] * V
    upper = [None] * V
    kinds = [None] * V
    for _ in range(V):
        try:
            lineno, line = next(it)
        except StopIteration:
            raise ParseError(f"expected {V} 'bound' lines", line=lineno)
        toks = line.split()
        if len(toks) != 5 or toks[0] != "bound":
            raise ParseError(f"expected 'bound v l u real|int', got {line!r}", line=lineno)
        v = _parse_int(toks[1], lineno, "variable index")
        if not 0 <= v < V:
            raise ParseError(f"bound variable index {v} out of range", line=lineno)
        if lower[v] is not None:
            raise ParseError(f"duplicate bound line for variable {v}", line=lineno)
        lower[v] = _parse_float(toks[2], lineno, "lower bound")
        upper[v] = _parse_float(toks[3], lineno, "upper bound")
        if toks[4] not in VAR_KINDS:
            raise ParseError(f"kind must be 'real' or 'int', got {toks[4]!r}", line=lineno)
        kinds[v] = toks[4]

    try:
        lineno, line = next(it)
    except StopIteration:
        raise ParseError("missing 'intercept' line", line=lineno)
    toks = line.split()
    if len(toks) != 2 or toks[0] != "intercept":
        raise ParseError(f"expected 'intercept a0', got {line!r}", line=lineno)
    intercept = _parse_float(toks[1], lineno, "intercept")

    coeffs: list[float] = []
    bases: list[BasisFunction] = []
    for lineno, line in it:
        toks = line.split()
        if toks[0] != "basis":
            raise ParseError(f"expected 'basis' line, got {line!r}", line=lineno)
        if len(toks) < 3:
            raise ParseError("basis line needs a coefficient and a term count", line=lineno)
        a = _parse_float(toks[1], lineno, "basis coefficient")
        K = _parse_int(toks[2], lineno, "term count")
        if len(toks) != 3 + 3 * K:
            raise ParseError(
                f"basis line declares {K} terms but carries {(len(toks) - 3) / 3:g}",
                line=lineno,
            )
        terms = []
        for k in range(K):
            s = _parse_int(toks[3 + 3 * k], lineno, "term sign")
            v = _parse_int(toks[4 + 3 * k], lineno, "term variable")
            t = _parse_float(toks[5 + 3 * k], lineno, "term knot")
            if s not in (+1, -1):
                raise ParseError(f"term sign must be +1 or -1, got {s}", line=lineno)
            if not 0 <= v < V:
                raise ParseError(f"term variable index {v} out of range", line=lineno)
            terms.append(TruncatedTerm(sign=s, var=v, knot=t))
        coeffs.append(a)
        bases.append(BasisFunction(terms=tuple(terms)))

    return make_model(intercept, coeffs, bases, lower, upper, kinds)
