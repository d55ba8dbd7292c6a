"""Forward/backward hinge-model fitting from tabular data.

The forward pass grows the basis set by reflected hinge pairs on
(parent, variable, knot) triples, parents being the intercept or an
existing one-term basis, so interactions never exceed two variables.
Candidate knots are scored with suffix-sum updates of the normal
equations, which makes the sweep over all knots of a variable linear in
the sample count.  The backward pass deletes bases one at a time and keeps
the subset with the smallest generalized cross-validation score.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import FitError, ParseError, ValidationError
from .model import BasisFunction, TitlMarsModel, TruncatedTerm, basis_matrix, make_model

RIDGE = 1e-8
SCORE_RIDGE = 1e-11


@dataclass(frozen=True)
class Dataset:
    """Samples (X, y) plus the box the fitted model will live on.

    Bounds default to the per-column min/max; constant columns are padded
    by 0.5 on both sides so the box stays non-degenerate.
    """

    X: np.ndarray
    y: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        if X.ndim != 2:
            raise ValidationError("X must be a 2-d array")
        if y.ndim != 1 or y.size != X.shape[0]:
            raise ValidationError("y length must match the number of rows of X")
        if X.shape[0] < 1:
            raise ValidationError("need at least 1 sample")
        if not (np.isfinite(X).all() and np.isfinite(y).all()):
            raise ValidationError("non-finite value in the data")
        object.__setattr__(self, "lower", np.asarray(self.lower, dtype=float))
        object.__setattr__(self, "upper", np.asarray(self.upper, dtype=float))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]


def make_dataset(X, y, lower=None, upper=None) -> Dataset:
    X = np.asarray(X, dtype=float)
    lo = X.min(axis=0) if lower is None else np.asarray(lower, dtype=float)
    hi = X.max(axis=0) if upper is None else np.asarray(upper, dtype=float)
    flat = hi - lo <= 0
    lo = np.where(flat, lo - 0.5, lo)
    hi = np.where(flat, hi + 0.5, hi)
    return Dataset(X=X, y=np.asarray(y, dtype=float), lower=lo, upper=hi)


def load_dataset_csv(path) -> Dataset:
    """Read the x1,...,xV,y table; any non-numeric cell is reported with its position."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty dataset file") from None
        header = [h.strip() for h in header]
        V = len(header) - 1
        expected = [f"x{i + 1}" for i in range(V)] + ["y"]
        if V < 1 or header != expected:
            raise ParseError(
                f"header must be x1,...,xV,y; got {','.join(header)}", line=1
            )
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != V + 1:
                raise ParseError(f"expected {V + 1} columns, got {len(row)}", line=lineno)
            vals = []
            for col, cell in enumerate(row):
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise ParseError(
                        f"non-numeric cell {cell!r} in column {header[col]}",
                        line=lineno,
                    ) from None
            rows.append(vals)
    if not rows:
        raise ParseError("dataset has a header but no rows")
    arr = np.asarray(rows, dtype=float)
    return make_dataset(arr[:, :-1], arr[:, -1])


def save_dataset_csv(data: Dataset, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{i + 1}" for i in range(data.dim)] + ["y"])
        for i in range(data.n):
            writer.writerow([format(v, ".17g") for v in data.X[i]] + [format(data.y[i], ".17g")])


@dataclass(frozen=True)
class FitConfig:
    max_basis: int = 40
    knot_quantiles: int = 100  # cap on candidate knots per variable
    gcv_penalty: float = 3.0
    forward_floor: float = 1e-6  # stop when the relative SSR decrease drops below

    def __post_init__(self):
        if self.max_basis < 1:
            raise ValidationError("max_basis must be at least 1")
        if self.knot_quantiles < 1:
            raise ValidationError("knot_quantiles must be at least 1")

    # interactions are capped at two variables by construction
    @property
    def max_interaction(self) -> int:
        return 2


def gcv(ssr: float, n: int, effective_params: float) -> float:
    """Penalized lack of fit (ssr/n) / (1 - C/n)^2; infinite when C >= n."""
    if n <= 0:
        raise ValidationError("n must be positive")
    if effective_params < 0:
        raise ValidationError("effective_params must be nonnegative")
    if effective_params >= n:
        return math.inf
    return (ssr / n) / (1.0 - effective_params / n) ** 2


def _effective_params(bases, penalty) -> float:
    n_knots = sum(b.degree for b in bases)
    return 1.0 + len(bases) + penalty * n_knots


def _solve_normal(G, g):
    try:
        theta = np.linalg.solve(G, g)
        if np.isfinite(theta).all():
            return theta
    except np.linalg.LinAlgError:
        pass
    scale = max(np.trace(G) / G.shape[0], 1.0)
    return np.linalg.solve(G + RIDGE * scale * np.eye(G.shape[0]), g)


def _fit_coeffs(D, y):
    G = D.T @ D
    theta = _solve_normal(G, D.T @ y)
    resid = y - D @ theta
    return theta, float(resid @ resid)


def _knot_candidates(X, cap):
    out = []
    for v in range(X.shape[1]):
        vals = np.unique(X[:, v])
        if vals.size > cap:
            qs = np.quantile(X[:, v], np.linspace(0.0, 1.0, cap), method="nearest")
            vals = np.unique(qs)
        out.append(vals)
    return out


class _SuffixTables:
    """Suffix/prefix sums of a weighted design along one sorted variable.

    Supports evaluating, for every knot t at once, the normal-equation
    blocks of the reflected hinge pair u+ = w*(x-t)+ and u- = w*(t-x)+.
    The pair has disjoint support, so its 2x2 Gram block is diagonal.
    """

    def __init__(self, D, w, xs_order, xs, ys):
        A0 = D[xs_order] * w[xs_order, None]
        A1 = A0 * xs[:, None]
        self.suf0 = np.vstack([np.cumsum(A0[::-1], axis=0)[::-1], np.zeros((1, D.shape[1]))])
        self.suf1 = np.vstack([np.cumsum(A1[::-1], axis=0)[::-1], np.zeros((1, D.shape[1]))])
        self.pre0 = np.vstack([np.zeros((1, D.shape[1])), np.cumsum(A0, axis=0)])
        self.pre1 = np.vstack([np.zeros((1, D.shape[1])), np.cumsum(A1, axis=0)])
        wo = w[xs_order]
        q0 = wo * wo
        q1 = q0 * xs
        q2 = q1 * xs
        r0 = wo * ys
        r1 = r0 * xs
        zero = np.zeros(1)
        self.sq = [
            np.concatenate([np.cumsum(a[::-1])[::-1], zero]) for a in (q0, q1, q2, r0, r1)
        ]
        self.pq = [np.concatenate([zero, np.cumsum(a)]) for a in (q0, q1, q2, r0, r1)]

    def blocks(self, xs, knots):
        """Per-knot C (p x 2), h (2,), diagonal S (2,) for the hinge pair."""
        hi = np.searchsorted(xs, knots, side="right")  # suffix: x > t
        lo = np.searchsorted(xs, knots, side="left")  # prefix: x < t
        t = knots[:, None]
        c_plus = self.suf1[hi] - t * self.suf0[hi]
        c_minus = t * self.pre0[lo] - self.pre1[lo]
        sq0, sq1, sq2, sr0, sr1 = (a[hi] for a in self.sq)
        pq0, pq1, pq2, pr0, pr1 = (a[lo] for a in self.pq)
        tt = knots
        s_plus = sq2 - 2 * tt * sq1 + tt * tt * sq0
        s_minus = tt * tt * pq0 - 2 * tt * pq1 + pq2
        h_plus = sr1 - tt * sr0
        h_minus = tt * pr0 - pr1
        return c_plus, c_minus, h_plus, h_minus, s_plus, s_minus


def forward_pass(data: Dataset, cfg: FitConfig | None = None) -> TitlMarsModel:
    """Grow bases greedily; returns the unpruned fitted model."""
    cfg = cfg or FitConfig()
    if data.n < 3:
        raise FitError("need at least 3 samples to fit")
    X, y = data.X, data.y
    n, V = X.shape
    ybar = float(y.mean())
    sst = float(((y - ybar) ** 2).sum())
    if sst <= 1e-28 * max(1.0, ybar * ybar):
        return make_model(ybar, [], [], data.lower, data.upper)

    knots_by_var = _knot_candidates(X, cfg.knot_quantiles)
    orders = [np.argsort(X[:, v], kind="stable") for v in range(V)]
    xs_by_var = [X[orders[v], v] for v in range(V)]
    ys_by_var = [y[orders[v]] for v in range(V)]

    bases: list[BasisFunction] = []
    D = np.ones((n, 1))
    theta, ssr = _fit_coeffs(D, y)

    while len(bases) + 2 <= cfg.max_basis:
        G = D.T @ D
        scale = max(np.trace(G) / G.shape[0], 1.0)
        G_r = G + SCORE_RIDGE * scale * np.eye(G.shape[0])
        g = D.T @ y
        theta_tilde = _solve_normal(G_r, g)

        best = None  # (delta, var, knot, parent_col)
        parents = [0] + [j + 1 for j, b in enumerate(bases) if b.degree == 1]
        for v in range(V):
            knots = knots_by_var[v]
            if knots.size == 0:
                continue
            for pc in parents:
                parent_vars = () if pc == 0 else bases[pc - 1].variables()
                if v in parent_vars:
                    continue
                tab = _SuffixTables(D, D[:, pc], orders[v], xs_by_var[v], ys_by_var[v])
                c_p, c_m, h_p, h_m, s_p, s_m = tab.blocks(xs_by_var[v], knots)
                # Schur complement of the pair against the current Gram
                E_p = np.linalg.solve(G_r, c_p.T).T
                E_m = np.linalg.solve(G_r, c_m.T).T
                s11 = s_p - np.einsum("kp,kp->k", c_p, E_p)
                s22 = s_m - np.einsum("kp,kp->k", c_m, E_m)
                s12 = -np.einsum("kp,kp->k", c_p, E_m)
                d1 = h_p - c_p @ theta_tilde
                d2 = h_m - c_m @ theta_tilde
                reg = SCORE_RIDGE * scale
                s11 = s11 + reg
                s22 = s22 + reg
                det = s11 * s22 - s12 * s12
                det = np.where(det <= reg * reg, reg * reg, det)
                delta = (s22 * d1 * d1 - 2 * s12 * d1 * d2 + s11 * d2 * d2) / det
                delta = np.where(np.isfinite(delta), delta, -np.inf)
                k_best = int(np.argmax(delta))
                # prefer by decrease, then lowest variable, smallest knot, first parent
                for k in np.flatnonzero(delta >= delta[k_best] - 1e-10 * (1 + ssr)):
                    cand = (float(delta[k]), v, float(knots[k]), pc)
                    if best is None or _candidate_better(cand, best, ssr):
                        best = cand

        if best is None:
            break
        delta, v, t, pc = best
        if not delta > cfg.forward_floor * max(ssr, 1e-30):
            break
        parent_col = D[:, pc]
        parent_terms = () if pc == 0 else bases[pc - 1].terms
        u_plus = parent_col * np.maximum(X[:, v] - t, 0.0)
        u_minus = parent_col * np.maximum(t - X[:, v], 0.0)
        bases.append(BasisFunction(parent_terms + (TruncatedTerm(+1, v, t),)))
        bases.append(BasisFunction(parent_terms + (TruncatedTerm(-1, v, t),)))
        D = np.column_stack([D, u_plus, u_minus])
        theta, new_ssr = _fit_coeffs(D, y)
        ssr = min(ssr, new_ssr)
        if ssr <= 1e-24 * sst:
            break

    theta, ssr = _fit_coeffs(D, y)
    return make_model(theta[0], theta[1:], bases, data.lower, data.upper)


def _candidate_better(cand, best, ssr):
    tol = 1e-10 * (1 + ssr)
    if cand[0] > best[0] + tol:
        return True
    if cand[0] < best[0] - tol:
        return False
    return (cand[1], cand[2], cand[3]) < (best[1], best[2], best[3])


def backward_pass(model: TitlMarsModel, data: Dataset, cfg: FitConfig | None = None) -> TitlMarsModel:
    """Prune bases one at a time, keeping the GCV-best subset seen."""
    cfg = cfg or FitConfig()
    y = data.y
    n = data.n
    bases = list(model.bases)
    if not bases:
        return model
    D_full = np.column_stack([np.ones(n), basis_matrix(bases, data.X)])

    def subset_fit(idx):
        cols = [0] + [j + 1 for j in idx]
        theta, ssr = _fit_coeffs(D_full[:, cols], y)
        score = gcv(ssr, n, _effective_params([bases[j] for j in idx], cfg.gcv_penalty))
        return theta, ssr, score

    current = list(range(len(bases)))
    _, _, best_score = subset_fit(current)
    best_subset = list(current)
    while current:
        scores = []
        for j in current:
            trial = [i for i in current if i != j]
            _, _, score = subset_fit(trial)
            scores.append((score, j))
        score, j = min(scores)
        current = [i for i in current if i != j]
        # prefer the smaller subset whenever the score is not meaningfully worse
        if score <= best_score + 1e-10 * (1.0 + abs(best_score)):
            best_score = min(score, best_score)
            best_subset = list(current)

    theta, _, _ = subset_fit(best_subset)
    kept = [bases[j] for j in best_subset]
    return make_model(theta[0], theta[1:], kept, model.lower, model.upper, model.kinds)


def fit(data: Dataset, cfg: FitConfig | None = None) -> TitlMarsModel:
    """Forward growth then GCV pruning; returns a validated model."""
    cfg = cfg or FitConfig()
    model = forward_pass(data, cfg)
    return backward_pass(model, data, cfg)
