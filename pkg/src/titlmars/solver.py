"""Certified global optimization of hinge models over their box.

Branch-and-bound working directly on (x, eta, y): node bounds come from an
LP relaxation built with the big-M rows, secant cuts on free hinges, and
McCormick envelopes replacing each bilinear eta pair by an auxiliary w.
Branching fixes fractional indicators first, then splits fractional integer
coordinates, then splits intervals at interior knots.  Any node whose box
meets few enough knot-cell vertices is resolved exactly by vertex
enumeration (the model is multilinear inside every cell), so leaves carry no
relaxation error and the certificate gap closes to machine precision.

The solver always minimizes internally; maximization negates the objective
on the way in and the reported value and bound on the way out.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, ValidationError
from .miqp import compute_big_m
from .model import Solution, TitlMarsModel, eval_model_many
from .simplex import solve_lp

MAX_DIM = 25  # leaf vertex enumeration is 2^V; larger models are refused
LEAF_ENUM_CAP = 4096  # nodes with at most this many candidate vertices are enumerated
INT_TOL = 1e-6
FEAS_EPS = 1e-9


@dataclass
class SolverConfig:
    gap_tol: float = 1e-6
    node_limit: int = 10_000_000
    time_limit: float = 600.0
    branch_rule: str = "default"
    seed: int = 0

    def __post_init__(self):
        if self.gap_tol <= 0:
            raise ValidationError("gap tolerance must be positive")
        if self.branch_rule != "default":
            raise ValidationError(f"unknown branch rule {self.branch_rule!r}")


@dataclass
class Node:
    lo: np.ndarray
    hi: np.ndarray
    ystate: np.ndarray  # per flat term: -1 free, 0 fixed-zero, 1 fixed-one
    bound: float  # valid lower bound on the internal objective over this node
    depth: int = 0


@dataclass
class Relaxation:
    """LP relaxation outcome at a node (internal minimization space)."""

    status: str  # optimal | infeasible | failed
    bound: float
    x: np.ndarray | None = None
    eta: np.ndarray | None = None
    y: np.ndarray | None = None
    w: dict = field(default_factory=dict)
    iterations: int = 0


class _Term:
    __slots__ = ("m", "k", "sign", "var", "knot", "big_m", "coeff")

    def __init__(self, m, k, sign, var, knot, big_m, coeff):
        self.m = m
        self.k = k
        self.sign = sign
        self.var = var
        self.knot = knot
        self.big_m = big_m
        self.coeff = coeff


class BranchAndBound:
    """Branch-and-bound engine bound to one model and sense."""

    def __init__(self, model: TitlMarsModel, sense: str, cfg: SolverConfig | None = None):
        if sense not in ("min", "max"):
            raise ValidationError(f"sense must be 'min' or 'max', got {sense!r}")
        if model.dim > MAX_DIM:
            raise CapacityError(
                f"solver handles at most {MAX_DIM} variables, model has {model.dim}"
            )
        self.model = model
        self.sense = sense
        self.cfg = cfg or SolverConfig()
        self.sigma = 1.0 if sense == "min" else -1.0
        big_m = compute_big_m(model)
        self.terms: list[_Term] = []
        self.term_of = {}
        for m, (a, basis) in enumerate(zip(model.coeffs, model.bases)):
            for k, t in enumerate(basis.terms):
                self.term_of[(m, k)] = len(self.terms)
                self.terms.append(
                    _Term(m, k, t.sign, t.var, t.knot, big_m[(m, k)], a)
                )
        self.single = [
            (m, self.term_of[(m, 0)])
            for m, b in enumerate(model.bases)
            if b.degree == 1
        ]
        self.pairs = [
            (m, self.term_of[(m, 0)], self.term_of[(m, 1)])
            for m, b in enumerate(model.bases)
            if b.degree == 2
        ]
        self.knots_by_var = [
            np.unique([t.knot for t in self.terms if t.var == v])
            for v in range(model.dim)
        ]
        self.int_vars = [v for v, kind in enumerate(model.kinds) if kind == "int"]
        self._rng = np.random.default_rng(self.cfg.seed) if self.cfg.seed else None
        self.lp_iterations = 0

    # -- node construction -------------------------------------------------

    def root(self) -> Node | None:
        lo = np.asarray(self.model.lower, dtype=float).copy()
        hi = np.asarray(self.model.upper, dtype=float).copy()
        ystate = np.full(len(self.terms), -1, dtype=np.int8)
        return self._tighten(Node(lo, hi, ystate, -math.inf, 0))

    def _tighten(self, node: Node) -> Node | None:
        """Integer rounding, fixed-y box implications, implied y fixing."""
        lo, hi, ys = node.lo, node.hi, node.ystate
        for _ in range(4):
            changed = False
            for v in self.int_vars:
                nlo = math.ceil(lo[v] - INT_TOL)
                nhi = math.floor(hi[v] + INT_TOL)
                if nlo != lo[v] or nhi != hi[v]:
                    lo[v], hi[v] = nlo, nhi
                    changed = True
            for i, t in enumerate(self.terms):
                if ys[i] == 1:
                    if t.sign > 0 and lo[t.var] < t.knot:
                        lo[t.var] = t.knot
                        changed = True
                    elif t.sign < 0 and hi[t.var] > t.knot:
                        hi[t.var] = t.knot
                        changed = True
                elif ys[i] == 0:
                    if t.sign > 0 and hi[t.var] > t.knot:
                        hi[t.var] = t.knot
                        changed = True
                    elif t.sign < 0 and lo[t.var] < t.knot:
                        lo[t.var] = t.knot
                        changed = True
            if not changed:
                break
        if np.any(lo > hi + FEAS_EPS):
            return None
        for i, t in enumerate(self.terms):
            if ys[i] == -1:
                arg_lo = t.sign * ((lo[t.var] if t.sign > 0 else hi[t.var]) - t.knot)
                arg_hi = t.sign * ((hi[t.var] if t.sign > 0 else lo[t.var]) - t.knot)
                if arg_lo >= 0:
                    ys[i] = 1
                elif arg_hi <= 0:
                    ys[i] = 0
        return node

    def eta_bounds(self, node: Node) -> tuple[np.ndarray, np.ndarray]:
        """Hinge value range per term over the node box (zero when y is fixed off)."""
        n = len(self.terms)
        elo = np.zeros(n)
        ehi = np.zeros(n)
        for i, t in enumerate(self.terms):
            if node.ystate[i] == 0:
                continue
            if t.sign > 0:
                elo[i] = max(node.lo[t.var] - t.knot, 0.0)
                ehi[i] = max(node.hi[t.var] - t.knot, 0.0)
            else:
                elo[i] = max(t.knot - node.hi[t.var], 0.0)
                ehi[i] = max(t.knot - node.lo[t.var], 0.0)
        return elo, ehi

    def interval_bound(self, node: Node) -> float:
        """Cheap valid bound from per-basis hinge ranges alone."""
        elo, ehi = self.eta_bounds(node)
        total = self.sigma * self.model.intercept
        for m, it in self.single:
            a = self.sigma * self.terms[it].coeff
            total += a * (elo[it] if a > 0 else ehi[it])
        for m, i1, i2 in self.pairs:
            a = self.sigma * self.terms[i1].coeff
            total += a * (elo[i1] * elo[i2] if a > 0 else ehi[i1] * ehi[i2])
        return total

    # -- relaxation ---------------------------------------------------------

    def relax(self, node: Node) -> Relaxation:
        """LP relaxation: big-M rows with free indicators in [0,1], secant
        cuts on free hinges, McCormick envelopes on eta products."""
        V = self.model.dim
        elo, ehi = self.eta_bounds(node)
        active = ehi > 1e-15

        cols_eta = {}
        cols_y = {}
        ncols = V
        for i in range(len(self.terms)):
            if active[i]:
                cols_eta[i] = ncols
                ncols += 1
        for i in range(len(self.terms)):
            if active[i] and node.ystate[i] == -1:
                cols_y[i] = ncols
                ncols += 1
        cols_w = {}
        for m, i1, i2 in self.pairs:
            if active[i1] and active[i2]:
                cols_w[m] = ncols
                ncols += 1

        lo = np.zeros(ncols)
        hi = np.zeros(ncols)
        lo[:V], hi[:V] = node.lo, node.hi
        for i, jc in cols_eta.items():
            lo[jc], hi[jc] = elo[i], ehi[i]
        for i, jc in cols_y.items():
            lo[jc], hi[jc] = 0.0, 1.0
        for m, i1, i2 in self.pairs:
            if m in cols_w:
                lo[cols_w[m]] = elo[i1] * elo[i2]
                hi[cols_w[m]] = ehi[i1] * ehi[i2]

        rows, senses, rhs = [], [], []

        def add_row(entries, sense, b):
            dense = np.zeros(ncols)
            for j, cval in entries:
                dense[j] += cval
            rows.append(dense)
            senses.append(sense)
            rhs.append(b)

        for i, t in enumerate(self.terms):
            if not active[i]:
                continue
            je = cols_eta[i]
            jx = t.var
            if node.ystate[i] == 1:
                # hinge is affine on this node: eta = sign * (x - knot)
                add_row([(je, 1.0), (jx, -float(t.sign))], "=", -t.sign * t.knot)
                continue
            jy = cols_y[i]
            M = t.big_m
            if t.sign > 0:
                add_row([(jx, 1.0), (je, -1.0), (jy, -M)], ">=", t.knot - M)
                add_row([(jx, -1.0), (je, 1.0)], ">=", -t.knot)
            else:
                add_row([(jx, -1.0), (je, -1.0), (jy, -M)], ">=", -t.knot - M)
                add_row([(jx, 1.0), (je, 1.0)], ">=", t.knot)
            add_row([(je, -1.0), (jy, M)], ">=", 0.0)
            # secant cut: the chord over [lo, hi] dominates the hinge
            a, b = node.lo[jx], node.hi[jx]
            if a < t.knot < b:
                if t.sign > 0:
                    slope = (b - t.knot) / (b - a)
                    add_row([(jx, slope), (je, -1.0)], ">=", slope * a)
                else:
                    slope = (t.knot - a) / (b - a)
                    add_row([(jx, -slope), (je, -1.0)], ">=", -slope * b)

        for m, i1, i2 in self.pairs:
            if m not in cols_w:
                continue
            jw, j1, j2 = cols_w[m], cols_eta[i1], cols_eta[i2]
            l1, u1 = elo[i1], ehi[i1]
            l2, u2 = elo[i2], ehi[i2]
            add_row([(jw, 1.0), (j1, -l2), (j2, -l1)], ">=", -l1 * l2)
            add_row([(jw, 1.0), (j1, -u2), (j2, -u1)], ">=", -u1 * u2)
            add_row([(jw, -1.0), (j1, u2), (j2, l1)], ">=", l1 * u2)
            add_row([(jw, -1.0), (j1, l2), (j2, u1)], ">=", u1 * l2)

        c = np.zeros(ncols)
        for m, it in self.single:
            if active[it]:
                c[cols_eta[it]] += self.sigma * self.terms[it].coeff
        for m, i1, i2 in self.pairs:
            if m in cols_w:
                c[cols_w[m]] += self.sigma * self.terms[i1].coeff

        base = self.sigma * self.model.intercept
        res = solve_lp(c, rows, senses, rhs, lo, hi)
        self.lp_iterations += res.iterations
        if res.status == "infeasible":
            return Relaxation("infeasible", math.inf, iterations=res.iterations)
        if res.status != "optimal":
            return Relaxation("failed", -math.inf, iterations=res.iterations)

        eta = np.zeros(len(self.terms))
        for i, jc in cols_eta.items():
            eta[i] = res.x[jc]
        yv = np.where(node.ystate >= 0, node.ystate, 0.0).astype(float)
        for i, jc in cols_y.items():
            yv[i] = res.x[jc]
        w = {m: res.x[jc] for m, jc in cols_w.items()}
        return Relaxation(
            "optimal",
            base + res.obj,
            x=res.x[:V].copy(),
            eta=eta,
            y=yv,
            w=w,
            iterations=res.iterations,
        )

    # -- exact node resolution ----------------------------------------------

    def _candidates(self, node: Node) -> list[np.ndarray]:
        """Per-variable coordinate values that carry the node optimum."""
        out = []
        for v in range(self.model.dim):
            a, b = node.lo[v], node.hi[v]
            interior = self.knots_by_var[v]
            interior = interior[(interior > a) & (interior < b)]
            if self.model.kinds[v] == "int":
                pts = {a, b}
                for t in interior:
                    pts.add(min(max(math.floor(t), a), b))
                    pts.add(min(max(math.ceil(t), a), b))
                out.append(np.array(sorted(pts)))
            else:
                out.append(np.unique(np.concatenate([[a, b], interior])))
        return out

    def enum_count(self, node: Node) -> int:
        total = 1
        for cand in self._candidates(node):
            total *= len(cand)
            if total > 10 * LEAF_ENUM_CAP:
                return total
        return total

    def is_cell_pure(self, node: Node) -> bool:
        for v in range(self.model.dim):
            k = self.knots_by_var[v]
            if ((k > node.lo[v] + FEAS_EPS) & (k < node.hi[v] - FEAS_EPS)).any():
                return False
        return True

    def _enumerate(self, cands: list[np.ndarray]) -> tuple[float, np.ndarray]:
        sizes = [len(c) for c in cands]
        total = int(np.prod(sizes))
        V = len(cands)
        strides = np.ones(V, dtype=np.int64)
        for v in range(V - 2, -1, -1):
            strides[v] = strides[v + 1] * sizes[v + 1]
        best = math.inf
        best_x = None
        for start in range(0, total, 65536):
            ks = np.arange(start, min(start + 65536, total), dtype=np.int64)
            X = np.empty((len(ks), V))
            for v in range(V):
                X[:, v] = cands[v][(ks // strides[v]) % sizes[v]]
            vals = self.sigma * eval_model_many(self.model, X)
            i = int(np.argmin(vals))
            if vals[i] < best:
                best = float(vals[i])
                best_x = X[i].copy()
        return best, best_x

    def finalize_leaf(self, node: Node) -> tuple[float, np.ndarray]:
        """Exact optimum of a cell-pure node from its box vertices."""
        corners = [np.array([node.lo[v], node.hi[v]]) if node.lo[v] < node.hi[v]
                   else np.array([node.lo[v]]) for v in range(self.model.dim)]
        return self._enumerate(corners)

    def enumerate_node(self, node: Node) -> tuple[float, np.ndarray]:
        """Exact optimum of any node with few candidate vertices."""
        return self._enumerate(self._candidates(node))

    # -- branching ----------------------------------------------------------

    def branch(self, node: Node, relax: Relaxation | None) -> list[Node]:
        """Children by priority: fractional indicator, fractional integer
        coordinate, then a knot split; infeasible children are dropped."""
        if relax is not None and relax.y is not None:
            best_i, best_frac = -1, INT_TOL
            for i in range(len(self.terms)):
                if node.ystate[i] != -1:
                    continue
                frac = min(relax.y[i], 1.0 - relax.y[i])
                if frac > best_frac:
                    best_i, best_frac = i, frac
            if best_i >= 0:
                return self._split_y(node, best_i)

        if relax is not None and relax.x is not None:
            best_v, best_frac = -1, INT_TOL
            for v in self.int_vars:
                frac = abs(relax.x[v] - round(relax.x[v]))
                if frac > best_frac:
                    best_v, best_frac = v, frac
            if best_v >= 0:
                xv = relax.x[best_v]
                return self._split_interval(node, best_v, math.floor(xv), math.ceil(xv))

        v, t = self._spatial_choice(node, relax)
        return self._split_interval(node, v, t, t)

    def _split_y(self, node: Node, i: int) -> list[Node]:
        out = []
        for val in (0, 1):
            ys = node.ystate.copy()
            ys[i] = val
            child = Node(node.lo.copy(), node.hi.copy(), ys, node.bound, node.depth + 1)
            child = self._tighten(child)
            if child is not None:
                out.append(child)
        return out

    def _split_interval(self, node, v, left_hi, right_lo) -> list[Node]:
        out = []
        for lo_v, hi_v in ((node.lo[v], left_hi), (right_lo, node.hi[v])):
            if lo_v > hi_v + FEAS_EPS:
                continue
            lo = node.lo.copy()
            hi = node.hi.copy()
            lo[v], hi[v] = max(lo[v], lo_v), min(hi[v], hi_v)
            child = Node(lo, hi, node.ystate.copy(), node.bound, node.depth + 1)
            child = self._tighten(child)
            if child is not None:
                out.append(child)
        return out

    def _spatial_choice(self, node: Node, relax: Relaxation | None):
        """Interior knot with the largest estimated relaxation violation."""
        scores = {}
        if relax is not None and relax.x is not None:
            for m, i1, i2 in self.pairs:
                if m not in relax.w:
                    continue
                gap = abs(relax.eta[i1] * relax.eta[i2] - relax.w[m])
                gap *= abs(self.terms[i1].coeff)
                for it in (i1, i2):
                    t = self.terms[it]
                    if node.lo[t.var] < t.knot < node.hi[t.var]:
                        key = (t.var, t.knot)
                        scores[key] = scores.get(key, 0.0) + gap
            for i, t in enumerate(self.terms):
                if not (node.lo[t.var] < t.knot < node.hi[t.var]):
                    continue
                hinge = max(t.sign * (relax.x[t.var] - t.knot), 0.0)
                gap = abs(relax.eta[i] - hinge) * abs(t.coeff)
                key = (t.var, t.knot)
                scores[key] = scores.get(key, 0.0) + gap
        best = None
        if scores:
            items = sorted(scores.items())
            if self._rng is not None:
                order = self._rng.permutation(len(items))
                items = [items[i] for i in order]
            best_score = max(s for _, s in items)
            if best_score > 1e-12:
                for key, s in items:
                    if s >= best_score * (1 - 1e-12):
                        best = key
                        break
        if best is None:
            # fall back to the most central interior knot, widest interval first
            best_c = -1.0
            for v in range(self.model.dim):
                width = node.hi[v] - node.lo[v]
                if width <= 0:
                    continue
                for t in self.knots_by_var[v]:
                    if node.lo[v] < t < node.hi[v]:
                        cent = min(t - node.lo[v], node.hi[v] - t) / width
                        if cent > best_c + 1e-15:
                            best_c = cent
                            best = (v, float(t))
            if best is None:
                raise ValidationError("no branching candidate; node should have been finalized")
        return best

    # -- main loop ----------------------------------------------------------

    def solve(self) -> Solution:
        t0 = time.perf_counter()
        cfg = self.cfg
        model = self.model

        lo = np.asarray(model.lower)
        hi = np.asarray(model.upper)
        mid = 0.5 * (lo + hi)
        for v in self.int_vars:
            mid[v] = np.clip(np.rint(mid[v]), lo[v], hi[v])
        inc_val = float(self.sigma * eval_model_many(model, mid[None, :])[0])
        inc_x = mid

        root = self.root()
        heap = []
        counter = 0
        nodes = 0
        status = "optimal"
        glb = inc_val
        if root is not None:
            root.bound = self.interval_bound(root)
            heapq.heappush(heap, (root.bound, -root.depth, counter, root))
            counter += 1

        while heap:
            margin = cfg.gap_tol * max(1.0, abs(inc_val))
            bound, _, _, node = heapq.heappop(heap)
            glb = bound
            if bound >= inc_val - margin:
                glb = bound
                break
            if nodes >= cfg.node_limit or time.perf_counter() - t0 > cfg.time_limit:
                status = "incomplete"
                break
            nodes += 1

            count = self.enum_count(node)
            if count <= LEAF_ENUM_CAP:
                val, x = self.enumerate_node(node)
                if val < inc_val:
                    inc_val, inc_x = val, x
                continue
            if self.is_cell_pure(node):
                val, x = self.finalize_leaf(node)
                if val < inc_val:
                    inc_val, inc_x = val, x
                continue

            rel = self.relax(node)
            if rel.status == "infeasible":
                continue
            node.bound = max(node.bound, rel.bound)
            if rel.status == "optimal":
                xc = np.clip(rel.x, lo, hi)
                for v in self.int_vars:
                    xc[v] = np.clip(np.rint(xc[v]), lo[v], hi[v])
                cand = float(self.sigma * eval_model_many(model, xc[None, :])[0])
                if cand < inc_val:
                    inc_val, inc_x = cand, xc
            margin = cfg.gap_tol * max(1.0, abs(inc_val))
            if node.bound >= inc_val - margin:
                continue

            for child in self.branch(node, rel if rel.status == "optimal" else None):
                child.bound = max(child.bound, node.bound, self.interval_bound(child))
                if child.bound >= inc_val - margin:
                    continue
                heapq.heappush(heap, (child.bound, -child.depth, counter, child))
                counter += 1
        else:
            glb = inc_val  # tree exhausted: the incumbent is exact

        if status == "incomplete" and heap:
            glb = min(glb, min(e[0] for e in heap))
        glb = min(glb, inc_val)

        x_star = inc_x.copy()
        for v in self.int_vars:
            x_star[v] = round(x_star[v])
        value = self.sigma * inc_val
        bound_ext = self.sigma * glb
        gap = abs(inc_val - glb) / max(1.0, abs(inc_val))
        return Solution(
            x=x_star,
            value=value,
            sense=self.sense,
            bound=bound_ext,
            gap=gap,
            status=status,
            nodes=nodes,
            lp_iterations=self.lp_iterations,
            millis=(time.perf_counter() - t0) * 1000.0,
        )


def solve(model: TitlMarsModel, sense: str, cfg: SolverConfig | None = None) -> Solution:
    """Globally optimize a model over its box with a certified gap."""
    return BranchAndBound(model, sense, cfg).solve()


def solve_file(path, sense: str, cfg: SolverConfig | None = None) -> tuple[Solution, str]:
    """Solve a model document from disk; returns the Solution and its text form."""
    from pathlib import Path

    from .model import parse_model

    model = parse_model(Path(path).read_text())
    sol = solve(model, sense, cfg)
    return sol, format_solution(sol)


def format_solution(sol: Solution) -> str:
    """Structured text form of a Solution (one field per line)."""
    lines = [
        f"sense: {sol.sense}",
        f"status: {sol.status}",
        f"value: {sol.value:.12g}",
        f"bound: {sol.bound:.12g}",
        f"gap: {sol.gap:.3e}",
        "x*: " + " ".join(f"{v:.12g}" for v in np.asarray(sol.x).ravel()),
        f"nodes: {sol.nodes}",
        f"lp_iterations: {sol.lp_iterations}",
        f"millis: {sol.millis:.1f}",
    ]
    return "\n".join(lines) + "\n"
