"""Paradox constraints, the S_N score, and LP membership certificates.

Constraint ``i`` (cyclic, party N+1 = party 1) is the marginal probability that
party i answers outcome r != last at setting 1 while party i+1 answers the first
outcome at setting 0. For binary outcomes that is ``P(++ | 1, 0)`` on the pair.
"""
from __future__ import annotations

import functools
import itertools
import string
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from gmn.correlations import CorrelationTensor, marginal

LP_EQ_TOL = 1e-9
GAP_TOL = 1e-7


class LPSolverError(RuntimeError):
    pass


def _party(i):
    return string.ascii_uppercase[i] if i < 26 else f"P{i + 1}"


@dataclass(frozen=True)
class ParadoxReport:
    residuals: list
    p: float
    q: float
    score: float
    epsilon: float = 0.0

    @property
    def residual_max(self):
        return max((v for _, v in self.residuals), default=0.0)

    def satisfied(self, tol=1e-10):
        return self.residual_max <= self.epsilon + tol

    def to_dict(self):
        return {
            "residuals": [[cid, v] for cid, v in self.residuals],
            "p": self.p,
            "q": self.q,
            "score": self.score,
            "epsilon": self.epsilon,
        }


def _constraint_cells(n, outcomes):
    """Yield ``(id, i, j, r)`` for every cyclic constraint."""
    for i in range(n):
        j = (i + 1) % n
        for r in range(outcomes[i] - 1):
            if outcomes[i] == 2:
                label = f"{_party(i)}{_party(j)}(++|{_party(i)}1{_party(j)}0)"
            else:
                label = f"{_party(i)}{_party(j)}({r + 1},1|{_party(i)}1{_party(j)}0)"
            yield label, i, j, r


def constraint_residuals(tensor: CorrelationTensor, strict=False):
    """List of ``(constraint id, probability)``.

    Other parties' settings are fixed to 0; with ``strict=True`` the largest value
    over every context is reported instead.
    """
    n = tensor.num_parties
    out = []
    for label, i, j, r in _constraint_cells(n, tensor.outcomes):
        others = [k for k in range(n) if k not in (i, j)]
        contexts = itertools.product((0, 1), repeat=len(others)) if strict else [(0,) * len(others)]
        val = 0.0
        for ctx in contexts:
            m = marginal(tensor, (i, j), (1, 0), dict(zip(others, ctx)))
            val = max(val, float(m[r, 0]))
        out.append((label, val))
    return out


def score(tensor: CorrelationTensor, strict=False, epsilon=0.0) -> ParadoxReport:
    n = tensor.num_parties
    p = float(tensor.probabilities[(0,) * n + (0,) * n])
    last = tuple(d - 1 for d in tensor.outcomes)
    q = float(tensor.probabilities[(1,) * n + last])
    return ParadoxReport(constraint_residuals(tensor, strict), p, q, p - q, float(epsilon))


# -- linear functionals on flattened binary tensors ---------------------------------

def score_functional(n):
    f = np.zeros((2,) * (2 * n))
    f[(0,) * (2 * n)] += 1.0
    f[(1,) * (2 * n)] -= 1.0
    return f.reshape(-1)


def residual_functionals(n):
    rows = []
    for _, i, j, _r in _constraint_cells(n, (2,) * n):
        f = np.zeros((2,) * (2 * n))
        s = [0] * n
        s[i] = 1
        idx = [slice(None)] * (2 * n)
        for k in range(n):
            idx[k] = s[k]
        idx[n + i] = 0
        idx[n + j] = 0
        f[tuple(idx)] = 1.0
        rows.append(f.reshape(-1))
    return np.array(rows)


# -- polytope vertices ---------------------------------------------------------------

def deterministic_party(outcome0, outcome1, d=2):
    """P(x | s) for a party answering ``outcome0`` at setting 0 and ``outcome1`` at 1."""
    m = np.zeros((2, d))
    m[0, outcome0] = 1.0
    m[1, outcome1] = 1.0
    return m


def _product_tensor(factors):
    """Tensor of shape (s_1..s_N, x_1..x_N) from per-party P(x|s) matrices."""
    n = len(factors)
    t = factors[0]
    for f in factors[1:]:
        t = np.einsum("...,ab->...ab", t, f)
    # axes are (s1, x1, s2, x2, ...)
    order = [2 * i for i in range(n)] + [2 * i + 1 for i in range(n)]
    return np.transpose(t, order)


@functools.lru_cache(maxsize=None)
def local_vertices(n):
    """Flattened deterministic-strategy vertices, shape ``(4**n, 4**n)`` (rows are vertices)."""
    strategies = [deterministic_party(a, b) for a in (0, 1) for b in (0, 1)]
    rows = [_product_tensor(list(combo)).reshape(-1)
            for combo in itertools.product(strategies, repeat=n)]
    out = np.array(rows)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class NSPolytopeVertexSet:
    """Vertices of the bipartite 2-setting 2-outcome no-signaling polytope.

    Each vertex is an array of shape (2, 2, 2, 2) indexed ``[s_A, s_B, x_A, x_B]``.
    """

    vertices: tuple
    kinds: tuple
    scenario: tuple = (2, 2, 2)

    def deterministic(self):
        return [v for v, k in zip(self.vertices, self.kinds) if k == "local"]

    def boxes(self):
        return [v for v, k in zip(self.vertices, self.kinds) if k == "pr"]


def pr_box(alpha=0, beta=0, gamma=0):
    """P(ab|xy) = 1/2 when a xor b = xy xor alpha*x xor beta*y xor gamma."""
    box = np.zeros((2, 2, 2, 2))
    for x, y, a, b in itertools.product((0, 1), repeat=4):
        if (a ^ b) == ((x & y) ^ (alpha & x) ^ (beta & y) ^ gamma):
            box[x, y, a, b] = 0.5
    return box


@functools.lru_cache(maxsize=None)
def ns_polytope_vertices() -> NSPolytopeVertexSet:
    verts, kinds = [], []
    strategies = [deterministic_party(a, b) for a in (0, 1) for b in (0, 1)]
    for fa, fb in itertools.product(strategies, repeat=2):
        verts.append(np.einsum("xa,yb->xyab", fa, fb))
        kinds.append("local")
    for alpha, beta, gamma in itertools.product((0, 1), repeat=3):
        verts.append(pr_box(alpha, beta, gamma))
        kinds.append("pr")
    for v in verts:
        v.setflags(write=False)
    return NSPolytopeVertexSet(tuple(verts), tuple(kinds))


def _embed_pair(pair_box, single, pair, n=3):
    """Tripartite tensor from a bipartite box on ``pair`` and a single-party P(x|s)."""
    i, j = pair
    (k,) = [m for m in range(n) if m not in pair]
    t = np.einsum("xyab,zc->xyzabc", pair_box, single)
    # current axis order (s_i, s_j, s_k, x_i, x_j, x_k) -> (s_0, s_1, s_2, x_0, x_1, x_2)
    src = [i, j, k]
    perm = [src.index(m) for m in range(n)]
    return np.transpose(t, perm + [p + n for p in perm])


@functools.lru_cache(maxsize=None)
def hybrid_vertices():
    """Flattened vertices of the tripartite "2 versus 1" NS-hybrid polytope (288 rows)."""
    ns = ns_polytope_vertices().vertices
    strategies = [deterministic_party(a, b) for a in (0, 1) for b in (0, 1)]
    rows, labels = [], []
    for pair in ((0, 1), (1, 2), (0, 2)):
        for vi, box in enumerate(ns):
            for si, single in enumerate(strategies):
                rows.append(_embed_pair(box, single, pair).reshape(-1))
                labels.append((pair, vi, si))
    out = np.array(rows)
    out.setflags(write=False)
    return out, tuple(labels)


# -- LP certificates ----------------------------------------------------------------

@dataclass(frozen=True)
class LPCertificate:
    feasible: bool
    polytope: str
    gap: float
    tolerance: float
    weights: np.ndarray = field(default=None, repr=False)
    separating_functional: np.ndarray = field(default=None, repr=False)
    functional_bound: float = None
    vertex_labels: tuple = field(default=None, repr=False)

    def to_dict(self):
        d = {
            "polytope": self.polytope,
            "feasible": self.feasible,
            "gap": self.gap,
            "tolerance": self.tolerance,
        }
        if self.feasible:
            nz = np.flatnonzero(self.weights > 1e-12)
            d["weights"] = {str(int(k)): float(self.weights[k]) for k in nz}
        else:
            d["separating_functional"] = [float(v) for v in self.separating_functional]
            d["functional_bound"] = self.functional_bound
        return d


def _check(res, what):
    if res.status != 0:
        raise LPSolverError(f"{what}: {res.message}")
    return res


def _membership(vertices, point, tol, name, labels=None):
    """Convex-hull membership via the l1 distance LP and its dual witness."""
    vertices = np.asarray(vertices, dtype=float)
    nv, m = vertices.shape
    # min sum(s+ + s-)  s.t.  V^T w + s+ - s- = P, sum w = 1
    c = np.r_[np.zeros(nv), np.ones(2 * m)]
    a_eq = np.block([
        [vertices.T, np.eye(m), -np.eye(m)],
        [np.ones((1, nv)), np.zeros((1, 2 * m))],
    ])
    b_eq = np.r_[point, 1.0]
    res = _check(linprog(c, A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs",
                         options={"primal_feasibility_tolerance": LP_EQ_TOL,
                                  "dual_feasibility_tolerance": LP_EQ_TOL}),
                 f"{name} distance LP")
    dist = float(res.fun)
    w = np.clip(res.x[:nv], 0.0, None)
    w = w / w.sum()
    if dist <= tol:
        return LPCertificate(True, name, dist, tol, weights=w, vertex_labels=labels)
    # max F.P - t  s.t.  V F - t <= 0, -1 <= F <= 1
    c = np.r_[-point, 1.0]
    a_ub = np.c_[vertices, -np.ones(nv)]
    bounds = [(-1.0, 1.0)] * m + [(None, None)]
    res = _check(linprog(c, A_ub=a_ub, b_ub=np.zeros(nv), bounds=bounds, method="highs"),
                 f"{name} witness LP")
    functional = res.x[:m]
    bound = float(np.max(vertices @ functional))
    gap = float(functional @ point - bound)
    if gap <= tol:
        # l1 distance and witness disagree only at solver precision; report as member
        return LPCertificate(True, name, gap, tol, weights=w, vertex_labels=labels)
    return LPCertificate(False, name, gap, tol, separating_functional=functional,
                         functional_bound=bound, vertex_labels=labels)


def _require_binary(tensor):
    if any(d != 2 for d in tensor.outcomes):
        raise ValueError("LP membership is implemented for binary outcomes")


def membership_local(tensor: CorrelationTensor, tol=GAP_TOL) -> LPCertificate:
    _require_binary(tensor)
    return _membership(local_vertices(tensor.num_parties), tensor.flat(), tol, "local")


def membership_hybrid(tensor: CorrelationTensor, tol=GAP_TOL) -> LPCertificate:
    _require_binary(tensor)
    if tensor.num_parties != 3:
        raise ValueError("hybrid membership is implemented for three parties")
    verts, labels = hybrid_vertices()
    return _membership(verts, tensor.flat(), tol, "hybrid", labels)


def local_max_lp(n=3, epsilon=0.0):
    """Largest score over the local polytope with every residual at most ``epsilon``."""
    if n < 2:
        raise ValueError("need at least two parties")
    if not 0.0 <= epsilon <= 1.0 / 3.0 + 1e-15:
        raise ValueError("epsilon must lie in [0, 1/3]")
    verts = local_vertices(n)
    obj = verts @ score_functional(n)
    res_rows = residual_functionals(n) @ verts.T
    res = _check(linprog(-obj, A_ub=res_rows, b_ub=np.full(res_rows.shape[0], epsilon),
                         A_eq=np.ones((1, verts.shape[0])), b_eq=[1.0], bounds=(0, None),
                         method="highs"),
                 "local bound LP")
    return float(-res.fun)


def tensor_from_vertex_weights(vertices, weights, n):
    flat = np.asarray(weights) @ np.asarray(vertices)
    return CorrelationTensor(n, (2,) * n, flat.reshape((2,) * (2 * n)))
