"""Maximization of the paradox score and the epsilon-relaxed noise sweep."""
from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit

from gmn import kernels
from gmn.qstate import (
    FORMAT_TAG,
    ConstrainedFamilyParams,
    StateVector,
    build_constrained_state,
    build_named_state,
)

DEFAULT_RESTARTS = 64
PENALTY_SCHEDULE = tuple(10.0 ** k for k in range(1, 10))
RESIDUAL_TARGET = 1e-8
SWEEP_FEAS_TOL = 1e-9


def default_workers():
    try:
        return max(1, int(os.environ.get("GMN_THREADS", "1")))
    except ValueError:
        return 1


def _map(func, items, workers):
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(func, items))
    return [func(item) for item in items]


def _best(results):
    """Highest score, ties broken by lowest index."""
    best_i = 0
    for i, r in enumerate(results):
        if r[0] > results[best_i][0]:
            best_i = i
    return best_i


# -- closed-form family ----------------------------------------------------------------

def family_score_gradient(a, alphas, delta=0.0):
    """Score of the constrained family and its gradient in ``(a, alphas, delta)``."""
    return kernels.family_score(float(a), np.asarray(alphas, dtype=float), float(delta))


def family_a_max(alphas):
    return kernels.family_a_max(np.asarray(alphas, dtype=float))[0]


def _unpack_family(theta, n, fixed_a):
    # keep line searches away from alpha = 0 or pi, where a_max is 0/0
    v = np.clip(theta[1:n + 1], -12.0, 12.0)
    sig_v = expit(v)
    alphas = math.pi * sig_v
    m, dm = kernels.family_a_max(alphas)
    if fixed_a is None:
        sig_u = expit(theta[0])
        a = m * sig_u
    else:
        sig_u = None
        a = min(fixed_a, m)
    return a, alphas, theta[n + 1], sig_u, sig_v, m, dm


def _family_objective(theta, n, fixed_a):
    a, alphas, delta, sig_u, sig_v, m, dm = _unpack_family(theta, n, fixed_a)
    s, g = kernels.family_score(a, alphas, delta)
    dal_dv = math.pi * sig_v * (1.0 - sig_v)
    grad = np.empty(n + 2)
    if fixed_a is None:
        grad[0] = g[0] * m * sig_u * (1.0 - sig_u)
        grad[1:n + 1] = (g[0] * sig_u * dm + g[1:n + 1]) * dal_dv
    else:
        grad[0] = 0.0
        grad[1:n + 1] = g[1:n + 1] * dal_dv
    grad[n + 1] = g[n + 1]
    return -s, -grad


def _family_start(rng, n):
    u = rng.normal(-1.0, 1.5)
    p = rng.uniform(0.1, 0.9, n)
    v = np.log(p / (1.0 - p))
    return np.r_[u, v, rng.uniform(0.0, 2.0 * math.pi)]


@dataclass(frozen=True)
class OptimizationResult:
    kind: str
    best_params: object
    best_score: float
    residual_max: float
    restarts: int
    converged: bool
    seed: int
    best_state: StateVector = field(repr=False)
    alphas: tuple = ()
    extra: dict = field(default_factory=dict, repr=False)

    def to_dict(self):
        params = self.best_params.to_dict() if hasattr(self.best_params, "to_dict") else self.best_params
        return {
            "format": FORMAT_TAG,
            "type": "OptimizationResult",
            "kind": self.kind,
            "num_parties": self.best_state.num_parties,
            "best_score": self.best_score,
            "residual_max": self.residual_max,
            "restarts": self.restarts,
            "converged": self.converged,
            "seed": self.seed,
            "alphas": list(self.alphas),
            "best_params": params,
            "state": self.best_state.to_dict(),
            **self.extra,
        }


def maximize_constrained(n=3, restarts=DEFAULT_RESTARTS, seed=0, fixed_a=None,
                         initial_points=None, gtol=1e-12, workers=None) -> OptimizationResult:
    """Multi-start quasi-Newton ascent over ``(a, alphas, delta)`` of the constrained family.

    ``a`` is squashed into ``[0, a_max(alphas)]`` and each alpha into ``(0, pi)`` so the
    search is unconstrained; the measurement phases are gauged to zero.
    ``initial_points`` are extra starts given as ``(a, alphas, delta)`` triples and
    are tried before the random ones.
    """
    if n < 3:
        raise ValueError("the paradox is defined for N >= 3")
    rng = np.random.default_rng(seed)
    starts = []
    for a0, al0, d0 in initial_points or ():
        al0 = np.asarray(al0, dtype=float)
        m = family_a_max(al0)
        frac = min(max(a0 / m, 1e-12), 1.0 - 1e-12)
        starts.append(np.r_[math.log(frac / (1.0 - frac)), np.log(al0 / (math.pi - al0)), d0])
    starts += [_family_start(rng, n) for _ in range(restarts)]

    def run(x0):
        res = minimize(_family_objective, x0, args=(n, fixed_a), jac=True, method="L-BFGS-B",
                       options={"maxiter": 5000, "ftol": 1e-15, "gtol": gtol})
        return -res.fun, res.x, float(np.max(np.abs(res.jac)))

    results = _map(run, starts, workers or default_workers())
    i = _best(results)
    _, theta, gnorm = results[i]
    a, alphas, delta, *_ = _unpack_family(theta, n, fixed_a)
    params = ConstrainedFamilyParams(n, float(a), tuple(float(x) for x in alphas),
                                     math.remainder(float(delta), 2.0 * math.pi))
    state = build_constrained_state(params)
    score, res_max = _score_state(state, params.alphas)
    return OptimizationResult(
        kind="constrained", best_params=params, best_score=score, residual_max=res_max,
        restarts=len(starts), converged=bool(gnorm < 1e-6), seed=int(seed),
        best_state=state, alphas=params.alphas,
    )


def _score_state(state, alphas):
    z = state.amplitudes
    vals, _ = kernels.qubit_terms(z.real.copy(), z.imag.copy(), np.asarray(alphas, dtype=float))
    return float(vals[0] - vals[1]), float(np.max(vals[2:]))


# -- general qubit states ----------------------------------------------------------------

def _constraint_matrix(n, alphas):
    """Complex linear map whose kernel is the set of amplitude vectors with zero residuals."""
    dim = 1 << n
    rows = []
    for i in range(n):
        j = (i + 1) % n
        bi, bj = 1 << (n - 1 - i), 1 << (n - 1 - j)
        c, s = math.cos(alphas[i] / 2), math.sin(alphas[i] / 2)
        for x in range(dim):
            if x & bi or x & bj:
                continue
            row = np.zeros(dim)
            row[x] = c
            row[x | bi] = s
            rows.append(row)
    return np.array(rows)


def project_feasible(z, alphas):
    """Orthogonal projection of ``z`` onto the zero-residual subspace for ``alphas``."""
    n = len(alphas)
    g = _constraint_matrix(n, alphas)
    _, sv, vh = np.linalg.svd(g)
    rank = int(np.sum(sv > 1e-12 * sv[0]))
    basis = vh[rank:].T
    return basis @ (basis.T @ z)


def _general_objective(theta, n, weight):
    dim = 1 << n
    re, im, v = theta[:dim], theta[dim:2 * dim], theta[2 * dim:]
    sig = expit(v)
    alphas = math.pi * sig
    vals, jac = kernels.qubit_terms(re, im, alphas)
    f = -(vals[0] - vals[1]) + weight * np.sum(vals[2:])
    g = -(jac[0] - jac[1]) + weight * np.sum(jac[2:], axis=0)
    g[2 * dim:] *= math.pi * sig * (1.0 - sig)
    # fix the scale of z: the objective is invariant, this keeps |z| near 1
    nz = float(np.dot(theta[:2 * dim], theta[:2 * dim]))
    f += 0.5 * (nz - 1.0) ** 2
    g[:2 * dim] += 2.0 * (nz - 1.0) * theta[:2 * dim]
    return f, g


def maximize_general_qubit(n=3, restarts=DEFAULT_RESTARTS, seed=0, penalty=None,
                           schedule=PENALTY_SCHEDULE, residual_target=RESIDUAL_TARGET,
                           workers=None) -> OptimizationResult:
    """Maximize the score over all N-qubit pure states and gauge-fixed measurement angles.

    The residuals enter as a penalty whose weight runs through ``schedule`` until every
    residual is at most ``residual_target``; the returned state is then projected onto
    the exact zero-residual subspace. ``penalty=0`` drops the constraints entirely.
    """
    if n < 3:
        raise ValueError("the paradox is defined for N >= 3")
    dim = 1 << n
    rng = np.random.default_rng(seed)
    starts = [np.r_[rng.normal(size=2 * dim) / math.sqrt(2 * dim), rng.normal(0.0, 1.0, n)]
              for _ in range(restarts)]
    weights = (float(penalty),) if penalty is not None else tuple(schedule)

    def run(x0):
        theta = x0
        reached = False
        for w in weights:
            res = minimize(_general_objective, theta, args=(n, w), jac=True, method="L-BFGS-B",
                           options={"maxiter": 20000, "ftol": 1e-16, "gtol": 1e-13})
            theta = res.x
            vals, _ = kernels.qubit_terms(theta[:dim], theta[dim:2 * dim], math.pi * expit(theta[2 * dim:]))
            if w > 0 and np.max(vals[2:]) <= residual_target:
                reached = True
                break
        alphas = math.pi * expit(theta[2 * dim:])
        z = theta[:dim] + 1j * theta[dim:2 * dim]
        if penalty is None or penalty > 0:
            zp = project_feasible(z, alphas)
            if np.linalg.norm(zp) > 1e-8:
                z = zp
        z = z / np.linalg.norm(z)
        vals, _ = kernels.qubit_terms(z.real.copy(), z.imag.copy(), alphas)
        return float(vals[0] - vals[1]), z, alphas, float(np.max(vals[2:])), reached or weights == (0.0,)

    results = _map(run, starts, workers or default_workers())
    i = _best(results)
    score, z, alphas, res_max, reached = results[i]
    state = StateVector.from_amplitudes(z, (2,) * n)
    converged = bool(reached and (penalty == 0 or res_max <= residual_target))
    params = {"amplitudes": [[float(c.real), float(c.imag)] for c in state.amplitudes],
              "alphas": [float(x) for x in alphas]}
    return OptimizationResult(
        kind="general", best_params=params, best_score=score, residual_max=res_max,
        restarts=restarts, converged=converged, seed=int(seed), best_state=state,
        alphas=tuple(float(x) for x in alphas),
        extra={"penalty_schedule": list(weights)},
    )


# -- trace distance ------------------------------------------------------------------

def trace_distance(state_a, state_b, variant="state"):
    """Half the trace norm of the difference of two pure states.

    ``variant="state"`` gives ``sqrt(1 - |<a|b>|^2)``. ``variant="vector"`` is half the
    1-norm of the amplitude difference after aligning the global phase.
    """
    a = state_a.amplitudes if isinstance(state_a, StateVector) else np.asarray(state_a, dtype=complex)
    b = state_b.amplitudes if isinstance(state_b, StateVector) else np.asarray(state_b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    ov = np.vdot(a, b)
    if variant == "state":
        return float(math.sqrt(max(0.0, 1.0 - abs(ov) ** 2)))
    if variant == "vector":
        phase = ov / abs(ov) if abs(ov) > 0 else 1.0
        return float(0.5 * np.sum(np.abs(a - b / phase)))
    raise ValueError(f"unknown variant {variant!r}")


# -- epsilon sweep -----------------------------------------------------------------------

def _weights_of(n):
    return np.array([bin(x).count("1") for x in range(1 << n)])


def ansatz_amplitudes(coeffs, n=3):
    """Symmetric real ansatz: every basis string of Hamming weight k gets ``coeffs[k]``."""
    return np.asarray(coeffs, dtype=float)[_weights_of(n)]


@dataclass(frozen=True)
class SweepRecord:
    epsilon: float
    qubit_max: float
    local_bound: float
    coeffs: tuple
    alphas: tuple
    residual_max: float
    p_eps: float
    p_eps_psi_star: float
    p_eps_vector: float
    converged: bool

    @property
    def eps_pow_1_14(self):
        return self.epsilon ** (1.0 / 14.0)

    def state(self):
        return StateVector.from_amplitudes(ansatz_amplitudes(self.coeffs, len(self.alphas)))

    def to_dict(self):
        return {
            "epsilon": self.epsilon,
            "qubit_max": self.qubit_max,
            "local_bound": self.local_bound,
            "p_eps": self.p_eps,
            "p_eps_psi_star": self.p_eps_psi_star,
            "p_eps_vector": self.p_eps_vector,
            "eps_pow_1_14": self.eps_pow_1_14,
            "residual_max": self.residual_max,
            "coeffs": list(self.coeffs),
            "alphas": list(self.alphas),
            "converged": self.converged,
        }


def _ansatz_terms(x, n):
    k = n + 1
    w = _weights_of(n)
    coeffs, alphas = x[:k], x[k:]
    re = coeffs[w]
    vals, jac = kernels.qubit_terms(re, np.zeros_like(re), alphas)
    dim = 1 << n
    jc = np.zeros((vals.size, k))
    for wt in range(k):
        jc[:, wt] = jac[:, :dim][:, w == wt].sum(axis=1)
    return vals, np.c_[jc, jac[:, 2 * dim:]]


def _sweep_point(x0, eps, n):
    k = n + 1
    counts = np.bincount(_weights_of(n), minlength=k).astype(float)
    cache = {}

    def terms(x):
        key = x.tobytes()
        if key not in cache:
            cache.clear()
            cache[key] = _ansatz_terms(x, n)
        return cache[key]

    def obj(x):
        vals, jac = terms(x)
        return -(vals[0] - vals[1]), -(jac[0] - jac[1])

    cons = [
        {"type": "ineq", "fun": lambda x: eps - terms(x)[0][2:], "jac": lambda x: -terms(x)[1][2:]},
        {"type": "eq", "fun": lambda x: np.array([np.dot(counts, x[:k] ** 2) - 1.0]),
         "jac": lambda x: np.r_[2.0 * counts * x[:k], np.zeros(n)][None, :]},
    ]
    bounds = [(None, None)] * k + [(1e-6, math.pi - 1e-6)] * n
    with warnings.catch_warnings():
        # SLSQP clips trial points back into the angle bounds and says so
        warnings.simplefilter("ignore", RuntimeWarning)
        res = minimize(obj, x0, jac=True, method="SLSQP", bounds=bounds, constraints=cons,
                       options={"maxiter": 1000, "ftol": 1e-14})
    x = res.x.copy()
    x[:k] /= math.sqrt(np.dot(counts, x[:k] ** 2))
    vals, _ = _ansatz_terms(x, n)
    return float(vals[0] - vals[1]), x, float(np.max(vals[2:]))


def default_eps_grid():
    return [round(0.005 * k, 10) for k in range(25)]


def noise_sweep(eps_grid=None, restarts=16, seed=0, reference="argmax", workers=None):
    """Maximum three-qubit score under residuals ``<= epsilon`` for each grid value.

    Each epsilon reuses the previous argmax as a start, so the curve is nondecreasing.
    ``p_eps`` is the trace distance to ``reference``: ``"argmax"`` is the zero-noise
    maximizer found by the sweep itself, ``"psi_star"`` is the named state PSI_STAR_3.
    """
    n = 3
    grid = default_eps_grid() if eps_grid is None else [float(e) for e in eps_grid]
    if any(not 0.0 <= e < 1.0 / 3.0 for e in grid):
        raise ValueError("epsilon values must lie in [0, 1/3)")
    if reference not in ("argmax", "psi_star"):
        raise ValueError(f"unknown reference {reference!r}")
    order = np.argsort(grid, kind="stable")
    rng = np.random.default_rng(seed)
    k = n + 1

    exact = maximize_constrained(n, restarts=DEFAULT_RESTARTS, seed=seed, workers=workers)
    # the angles agree only to optimizer precision; average them so the state is exactly symmetric
    bp = exact.best_params
    sym = ConstrainedFamilyParams(n, bp.a, (float(np.mean(bp.alphas)),) * n, bp.delta)
    sym_state = build_constrained_state(sym)
    sym_score, sym_res = _score_state(sym_state, sym.alphas)
    z0 = sym_state.amplitudes
    # global phase: make the all-zero amplitude real positive, then read the ansatz coefficients
    z0 = (z0 * np.exp(-1j * np.angle(z0[0]))).real
    w = _weights_of(n)
    coeffs0 = np.array([z0[w == wt][0] for wt in range(k)])
    x_exact = np.r_[coeffs0, sym.alphas]
    psi_star = build_named_state("PSI_STAR_3")
    ref_state = StateVector.from_amplitudes(ansatz_amplitudes(coeffs0, n)) if reference == "argmax" else psi_star

    records = {}
    prev = (sym_score, x_exact, sym_res)
    for idx in order:
        eps = grid[idx]
        if eps == 0.0:
            best = (sym_score, x_exact, sym_res)
            ok = exact.converged
        else:
            starts = [prev[1]]
            for _ in range(restarts):
                c = rng.normal(size=k)
                starts.append(np.r_[c, rng.uniform(0.2, math.pi - 0.2, n)])
            results = _map(lambda x0: _sweep_point(x0, eps, n), starts, workers or default_workers())
            feas = [r for r in results if r[2] <= eps + SWEEP_FEAS_TOL]
            ok = bool(feas)
            best = feas[_best(feas)] if feas else prev
            if best[0] < prev[0]:
                best = prev
        prev = best
        score, x, res_max = best
        st = StateVector.from_amplitudes(ansatz_amplitudes(x[:k], n))
        records[idx] = SweepRecord(
            epsilon=eps, qubit_max=score, local_bound=3.0 * eps,
            coeffs=tuple(float(c) for c in x[:k]), alphas=tuple(float(a) for a in x[k:]),
            residual_max=res_max, p_eps=trace_distance(ref_state, st),
            p_eps_psi_star=trace_distance(psi_star, st),
            p_eps_vector=trace_distance(ref_state, st, variant="vector"), converged=ok,
        )
    return [records[i] for i in range(len(grid))]


SWEEP_COLUMNS = ("epsilon", "qubit_max", "local_bound", "p_eps", "eps_pow_1_14")


def sweep_csv(records):
    lines = [",".join(SWEEP_COLUMNS)]
    for r in records:
        lines.append(",".join(repr(float(getattr(r, c))) for c in SWEEP_COLUMNS))
    return "\n".join(lines) + "\n"
