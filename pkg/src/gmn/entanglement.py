"""Bipartite entanglement monotones of pure multiqubit states.

Logarithms are base 2 throughout.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from gmn.qstate import StateVector, build_named_state

EIG_TOL = 1e-12

MONOTONES = ("concurrence", "negativity", "log_negativity", "entanglement_entropy", "renyi_entropy")

# Published two-decimal values, per state and monotone.
PUBLISHED = {
    "1v2": {
        "GHZ3": (1.0, 0.5, 1.0, 1.0, 1.0),
        "W3": (0.94, 0.47, 0.96, 0.92, 0.96),
        "PSI_STAR_3": (0.56, 0.28, 0.64, 0.42, 0.64),
    },
    "2v2": {
        "GHZ4": (1.0, 0.5, 1.0, 1.0, 1.0),
        "W4": (1.0, 0.43, 0.89, 1.0, 1.0),
        "PSI_STAR_4": (0.39, 0.17, 0.43, 0.24, 0.48),
    },
}

SPLIT_STATES = {"1v2": ("GHZ3", "W3", "PSI_STAR_3"), "2v2": ("GHZ4", "W4", "PSI_STAR_4")}


@dataclass(frozen=True)
class Bipartition:
    """Cut of the parties into ``side_a`` and its complement (0-based indices)."""

    num_parties: int
    side_a: tuple

    def __post_init__(self):
        side = tuple(sorted(set(int(i) for i in self.side_a)))
        if not side or len(side) >= self.num_parties:
            raise ValueError("side_a must be a nonempty proper subset of the parties")
        if side[0] < 0 or side[-1] >= self.num_parties:
            raise ValueError(f"party index out of range for {self.num_parties} parties")
        object.__setattr__(self, "side_a", side)

    @property
    def side_b(self):
        return tuple(i for i in range(self.num_parties) if i not in self.side_a)

    @classmethod
    def from_split(cls, split, num_parties=None):
        """``"1v2"`` puts party 0 alone on side A; ``"2v2"`` splits the first two from the rest."""
        try:
            k, rest = (int(t) for t in split.lower().split("v"))
        except ValueError:
            raise ValueError(f"bad split {split!r}; expected e.g. '1v2'") from None
        n = k + rest if num_parties is None else num_parties
        if k + rest != n:
            raise ValueError(f"split {split!r} does not cover {n} parties")
        return cls(n, tuple(range(k)))

    def swapped(self):
        return Bipartition(self.num_parties, self.side_b)


def _check(state: StateVector, bipartition: Bipartition):
    if bipartition.num_parties != state.num_parties:
        raise ValueError("bipartition and state have different party counts")


def _schmidt_matrix(state, bipartition):
    _check(state, bipartition)
    t = state.tensor()
    t = np.transpose(t, bipartition.side_a + bipartition.side_b)
    da = math.prod(state.local_dims[i] for i in bipartition.side_a)
    return t.reshape(da, -1)


def reduced_density(state: StateVector, bipartition: Bipartition):
    """Partial trace over side B, as a matrix on side A."""
    m = _schmidt_matrix(state, bipartition)
    rho = m @ m.conj().T
    return 0.5 * (rho + rho.conj().T)


def _spectrum(state, bipartition):
    """Eigenvalues of the reduced state from Schmidt coefficients (accurate near zero)."""
    s = np.linalg.svd(_schmidt_matrix(state, bipartition), compute_uv=False)
    return np.clip(s ** 2, 0.0, 1.0)


def concurrence_pure(state, bipartition):
    # 2(1 - Tr rho^2) written as pair products to avoid cancellation near product states
    lam = _spectrum(state, bipartition)
    pairs = float(np.sum(np.triu(np.outer(lam, lam), 1)))
    return math.sqrt(4.0 * pairs)


def partial_transpose(state, bipartition):
    """Density matrix of the state with side B transposed, ordered (A, B)."""
    m = _schmidt_matrix(state, bipartition)
    da, db = m.shape
    rho = np.einsum("ij,kl->ijkl", m, m.conj())  # rho[a,b,a',b']
    return rho.transpose(0, 3, 2, 1).reshape(da * db, da * db)


def trace_norm_pt(state, bipartition):
    ev = np.linalg.eigvalsh(partial_transpose(state, bipartition))
    return float(np.sum(np.abs(ev)))


def negativity(state, bipartition):
    return max(0.0, (trace_norm_pt(state, bipartition) - 1.0) / 2.0)


def log_negativity(state, bipartition):
    return max(0.0, math.log2(trace_norm_pt(state, bipartition)))


def entanglement_entropy(state, bipartition):
    ev = _spectrum(state, bipartition)
    ev = ev[ev > EIG_TOL]
    return max(0.0, float(-np.sum(ev * np.log2(ev))))


def renyi_entropy(state, bipartition, order=0.5):
    if order <= 0 or order == 1:
        raise ValueError("Renyi order must be positive and different from 1")
    ev = _spectrum(state, bipartition)
    ev = ev[ev > EIG_TOL]
    return max(0.0, float(math.log2(np.sum(ev ** order)) / (1.0 - order)))


@dataclass(frozen=True)
class MonotoneRow:
    state: str
    concurrence: float
    negativity: float
    log_negativity: float
    entanglement_entropy: float
    renyi_entropy: float

    def values(self):
        return tuple(getattr(self, m) for m in MONOTONES)

    def rounded(self, digits=2):
        return tuple(round(v, digits) for v in self.values())


def monotone_row(name, state, bipartition, renyi_order=0.5):
    return MonotoneRow(
        state=name,
        concurrence=concurrence_pure(state, bipartition),
        negativity=negativity(state, bipartition),
        log_negativity=log_negativity(state, bipartition),
        entanglement_entropy=entanglement_entropy(state, bipartition),
        renyi_entropy=renyi_entropy(state, bipartition, renyi_order),
    )


def monotone_table(states, bipartition, renyi_order=0.5):
    """One row per entry of ``states``, given as names or ``(name, StateVector)`` pairs."""
    rows = []
    for item in states:
        name, st = (item, build_named_state(item)) if isinstance(item, str) else item
        rows.append(monotone_row(name, st, bipartition, renyi_order))
    return rows


def split_table(split, renyi_order=0.5):
    states = SPLIT_STATES[split]
    bip = Bipartition.from_split(split)
    return monotone_table(states, bip, renyi_order)


def table_csv(rows, split=None, digits=6):
    """Monotones as rows and states as columns, each with published value and delta.

    Published values are only attached for the built-in splits and renyi order 1/2;
    other cells get empty ``published_value``/``delta``.
    """
    ref = PUBLISHED.get(split, {}) if split else {}
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["monotone"]
    for r in rows:
        header += [r.state, f"{r.state}_published_value", f"{r.state}_delta"]
    w.writerow(header)
    for k, m in enumerate(MONOTONES):
        line = [m]
        for r in rows:
            v = getattr(r, m)
            line.append(f"{v:.{digits}f}")
            if r.state in ref:
                pv = ref[r.state][k]
                line += [f"{pv:.2f}", f"{round(v - pv, digits) + 0.0:+.{digits}f}"]
            else:
                line += ["", ""]
        w.writerow(line)
    return buf.getvalue()


def compare_published(rows, split):
    """Per-cell ``(state, monotone, value, published, matches_after_rounding)``."""
    ref = PUBLISHED[split]
    out = []
    for r in rows:
        if r.state not in ref:
            continue
        for k, m in enumerate(MONOTONES):
            v = getattr(r, m)
            out.append((r.state, m, v, ref[r.state][k], round(v, 2) == ref[r.state][k]))
    return out
