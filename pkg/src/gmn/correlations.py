"""Born-rule correlation tensors, marginals and no-signaling checks."""
from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from gmn.qstate import FORMAT_TAG, MeasurementBasis, StateVector, _check_format

CLAMP_TOL = 1e-12
SUM_TOL = 1e-10


class InconsistentTensorError(ValueError):
    """Probabilities outside float noise of [0, 1] or unnormalized."""


@dataclass(frozen=True)
class CorrelationTensor:
    """P(x_1..x_N | s_1..s_N) stored as an array of shape ``(2,)*N + outcomes``."""

    num_parties: int
    outcomes: tuple
    probabilities: np.ndarray = field(repr=False)

    def __post_init__(self):
        n = int(self.num_parties)
        outs = tuple(int(d) for d in self.outcomes)
        probs = np.array(self.probabilities, dtype=float)
        if len(outs) != n or probs.shape != (2,) * n + outs:
            raise ValueError(f"probability array shape {probs.shape} does not match "
                             f"{(2,) * n + outs}")
        if probs.min() < -CLAMP_TOL or probs.max() > 1.0 + CLAMP_TOL:
            raise InconsistentTensorError(
                f"entries outside [0, 1] beyond round-off: min {probs.min()!r}, max {probs.max()!r}")
        probs = np.clip(probs, 0.0, 1.0)
        sums = probs.reshape((2 ** n, -1)).sum(axis=1)
        if np.max(np.abs(sums - 1.0)) > SUM_TOL:
            raise InconsistentTensorError(f"outcome probabilities do not sum to 1 (worst {sums.max()!r})")
        probs.setflags(write=False)
        object.__setattr__(self, "num_parties", n)
        object.__setattr__(self, "outcomes", outs)
        object.__setattr__(self, "probabilities", probs)

    def __getitem__(self, key):
        settings, outs = key
        return float(self.probabilities[tuple(settings) + tuple(outs)])

    def flat(self):
        return self.probabilities.reshape(-1)

    def to_dict(self):
        return {
            "format": FORMAT_TAG,
            "type": "CorrelationTensor",
            "num_parties": self.num_parties,
            "outcomes": list(self.outcomes),
            "probabilities": [float(p) for p in self.flat()],
        }

    @classmethod
    def from_dict(cls, data):
        _check_format(data, "CorrelationTensor")
        n = int(data["num_parties"])
        outs = tuple(data["outcomes"])
        probs = np.asarray(data["probabilities"], dtype=float).reshape((2,) * n + outs)
        return cls(n, outs, probs)

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["settings", "outcomes", "probability"])
        sep = "" if max(self.outcomes) <= 10 else "."
        for idx in np.ndindex(self.probabilities.shape):
            s, x = idx[:self.num_parties], idx[self.num_parties:]
            writer.writerow(["".join(map(str, s)), sep.join(map(str, x)),
                             repr(float(self.probabilities[idx]))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text):
        rows = list(csv.DictReader(io.StringIO(text)))
        if not rows:
            raise ValueError("empty tensor CSV")
        n = len(rows[0]["settings"])
        parsed = []
        for row in rows:
            s = tuple(int(ch) for ch in row["settings"])
            o = row["outcomes"]
            x = tuple(int(t) for t in (o.split(".") if "." in o else o))
            parsed.append((s, x, float(row["probability"])))
        outs = tuple(max(p[1][i] for p in parsed) + 1 for i in range(n))
        probs = np.zeros((2,) * n + outs)
        for s, x, p in parsed:
            probs[s + x] = p
        return cls(n, outs, probs)


def born_probabilities(amplitudes, local_dims, projectors):
    """Joint probabilities ``||(Pi_{x1|s1} (x) ... (x) Pi_{xN|sN}) psi||^2``.

    ``projectors[i]`` has shape ``(2, d_out, dim_i, dim_i)``. Returns an array of
    shape ``(2,)*N + (d_out_1, ..., d_out_N)``.
    """
    n = len(local_dims)
    t = np.asarray(amplitudes, dtype=complex).reshape(local_dims)
    # after processing party i the leading axes are (s_1, x_1, ..., s_i, x_i)
    for i, proj in enumerate(projectors):
        proj = np.asarray(proj, dtype=complex)
        t = np.tensordot(proj, t, axes=([3], [2 * i]))
        # new axes: (s_i, x_i, out_i, prior axes...); restore ordering
        t = np.moveaxis(t, (0, 1, 2), (2 * i, 2 * i + 1, 2 * i + 2))
        t = np.moveaxis(t, 2 * i + 2, -1)
    # remaining trailing axes are the N projected local outputs
    probs = np.sum(np.abs(t) ** 2, axis=tuple(range(2 * n, 3 * n)))
    order = [2 * i for i in range(n)] + [2 * i + 1 for i in range(n)]
    return np.transpose(probs, order)


def correlation_tensor(state: StateVector, bases) -> CorrelationTensor:
    if len(bases) != state.num_parties:
        raise ValueError(f"need {state.num_parties} measurement bases, got {len(bases)}")
    if any(d != 2 for d in state.local_dims):
        raise ValueError("correlation_tensor expects qubit parties; use born_probabilities for block measurements")
    projs = [b.projectors() if isinstance(b, MeasurementBasis) else np.asarray(b) for b in bases]
    probs = born_probabilities(state.amplitudes, state.local_dims, projs)
    return CorrelationTensor(state.num_parties, (2,) * state.num_parties, probs)


def _normalize_context(tensor, parties, context):
    n = tensor.num_parties
    complement = [i for i in range(n) if i not in parties]
    if context is None:
        context = {}
    elif not isinstance(context, dict):
        context = dict(zip(complement, context))
    overlap = set(context) & set(parties)
    if overlap:
        raise ValueError(f"context assigns settings to marginal parties {sorted(overlap)}")
    missing = [i for i in complement if i not in context]
    if missing:
        raise ValueError(f"no context setting for parties {missing}")
    return complement, context


def marginal(tensor: CorrelationTensor, parties, settings, context=None):
    """Distribution of the outcomes of ``parties`` at ``settings``.

    ``context`` maps every remaining party to its setting (a dict, or a sequence
    ordered like the complement).
    """
    parties = tuple(parties)
    if not parties or len(set(parties)) != len(parties):
        raise ValueError("parties must be a nonempty set of distinct indices")
    if len(settings) != len(parties):
        raise ValueError("one setting per marginal party required")
    complement, context = _normalize_context(tensor, parties, context)
    n = tensor.num_parties
    full = [0] * n
    for p, s in zip(parties, settings):
        full[p] = s
    for p in complement:
        full[p] = context[p]
    slab = tensor.probabilities[tuple(full)]
    summed = slab.sum(axis=tuple(complement)) if complement else slab
    # axes remaining are the marginal parties in ascending order
    order = np.argsort(np.argsort(parties))
    return np.transpose(summed, order) if len(parties) > 1 else summed


@dataclass(frozen=True)
class NoSignalingReport:
    max_violation: float
    worst_case: tuple

    def ok(self, tol):
        return self.max_violation <= tol

    def to_dict(self):
        return {"max_violation": self.max_violation, "worst_case": list(self.worst_case)}


def check_no_signaling(tensor: CorrelationTensor, tol=1e-12) -> NoSignalingReport:
    """Largest change of any marginal under a change of the other parties' settings."""
    n = tensor.num_parties
    worst, where = 0.0, ()
    for k in range(1, n):
        for parties in itertools.combinations(range(n), k):
            complement = [i for i in range(n) if i not in parties]
            contexts = list(itertools.product((0, 1), repeat=len(complement)))
            for settings in itertools.product((0, 1), repeat=k):
                margs = [marginal(tensor, parties, settings, ctx) for ctx in contexts]
                for (ia, ma), (ib, mb) in itertools.combinations(enumerate(margs), 2):
                    v = float(np.max(np.abs(ma - mb)))
                    if v > worst:
                        worst, where = v, (parties, settings, contexts[ia], contexts[ib])
    return NoSignalingReport(worst, where)


def uniform_tensor(num_parties, outcomes=None) -> CorrelationTensor:
    outs = (2,) * num_parties if outcomes is None else tuple(outcomes)
    probs = np.full((2,) * num_parties + outs, 1.0 / math.prod(outs))
    return CorrelationTensor(num_parties, outs, probs)
