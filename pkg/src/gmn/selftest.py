"""Block embedding and SWAP-isometry extraction of the optimal state.

Local index ``2m + x`` stores qubit value ``x`` of block ``m``; the isometry maps
``|2m + x>|0>`` to ``|2m>|x>``, moving the qubit into a fresh ancilla.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from gmn.correlations import CorrelationTensor, born_probabilities
from gmn.paradox import score as paradox_score
from gmn.qstate import MeasurementBasis, StateVector, S_STAR_3, build_named_state

FACTOR_TOL = 1e-8


class NotFactorizableError(ValueError):
    """Isometry output is not a product of junk and extracted state."""


@dataclass(frozen=True)
class BlockState:
    """N-party state whose local spaces split into qubit blocks."""

    state: StateVector
    num_blocks: tuple

    @property
    def local_dims(self):
        return self.state.local_dims

    def block_weights(self):
        """Norms squared of every (m_1, ..., m_N) block, shape ``num_blocks``."""
        t = np.abs(self.state.tensor()) ** 2
        shape = []
        for b in self.num_blocks:
            shape += [b, 2]
        t = t.reshape(shape)
        return t.sum(axis=tuple(range(1, 2 * len(self.num_blocks), 2)))


def embed_blocks(block_weights, block_state: StateVector) -> BlockState:
    """Direct sum of ``sqrt(lambda) * block_state`` over the weighted blocks.

    A 1-D weight list puts block ``m`` on the diagonal ``(m, m, ..., m)``; an N-dim
    array gives the weight of every block combination.
    """
    n = block_state.num_parties
    if any(d != 2 for d in block_state.local_dims):
        raise ValueError("block_state must be an N-qubit state")
    w = np.asarray(block_weights, dtype=float)
    if w.ndim == 1:
        b = w.size
        full = np.zeros((b,) * n)
        for m in range(b):
            full[(m,) * n] = w[m]
        w = full
    elif w.ndim != n:
        raise ValueError(f"weights must be 1-D or {n}-dimensional")
    if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
        raise ValueError("block weights must be nonnegative and sum to 1")
    blocks = w.shape
    psi = block_state.tensor()
    out = np.zeros(sum(([b, 2] for b in blocks), []), dtype=complex)
    for idx in np.ndindex(*blocks):
        if w[idx] == 0:
            continue
        sl = []
        for m in idx:
            sl += [m, slice(None)]
        out[tuple(sl)] = math.sqrt(w[idx]) * psi
    dims = tuple(2 * b for b in blocks)
    return BlockState(StateVector(n, dims, out.reshape(-1)), blocks)


def swap_isometry_matrix(local_dim):
    """Matrix of the isometry restricted to ancilla |0>: shape ``(local_dim * 2, local_dim)``.

    Output index is ``system * 2 + ancilla``.
    """
    if local_dim % 2:
        raise ValueError("local dimension must be even")
    phi = np.zeros((local_dim * 2, local_dim))
    for k in range(local_dim):
        m, x = divmod(k, 2)
        phi[(2 * m) * 2 + x, k] = 1.0
    return phi


@dataclass(frozen=True)
class Extraction:
    junk: StateVector
    extracted: StateVector
    residual: float
    singular_values: np.ndarray = field(repr=False)

    def fidelity(self, target: StateVector):
        return min(1.0, float(abs(np.vdot(target.amplitudes, self.extracted.amplitudes)) ** 2))


def apply_isometries(chi: BlockState):
    """Apply the isometry on every party; returns the tensor with axes (systems..., ancillas...)."""
    n = chi.state.num_parties
    t = chi.state.tensor()
    for i, d in enumerate(chi.local_dims):
        phi = swap_isometry_matrix(d).reshape(d, 2, d)
        t = np.tensordot(phi, t, axes=([2], [i]))
        # axes now (sys_i, anc_i, ...rest); keep ancillas at the end
        t = np.moveaxis(t, (0, 1), (i, -1))
    # ancilla axes were appended in party order
    return t.reshape(math.prod(chi.local_dims), 2 ** n)


def swap_isometry(chi: BlockState, tol=FACTOR_TOL) -> Extraction:
    """Apply the per-party isometry and split the output into junk (x) extracted."""
    n = chi.state.num_parties
    mat = apply_isometries(chi)
    u, s, vh = np.linalg.svd(mat, full_matrices=False)
    residual = float(math.sqrt(max(0.0, 1.0 - s[0] ** 2)))
    if residual > tol:
        raise NotFactorizableError(f"isometry output is not a product state (residual {residual:.3e})")
    junk = u[:, 0]
    extracted = vh[0]
    # put the global phase on the junk so the extracted amplitudes are comparable
    k = int(np.argmax(np.abs(extracted)))
    ph = extracted[k] / abs(extracted[k])
    extracted = extracted / ph
    junk = junk * ph * s[0]
    junk_state = StateVector.from_amplitudes(junk, chi.local_dims)
    return Extraction(junk_state, StateVector.from_amplitudes(extracted, (2,) * n), residual, s)


def block_projectors(basis: MeasurementBasis, num_blocks):
    """Block-diagonal copies of a qubit measurement: shape (2, 2, 2b, 2b)."""
    p = basis.projectors()
    out = np.zeros((2, 2, 2 * num_blocks, 2 * num_blocks), dtype=complex)
    for m in range(num_blocks):
        out[:, :, 2 * m:2 * m + 2, 2 * m:2 * m + 2] = p
    return out


def block_tensor(chi: BlockState, bases) -> CorrelationTensor:
    projs = [block_projectors(b, nb) for b, nb in zip(bases, chi.num_blocks)]
    probs = born_probabilities(chi.state.amplitudes, chi.local_dims, projs)
    n = chi.state.num_parties
    return CorrelationTensor(n, (2,) * n, probs)


@dataclass(frozen=True)
class CertificationReport:
    score: float
    residuals: list
    fidelity: float
    extraction_residual: float
    score_ok: bool
    residuals_ok: bool
    fidelity_ok: bool
    target_score: float
    tol: float

    @property
    def passed(self):
        return self.score_ok and self.residuals_ok and self.fidelity_ok

    def to_dict(self):
        return {
            "score": self.score,
            "target_score": self.target_score,
            "residuals": [[k, v] for k, v in self.residuals],
            "fidelity": self.fidelity,
            "extraction_residual": self.extraction_residual,
            "score_ok": self.score_ok,
            "residuals_ok": self.residuals_ok,
            "fidelity_ok": self.fidelity_ok,
            "passed": self.passed,
            "tol": self.tol,
        }


def certify(tensor: CorrelationTensor, chi: BlockState, tol=1e-6, target=None,
            target_score=S_STAR_3) -> CertificationReport:
    """Pass iff the score reaches ``target_score - tol``, every residual is within ``tol``
    and the extracted state has fidelity at least ``1 - tol`` with ``target``."""
    target = build_named_state("PSI_STAR_3") if target is None else target
    rep = paradox_score(tensor)
    try:
        ext = swap_isometry(chi)
        fid, ext_res = ext.fidelity(target), ext.residual
    except NotFactorizableError as exc:
        fid, ext_res = 0.0, float(str(exc).rsplit(" ", 1)[-1].rstrip(")"))
    return CertificationReport(
        score=rep.score, residuals=rep.residuals, fidelity=fid, extraction_residual=ext_res,
        score_ok=rep.score >= target_score - tol, residuals_ok=rep.residual_max <= tol,
        fidelity_ok=fid >= 1.0 - tol, target_score=target_score, tol=tol,
    )
