import itertools
import json
import math

import numpy as np
import pytest

from gmn.correlations import correlation_tensor
from gmn.paradox import score
from gmn.qstate import S_STAR_3, MeasurementBasis, StateVector, build_named_state, random_state
from gmn.selftest import (
    NotFactorizableError,
    apply_isometries,
    block_projectors,
    block_tensor,
    certify,
    embed_blocks,
    swap_isometry,
    swap_isometry_matrix,
)

RIGHT = [MeasurementBasis(math.pi / 2)] * 3


@pytest.fixture
def psi_star():
    return build_named_state("PSI_STAR_3")


class TestEmbedding:
    def test_single_block(self, psi_star):
        chi = embed_blocks([1.0], psi_star)
        assert chi.local_dims == (2, 2, 2)
        np.testing.assert_allclose(chi.state.amplitudes, psi_star.amplitudes)

    def test_two_blocks(self, psi_star):
        chi = embed_blocks([0.5, 0.5], psi_star)
        assert chi.local_dims == (4, 4, 4)
        assert np.linalg.norm(chi.state.amplitudes) == pytest.approx(1.0, abs=1e-12)

    def test_block_weights(self, psi_star):
        chi = embed_blocks([0.25, 0.75], psi_star)
        w = chi.block_weights()
        assert w[0, 0, 0] == pytest.approx(0.25, abs=1e-12)
        assert w[1, 1, 1] == pytest.approx(0.75, abs=1e-12)
        assert w.sum() == pytest.approx(1.0, abs=1e-12)

    def test_layout(self, psi_star):
        # amplitude of block m at local index 2m + x on every party
        chi = embed_blocks([0.25, 0.75], psi_star).state.tensor()
        for x in itertools.product((0, 1), repeat=3):
            idx = tuple(2 + xi for xi in x)
            assert chi[idx] == pytest.approx(math.sqrt(0.75) * psi_star.tensor()[x])

    def test_off_diagonal_weights(self, psi_star):
        w = np.zeros((2, 3, 1))
        w[0, 0, 0], w[1, 2, 0] = 0.4, 0.6
        chi = embed_blocks(w, psi_star)
        assert chi.local_dims == (4, 6, 2)
        np.testing.assert_allclose(chi.block_weights(), w, atol=1e-12)

    @pytest.mark.parametrize("weights", [[0.5, 0.6], [-0.1, 1.1], []])
    def test_invalid_weights(self, psi_star, weights):
        with pytest.raises(ValueError):
            embed_blocks(weights, psi_star)

    def test_needs_qubits(self, rng):
        with pytest.raises(ValueError):
            embed_blocks([1.0], random_state(3, rng, local_dims=(3, 2, 2)))


class TestIsometry:
    @pytest.mark.parametrize("d", [2, 4, 6])
    def test_is_isometry(self, d):
        phi = swap_isometry_matrix(d)
        np.testing.assert_allclose(phi.T @ phi, np.eye(d), atol=1e-12)

    def test_maps_basis(self):
        phi = swap_isometry_matrix(4)
        # |3>|0> -> |2>|1>
        e = np.zeros(4)
        e[3] = 1
        out = (phi @ e).reshape(4, 2)
        assert out[2, 1] == 1.0 and out.sum() == 1.0

    def test_odd_dimension(self):
        with pytest.raises(ValueError):
            swap_isometry_matrix(3)

    @pytest.mark.parametrize("weights", [[1.0], [0.5, 0.5], [0.25, 0.75], [0.1, 0.2, 0.7]])
    def test_extracts_psi_star(self, psi_star, weights):
        ext = swap_isometry(embed_blocks(weights, psi_star))
        assert ext.fidelity(psi_star) >= 1 - 1e-9
        assert np.linalg.norm(ext.junk.amplitudes) == pytest.approx(1.0, abs=1e-10)
        assert ext.residual < 1e-8

    def test_junk_form(self, psi_star):
        ext = swap_isometry(embed_blocks([0.5, 0.5], psi_star))
        junk = ext.junk.tensor()
        expect = np.zeros((4, 4, 4))
        expect[0, 0, 0] = expect[2, 2, 2] = math.sqrt(0.5)
        phase = junk[0, 0, 0] / abs(junk[0, 0, 0])
        np.testing.assert_allclose(junk / phase, expect, atol=1e-12)

    def test_output_preserves_norm(self, rng):
        chi = embed_blocks([0.3, 0.7], random_state(3, rng))
        assert np.linalg.norm(apply_isometries(chi)) == pytest.approx(1.0, abs=1e-12)

    def test_ghz_extracted(self):
        ext = swap_isometry(embed_blocks([1.0], build_named_state("GHZ3")))
        assert ext.fidelity(build_named_state("GHZ3")) == pytest.approx(1.0, abs=1e-12)
        assert ext.fidelity(build_named_state("PSI_STAR_3")) == pytest.approx(0.569842, abs=1e-6)

    def test_non_factorizable(self, rng):
        # different states in different blocks entangle junk with the qubits
        a, b = build_named_state("GHZ3"), build_named_state("W3")
        chi_a, chi_b = embed_blocks([1.0, 0.0], a), embed_blocks([0.0, 1.0], b)
        mixed = StateVector.from_amplitudes(chi_a.state.amplitudes + chi_b.state.amplitudes, (4, 4, 4))
        from gmn.selftest import BlockState
        with pytest.raises(NotFactorizableError):
            swap_isometry(BlockState(mixed, (2, 2, 2)))


class TestBlockMeasurements:
    def test_projectors_complete(self):
        p = block_projectors(MeasurementBasis(1.2), 3)
        for s in (0, 1):
            np.testing.assert_allclose(p[s, 0] + p[s, 1], np.eye(6), atol=1e-14)

    @pytest.mark.parametrize("weights", [[1.0], [0.5, 0.5], [0.25, 0.75]])
    def test_score_linear_in_weights(self, psi_star, weights):
        t = block_tensor(embed_blocks(weights, psi_star), RIGHT)
        assert score(t).score == pytest.approx(sum(weights) * S_STAR_3, abs=1e-14)

    def test_tensor_matches_qubit_tensor(self, psi_star):
        t = block_tensor(embed_blocks([0.5, 0.5], psi_star), RIGHT)
        np.testing.assert_allclose(t.probabilities, correlation_tensor(psi_star, RIGHT).probabilities, atol=1e-14)


class TestCertify:
    @pytest.mark.parametrize("weights", [[1.0], [0.5, 0.5]])
    def test_optimal_passes(self, psi_star, weights):
        chi = embed_blocks(weights, psi_star)
        rep = certify(block_tensor(chi, RIGHT), chi, tol=1e-6)
        assert rep.passed

    def test_ghz_fails(self):
        ghz = build_named_state("GHZ3")
        chi = embed_blocks([1.0], ghz)
        rep = certify(correlation_tensor(ghz, RIGHT), chi, tol=1e-6)
        assert not rep.passed
        assert not rep.residuals_ok
        assert not rep.fidelity_ok
        # the raw score is large; only the constraints expose it
        assert rep.score == pytest.approx(0.5)

    def test_report_json(self, psi_star):
        chi = embed_blocks([1.0], psi_star)
        d = certify(block_tensor(chi, RIGHT), chi).to_dict()
        json.dumps(d)
        assert d["passed"] is True
        assert set(d) >= {"score", "residuals", "fidelity", "score_ok", "residuals_ok", "fidelity_ok"}
