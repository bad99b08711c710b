import math

import numpy as np
import pytest

from gmn.entanglement import (
    MONOTONES,
    PUBLISHED,
    Bipartition,
    compare_published,
    concurrence_pure,
    entanglement_entropy,
    log_negativity,
    monotone_table,
    negativity,
    partial_transpose,
    reduced_density,
    renyi_entropy,
    split_table,
    table_csv,
)
from gmn.qstate import build_named_state, random_product_state, random_state

A1 = Bipartition(3, (0,))


def schmidt_negativity(state, bip):
    ev = np.clip(np.linalg.eigvalsh(reduced_density(state, bip)), 0, None)
    s = np.sqrt(ev)
    return 0.5 * (s.sum() ** 2 - 1)


class TestBipartition:
    def test_complement(self):
        assert Bipartition(4, (2, 0)).side_b == (1, 3)

    @pytest.mark.parametrize("side", [(), (0, 1, 2), (3,)])
    def test_invalid(self, side):
        with pytest.raises(ValueError):
            Bipartition(3, side)

    def test_from_split(self):
        assert Bipartition.from_split("2v2") == Bipartition(4, (0, 1))
        with pytest.raises(ValueError):
            Bipartition.from_split("1v2", 4)
        with pytest.raises(ValueError):
            Bipartition.from_split("ab")


class TestReducedDensity:
    def test_ghz(self):
        np.testing.assert_allclose(reduced_density(build_named_state("GHZ3"), A1), np.eye(2) / 2, atol=1e-15)

    def test_w(self):
        np.testing.assert_allclose(reduced_density(build_named_state("W3"), A1), np.diag([2 / 3, 1 / 3]), atol=1e-15)

    def test_product_rank_one(self, rng):
        rho = reduced_density(random_product_state(3, rng), Bipartition(3, (0, 2)))
        ev = np.linalg.eigvalsh(rho)
        assert ev[-1] == pytest.approx(1.0, abs=1e-12)

    def test_properties(self, rng):
        for _ in range(20):
            s = random_state(4, rng)
            rho = reduced_density(s, Bipartition(4, tuple(rng.choice(4, 2, replace=False))))
            ev = np.linalg.eigvalsh(rho)
            np.testing.assert_allclose(rho, rho.conj().T, atol=1e-15)
            assert ev.min() >= -1e-12 and ev.max() <= 1 + 1e-12
            assert ev.sum() == pytest.approx(1.0, abs=1e-12)

    def test_party_mismatch(self):
        with pytest.raises(ValueError):
            reduced_density(build_named_state("GHZ4"), A1)


class TestMonotones:
    def test_ghz3(self):
        s = build_named_state("GHZ3")
        assert concurrence_pure(s, A1) == pytest.approx(1.0)
        assert negativity(s, A1) == pytest.approx(0.5)
        assert log_negativity(s, A1) == pytest.approx(1.0)
        assert entanglement_entropy(s, A1) == pytest.approx(1.0)
        for q in (0.5, 2.0, 3.0):
            assert renyi_entropy(s, A1, q) == pytest.approx(1.0)

    def test_w3(self):
        s = build_named_state("W3")
        assert concurrence_pure(s, A1) == pytest.approx(math.sqrt(8) / 3)
        assert negativity(s, A1) == pytest.approx(math.sqrt(2) / 3)
        assert entanglement_entropy(s, A1) == pytest.approx(0.9182958340544896)
        assert renyi_entropy(s, A1) == pytest.approx(0.958, abs=5e-4)
        assert renyi_entropy(s, A1, 2.0) == pytest.approx(0.848, abs=5e-4)

    def test_negativity_matches_schmidt(self, rng):
        for _ in range(20):
            s = random_state(4, rng)
            bip = Bipartition(4, (0, 1))
            assert negativity(s, bip) == pytest.approx(schmidt_negativity(s, bip), abs=1e-12)

    def test_partial_transpose_hermitian(self, rng):
        pt = partial_transpose(random_state(3, rng), A1)
        np.testing.assert_allclose(pt, pt.conj().T, atol=1e-15)
        assert np.trace(pt).real == pytest.approx(1.0)

    def test_product_zero(self, rng):
        for _ in range(10):
            s = random_product_state(3, rng)
            for side in ((0,), (1,), (0, 2)):
                bip = Bipartition(3, side)
                row = monotone_table([("p", s)], bip)[0]
                assert max(row.values()) <= 1e-10

    def test_schmidt_symmetry(self, rng):
        for _ in range(20):
            s = random_state(3, rng)
            bip = Bipartition(3, (1,))
            assert entanglement_entropy(s, bip) == pytest.approx(entanglement_entropy(s, bip.swapped()), abs=1e-10)

    def test_renyi_limit(self, rng):
        s = random_state(3, rng)
        h = entanglement_entropy(s, A1)
        for q in (1 - 1e-4, 1 + 1e-4):
            assert renyi_entropy(s, A1, q) == pytest.approx(h, abs=1e-3)

    @pytest.mark.parametrize("q", [0.0, 1.0, -1.0])
    def test_renyi_order(self, q):
        with pytest.raises(ValueError):
            renyi_entropy(build_named_state("W3"), A1, q)


class TestTables:
    def test_empty(self):
        assert monotone_table([], A1) == []

    def test_three_party_rounding(self):
        cells = compare_published(split_table("1v2"), "1v2")
        assert len(cells) == 15
        assert all(ok for *_, ok in cells)

    def test_ghz4_matches(self):
        cells = compare_published(split_table("2v2"), "2v2")
        assert all(ok for s, *_, ok in cells if s == "GHZ4")

    def test_w4_values(self):
        row = split_table("2v2")[1]
        assert row.negativity == pytest.approx(0.5)
        assert row.log_negativity == pytest.approx(1.0)
        assert row.entanglement_entropy == pytest.approx(1.0)

    def test_csv_layout(self):
        text = table_csv(split_table("1v2"), "1v2")
        lines = text.splitlines()
        assert lines[0].split(",")[:4] == ["monotone", "GHZ3", "GHZ3_published_value", "GHZ3_delta"]
        assert [ln.split(",")[0] for ln in lines[1:]] == list(MONOTONES)

    def test_reference_covers_all_cells(self):
        for split, states in PUBLISHED.items():
            assert all(len(v) == len(MONOTONES) for v in states.values())
