"""Multi-index and grid enumeration."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from taylornet import (
    DEFAULT_SAFETY_CAP,
    GridIndex,
    InfeasibleError,
    MultiIndex,
    enumerate_grid,
    enumerate_multi_indices,
    grid_centers,
    grid_size,
    monomial_eval,
    multi_factorial,
    multi_index_count,
    safety_cap,
)
from taylornet.indexing import check_feasible


class TestMultiIndices:
    def test_counts_match_binomial(self):
        for d in range(1, 5):
            for n in range(1, 6):
                got = list(enumerate_multi_indices(d, n))
                assert len(got) == multi_index_count(d, n) == math.comb(n - 1 + d, d)

    def test_orders_strictly_below_n(self):
        for ix in enumerate_multi_indices(3, 4):
            assert 0 <= ix.order() <= 3

    def test_graded_and_unique(self):
        got = [tuple(ix) for ix in enumerate_multi_indices(3, 4)]
        orders = [sum(t) for t in got]
        assert orders == sorted(orders)
        assert len(set(got)) == len(got)

    def test_d2_prefix(self):
        got = [tuple(ix) for ix in enumerate_multi_indices(2, 3)]
        assert got == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]

    def test_d1_sequence(self):
        assert [tuple(ix) for ix in enumerate_multi_indices(1, 4)] == [(0,), (1,), (2,), (3,)]

    def test_multi_index_is_frozen(self):
        ix = MultiIndex((2, 1))
        assert ix.order() == 3
        assert len(ix) == 2
        assert ix[0] == 2
        with pytest.raises(AttributeError):
            ix.exponents = (0, 0)

    def test_multi_factorial(self):
        assert multi_factorial((0, 0)) == 1
        assert multi_factorial((2, 3)) == 12
        assert multi_factorial((1, 1, 4)) == 24
        assert multi_factorial(MultiIndex((3,))) == 6

    def test_monomial_eval_scalar_and_batch(self):
        x = np.array([0.5, 0.25])
        c = np.array([0.25, 0.25])
        assert monomial_eval(x, c, (1, 0)) == pytest.approx(0.25)
        assert monomial_eval(x, c, (2, 1)) == pytest.approx(0.0625 * 0.0)
        X = np.array([[0.5, 0.25], [1.0, 1.0]])
        got = monomial_eval(X, c, (1, 1))
        assert_allclose(got, [(0.25) * 0.0, 0.75 * 0.75])

    def test_monomial_eval_dimension_mismatch(self):
        with pytest.raises(ValueError):
            monomial_eval(np.zeros(3), np.zeros(3), (1, 0))


class TestGrid:
    def test_grid_size(self):
        assert grid_size(4, 1) == 5
        assert grid_size(4, 3) == 125

    def test_enumeration_is_lexicographic(self):
        got = [m.coords for m in enumerate_grid(2, 2)]
        assert got == [
            (0, 0), (0, 1), (0, 2),
            (1, 0), (1, 1), (1, 2),
            (2, 0), (2, 1), (2, 2),
        ]

    def test_centers_track_enumeration(self):
        N, d = 3, 2
        centers = grid_centers(N, d)
        assert centers.shape == (grid_size(N, d), d)
        for row, m in zip(centers, enumerate_grid(N, d)):
            assert_allclose(row, np.asarray(m.coords) / N)

    def test_grid_index_center(self):
        m = GridIndex((1, 3), 4)
        assert_allclose(m.center(), [0.25, 0.75])

    def test_grid_index_validation(self):
        with pytest.raises(ValueError):
            GridIndex((5,), 4)
        with pytest.raises(ValueError):
            GridIndex((-1, 0), 4)


class TestSafetyCap:
    def test_default(self):
        assert safety_cap() == DEFAULT_SAFETY_CAP

    def test_env_override(self, monkeypatch):
        monkeypatch.setenv("TAYLORNET_SAFETY_CAP", "1234")
        assert safety_cap() == 1234

    def test_check_feasible_raises_with_estimate(self, monkeypatch):
        monkeypatch.setenv("TAYLORNET_SAFETY_CAP", "100")
        with pytest.raises(InfeasibleError) as exc:
            check_feasible(101, what="unit test")
        assert exc.value.estimate == 101
        assert exc.value.cap == 100
        assert "unit test" in str(exc.value)
        check_feasible(100, what="unit test")  # at the cap is fine
