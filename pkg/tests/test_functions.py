import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from errbound import cones
from errbound.errors import DimensionMismatch, InvalidSpec, TooLarge, Unsupported
from errbound.functions import (AffineMap, MaxAffine, Quadratic, Scalarized, conjugate, eval,
                                function_from_dict, lambda_scaled_conjugate, plus_part, subgradient,
                                subgradient_descent)
from errbound.harness.oracles import oracle_conjugate
from errbound.numerics import INF

from strategies import psd_matrices, vectors

ABS = MaxAffine([([1.0], 1.0), ([-1.0], 1.0)])
HALF_SQUARE = Quadratic([[1.0]], [0.0], 1.0)
ELLIPSE = Quadratic(np.diag([1.0, 4.0]), [0.0, 0.0], 1.0)
LORENTZ = Scalarized(AffineMap([[0.0], [1.0]], [-1.0, 0.0]), cones.SecondOrder(2))


class TestEval:
    def test_quadratic(self):
        assert eval(HALF_SQUARE, [2.0]) == 1.0

    def test_max_affine(self):
        assert eval(ABS, [0.0]) == -1.0

    def test_scalarized(self):
        assert eval(LORENTZ, [3.0]) == pytest.approx(math.sqrt(2.0), abs=1e-12)

    def test_batched(self):
        assert np.allclose(ABS.eval(np.array([[0.0], [3.0]])), [-1.0, 2.0])

    def test_dimension(self):
        with pytest.raises(DimensionMismatch):
            eval(ELLIPSE, [1.0])

    def test_plus_part(self):
        assert plus_part(ABS, [0.0]) == 0.0
        assert plus_part(ABS, [3.0]) == 2.0
        assert plus_part(ELLIPSE, [0.0, 0.0]) == 0.0


class TestConstruction:
    def test_rejects_indefinite(self):
        with pytest.raises(InvalidSpec):
            Quadratic([[1.0, 0.0], [0.0, -1.0]], [0.0, 0.0], 0.0)

    def test_rejects_empty_rows(self):
        with pytest.raises(InvalidSpec):
            MaxAffine([])

    def test_round_trip(self):
        for f in (ABS, ELLIPSE, LORENTZ):
            g = function_from_dict(f.to_dict())
            x = np.array([0.3] * f.m)
            assert g.eval(x) == f.eval(x)


class TestConjugate:
    def test_quadratic(self):
        assert conjugate(HALF_SQUARE, [1.0]) == pytest.approx(1.5)

    def test_quadratic_outside_domain(self):
        assert conjugate(Quadratic(np.diag([1.0, 0.0]), [0.0, 0.0], 0.0), [0.0, 1.0]) == INF

    def test_max_affine(self):
        assert conjugate(ABS, [0.5]) == pytest.approx(1.0)
        assert conjugate(ABS, [2.0]) == INF

    def test_scalarized_unsupported(self):
        with pytest.raises(Unsupported):
            conjugate(LORENTZ, [0.0])

    def test_row_limit(self):
        big = MaxAffine([([float(i)], 0.0) for i in range(13)])
        with pytest.raises(TooLarge):
            conjugate(big, [1.0])

    @pytest.mark.parametrize("f,y", [(HALF_SQUARE, [1.0]), (HALF_SQUARE, [0.0]), (ABS, [0.5]),
                                     (ELLIPSE, [1.0, -0.5])])
    def test_matches_grid_oracle(self, f, y):
        assert conjugate(f, y) == pytest.approx(oracle_conjugate(f, y), abs=1e-3)

    @given(st.data())
    def test_young_fenchel(self, data):
        m = data.draw(st.integers(1, 2))
        f = Quadratic(data.draw(psd_matrices(m)), data.draw(vectors(m)), data.draw(st.floats(-3, 3)))
        x, y = data.draw(vectors(m)), data.draw(vectors(m))
        fy = conjugate(f, y)
        assert fy + f.eval(x) >= y @ x - 1e-8 * (1 + abs(y @ x))

    @given(vectors(1, st.floats(-1, 1)), vectors(1, st.floats(-1, 1)))
    def test_midpoint_convexity(self, y1, y2):
        mid = conjugate(ABS, 0.5 * (y1 + y2))
        assert mid <= 0.5 * (conjugate(ABS, y1) + conjugate(ABS, y2)) + 1e-12

    def test_biconjugate(self, rng):
        # f**(x) = sup_y <x, y> - f*(y) over a grid of slopes recovers f on [-3, 3]
        ys = np.linspace(-20, 20, 40_001)
        fstar = 0.5 * ys ** 2 + 1.0
        for x in rng.uniform(-3, 3, 20):
            assert np.max(x * ys - fstar) == pytest.approx(HALF_SQUARE.eval(np.array([x])), abs=1e-5)


class TestScaledConjugate:
    def test_positive_multiplier(self):
        assert lambda_scaled_conjugate(HALF_SQUARE, 2.0, [2.0]) == pytest.approx(3.0)

    def test_zero_multiplier(self):
        assert lambda_scaled_conjugate(ELLIPSE, 0.0, [0.0, 0.0]) == 0.0
        assert lambda_scaled_conjugate(ELLIPSE, 0.0, [0.0, 1.0]) == INF

    def test_negative(self):
        with pytest.raises(ValueError):
            lambda_scaled_conjugate(ABS, -1.0, [0.0])


class TestSubgradient:
    def test_max_affine(self):
        assert subgradient(ABS, [2.0]).tolist() == [1.0]
        assert subgradient(ABS, [0.0]).tolist() == [1.0]  # lowest index on ties

    def test_quadratic(self):
        assert subgradient(ELLIPSE, [1.0, 1.0]).tolist() == [1.0, 4.0]

    @given(vectors(1), vectors(1))
    def test_subgradient_inequality(self, x, z):
        for f in (ABS, HALF_SQUARE, LORENTZ):
            s = subgradient(f, x)
            assert f.eval(z) >= f.eval(x) + s @ (z - x) - 1e-9 * (1 + abs(f.eval(x)))

    def test_descent_reaches_minimum(self):
        x, v = subgradient_descent(ABS, np.array([5.0]))
        assert v == pytest.approx(-1.0, abs=1e-9)
        x, v = subgradient_descent(ELLIPSE, np.array([3.0, -2.0]))
        assert v == pytest.approx(-1.0, abs=1e-8)
