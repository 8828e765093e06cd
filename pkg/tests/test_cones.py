import math

import numpy as np
import pytest
from hypothesis import given

from errbound import cones
from errbound.cones import (BOUNDARY, INSIDE, OUTSIDE, Orthant, PolyhedralH, SecondOrder, delta,
                            delta_subgradient, dist_to_complement, dist_to_minus_cone, in_dual_cone,
                            in_minus_cone, oriented_distance)
from errbound.errors import DimensionMismatch, InvalidSpec

from strategies import vectors

SQ2 = math.sqrt(2.0)
ORTHANT = Orthant(2)
LORENTZ = SecondOrder(2)
LORENTZ3 = SecondOrder(3)
WEDGE = PolyhedralH([[1.0, 0.0], [1.0, 1.0]])
VARIANTS = [ORTHANT, LORENTZ, LORENTZ3, WEDGE, Orthant(3)]


def _cone_points(K, rng, n):
    """Random points of K built from the definition, not from projections."""
    if isinstance(K, Orthant):
        return rng.uniform(0, 3, (n, K.k))
    if isinstance(K, SecondOrder):
        U = rng.standard_normal((n, K.k - 1))
        return np.hstack([np.linalg.norm(U, axis=1)[:, None] + rng.uniform(0, 2, (n, 1)), U])
    Y = rng.uniform(-3, 3, (4 * n, K.k))
    return Y[np.all(Y @ K.rows.T >= 0, axis=1)][:n]


class TestMembership:
    def test_examples(self):
        assert in_minus_cone(ORTHANT, [-1.0, -2.0])
        assert in_minus_cone(LORENTZ, [-1.0, 0.0])
        assert not in_minus_cone(LORENTZ, [-1.0, 2.0])

    def test_dimension(self):
        with pytest.raises(DimensionMismatch):
            in_minus_cone(ORTHANT, [1.0, 2.0, 3.0])

    def test_polyhedral_needs_interior(self):
        with pytest.raises(InvalidSpec):
            PolyhedralH([[1.0, 0.0], [-1.0, 0.0]])

    def test_dual(self):
        assert in_dual_cone(ORTHANT, [1.0, 0.0])
        assert not in_dual_cone(LORENTZ, [1.0, 2.0])
        assert not in_dual_cone(ORTHANT, [-0.1, 1.0])
        assert in_dual_cone(WEDGE, [2.0, 1.0]) and not in_dual_cone(WEDGE, [0.0, 1.0])

    def test_from_dict(self):
        for K in VARIANTS:
            assert cones.cone_from_dict(K.to_dict()) == K


class TestDistances:
    def test_orthant(self):
        d, p = dist_to_minus_cone(ORTHANT, [1.0, -2.0])
        assert d == 1.0 and p.tolist() == [0.0, -2.0]

    def test_second_order(self):
        assert dist_to_minus_cone(LORENTZ, [-1.0, 3.0])[0] == pytest.approx(SQ2)

    def test_member(self):
        d, p = dist_to_minus_cone(LORENTZ, [-2.0, 1.0])
        assert d == 0.0 and p.tolist() == [-2.0, 1.0]

    def test_complement(self):
        assert dist_to_complement(ORTHANT, [-2.0, -3.0]) == 2.0
        assert dist_to_complement(LORENTZ, [-1.0, 0.0]) == pytest.approx(1 / SQ2)
        assert dist_to_complement(ORTHANT, [0.0, -1.0]) == 0.0

    def test_polyhedral_dykstra_agrees(self, rng):
        for y in rng.uniform(-3, 3, (50, 2)):
            exact = WEDGE.project_minus(y)
            alt = WEDGE.project_minus(y, method="dykstra")
            assert np.allclose(exact, alt, atol=1e-6)

    @pytest.mark.parametrize("K", VARIANTS, ids=repr)
    def test_projection_optimal(self, K, rng):
        Z = -_cone_points(K, rng, 1000)
        for y in rng.uniform(-3, 3, (20, K.k)):
            d, _ = dist_to_minus_cone(K, y)
            assert d <= np.min(np.linalg.norm(Z - y, axis=1)) + 1e-8

    @pytest.mark.parametrize("K", [ORTHANT, LORENTZ, WEDGE], ids=repr)
    def test_grid_oracle(self, K):
        axis = np.linspace(-4, 4, 801)
        G = np.stack(np.meshgrid(axis, axis, indexing="ij"), -1).reshape(-1, 2)
        inside = np.asarray(K.in_minus(G, 0.0))
        step = axis[1] - axis[0]
        for y in ([1.0, -2.0], [0.5, 0.5], [-1.0, -0.3], [-2.0, -1.5]):
            y = np.array(y)
            d_in = np.min(np.linalg.norm(G[inside] - y, axis=1))
            d_out = np.min(np.linalg.norm(G[~inside] - y, axis=1))
            assert dist_to_minus_cone(K, y)[0] == pytest.approx(d_in, abs=step * SQ2)
            if in_minus_cone(K, y):
                assert dist_to_complement(K, y) == pytest.approx(d_out, abs=step * SQ2)


class TestOrientedDistance:
    def test_examples(self):
        assert oriented_distance(ORTHANT, [1.0, -2.0]).value == 1.0
        v = oriented_distance(ORTHANT, [-2.0, -3.0])
        assert v.value == -2.0 and v.side == INSIDE
        b = oriented_distance(ORTHANT, [0.0, -1.0])
        assert b.value == 0.0 and b.side == BOUNDARY
        assert oriented_distance(ORTHANT, [1.0, 1.0]).side == OUTSIDE

    def test_witness(self):
        v = oriented_distance(LORENTZ, [-1.0, 0.0])
        assert np.linalg.norm(v.witness - np.array([-1.0, 0.0])) == pytest.approx(-v.value, abs=1e-8)
        assert in_minus_cone(LORENTZ, v.witness)

    def test_subgradients(self):
        assert delta_subgradient(ORTHANT, [1.0, -2.0]).tolist() == [1.0, 0.0]
        assert delta_subgradient(ORTHANT, [-2.0, -3.0]).tolist() == [1.0, 0.0]
        assert delta_subgradient(ORTHANT, [0.0, -1.0]).tolist() == [1.0, 0.0]

    @pytest.mark.parametrize("K", VARIANTS, ids=repr)
    def test_level_set_identity(self, K, rng):
        Y = rng.uniform(-3, 3, (1000, K.k))
        assert np.array_equal(delta(K, Y) <= 0, np.asarray(K.in_minus(Y)))

    @pytest.mark.parametrize("K", VARIANTS, ids=repr)
    def test_interior_strict(self, K, rng):
        Y = -_cone_points(K, rng, 1000)
        interior = np.asarray(K.dist_complement(Y)) > 1e-9
        assert np.all(delta(K, Y[interior]) < 0)

    @pytest.mark.parametrize("K", VARIANTS, ids=repr)
    def test_decreasing_along_minus_cone(self, K, rng):
        Y = rng.uniform(-3, 3, (1000, K.k))
        C = _cone_points(K, rng, 1000)[: len(Y)]
        Y = Y[: len(C)]
        assert np.all(delta(K, Y - C) <= delta(K, Y) + 1e-10)

    def test_literal_plus_cone_direction_fails(self):
        # moving by +k away from -K raises the oriented distance
        assert delta(ORTHANT, np.array([1.0, 1.0])) > delta(ORTHANT, np.zeros(2))

    @pytest.mark.parametrize("K", VARIANTS, ids=repr)
    def test_midpoint_convexity(self, K, rng):
        A, B = rng.uniform(-3, 3, (2, 1000, K.k))
        assert np.all(delta(K, 0.5 * (A + B)) <= 0.5 * (delta(K, A) + delta(K, B)) + 1e-10)

    @pytest.mark.parametrize("K", VARIANTS, ids=repr)
    def test_subgradient_inequality(self, K, rng):
        Y, Z = rng.uniform(-3, 3, (2, 200, K.k))
        for y, z in zip(Y, Z):
            s = delta_subgradient(K, y)
            assert delta(K, z) >= delta(K, y) + s @ (z - y) - 1e-9

    @given(vectors(3))
    def test_one_lipschitz(self, y):
        z = y + 0.1
        assert abs(float(delta(LORENTZ3, y) - delta(LORENTZ3, z))) <= np.linalg.norm(y - z) + 1e-12
