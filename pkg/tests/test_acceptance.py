"""Acceptance suite.

Each test carries a ``criterion`` marker; the terminal summary prints one
PASS/FAIL line per criterion.  Reference values are closed forms re-derived
by the grid oracles in ``errbound.harness.oracles``.
"""

import math
import time
from pathlib import Path

import numpy as np
import pytest

from errbound import cones, geometry
from errbound.bounds import alpha_bc, certify, check_eqfinal, robinson_alpha
from errbound.cones import delta
from errbound.duality import (HOLDS, VIOLATED, fplus_conjugate, grid_witness_search, lemma1_sweep,
                              lemma6_sweep, scalar_excess, vector_excess)
from errbound.errors import AllInfinite
from errbound.functions import AffineMap, Quadratic, Scalarized, conjugate
from errbound.harness.instance import InstanceSpec, Sampling, canonical
from errbound.harness.oracles import oracle_conjugate
from errbound.harness.scenario import run_scenario
from errbound.harness.validation import empirical_alpha, plateau_study, solution_set

SQ2 = math.sqrt(2.0)
INSTANCES = Path(__file__).resolve().parent.parent / "instances"
SEED = 20240611


# ------------------------------------------------------------ populations

def _random_quadratic(rng):
    m = int(rng.integers(1, 3))
    rank = int(rng.integers(1, m + 1))
    B = rng.uniform(-1.5, 1.5, (m, rank))
    A = B @ B.T + (0.3 * np.eye(m) if rank == m else 0.0)
    return Quadratic(A, rng.uniform(-1, 1, m), float(rng.uniform(-1, 2)))


def _conjugate_population():
    """I1, I2, I4 and 20 random PSD quadratics, each with 50 dual points."""
    rng = np.random.default_rng(SEED)
    out = []
    for f in (canonical("I1").function, canonical("I2").function, canonical("I4").function):
        Y = rng.uniform(-1.5, 1.5, (50, f.m))
        if f.m == 2 and not f.is_positive_definite:
            Y[:35, 1] = 0.0                     # mostly inside dom f* for the slab
        out.append((f, Y))
    for _ in range(20):
        f = _random_quadratic(rng)
        Y = rng.uniform(-2, 2, (50, f.m))
        # half the points in b + range(A), where f* is finite
        Y[:25] = f.b + rng.uniform(-1, 1, (25, f.m)) @ f.A.entries
        out.append((f, Y))
    return out


POPULATION = _conjugate_population()


def _agree(a, b, tol):
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= tol


def _plus_conjugate(f, y):
    try:
        return fplus_conjugate(f, y).value
    except AllInfinite:
        return math.inf


def _random_polyhedral_instance(rng, index):
    """Bounded system M x + q in -K with a known interior point x_c."""
    while True:
        m = int(rng.integers(1, 4))
        k = int(rng.integers(m + 1, 6))
        M = rng.standard_normal((k, m))
        if index % 2:
            K = cones.Orthant(k)
            slack = rng.uniform(0.2, 2.0, k)
        else:
            C = np.eye(k) + np.triu(rng.uniform(0, 0.5, (k, k)), 1)
            K = cones.PolyhedralH(C)
            slack = np.linalg.solve(C, rng.uniform(0.2, 2.0, k))
        center = rng.uniform(-1, 1, m)
        g = AffineMap(M, -M @ center - slack)
        if geometry.is_bounded(geometry.LevelSet(Scalarized(g, K), center)):
            return InstanceSpec(f"random-{index}", "vector", map=g, cone=K, slater_hint=center,
                                sampling=Sampling(100.0, 100_000, index))


# ------------------------------------------------------------ criteria

@pytest.mark.criterion(1, "closed-form conjugate matches the grid oracle")
def test_criterion_1_conjugates():
    start = time.perf_counter()
    worst = 0.0
    for f, Y in POPULATION:
        for y in Y:
            exact, oracle = conjugate(f, y), oracle_conjugate(f, y)
            assert _agree(exact, oracle, 1e-3), (f, y, exact, oracle)
            if math.isfinite(exact):
                worst = max(worst, abs(exact - oracle))
    elapsed = time.perf_counter() - start
    print(f"criterion 1: max |closed form - oracle| = {worst:.2e} in {elapsed:.1f} s")
    assert elapsed <= 60.0


@pytest.mark.criterion(2, "plus-part conjugate through the multiplier interval matches the grid oracle")
def test_criterion_2_plus_part_identity():
    worst = 0.0
    for f, Y in POPULATION:
        for y in Y:
            dual, oracle = _plus_conjugate(f, y), oracle_conjugate(f, y, plus=True)
            assert _agree(dual, oracle, 1e-3), (f, y, dual, oracle)
            if math.isfinite(dual):
                worst = max(worst, abs(dual - oracle))
    print(f"criterion 2: max |dual - oracle| = {worst:.2e}")


@pytest.mark.criterion(3, "certified constant is never beaten by sampling")
@pytest.mark.slow
def test_criterion_3_soundness():
    start = time.perf_counter()
    rng = np.random.default_rng(SEED)
    instances = [canonical(n) for n in ("I1", "I2", "I3", "I5")]
    instances += [_random_polyhedral_instance(rng, i) for i in range(50)]
    violations, worst = [], 0.0
    for i, inst in enumerate(instances):
        cert = certify(inst).certificate
        assert cert is not None, inst.name
        rep = empirical_alpha(inst, 100.0, 100_000, i, certificate_alpha=cert.alpha)
        worst = max(worst, rep.empirical_alpha / cert.alpha)
        if rep.empirical_alpha > cert.alpha:
            violations.append((inst.name, rep.empirical_alpha, cert.alpha))
    elapsed = time.perf_counter() - start
    print(f"criterion 3: {len(instances)} instances, worst empirical/certified = {worst:.4f}, {elapsed:.1f} s")
    assert not violations
    assert elapsed <= 300.0


@pytest.mark.criterion(4, "certified and empirical constants on the canonical instances")
@pytest.mark.parametrize("name,alpha,empirical,tol", [
    ("I1", 2.0, 1.0, 1e-6),
    ("I3", 2.0, 1.0, 1e-6),
    ("I5", 2 * SQ2, SQ2, 1e-4),
    ("I2", 2 * SQ2, None, None),
])
def test_criterion_4_certified_values(name, alpha, empirical, tol):
    inst = canonical(name)
    cert = certify(inst).certificate
    assert cert.status == "certified"
    assert cert.alpha == pytest.approx(alpha, rel=1e-9)
    rep = empirical_alpha(inst, certificate_alpha=cert.alpha)
    print(f"criterion 4: {name} alpha = {cert.alpha:.12g}, empirical = {rep.empirical_alpha:.12g}")
    if empirical is not None:
        assert abs(rep.empirical_alpha - empirical) <= tol
    assert rep.empirical_alpha <= cert.alpha


def _interior_points(rng, K, count):
    """Points of -int K drawn from the cone's definition."""
    if isinstance(K, cones.Orthant):
        return -rng.uniform(0.05, 3.0, (count, K.k))
    if isinstance(K, cones.SecondOrder):
        U = rng.uniform(-2, 2, (count, K.k - 1))
        return -np.hstack([np.linalg.norm(U, axis=1)[:, None] + rng.uniform(0.05, 2.0, (count, 1)), U])
    Y = rng.uniform(-3, 3, (20 * count, K.k))
    Y = Y[np.all(-Y @ K.rows.T > 0.05, axis=1)]
    return Y[:count]


@pytest.mark.criterion(5, "complement distance equals the largest inclusion radius; sharpened constant is smaller")
def test_criterion_5_eqfinal():
    rng = np.random.default_rng(SEED)
    wedge = cones.PolyhedralH([[1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 1.0]])
    variants = [(cones.Orthant(3), 34), (cones.SecondOrder(3), 33), (wedge, 33)]
    gaps = []
    for K, count in variants:
        for y0 in _interior_points(rng, K, count):
            eq = check_eqfinal(AffineMap(np.zeros((K.k, 1)), y0), K, [0.0])
            gaps.append(eq.gap)
    assert len(gaps) == 100
    print(f"criterion 5: max gap over 100 interior points = {max(gaps):.2e}")
    assert max(gaps) <= 1e-6

    systems = [(canonical("I3").map, canonical("I3").cone),
               (canonical("I5").map, canonical("I5").cone),
               (AffineMap([[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]], [-1.0, -1.0, -1.0]),
                cones.PolyhedralH([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.5, 0.0, 1.0]]))]
    for g, K in systems:
        x0 = np.zeros(g.m)
        cert = alpha_bc(g, K, x0)
        for d in np.linspace(cert.margin / 20, cert.margin, 20):
            assert cert.alpha <= robinson_alpha(g, K, x0, d, cert.diam) * (1 + 1e-12)


@pytest.mark.criterion(6, "dual-ball sweeps hold at the certified constant and fail at half the empirical one")
@pytest.mark.parametrize("name", ["I1", "I2", "I3", "I4", "I5"])
def test_criterion_6_sweeps_hold(name):
    inst = canonical(name)
    res = certify(inst)
    if res.certificate is not None:
        alpha = res.certificate.alpha
    else:
        # the unbounded slab has no certificate; its sharp constant is 1/sqrt 2 in closed form
        assert name == "I4"
        alpha = 1 / SQ2
    S = solution_set(inst, res.hypotheses.slater.point)
    if inst.kind == "scalar":
        rep = lemma1_sweep(inst.function, S, alpha, 10_000, seed=0)
    else:
        rep = lemma6_sweep(inst.map, inst.cone, S, alpha, 10_000, seed=0)
    print(f"criterion 6: {name} at alpha {alpha:.6g}: {rep.verdict}, max violation {rep.max_violation:.2e}")
    assert rep.verdict == HOLDS and rep.max_violation <= 1e-6


@pytest.mark.criterion(6, "dual-ball sweeps hold at the certified constant and fail at half the empirical one")
@pytest.mark.parametrize("name", ["I1", "I3"])
def test_criterion_6_sweeps_violated(name):
    inst = canonical(name)
    best = empirical_alpha(inst).empirical_alpha
    alpha = 0.5 * best
    S = solution_set(inst)
    if inst.kind == "scalar":
        rep = lemma1_sweep(inst.function, S, alpha, 10_000, seed=0)
        excess = scalar_excess(inst.function, S)
    else:
        rep = lemma6_sweep(inst.map, inst.cone, S, alpha, 10_000, seed=0)
        excess = vector_excess(inst.map, inst.cone, S)
    assert rep.verdict == VIOLATED
    y1, e1 = grid_witness_search(excess, inst.m, 1.0 / alpha)
    y2, e2 = grid_witness_search(excess, inst.m, 1.0 / alpha)
    print(f"criterion 6: {name} at alpha {alpha:.6g}: witness y = {y1.tolist()}, excess {e1:.3g}")
    assert e1 > 1e-6 and np.array_equal(y1, y2) and e1 == e2


@pytest.mark.criterion(7, "empirical constant on the unbounded slab plateaus")
def test_criterion_7_plateau():
    rep = plateau_study(canonical("I4"), [10.0, 1e2, 1e3, 1e4])
    values = [v for _, v in rep.plateau_trace]
    print(f"criterion 7: trace {values}")
    assert all(v is not None for v in values)
    assert all(a <= b for a, b in zip(values, values[1:]))
    assert values[-1] / values[-2] <= 1.01


@pytest.mark.criterion(8, "oriented distance of g(x) scalarizes the conic constraint")
@pytest.mark.parametrize("name", ["I3", "I5"])
def test_criterion_8_scalarization(name):
    inst = canonical(name)
    X = np.random.default_rng(SEED).uniform(-3, 3, (10_000, 1))
    Y = inst.map(X)
    D = delta(inst.cone, Y)
    members = np.abs(X[:, 0]) <= 1.0              # Q = [-1, 1] for both instances
    assert np.array_equal(D <= 0, members)
    # closed-form distance of g(x) to -K outside Q
    # I3 violates one orthant row by |x| - 1; I5 sits at distance (|x| - 1)/sqrt 2 from -SOC
    excess = np.abs(X[:, 0]) - 1.0
    closed = excess if name == "I3" else excess / SQ2
    outside = ~members
    assert np.max(np.abs(D[outside] - closed[outside])) <= 1e-9
    assert np.max(np.abs(D[outside] - inst.cone.dist_minus(Y[outside]))) <= 1e-9


CONE_VARIANTS = [cones.Orthant(2), cones.Orthant(3), cones.SecondOrder(2), cones.SecondOrder(3),
                 cones.PolyhedralH([[1.0, 0.0], [1.0, 1.0]])]


def _cone_points(K, rng, n):
    return -_interior_points(rng, K, n)


@pytest.mark.criterion(9, "oriented distance: level set, interior strictness, monotonicity along -K, convexity")
@pytest.mark.parametrize("K", CONE_VARIANTS, ids=repr)
def test_criterion_9_oriented_distance(K):
    rng = np.random.default_rng(SEED)
    Y = rng.uniform(-3, 3, (1000, K.k))
    assert np.array_equal(delta(K, Y) <= 0, np.asarray(K.in_minus(Y)))
    interior = -_cone_points(K, rng, 1000)
    assert len(interior) == 1000 and np.all(delta(K, interior) < 0)
    steps = _cone_points(K, rng, 1000)
    assert np.all(delta(K, Y - steps) <= delta(K, Y) + 1e-10)
    Z = rng.uniform(-3, 3, (1000, K.k))
    t = rng.uniform(0, 1, (1000, 1))
    assert np.all(delta(K, t * Y + (1 - t) * Z) <= t[:, 0] * delta(K, Y) + (1 - t[:, 0]) * delta(K, Z) + 1e-10)


@pytest.mark.xfail(strict=True, reason="moving along +K leaves -K, so the oriented distance grows")
def test_criterion_9_plus_cone_direction_is_false():
    K = cones.Orthant(2)
    assert delta(K, np.array([1.0, 1.0])) <= delta(K, np.zeros(2)) + 1e-10


@pytest.mark.criterion(10, "scenario reports are byte-identical across worker counts")
def test_criterion_10_determinism(tmp_path):
    code1, _ = run_scenario(INSTANCES / "i3.json", workers=1, output=tmp_path / "one.json")
    code4, _ = run_scenario(INSTANCES / "i3.json", workers=4, output=tmp_path / "four.json")
    assert code1 == code4 == 0
    assert (tmp_path / "one.json").read_bytes() == (tmp_path / "four.json").read_bytes()
