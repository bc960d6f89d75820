import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spectral_kway import generators as gen
from spectral_kway.errors import InsufficientMass, ValidationError
from spectral_kway.geometry import MetricView
from spectral_kway.partition import (
    RandomPartition,
    balance_groups,
    ball_carving,
    cell_diameters,
    group_cells_lemma,
    metric_ball_partition,
    padded_core,
    shifted_grid_partition,
)
from spectral_kway.spectral import eigenbasis


def cells_of(masses):
    masses = np.asarray(masses, dtype=float)
    cells = [np.array([i]) for i in range(masses.size)]
    return RandomPartition(cells, "ball-carving", 1.0, 0, masses, float(masses.sum()))


def on_sphere(rng, m, h):
    P = rng.standard_normal((m, h))
    return P / np.linalg.norm(P, axis=1, keepdims=True)


def test_balance_groups_trace():
    gp = balance_groups(cells_of([5, 4, 3, 2, 1]), 2)
    assert gp.members == [[0, 3, 4], [1, 2]]
    assert gp.masses.tolist() == [8.0, 7.0]
    assert [g.tolist() for g in gp.groups] == [[0, 3, 4], [1, 2]]


def test_balance_groups_round_robin_and_passthrough():
    gp = balance_groups(cells_of(np.ones(10)), 5)
    assert [len(m) for m in gp.members] == [2] * 5
    few = balance_groups(cells_of([3, 1, 2]), 5)
    assert sorted(len(m) for m in few.members) == [1, 1, 1] and len(few.groups) == 3
    with pytest.raises(ValidationError):
        balance_groups(cells_of([]), 2)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0.01, 10), min_size=1, max_size=30), st.integers(1, 8))
def test_balance_groups_preserves_mass(masses, kp):
    gp = balance_groups(cells_of(masses), kp)
    assert len(gp.groups) == min(len(masses), kp)
    assert gp.masses.sum() == pytest.approx(sum(masses))
    assert all(len(m) >= 1 for m in gp.members)
    assert sorted(np.concatenate(gp.groups).tolist()) == list(range(len(masses)))


def test_ball_carving_identical_points_and_antipodes(rng):
    same = np.tile([0.6, 0.8], (20, 1))
    assert ball_carving(same, 0.3, seed=1).m == 1
    angles = np.concatenate([rng.normal(0, 0.05, 15), rng.normal(math.pi, 0.05, 15)])
    pts = np.c_[np.cos(angles), np.sin(angles)]
    for seed in range(50):
        p = ball_carving(pts, 0.3, seed=seed)
        lab = p.labels(30)
        assert set(lab[:15]).isdisjoint(lab[15:])
        assert (lab >= 0).all()


def test_ball_carving_deterministic_and_covering(rng):
    P = on_sphere(rng, 300, 5)
    a = ball_carving(P, 0.4, seed=9, vertex_mass=np.ones(300))
    b = ball_carving(P, 0.4, seed=9, vertex_mass=np.ones(300))
    assert all(np.array_equal(x, y) for x, y in zip(a.cells, b.cells))
    assert sorted(np.concatenate(a.cells).tolist()) == list(range(300))
    assert np.all(cell_diameters(P, a) <= 0.8 + 1e-12)
    assert a.masses.sum() == pytest.approx(300)


def test_ball_carving_fallback_terminates(rng):
    P = on_sphere(rng, 50, 3)
    p = ball_carving(P, 0.05, seed=0, dead_draw_factor=0, batch=1)
    assert p.fallback_cells == p.m
    assert np.all(cell_diameters(P, p) <= 0.1 + 1e-12)
    with pytest.raises(ValidationError):
        ball_carving(P, 1.5, seed=0)


def test_ball_carving_empirical_lipschitz():
    rng = np.random.default_rng(0)
    h, R, N = 4, 0.5, 10_000
    P = on_sphere(rng, 200, h)
    D = np.linalg.norm(P[:, None] - P[None], axis=2)
    np.fill_diagonal(D, np.inf)
    nn = np.argsort(D, axis=1)[:, :3]
    a, b = np.repeat(np.arange(200), 3), nn.ravel()
    sep = np.zeros(a.size)
    for s in range(N):
        lab = ball_carving(P, R, seed=s).labels(200)
        sep += lab[a] != lab[b]
    L = (sep / N) * (2 * R) / D[a, b]
    c = L.max() / math.sqrt(h)
    print(f"fitted Lipschitz constant c = {c:.3f} (times sqrt(h))")
    assert c <= 2.0


def test_shifted_grid_diameter_and_determinism(rng):
    for h in (1, 2, 5):
        X = rng.uniform(-2, 2, size=(400, h))
        p = shifted_grid_partition(X, 0.7, seed=h, vertex_mass=np.ones(400))
        assert np.all(cell_diameters(X, p) < 0.7)
        q = shifted_grid_partition(X, 0.7, seed=h)
        assert all(np.array_equal(x, y) for x, y in zip(p.cells, q.cells))
        assert sorted(np.concatenate(p.cells).tolist()) == list(range(400))
    with pytest.raises(ValidationError):
        shifted_grid_partition(X, 0.0, seed=0)


def test_shifted_grid_padding_frequency():
    # a point is padded at radius r iff its 2h axis neighbours at distance r share its cube
    h, delta, Delta, N = 3, 0.2, 1.0, 10_000
    alpha = 4 * h**1.5 / delta
    r = Delta / alpha
    x = np.array([0.3, -0.1, 0.7])
    probes = np.vstack([x] + [x + s * r * e for e in np.eye(h) for s in (1, -1)])
    padded = np.array([shifted_grid_partition(probes, Delta, seed=s).m == 1 for s in range(N)])
    freq = padded.mean()
    se = math.sqrt(freq * (1 - freq) / N)
    assert freq >= 1 - delta - 3 * se


def test_shifted_grid_unit_square_single_cell():
    sq = np.array([[0, 0], [1, 0], [0, 1], [1, 1]], dtype=float)
    N = 2000
    single = np.mean([shifted_grid_partition(sq, 10.0, seed=s).m == 1 for s in range(N)])
    assert single >= 1 - 4 * math.sqrt(2) / (10 / math.sqrt(2))


def test_group_cells_lemma_examples():
    k = 4
    gp = group_cells_lemma(cells_of(np.ones(2 * k)), k, k)
    assert len(gp.groups) == k and all(len(m) == 1 for m in gp.members)
    assert np.all(gp.masses >= 2 * k / (2 * k))
    with pytest.raises(InsufficientMass):
        group_cells_lemma(cells_of([0.9, 0.05, 0.05]), 4, 3)
    with pytest.raises(ValidationError):
        group_cells_lemma(cells_of(np.ones(8)), 4, 1)


def test_group_cells_lemma_on_clique_embedding():
    g = gen.clique_union(4, 10, 0.05, ring=True)
    F = eigenbasis(g, 4).F
    mv = MetricView(F, g, mode="induced-path")
    vmass = g.degree * (F * F).sum(1)
    p = metric_ball_partition(mv, 0.5, seed=2, vertex_mass=vmass)
    gp = group_cells_lemma(p, 4, 3)
    total = vmass.sum()
    assert len(gp.groups) == 3
    assert np.all(gp.masses >= total / 8 * (1 - 1e-12))
    assert gp.counting_check
    flat = np.concatenate(gp.groups)
    assert flat.size == np.unique(flat).size


def test_metric_ball_partition_and_padded_core(rng):
    g = gen.planted_partition(3, 20, 0.4, 0.05, seed=1)[0]
    F = eigenbasis(g, 3).F
    mv = MetricView(F, g, mode="induced-path")
    p = metric_ball_partition(mv, 0.6, seed=5)
    D = mv.induced_all()
    for c in p.cells:
        assert D[np.ix_(c, c)].max() <= 0.6 + 1e-12
    core = padded_core(mv, p, 0.05)
    lab = p.labels(g.n)
    near = D <= 0.05
    for v in np.flatnonzero(core):
        assert np.all(lab[near[v]] == lab[v])
    assert np.array_equal(padded_core(mv, p, 0.0), lab >= 0)


def test_zero_vectors_excluded_from_metric_partition():
    g = gen.path(6)
    F = np.array([[1.0], [1.0], [0.0], [0.0], [-1.0], [-1.0]])
    p = metric_ball_partition(MetricView(F, g, mode="induced-path"), 0.5, seed=0)
    assert sorted(np.concatenate(p.cells).tolist()) == [0, 1, 4, 5]


def test_restrict_drops_empty_cells():
    p = cells_of([1.0, 2.0, 3.0])
    q = p.restrict(np.array([True, False, True]), np.array([1.0, 2.0, 3.0]))
    assert q.m == 2 and q.masses.tolist() == [1.0, 3.0] and q.total_mass == 6.0
