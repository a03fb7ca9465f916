import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sglap.gasket import build_gasket
from sglap.gauge import (
    Connection,
    FluxPair,
    InvalidCycleError,
    build_connection,
    cell_holonomies,
    circ_dist,
    hole_flux,
    landau_connection,
    mod1,
    restrict_connection,
)

finite = st.floats(allow_nan=False, allow_infinity=False, min_value=-1e6, max_value=1e6)


@given(finite)
def test_mod1_range_and_idempotence(x):
    m = mod1(x)
    assert 0.0 <= m < 1.0
    assert mod1(m) == m


@given(finite, finite)
def test_circ_dist_symmetric_and_bounded(x, y):
    d = circ_dist(x, y)
    assert 0.0 <= d <= 0.5
    assert d == circ_dist(y, x)
    assert circ_dist(x, x) == 0.0


@given(finite, st.integers(min_value=-3, max_value=3))
def test_circ_dist_periodic(x, k):
    assert circ_dist(x + k, x) <= 1e-9


def test_flux_pair_normalizes_and_dyadic():
    fp = FluxPair(1.25, -0.5)
    assert fp.alpha == 0.25 and fp.beta == 0.5
    assert not fp.is_dyadic()
    assert FluxPair(0.5, 1.0).is_dyadic()
    assert FluxPair(0.5 + 1e-13, -1e-13).is_dyadic()


def test_hole_flux_small_sides():
    a, b = 0.1, 0.1
    assert math.isclose(hole_flux(1, a, b), b)
    assert math.isclose(hole_flux(2, a, b), mod1(a + 3 * b))   # 0.4
    assert math.isclose(hole_flux(4, a, b), mod1(6 * a + 10 * b))  # 1.6 -> 0.6


@pytest.mark.parametrize("builder", [build_connection, landau_connection])
@pytest.mark.parametrize("flux", [(0.1, 0.1), (0.5, 0.5), (0.37, 0.82), (0.0, 0.25)])
def test_every_face_carries_its_flux(builder, flux):
    g = build_gasket(3)
    conn = builder(g, FluxPair(*flux))
    for cell, h in cell_holonomies(conn):
        if cell.orientation == "upright":
            want = flux[0]
        else:
            want = hole_flux(cell.side, *flux)
        assert circ_dist(h, want) <= 1e-9, (cell.orientation, cell.side)


def test_connection_antisymmetric():
    g = build_gasket(2)
    conn = build_connection(g, FluxPair(0.3, 0.7))
    for (u, v), p in conn.phase.items():
        assert (v, u) in conn.phase
        assert circ_dist(p + conn.phase[(v, u)], 0.0) <= 1e-12
        w = conn.omega(u, v)
        assert abs(abs(w) - 1.0) <= 1e-12
        assert abs(w * conn.omega(v, u) - 1.0) <= 1e-12


def test_holonomy_requires_adjacency():
    g = build_gasket(1)
    conn = build_connection(g, FluxPair(0.2, 0.1))
    with pytest.raises(InvalidCycleError):
        conn.holonomy([0, 5, 0])  # opposite corners are not adjacent
    # closed path form and open form agree
    cell = g.upright_cells()[0]
    cyc = list(cell.vertices)
    assert conn.holonomy(cyc) == conn.holonomy(cyc + [cyc[0]])


def test_gauges_differ_edgewise_but_agree_on_faces():
    # the two gauges give genuinely different edge phases (it is a gauge choice)
    g = build_gasket(2)
    flux = FluxPair(0.13, 0.29)
    tree = build_connection(g, flux)
    landau = landau_connection(g, flux)
    assert any(
        circ_dist(tree.phase[e], landau.phase[e]) > 1e-6 for e in tree.phase
    )
    hol_t = {tuple(c.vertices): h for c, h in cell_holonomies(tree)}
    hol_l = {tuple(c.vertices): h for c, h in cell_holonomies(landau)}
    assert all(circ_dist(hol_t[k], hol_l[k]) <= 1e-9 for k in hol_t)


def test_restrict_connection_reduces_faces():
    # with theta = 0 the reduced upright faces pick up 3a + b from the three
    # fine cells and the enclosed hole; theta shifts each by 3*theta
    g = build_gasket(2)
    a, b = 0.07, 0.21
    conn = build_connection(g, FluxPair(a, b))
    for theta in (0.0, 0.11):
        red = restrict_connection(conn, theta)
        assert red.graph.level == 1
        ups = [h for c, h in cell_holonomies(red) if c.orientation == "upright"]
        assert len(ups) == 3
        for h in ups:
            assert circ_dist(h, 3 * a + b + 3 * theta) <= 1e-9


def test_to_json_edge_phase_map():
    g = build_gasket(1)
    conn = build_connection(g, FluxPair(0.25, 0.0))
    doc = json.loads(conn.to_json())
    assert len(doc) == 2 * len(g.edges)
    for key, p in doc.items():
        u, v = map(int, key.split(","))
        assert (u, v) in conn.phase
        assert p == conn.phase[(u, v)]


@settings(max_examples=30, deadline=None)
@given(
    alpha=st.floats(min_value=0, max_value=1, exclude_max=True),
    beta=st.floats(min_value=0, max_value=1, exclude_max=True),
)
def test_tree_gauge_face_completion_property(alpha, beta):
    g = build_gasket(2)
    conn = build_connection(g, FluxPair(alpha, beta))
    for cell, h in cell_holonomies(conn):
        want = alpha if cell.orientation == "upright" else hole_flux(cell.side, alpha, beta)
        assert circ_dist(h, want) <= 1e-9
