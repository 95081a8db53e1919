import numpy as np
import pytest

from graphgauge import graphlat
from graphgauge.graphlat import GraphError, LatticeGraph, Role, build_hypercubic


def test_counts_on_2222(small_graph):
    g = small_graph
    assert g.n_events == 16
    assert g.n_transitions == 64
    assert g.n_actions == 96
    assert g.n_vertices == 176


def test_counts_on_mixed_extents():
    g = build_hypercubic((2, 3, 4, 5))
    sites = 2 * 3 * 4 * 5
    assert g.n_events == sites
    assert g.n_transitions == 4 * sites
    assert g.n_actions == 6 * sites


def test_role_assignment_by_id_range(small_graph):
    g = small_graph
    assert g.role(0) == Role.EVENT
    assert g.role(g.n_events) == Role.TRANSITION
    assert g.role(g.n_events + g.n_transitions) == Role.ACTION
    with pytest.raises(GraphError):
        g.role(g.n_vertices)


def test_vertex_degrees(small_graph):
    """Events see 8 transitions; transitions see 2 events and 6 actions;
    actions see exactly their 4 loop transitions."""
    g = small_graph
    for v in range(g.n_events):
        nbrs = g.neighbors(v)
        assert len(nbrs) == 8
        assert all(g.role(w) == Role.TRANSITION for w in nbrs)
    for v in range(g.n_events, g.n_events + g.n_transitions):
        nbrs = g.neighbors(v)
        assert len(nbrs) == 8
        roles = [g.role(w) for w in nbrs]
        assert roles.count(Role.EVENT) == 2
        assert roles.count(Role.ACTION) == 6
    for v in range(g.n_events + g.n_transitions, g.n_vertices):
        nbrs = g.neighbors(v)
        assert len(nbrs) == 4
        assert all(g.role(w) == Role.TRANSITION for w in nbrs)


def test_every_link_in_exactly_six_plaquettes(small_graph):
    g = small_graph
    counts = {}
    for p in g.plaquettes():
        for event, step in p.links:
            if step > 0:
                key = (event, step)
            else:
                key = (g.event_neighbor(event, step), -step)
            counts[key] = counts.get(key, 0) + 1
    assert set(counts) == set(g.links())
    assert all(c == 6 for c in counts.values())


def test_plaquette_loop_closes(small_graph):
    g = small_graph
    for p in g.plaquettes():
        here = p.corners[0]
        for event, step in p.links:
            assert event == here
            here = g.event_neighbor(here, step)
        assert here == p.corners[0]
        mu, nu = p.plane
        assert 1 <= mu < nu <= 4
        steps = tuple(s for _, s in p.links)
        assert steps == (mu, nu, -mu, -nu)


def test_event_neighbor_is_two_half_steps(small_graph):
    g = small_graph
    for e in range(g.n_events):
        for d in (1, -2, 3, -4):
            t = g.neighbor(e, d)
            assert g.role(t) == Role.TRANSITION
            assert g.event_neighbor(e, d) == g.neighbor(t, d)


def test_neighbor_label_validation(small_graph):
    g = small_graph
    with pytest.raises(GraphError):
        g.neighbor(0, 0)
    with pytest.raises(GraphError):
        g.neighbor(0, 5)
    a = g.n_events + g.n_transitions
    with pytest.raises(GraphError):
        g.neighbor(a, 1)


def test_open_boundary_drops_edges():
    g = build_hypercubic((3, 3, 3, 3), periodic=False)
    assert g.n_events == 81
    # forward links exist only where the step stays inside the box
    assert g.n_transitions == 4 * 3**3 * 2  # per axis: 2 slabs of 27 sites
    corner = 0  # site (0,0,0,0)
    with pytest.raises(GraphError):
        g.neighbor(corner, -1)
    assert g.role(g.neighbor(corner, 1)) == Role.TRANSITION


def test_transition_endpoints_have_opposite_parity(small_graph):
    g = small_graph
    for v in range(g.n_events, g.n_events + g.n_transitions):
        d = g.transition_direction(v)
        a = g.neighbor(v, -d)
        b = g.neighbor(v, d)
        assert g.event_parity(a) != g.event_parity(b)


def test_transition_direction_and_offset(small_graph):
    g = small_graph
    for v in range(g.n_events, g.n_events + g.n_transitions):
        d = g.transition_direction(v)
        assert 1 <= d <= 4
        e = g.neighbor(v, -d)
        assert g.neighbor(e, d) == v
        assert 0 <= g.transition_offset(v) < g.n_transitions


def test_action_transitions_in_loop_order(small_graph):
    g = small_graph
    for p in g.plaquettes():
        ts = g.action_transitions(p.action)
        mu, nu = p.plane
        c0, c1, _, c3 = p.corners
        assert ts[0] == g.neighbor(c0, mu)
        assert ts[1] == g.neighbor(c1, nu)
        assert ts[2] == g.neighbor(c3, mu)
        assert ts[3] == g.neighbor(c0, nu)


def test_links_enumeration(small_graph):
    g = small_graph
    links = g.links()
    assert len(links) == g.n_transitions
    assert links == sorted(links)
    assert all(1 <= d <= 4 for _, d in links)


def test_automorphism_equivariance_exhaustive(small_graph):
    """perm[neighbor(v, l)] == neighbor(perm[v], l) for every vertex and
    label, for a few translations on the 2^4 torus."""
    g = small_graph
    for offset in [(1, 0, 0, 0), (0, 1, 1, 0), (1, 1, 1, 1)]:
        perm = g.automorphism_shift(offset)
        assert sorted(perm) == list(range(g.n_vertices))
        for v in range(g.n_events + g.n_transitions):
            for lab in graphlat.LABELS:
                try:
                    w = g.neighbor(v, lab)
                except GraphError:
                    continue
                assert perm[w] == g.neighbor(int(perm[v]), lab)
        # actions: the image's loop transitions are the images of the loop
        for a in range(g.n_events + g.n_transitions, g.n_vertices):
            got = g.action_transitions(int(perm[a]))
            want = tuple(int(perm[t]) for t in g.action_transitions(a))
            assert got == want


def test_automorphism_preserves_roles(small_graph):
    g = small_graph
    perm = g.automorphism_shift((0, 1, 0, 1))
    for v in range(g.n_vertices):
        assert g.role(int(perm[v])) == g.role(v)


def test_automorphism_rejects_open_graph():
    g = build_hypercubic((2, 2, 2, 2), periodic=False)
    with pytest.raises(GraphError):
        g.automorphism_shift((1, 0, 0, 0))


def test_compatible(small_graph):
    assert small_graph.compatible(build_hypercubic((2, 2, 2, 2)))
    assert not small_graph.compatible(build_hypercubic((2, 2, 2, 4)))
    assert not small_graph.compatible(build_hypercubic((2, 2, 2, 2), periodic=False))


def test_constructor_validation():
    with pytest.raises(GraphError):
        LatticeGraph((2, 2, 2))
    with pytest.raises(GraphError):
        LatticeGraph((2, 2, 2, 0))
    with pytest.raises(GraphError):
        LatticeGraph((1, 2, 2, 2), periodic=True)
