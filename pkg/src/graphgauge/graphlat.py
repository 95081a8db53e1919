"""Typed lattice graph with labeled adjacency and no stored coordinates.

The graph knows three vertex roles:

* EVENT: a lattice site.  Eight labeled neighbors, all transitions.
* TRANSITION: the midpoint of a link.  Carries a direction d; labels +-d
  reach its two event endpoints, the six remaining labels reach the action
  vertices of the plaquettes the link borders.
* ACTION: the center of a plaquette, connected to the four transitions of
  its loop.

Edge labels are signed directions +-1..+-4.  Extents and periodicity are
stored (they are needed to build and to enumerate automorphisms), but no
vertex carries a position; every query below is answered from adjacency
alone.  Vertex ids are assigned contiguously: events first, then
transitions, then actions, each ordered by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np


class GraphError(ValueError):
    pass


class Role(IntEnum):
    EVENT = 0
    TRANSITION = 1
    ACTION = 2


# Column layout for labeled adjacency: +1, -1, +2, -2, +3, -3, +4, -4.
LABELS = (1, -1, 2, -2, 3, -3, 4, -4)

# Plane order for action vertices attached to one site.
PLANES = ((1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4))
_PLANE_INDEX = {p: i for i, p in enumerate(PLANES)}


def _label_col(label: int) -> int:
    if not isinstance(label, (int, np.integer)) or label == 0 or abs(label) > 4:
        raise GraphError(f"invalid edge label {label!r}, expected +-1..+-4")
    return 2 * (abs(label) - 1) + (0 if label > 0 else 1)


@dataclass(frozen=True)
class PlaquetteRef:
    """One plaquette: its action vertex, corner events, and loop steps.

    ``links`` holds (event, signed direction) steps in loop order
    (+mu, +nu, -mu, -nu); a negative direction means the step traverses the
    link stored at the destination event in reverse.
    """

    action: int
    corners: tuple[int, int, int, int]
    links: tuple[tuple[int, int], ...]
    plane: tuple[int, int]


class LatticeGraph:
    """Periodic (or open) four dimensional hypercubic graph, adjacency only."""

    def __init__(self, dims, periodic=True):
        dims = tuple(int(d) for d in dims)
        if len(dims) != 4 or any(d < 1 for d in dims):
            raise GraphError(f"dims must be four positive integers, got {dims}")
        if periodic and any(d < 2 for d in dims):
            raise GraphError(f"periodic graph needs every extent >= 2, got {dims}")
        self.dims = dims
        self.periodic = bool(periodic)
        self._build()

    # -- construction -------------------------------------------------------

    def _site_index(self, x) -> int:
        l0, l1, l2, l3 = self.dims
        return ((x[0] * l1 + x[1]) * l2 + x[2]) * l3 + x[3]

    def _site_coords(self, s: int):
        l0, l1, l2, l3 = self.dims
        s, x3 = divmod(s, l3)
        s, x2 = divmod(s, l2)
        x0, x1 = divmod(s, l1)
        return (x0, x1, x2, x3)

    def _shift_site(self, s: int, d: int, sign: int):
        """Site one step along axis d-1, or None off an open boundary."""
        x = list(self._site_coords(s))
        axis = d - 1
        x[axis] += sign
        if self.periodic:
            x[axis] %= self.dims[axis]
        elif not (0 <= x[axis] < self.dims[axis]):
            return None
        return self._site_index(x)

    def _build(self):
        n_sites = int(np.prod(self.dims))
        self.n_events = n_sites

        # Transition slots (site, d) and action slots (site, plane); open
        # boundaries drop the slots whose forward steps leave the box.
        trans_slot = np.full((n_sites, 4), -1, dtype=np.int64)
        act_slot = np.full((n_sites, 6), -1, dtype=np.int64)
        n_t = 0
        for s in range(n_sites):
            for d in range(1, 5):
                if self._shift_site(s, d, +1) is not None:
                    trans_slot[s, d - 1] = n_t
                    n_t += 1
        n_a = 0
        for s in range(n_sites):
            for i, (mu, nu) in enumerate(PLANES):
                if (
                    trans_slot[s, mu - 1] >= 0
                    and trans_slot[s, nu - 1] >= 0
                    and self._shift_site(s, mu, +1) is not None
                    and self._shift_site(s, nu, +1) is not None
                    and trans_slot[self._shift_site(s, mu, +1), nu - 1] >= 0
                    and trans_slot[self._shift_site(s, nu, +1), mu - 1] >= 0
                ):
                    act_slot[s, i] = n_a
                    n_a += 1
        self.n_transitions = n_t
        self.n_actions = n_a
        self._trans_slot = trans_slot
        self._act_slot = act_slot

        ev_of = lambda s: s
        tr_of = lambda s, d: self.n_events + trans_slot[s, d - 1]
        ac_of = lambda s, i: self.n_events + n_t + act_slot[s, i]

        # Reverse maps for automorphisms and diagnostics.
        self._trans_site = np.empty(n_t, dtype=np.int64)
        self._trans_dir = np.empty(n_t, dtype=np.int64)
        for s in range(n_sites):
            for d in range(1, 5):
                t = trans_slot[s, d - 1]
                if t >= 0:
                    self._trans_site[t] = s
                    self._trans_dir[t] = d
        self._act_site = np.empty(n_a, dtype=np.int64)
        self._act_plane = np.empty(n_a, dtype=np.int64)
        for s in range(n_sites):
            for i in range(6):
                a = act_slot[s, i]
                if a >= 0:
                    self._act_site[a] = s
                    self._act_plane[a] = i

        nbr = np.full((self.n_events + n_t, 8), -1, dtype=np.int64)
        for s in range(n_sites):
            for d in range(1, 5):
                if trans_slot[s, d - 1] >= 0:
                    nbr[ev_of(s), _label_col(d)] = tr_of(s, d)
                back = self._shift_site(s, d, -1)
                if back is not None and trans_slot[back, d - 1] >= 0:
                    nbr[ev_of(s), _label_col(-d)] = tr_of(back, d)
        for s in range(n_sites):
            for d in range(1, 5):
                if trans_slot[s, d - 1] < 0:
                    continue
                t = tr_of(s, d)
                nbr[t, _label_col(-d)] = ev_of(s)
                nbr[t, _label_col(d)] = ev_of(self._shift_site(s, d, +1))
                for e in range(1, 5):
                    if e == d:
                        continue
                    plane = (min(d, e), max(d, e))
                    i = _PLANE_INDEX[plane]
                    if act_slot[s, i] >= 0:
                        nbr[t, _label_col(e)] = ac_of(s, i)
                    back = self._shift_site(s, e, -1)
                    if back is not None and act_slot[back, i] >= 0:
                        nbr[t, _label_col(-e)] = ac_of(back, i)
        self._nbr = nbr

        # Loop-ordered transitions per action, and full plaquette references.
        act_trans = np.empty((n_a, 4), dtype=np.int64)
        plaqs = []
        for s in range(n_sites):
            for i, (mu, nu) in enumerate(PLANES):
                if act_slot[s, i] < 0:
                    continue
                c0 = s
                c1 = self._shift_site(s, mu, +1)
                c3 = self._shift_site(s, nu, +1)
                c2 = self._shift_site(c1, nu, +1)
                a = ac_of(s, i)
                act_trans[act_slot[s, i]] = (
                    tr_of(c0, mu),
                    tr_of(c1, nu),
                    tr_of(c3, mu),
                    tr_of(c0, nu),
                )
                plaqs.append(
                    PlaquetteRef(
                        action=a,
                        corners=(ev_of(c0), ev_of(c1), ev_of(c2), ev_of(c3)),
                        links=(
                            (ev_of(c0), mu),
                            (ev_of(c1), nu),
                            (ev_of(c2), -mu),
                            (ev_of(c3), -nu),
                        ),
                        plane=(mu, nu),
                    )
                )
        self._act_trans = act_trans
        self._plaquettes = tuple(plaqs)

        # Bipartition of event vertices (unique up to class swap on a
        # connected bipartite graph); kept for checkerboard sweep order.
        parity = np.zeros(n_sites, dtype=np.int8)
        for s in range(n_sites):
            parity[s] = sum(self._site_coords(s)) % 2
        self._event_parity = parity

    # -- basic queries -------------------------------------------------------

    @property
    def n_vertices(self) -> int:
        return self.n_events + self.n_transitions + self.n_actions

    def role(self, v: int) -> Role:
        if not 0 <= v < self.n_vertices:
            raise GraphError(f"vertex {v} out of range")
        if v < self.n_events:
            return Role.EVENT
        if v < self.n_events + self.n_transitions:
            return Role.TRANSITION
        return Role.ACTION

    def neighbor(self, v: int, label: int) -> int:
        """Labeled neighbor of an event or transition vertex.

        From an event, label +-d reaches the transition on the forward or
        backward link along d; stepping twice with the same label reaches
        the next event site.  From a transition of direction d, labels +-d
        reach its endpoint events and any other label reaches the action
        vertex of the plaquette spanned by the two directions, on the
        positive or negative side.
        """
        col = _label_col(label)
        if self.role(v) == Role.ACTION:
            raise GraphError(f"vertex {v} is an action vertex, labels do not apply")
        w = self._nbr[v, col]
        if w < 0:
            raise GraphError(f"vertex {v} has no neighbor with label {label:+d}")
        return int(w)

    def neighbors(self, v: int) -> tuple[int, ...]:
        """All neighbors of v, without labels (actions included)."""
        if self.role(v) == Role.ACTION:
            return tuple(int(t) for t in self._act_trans[v - self.n_events - self.n_transitions])
        return tuple(int(w) for w in self._nbr[v] if w >= 0)

    def action_transitions(self, v: int) -> tuple[int, int, int, int]:
        """The four transitions of an action vertex, in loop order."""
        if self.role(v) != Role.ACTION:
            raise GraphError(f"vertex {v} is not an action vertex")
        return tuple(int(t) for t in self._act_trans[v - self.n_events - self.n_transitions])

    def event_neighbor(self, event: int, label: int) -> int:
        """Next event site along a signed direction (two half steps)."""
        return self.neighbor(self.neighbor(event, label), label)

    def transition_direction(self, v: int) -> int:
        if self.role(v) != Role.TRANSITION:
            raise GraphError(f"vertex {v} is not a transition vertex")
        return int(self._trans_dir[v - self.n_events])

    def transition_offset(self, v: int) -> int:
        """Index of a transition vertex into per-transition field storage."""
        if self.role(v) != Role.TRANSITION:
            raise GraphError(f"vertex {v} is not a transition vertex")
        return v - self.n_events

    def event_parity(self, v: int) -> int:
        if self.role(v) != Role.EVENT:
            raise GraphError(f"vertex {v} is not an event vertex")
        return int(self._event_parity[v])

    def plaquettes(self) -> tuple[PlaquetteRef, ...]:
        """Every plaquette exactly once, in construction order."""
        return self._plaquettes

    def links(self):
        """All stored links as (event, direction) pairs, event major."""
        out = []
        for s in range(self.n_events):
            for d in range(1, 5):
                if self._trans_slot[s, d - 1] >= 0:
                    out.append((s, d))
        return out

    # -- automorphisms -------------------------------------------------------

    def automorphism_shift(self, offset) -> np.ndarray:
        """Vertex permutation for a periodic translation by ``offset``.

        Returns an array ``perm`` with ``perm[v]`` the image of vertex v.
        Labeled adjacency is equivariant: perm[neighbor(v, l)] equals
        neighbor(perm[v], l) for every vertex and label.
        """
        if not self.periodic:
            raise GraphError("translation automorphisms need a periodic graph")
        offset = tuple(int(o) for o in offset)
        if len(offset) != 4:
            raise GraphError(f"offset must have four components, got {offset}")
        l0, l1, l2, l3 = self.dims
        n_sites = self.n_events
        s = np.arange(n_sites)
        x3 = s % l3
        x2 = (s // l3) % l2
        x1 = (s // (l3 * l2)) % l1
        x0 = s // (l3 * l2 * l1)
        x0 = (x0 + offset[0]) % l0
        x1 = (x1 + offset[1]) % l1
        x2 = (x2 + offset[2]) % l2
        x3 = (x3 + offset[3]) % l3
        s_new = ((x0 * l1 + x1) * l2 + x2) * l3 + x3
        perm = np.empty(self.n_vertices, dtype=np.int64)
        perm[:n_sites] = s_new
        # Periodic graphs keep every slot, so slot indices are 4s + (d-1)
        # and 6s + plane; translation just replaces the site factor.
        t_site = self._trans_site
        t_dir = self._trans_dir
        perm[n_sites : n_sites + self.n_transitions] = (
            n_sites + 4 * s_new[t_site] + (t_dir - 1)
        )
        a_site = self._act_site
        a_plane = self._act_plane
        perm[n_sites + self.n_transitions :] = (
            n_sites + self.n_transitions + 6 * s_new[a_site] + a_plane
        )
        return perm

    def compatible(self, other: "LatticeGraph") -> bool:
        return (
            isinstance(other, LatticeGraph)
            and self.dims == other.dims
            and self.periodic == other.periodic
        )

    def __repr__(self):
        kind = "periodic" if self.periodic else "open"
        return (
            f"LatticeGraph(dims={self.dims}, {kind}, "
            f"E={self.n_events}, T={self.n_transitions}, A={self.n_actions})"
        )


def build_hypercubic(dims, periodic: bool = True) -> LatticeGraph:
    """Build the four dimensional hypercubic lattice graph."""
    return LatticeGraph(dims, periodic=periodic)


def neighbor(g: LatticeGraph, v: int, label: int) -> int:
    return g.neighbor(v, label)


def plaquettes(g: LatticeGraph):
    return g.plaquettes()


def automorphism_shift(g: LatticeGraph, offset) -> np.ndarray:
    return g.automorphism_shift(offset)
