"""graphgauge: lattice gauge fields on a pure adjacency graph.

The engine separates three layers that are usually fused in lattice code:

* a coordinate-free lattice graph (`graphlat`), where vertices are typed
  as events, transitions, and actions, and geometry exists only as labeled
  adjacency;
* field data attached to that graph: geometric potentials (`potential`)
  and group-valued links (`wilson`);
* reference calculations on embedded lattices (`baseline`) that quantify
  how much a coordinate-carrying discretization breaks frame invariance,
  which the graph formulation avoids by construction.

`sampler` adds a Metropolis chain for the plaquette action and `cli` wires
everything into reproducible experiment runs.
"""

__version__ = "0.1.0"

from . import baseline, cli, graphlat, liealg, potential, sampler, wilson

__all__ = [
    "baseline",
    "cli",
    "graphlat",
    "liealg",
    "potential",
    "sampler",
    "wilson",
]
