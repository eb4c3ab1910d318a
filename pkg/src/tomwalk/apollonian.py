"""Deterministic Apollonian network construction.

Generation 0 is a triangle on vertices ``0, 1, 2``.  Each later generation
inserts one new vertex into every triangle created by the previous
generation and joins it to that triangle's three corners.  New vertices are
numbered consecutively in the order their host triangles were created, so a
given generation always yields the same labelled graph.

Each split of a triangle with sorted corners ``(a, b, c)`` by a new vertex
``n`` creates the sub-triangles ``(a, b, n), (a, n, c), (b, n, c)``, in that
order.  The recorded corner order of the triangle a vertex was inserted into
is kept (``host_triangle``) because walk constructions consume it.  The one
exception is the root split, whose sub-triangles are enumerated
``(a, b, n), (b, n, c), (a, n, c)``; this matches the conventional labelling
of the third-generation network that the quantum walk assignments below are
written against.
"""

from __future__ import annotations

from dataclasses import dataclass

MAX_GENERATION = 12


@dataclass(frozen=True, eq=False)
class ClassPartition:
    """Vertices grouped by the set of generations of their neighbours.

    ``class_of[v]`` is the class id of vertex ``v``; ``signatures[c]`` is the
    sorted tuple of neighbour generations shared by class ``c``; ``members[c]``
    lists its vertices.  Ids are assigned by (member generation, signature),
    which reproduces the conventional numbering: corners first, then the
    centre, then inner generations.
    """

    class_of: tuple[int, ...]
    signatures: tuple[tuple[int, ...], ...]
    members: tuple[tuple[int, ...], ...]

    @property
    def n_classes(self) -> int:
        return len(self.signatures)


@dataclass(frozen=True, eq=False)
class ApollonianNetwork:
    generation: int
    neighbors: tuple[tuple[int, ...], ...]
    vertex_generation: tuple[int, ...]
    host_triangle: tuple[tuple[int, int, int] | None, ...]

    @property
    def n_vertices(self) -> int:
        return len(self.neighbors)

    @property
    def n_edges(self) -> int:
        return sum(len(nb) for nb in self.neighbors) // 2

    def degree(self, v: int) -> int:
        return len(self.neighbors[v])

    def degree_histogram(self) -> dict[int, int]:
        hist: dict[int, int] = {}
        for nb in self.neighbors:
            hist[len(nb)] = hist.get(len(nb), 0) + 1
        return dict(sorted(hist.items()))

    def vertices_with_degree(self, d: int) -> tuple[int, ...]:
        return tuple(v for v in range(self.n_vertices) if self.degree(v) == d)

    def edges(self) -> tuple[tuple[int, int], ...]:
        """Undirected edge list, lexicographically sorted and stable."""
        out = []
        for u, nb in enumerate(self.neighbors):
            out.extend((u, v) for v in nb if u < v)
        return tuple(sorted(out))

    def central_vertex(self) -> int:
        """The natural start vertex: highest degree, oldest interior on ties.

        For every generation >= 1 this is vertex 3, the first inserted vertex.
        """
        return max(
            range(self.n_vertices),
            key=lambda v: (self.degree(v), self.vertex_generation[v], -v),
        )

    def class_partition(self) -> ClassPartition:
        groups: dict[tuple[int, ...], list[int]] = {}
        for v, nb in enumerate(self.neighbors):
            sig = tuple(sorted({self.vertex_generation[u] for u in nb}))
            groups.setdefault(sig, []).append(v)
        ordered = sorted(
            groups.items(),
            key=lambda item: (min(self.vertex_generation[v] for v in item[1]), item[0]),
        )
        class_of = [0] * self.n_vertices
        for cid, (_, vs) in enumerate(ordered):
            for v in vs:
                class_of[v] = cid
        return ClassPartition(
            class_of=tuple(class_of),
            signatures=tuple(sig for sig, _ in ordered),
            members=tuple(tuple(vs) for _, vs in ordered),
        )


def generate(generation: int) -> ApollonianNetwork:
    """Build the Apollonian network of the given generation (0 <= g <= 12)."""
    if generation < 0:
        raise ValueError("generation must be non-negative")
    if generation > MAX_GENERATION:
        raise ValueError(f"generation {generation} exceeds the guard {MAX_GENERATION}")

    neighbors: list[set[int]] = [{1, 2}, {0, 2}, {0, 1}]
    vertex_generation: list[int] = [0, 0, 0]
    host: list[tuple[int, int, int] | None] = [None, None, None]
    frontier: list[tuple[int, int, int]] = [(0, 1, 2)]

    for gen in range(1, generation + 1):
        next_frontier: list[tuple[int, int, int]] = []
        for tri in frontier:
            nu = len(vertex_generation)
            vertex_generation.append(gen)
            host.append(tri)
            neighbors.append(set(tri))
            for corner in tri:
                neighbors[corner].add(nu)
            a, b, c = sorted(tri)
            children = [(a, b, nu), (a, nu, c), (b, nu, c)]
            if gen == 1:
                children = [children[0], children[2], children[1]]
            next_frontier.extend(children)
        frontier = next_frontier

    return ApollonianNetwork(
        generation=generation,
        neighbors=tuple(tuple(sorted(nb)) for nb in neighbors),
        vertex_generation=tuple(vertex_generation),
        host_triangle=tuple(host),
    )


def expected_vertex_count(generation: int) -> int:
    return 3 + (3**generation - 1) // 2


def expected_edge_count(generation: int) -> int:
    return 3 if generation == 0 else 3 * (expected_vertex_count(generation) - 2)
