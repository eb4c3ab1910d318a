"""Constructors for the walk families studied on Apollonian networks.

Five families are provided, keyed by the labels the CLI exposes:

* ``classical`` -- the dim-1 homogeneous walk (exit probability ``1/d``).
* ``simple4``   -- the 4-vertex qutrit walk with rank-one cells built from
  the Fourier-basis projectors; periodic with period 6 after the first step.
* ``case1``     -- qutrit walk that is a rescaled-identity walk everywhere
  except on edges leaving last-generation vertices, which carry pairs of
  rescaled basis projectors.
* ``case2``     -- qubit walk from bi-stochastic (rescaled unitary) cells:
  moves from the higher-generation endpoint conjugate by sigma_x, moves from
  the lower one by sigma_z, corner-corner moves are rescaled identities.
* ``case3``     -- dim-4 walk on the generation-3 network whose cells depend
  only on the neighbour-generation classes of the endpoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .apollonian import ApollonianNetwork, generate
from .qcore import (
    KrausMap,
    ket,
    maximally_mixed,
    projector,
    qutrit_fourier_kets,
    sigma_x,
    sigma_z,
    subspace_operators,
)
from .tom import InvalidTomError, TomClass, TransitionOperationMatrix, validate_tom


@dataclass(frozen=True, eq=False)
class WalkSpec:
    """A network paired with the TOM walked on it."""

    label: str
    network: ApollonianNetwork
    tom: TransitionOperationMatrix
    internal_dim: int
    default_initial: np.ndarray

    @property
    def n_vertices(self) -> int:
        return self.tom.n_vertices


def _check_valid(tom: TransitionOperationMatrix, label: str) -> TransitionOperationMatrix:
    kind = validate_tom(tom)
    if kind is not TomClass.TOM:
        raise InvalidTomError(f"{label} builder produced a {kind.value} grid")
    return tom


def build_classical(net: ApollonianNetwork) -> WalkSpec:
    """Dim-1 reduction: scalar cells ``1/sqrt(d_src)``, columns stochastic."""
    grid = {}
    for u, v in net.edges():
        grid[(v, u)] = KrausMap.from_operators([[[1.0 / math.sqrt(net.degree(u))]]])
        grid[(u, v)] = KrausMap.from_operators([[[1.0 / math.sqrt(net.degree(v))]]])
    tom = TransitionOperationMatrix(n_vertices=net.n_vertices, internal_dim=1, grid=grid)
    return WalkSpec(
        label="classical",
        network=net,
        tom=_check_valid(tom, "classical"),
        internal_dim=1,
        default_initial=np.eye(1, dtype=np.complex128),
    )


def build_simple4() -> WalkSpec:
    """The explicit 4-vertex qutrit walk with rank-one cells.

    ``A``, ``B`` and ``C`` are the projectors on the Fourier-basis kets; each
    cell holds a single Kraus operator and the diagonal is zero.  The default
    initial state is maximally mixed (walk it from the central vertex 3).
    """
    net = generate(1)
    x, y, z = qutrit_fourier_kets()
    a, b, c = projector(x), projector(y), projector(z)
    s3 = math.sqrt(3)
    cells = {
        (0, 1): b, (0, 2): a, (0, 3): c / s3,
        (1, 0): a, (1, 2): b, (1, 3): b + c / s3,
        (2, 0): b, (2, 1): a, (2, 3): a + c / s3,
        (3, 0): c, (3, 1): c, (3, 2): c,
    }
    grid = {key: KrausMap.from_operators([op]) for key, op in cells.items()}
    tom = TransitionOperationMatrix(n_vertices=4, internal_dim=3, grid=grid)
    return WalkSpec(
        label="simple4",
        network=net,
        tom=_check_valid(tom, "simple4"),
        internal_dim=3,
        default_initial=maximally_mixed(3),
    )


def projector_pairs() -> tuple[tuple[np.ndarray, np.ndarray], ...]:
    """The three Kraus pairs of rescaled qutrit basis projectors.

    Pair ``k`` projects on basis states ``{k-1, k}`` (mod 3) with weight
    ``1/sqrt(2)`` each; the three pairs together resolve the identity.
    """
    p = [projector(ket(i, 3)) / math.sqrt(2) for i in range(3)]
    return ((p[0], p[1]), (p[1], p[2]), (p[2], p[0]))


def build_case1(net: ApollonianNetwork) -> WalkSpec:
    """Near-classical qutrit walk: projector pairs on last-generation exits.

    Each edge leaving a last-generation vertex carries one pair, assigned by
    the host-triangle corner order (first corner gets the first pair and so
    on).  Every other edge carries a rescaled identity ``1/sqrt(d_src)``.
    """
    if net.generation < 1:
        raise ValueError("case1 needs generation >= 1 (no interior vertices at g=0)")
    pairs = projector_pairs()
    last = net.generation
    grid: dict[tuple[int, int], KrausMap] = {}
    for u in range(net.n_vertices):
        if net.vertex_generation[u] == last:
            for corner, pair in zip(net.host_triangle[u], pairs):
                grid[(corner, u)] = KrausMap.from_operators(pair)
        else:
            scale = 1.0 / math.sqrt(net.degree(u))
            for v in net.neighbors[u]:
                grid[(v, u)] = KrausMap.from_operators([np.eye(3) * scale])
    tom = TransitionOperationMatrix(n_vertices=net.n_vertices, internal_dim=3, grid=grid)
    x, _, _ = qutrit_fourier_kets()
    return WalkSpec(
        label="case1",
        network=net,
        tom=_check_valid(tom, "case1"),
        internal_dim=3,
        default_initial=projector(x),
    )


def build_case2(net: ApollonianNetwork) -> WalkSpec:
    """Bi-stochastic qubit walk keyed on the generation gradient of each move."""
    if net.generation < 1:
        raise ValueError("case2 needs generation >= 1")
    sx, sz = sigma_x(), sigma_z()
    eye = np.eye(2, dtype=np.complex128)
    grid: dict[tuple[int, int], KrausMap] = {}
    for u in range(net.n_vertices):
        gen_u = net.vertex_generation[u]
        scale = 1.0 / math.sqrt(net.degree(u))
        for v in net.neighbors[u]:
            gen_v = net.vertex_generation[v]
            if gen_u > gen_v:
                op = sx
            elif gen_u < gen_v:
                op = sz
            else:
                op = eye
            grid[(v, u)] = KrausMap.from_operators([op * scale])
    tom = TransitionOperationMatrix(n_vertices=net.n_vertices, internal_dim=2, grid=grid)
    return WalkSpec(
        label="case2",
        network=net,
        tom=_check_valid(tom, "case2"),
        internal_dim=2,
        default_initial=maximally_mixed(2),
    )


def class_operator_table() -> dict[tuple[int, int], tuple[np.ndarray, ...]]:
    """Kraus assignment per (source class, target class) for the dim-4 walk.

    Normalization: an operator used on ``k`` outgoing edges of a vertex is
    divided by ``sqrt(k)``, and classes whose exits mix both subspace
    decompositions carry an extra ``1/sqrt(2)``.
    """
    b_x, c_x, b_z, c_z = subspace_operators()
    s2, s6, s8 = math.sqrt(2), math.sqrt(6), math.sqrt(8)
    return {
        (0, 0): (b_x / s8,),
        (0, 1): (b_z / 2,),
        (0, 2): (c_x / 2,),
        (0, 3): (b_z / s8,),
        (0, 4): (c_z / 2, b_x / s8),
        (1, 0): (c_z / s6,),
        (1, 2): (c_z / s6,),
        (1, 3): (b_z / s6,),
        (2, 0): (c_z / 2,),
        (2, 1): (b_x / 2,),
        (2, 3): (b_x / s8,),
        (2, 4): (b_z / s2, c_x / s2),
        (3, 0): (c_x / s2,),
        (3, 1): (b_x,),
        (3, 2): (c_x / s2,),
        (4, 0): (b_x / s2,),
        (4, 2): (c_x,),
    }


def build_case3(_class_permutation: tuple[int, ...] | None = None) -> WalkSpec:
    """Dim-4 walk on the generation-3 network driven by the class table.

    The mapping of neighbour-generation classes to table ids is pinned by the
    requirement that every column be trace preserving; ``_class_permutation``
    exists so tests can show that requirement singles out one mapping.
    """
    net = generate(3)
    partition = net.class_partition()
    class_of = list(partition.class_of)
    if _class_permutation is not None:
        class_of = [_class_permutation[c] for c in class_of]
    table = class_operator_table()
    grid: dict[tuple[int, int], KrausMap] = {}
    for u in range(net.n_vertices):
        for v in net.neighbors[u]:
            key = (class_of[u], class_of[v])
            if key not in table:
                raise InvalidTomError(f"no operator assignment for class pair {key}")
            grid[(v, u)] = KrausMap.from_operators(table[key])
    tom = TransitionOperationMatrix(n_vertices=net.n_vertices, internal_dim=4, grid=grid)
    return WalkSpec(
        label="case3",
        network=net,
        tom=_check_valid(tom, "case3"),
        internal_dim=4,
        default_initial=maximally_mixed(4),
    )


DEFAULT_GENERATIONS = {"classical": 3, "case1": 3, "case2": 5}


def build_walk(label: str, generation: int | None = None) -> WalkSpec:
    """Build a walk by its CLI label; generation applies where it makes sense."""
    if label == "simple4":
        if generation not in (None, 1):
            raise ValueError("simple4 is defined on the 4-vertex network only")
        return build_simple4()
    if label == "case3":
        if generation not in (None, 3):
            raise ValueError("case3 is defined on the generation-3 network only")
        return build_case3()
    if label in DEFAULT_GENERATIONS:
        g = DEFAULT_GENERATIONS[label] if generation is None else generation
        net = generate(g)
        builder = {
            "classical": build_classical,
            "case1": build_case1,
            "case2": build_case2,
        }[label]
        return builder(net)
    raise KeyError(f"unknown walk label {label!r}")


WALK_LABELS = ("classical", "simple4", "case1", "case2", "case3")
