"""Transition operation matrices and their action on vector states.

Index convention (used everywhere in this package): ``grid[(i, j)]`` is the
quantum operation applied when the walker moves FROM vertex ``j`` TO vertex
``i``.  Column ``j`` therefore collects the operations on edges leaving
``j``, and the TOM condition is that each column's pooled Kraus operators
form a trace-preserving map.  A sub-TOM only requires trace-non-increasing
columns.

A vector state is a ``(n_vertices, dim, dim)`` complex array whose slice
``alpha[i]`` is the sub-normalized internal state parked at vertex ``i``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .qcore import (
    MapClass,
    StateClass,
    TOL_TP,
    KrausMap,
    ViewOperator,
    as_matrix,
    check_state,
    classify_operation,
    dagger,
    mat_equal,
)


class TomClass(enum.Enum):
    TOM = "valid-tom"
    SUB_TOM = "valid-sub-tom"
    INVALID = "invalid"


class InvalidTomError(ValueError):
    """Raised when a grid fails the (sub-)TOM column conditions."""


@dataclass(frozen=True, eq=False)
class TransitionOperationMatrix:
    """An ``N x N`` grid of Kraus maps with trace-preserving columns.

    The grid is stored sparsely: absent cells are the zero operation.  Cell
    keys are ``(i, j)`` with the move-from-``j``-to-``i`` convention above.
    """

    n_vertices: int
    internal_dim: int
    grid: dict[tuple[int, int], KrausMap] = field(repr=False)

    def __post_init__(self):
        cleaned: dict[tuple[int, int], KrausMap] = {}
        for (i, j), kmap in sorted(self.grid.items()):
            if not (0 <= i < self.n_vertices and 0 <= j < self.n_vertices):
                raise ValueError(f"cell ({i}, {j}) outside a {self.n_vertices}-vertex grid")
            if kmap.dim != self.internal_dim:
                raise ValueError(
                    f"cell ({i}, {j}) has dim {kmap.dim}, expected {self.internal_dim}"
                )
            if not kmap.is_zero:
                cleaned[(i, j)] = kmap
        object.__setattr__(self, "grid", cleaned)

    def cell(self, i: int, j: int) -> KrausMap:
        return self.grid.get((i, j), KrausMap.zero(self.internal_dim))

    def cells(self):
        """Iterate ``((i, j), kraus_map)`` over non-zero cells in sorted order."""
        return iter(self.grid.items())

    def column_operators(self, j: int) -> list[np.ndarray]:
        ops: list[np.ndarray] = []
        for (i, jj), kmap in self.grid.items():
            if jj == j:
                ops.extend(kmap.operators)
        return ops


def validate_tom(t: TransitionOperationMatrix, tol: float = TOL_TP) -> TomClass:
    """Classify the grid by pooling each column's Kraus operators."""
    kinds = []
    for j in range(t.n_vertices):
        pooled = KrausMap.from_operators(t.column_operators(j), dim=t.internal_dim)
        kinds.append(classify_operation(pooled, tol))
    if any(k is MapClass.INVALID for k in kinds):
        return TomClass.INVALID
    if all(k is MapClass.TRACE_PRESERVING for k in kinds):
        return TomClass.TOM
    return TomClass.SUB_TOM


# ---------------------------------------------------------------------------
# Vector states

def empty_vector_state(n_vertices: int, dim: int) -> np.ndarray:
    return np.zeros((n_vertices, dim, dim), dtype=np.complex128)


def localized_state(n_vertices: int, vertex: int, rho) -> np.ndarray:
    """Vector state with ``rho`` at one vertex and zero elsewhere."""
    rho = as_matrix(rho)
    alpha = empty_vector_state(n_vertices, rho.shape[0])
    alpha[vertex] = rho
    return alpha


def total_trace(alpha: np.ndarray) -> float:
    return float(np.real(np.trace(alpha, axis1=1, axis2=2).sum()))


def vertex_masses(alpha: np.ndarray, view: ViewOperator | None = None) -> np.ndarray:
    """Per-vertex detection probabilities ``Tr(P alpha_v)`` (full mass if no view)."""
    if view is None:
        return np.real(np.trace(alpha, axis1=1, axis2=2))
    return np.real(np.einsum("ab,vba->v", view.projector, alpha))


def apply_tom(t: TransitionOperationMatrix, alpha: np.ndarray) -> np.ndarray:
    """One step of the walk: ``beta_i = sum_j E_ij(alpha_j)``."""
    alpha = np.asarray(alpha, dtype=np.complex128)
    if alpha.shape != (t.n_vertices, t.internal_dim, t.internal_dim):
        raise ValueError(
            f"vector state of shape {alpha.shape} does not match "
            f"({t.n_vertices}, {t.internal_dim}, {t.internal_dim})"
        )
    beta = empty_vector_state(t.n_vertices, t.internal_dim)
    for (i, j), kmap in t.cells():
        src = alpha[j]
        for e in kmap.operators:
            beta[i] += e @ src @ dagger(e)
    return beta


def compose_tom(
    e: TransitionOperationMatrix, f: TransitionOperationMatrix
) -> TransitionOperationMatrix:
    """The product TOM ``G`` with ``G_ij = sum_k E_ik F_kj`` (apply ``f`` first)."""
    if e.n_vertices != f.n_vertices or e.internal_dim != f.internal_dim:
        raise ValueError("composed TOMs must share vertex count and internal dim")
    cells: dict[tuple[int, int], list[np.ndarray]] = {}
    for (i, k), emap in e.cells():
        for (kk, j), fmap in f.cells():
            if kk != k:
                continue
            ops = cells.setdefault((i, j), [])
            for a in emap.operators:
                for b in fmap.operators:
                    ops.append(a @ b)
    grid = {
        key: KrausMap.from_operators(ops, dim=e.internal_dim)
        for key, ops in sorted(cells.items())
    }
    return TransitionOperationMatrix(
        n_vertices=e.n_vertices, internal_dim=e.internal_dim, grid=grid
    )


def identity_tom(n_vertices: int, dim: int) -> TransitionOperationMatrix:
    grid = {
        (i, i): KrausMap.from_operators([np.eye(dim)]) for i in range(n_vertices)
    }
    return TransitionOperationMatrix(n_vertices=n_vertices, internal_dim=dim, grid=grid)


# ---------------------------------------------------------------------------
# Monitoring

def monitored_subtom(
    t: TransitionOperationMatrix, target: int, view: ViewOperator
) -> TransitionOperationMatrix:
    """The monitored sub-TOM ``F = E P``.

    ``P`` is diagonal with identities except at the target, where the single
    Kraus operator is the view complement; materialized cellwise this
    right-multiplies every Kraus operator in the target's column by ``1 - P``.
    With the identity view the target column becomes absorbing.
    """
    if not (0 <= target < t.n_vertices):
        raise ValueError(f"target {target} out of range")
    if view.dim != t.internal_dim:
        raise ValueError(f"view dim {view.dim} does not match internal dim {t.internal_dim}")
    comp = view.complement
    grid: dict[tuple[int, int], KrausMap] = {}
    for (i, j), kmap in t.cells():
        if j == target:
            ops = [e @ comp for e in kmap.operators]
            grid[(i, j)] = KrausMap.from_operators(ops, dim=t.internal_dim)
        else:
            grid[(i, j)] = kmap
    return TransitionOperationMatrix(
        n_vertices=t.n_vertices, internal_dim=t.internal_dim, grid=grid
    )


# ---------------------------------------------------------------------------
# Lifting to one channel on the joint internal (x) position space

@dataclass(frozen=True, eq=False)
class LiftedChannel:
    """Kraus operators of the global channel associated with a TOM.

    Operators live on the joint space ordered position-major: the matrix is
    an ``N x N`` grid of ``dim x dim`` blocks, and the term for cell
    ``(i, j)`` places that cell's Kraus operator at block ``(i, j)``.
    """

    n_vertices: int
    internal_dim: int
    kraus: tuple[np.ndarray, ...]

    @property
    def total_dim(self) -> int:
        return self.n_vertices * self.internal_dim

    def completeness_sum(self) -> np.ndarray:
        total = np.zeros((self.total_dim, self.total_dim), dtype=np.complex128)
        for e in self.kraus:
            total += dagger(e) @ e
        return total

    def apply(self, rho: np.ndarray) -> np.ndarray:
        rho = as_matrix(rho)
        out = np.zeros_like(rho)
        for e in self.kraus:
            out += e @ rho @ dagger(e)
        return out


def lift_to_channel(t: TransitionOperationMatrix, tol: float = TOL_TP) -> LiftedChannel:
    """Assemble the global channel; a verification tool, not the walk engine."""
    if validate_tom(t, tol) is not TomClass.TOM:
        raise InvalidTomError("only a valid TOM lifts to a quantum channel")
    d, n = t.internal_dim, t.n_vertices
    kraus = []
    for (i, j), kmap in t.cells():
        for e in kmap.operators:
            big = np.zeros((n * d, n * d), dtype=np.complex128)
            big[i * d : (i + 1) * d, j * d : (j + 1) * d] = e
            kraus.append(big)
    return LiftedChannel(n_vertices=n, internal_dim=d, kraus=tuple(kraus))


def embed_vector_state(alpha: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Block-diagonal global state with block ``j`` equal to ``alpha_j``."""
    alpha = np.asarray(alpha, dtype=np.complex128)
    n, d = alpha.shape[0], alpha.shape[1]
    if abs(total_trace(alpha) - 1.0) > tol:
        raise ValueError(f"vector state trace {total_trace(alpha)} is not 1")
    rho = np.zeros((n * d, n * d), dtype=np.complex128)
    for j in range(n):
        rho[j * d : (j + 1) * d, j * d : (j + 1) * d] = alpha[j]
    return rho


def check_global_state(rho: np.ndarray, n_vertices: int, dim: int, tol: float = 1e-12) -> bool:
    """True iff ``rho`` is block diagonal with ``n_vertices`` blocks and a state."""
    rho = as_matrix(rho)
    mask = np.ones_like(rho, dtype=bool)
    for j in range(n_vertices):
        mask[j * dim : (j + 1) * dim, j * dim : (j + 1) * dim] = False
    if mask.any() and np.max(np.abs(rho[mask])) > tol:
        return False
    return check_state(rho, 1e-9) is not StateClass.INVALID


def extract_vector_state(rho: np.ndarray, n_vertices: int, dim: int) -> np.ndarray:
    """Inverse of :func:`embed_vector_state` (diagonal blocks only)."""
    rho = as_matrix(rho)
    alpha = empty_vector_state(n_vertices, dim)
    for j in range(n_vertices):
        alpha[j] = rho[j * dim : (j + 1) * dim, j * dim : (j + 1) * dim]
    return alpha


def tom_cells_equal(
    a: TransitionOperationMatrix,
    b: TransitionOperationMatrix,
    tol: float = 1e-12,
) -> bool:
    """Cellwise superoperator equality via Choi-style comparison.

    Two cells are equal as maps iff ``sum_k kron(E_k, conj(E_k))`` agree; the
    Kraus lists themselves may differ.
    """
    if a.n_vertices != b.n_vertices or a.internal_dim != b.internal_dim:
        return False
    keys = set(a.grid) | set(b.grid)
    for (i, j) in keys:
        ma = _cell_superoperator(a.cell(i, j))
        mb = _cell_superoperator(b.cell(i, j))
        if not mat_equal(ma, mb, tol):
            return False
    return True


def _cell_superoperator(kmap: KrausMap) -> np.ndarray:
    d = kmap.dim
    m = np.zeros((d * d, d * d), dtype=np.complex128)
    for e in kmap.operators:
        m += np.kron(e, np.conj(e))
    return m
