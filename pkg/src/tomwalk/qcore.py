"""Complex-matrix primitives: states, Kraus maps, projectors and measurements.

Everything downstream (transition operation matrices, walk builders, the
passage engine) is expressed in terms of the small vocabulary defined here.
Matrices are plain ``numpy`` arrays of ``complex128``; all wrapper objects
are immutable after construction and safe to share between threads.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

# Default tolerances.  The paper-scale problems here involve O(1) entries and
# dimensions <= 4 per site, so these are generous.
TOL_HERM = 1e-10
TOL_PSD = 1e-10
TOL_TP = 1e-9


class StateClass(enum.Enum):
    NORMALIZED = "normalized"
    SUB_NORMALIZED = "sub-normalized"
    INVALID = "invalid"


class MapClass(enum.Enum):
    TRACE_PRESERVING = "trace-preserving"
    TRACE_NON_INCREASING = "trace-non-increasing"
    INVALID = "invalid"


def as_matrix(m) -> np.ndarray:
    """Coerce input to a 2-d complex128 array (copies only when needed)."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise ValueError(f"expected a matrix, got array of shape {a.shape}")
    return a


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128)
    a.flags.writeable = False
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(m).T


def mat_equal(a, b, tol: float = TOL_HERM) -> bool:
    """Tolerance-based matrix equality: max absolute entry difference."""
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        return False
    return float(np.max(np.abs(a - b))) <= tol if a.size else True


def is_hermitian(m, tol: float = TOL_HERM) -> bool:
    m = as_matrix(m)
    return m.shape[0] == m.shape[1] and mat_equal(m, dagger(m), tol)


def min_eigenvalue(m) -> float:
    """Smallest eigenvalue of a (near-)Hermitian matrix."""
    return float(np.linalg.eigvalsh(as_matrix(m))[0])


def is_psd(m, tol: float = TOL_PSD) -> bool:
    """Positive semi-definiteness via Hermitian eigenvalues with a floor."""
    return is_hermitian(m, tol) and min_eigenvalue(m) >= -tol


def check_state(m, tol: float = TOL_PSD) -> StateClass:
    """Classify a matrix as a normalized / sub-normalized state or neither.

    A sub-normalized state is Hermitian, PSD (eigenvalue floor ``-tol``) and
    has real trace in ``[-tol, 1 + tol]``; unit trace makes it normalized.
    """
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"state must be square, got shape {m.shape}")
    if not is_hermitian(m, tol) or min_eigenvalue(m) < -tol:
        return StateClass.INVALID
    tr = m.trace()
    if abs(tr.imag) > tol or tr.real < -tol or tr.real > 1.0 + tol:
        return StateClass.INVALID
    if abs(tr.real - 1.0) <= tol:
        return StateClass.NORMALIZED
    return StateClass.SUB_NORMALIZED


@dataclass(frozen=True, eq=False)
class KrausMap:
    """A completely positive map given by a finite list of Kraus operators.

    An empty operator list is the legal zero operation.  All operators are
    square and share ``dim``; the completeness sum ``sum_k E_k^† E_k`` is
    precomputed and decides the trace-preserving / non-increasing split.
    """

    dim: int
    operators: tuple[np.ndarray, ...]
    completeness_sum: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        ops = tuple(_frozen(as_matrix(e)) for e in self.operators)
        for e in ops:
            if e.shape != (self.dim, self.dim):
                raise ValueError(
                    f"Kraus operator of shape {e.shape} does not match dim {self.dim}"
                )
        total = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for e in ops:
            total += dagger(e) @ e
        object.__setattr__(self, "operators", ops)
        object.__setattr__(self, "completeness_sum", _frozen(total))

    @classmethod
    def from_operators(cls, operators, dim: int | None = None) -> "KrausMap":
        ops = [as_matrix(e) for e in operators]
        if dim is None:
            if not ops:
                raise ValueError("dim is required for an empty Kraus list")
            dim = ops[0].shape[0]
        return cls(dim=dim, operators=tuple(ops))

    @classmethod
    def zero(cls, dim: int) -> "KrausMap":
        return cls(dim=dim, operators=())

    @property
    def is_zero(self) -> bool:
        return not self.operators

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return apply_operation(self, rho)


def apply_operation(kmap: KrausMap, rho) -> np.ndarray:
    """Apply ``rho -> sum_k E_k rho E_k^†``; the empty map yields the zero state."""
    rho = as_matrix(rho)
    if rho.shape != (kmap.dim, kmap.dim):
        raise ValueError(
            f"state of shape {rho.shape} does not match operation dim {kmap.dim}"
        )
    out = np.zeros_like(rho)
    for e in kmap.operators:
        out += e @ rho @ dagger(e)
    return out


def classify_operation(kmap: KrausMap, tol: float = TOL_TP) -> MapClass:
    """TP iff the completeness sum is the identity, TNI iff it is below it."""
    s = kmap.completeness_sum
    eye = np.eye(kmap.dim)
    if mat_equal(s, eye, tol):
        return MapClass.TRACE_PRESERVING
    if is_hermitian(s, tol) and min_eigenvalue(eye - s) >= -tol and min_eigenvalue(s) >= -tol:
        return MapClass.TRACE_NON_INCREASING
    return MapClass.INVALID


@dataclass(frozen=True, eq=False)
class ViewOperator:
    """A projector deciding which internal component counts as detection."""

    projector: np.ndarray

    def __post_init__(self):
        p = _frozen(as_matrix(self.projector))
        if p.shape[0] != p.shape[1]:
            raise ValueError("view operator must be square")
        if not mat_equal(p, dagger(p), TOL_HERM) or not mat_equal(p, p @ p, TOL_HERM):
            raise ValueError("view operator must be a Hermitian projector")
        object.__setattr__(self, "projector", p)

    @property
    def dim(self) -> int:
        return self.projector.shape[0]

    @property
    def complement(self) -> np.ndarray:
        """The orthogonal complement ``1 - P`` (itself a projector)."""
        return np.eye(self.dim) - self.projector

    @classmethod
    def identity(cls, dim: int) -> "ViewOperator":
        return cls(np.eye(dim))

    @classmethod
    def zero(cls, dim: int) -> "ViewOperator":
        return cls(np.zeros((dim, dim)))


def view_from_ket(v) -> ViewOperator:
    """Rank-one view operator ``|v><v|`` from a unit-norm column vector."""
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > 1e-9:
        raise ValueError(f"ket must have unit norm, got {norm}")
    return ViewOperator(np.outer(v, np.conj(v)))


@dataclass(frozen=True, eq=False)
class Measurement:
    """A projective quantum measurement: orthogonal projectors resolving identity."""

    operators: tuple[np.ndarray, ...]

    def __post_init__(self):
        ops = tuple(_frozen(as_matrix(a)) for a in self.operators)
        if not ops:
            raise ValueError("measurement needs at least one operator")
        d = ops[0].shape[0]
        total = np.zeros((d, d), dtype=np.complex128)
        for a in ops:
            if a.shape != (d, d):
                raise ValueError("measurement operators must be square and equal-sized")
            total += dagger(a) @ a
        if not mat_equal(total, np.eye(d), TOL_TP):
            raise ValueError("measurement operators must resolve the identity")
        for i, a in enumerate(ops):
            for j, b in enumerate(ops):
                expect = a if i == j else np.zeros((d, d))
                if not mat_equal(a @ b, expect, TOL_HERM):
                    raise ValueError("measurement operators must be orthogonal projectors")
        object.__setattr__(self, "operators", ops)

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    @classmethod
    def from_view(cls, view: ViewOperator) -> "Measurement":
        """The two-outcome measurement ``{P, 1 - P}`` induced by a view."""
        return cls((view.projector, view.complement))

    def outcome_probabilities(self, rho) -> list[float]:
        rho = as_matrix(rho)
        return [float(np.real((a @ rho @ dagger(a)).trace())) for a in self.operators]


# ---------------------------------------------------------------------------
# Named constants used by the walk builders.

def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=np.complex128)
    v[index] = 1.0
    return v


def projector(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    return np.outer(v, np.conj(v))


def sigma_x() -> np.ndarray:
    return np.array([[0, 1], [1, 0]], dtype=np.complex128)


def sigma_z() -> np.ndarray:
    return np.array([[1, 0], [0, -1]], dtype=np.complex128)


def maximally_mixed(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=np.complex128) / dim


def zero_state(dim: int) -> np.ndarray:
    return np.zeros((dim, dim), dtype=np.complex128)


def qutrit_fourier_kets() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """The mutually orthonormal qutrit kets built from the cube root of unity.

    ``|x> = (1,1,1)/sqrt(3)``, ``|y> = (1,w,w^2)/sqrt(3)`` and
    ``|z> = (1,w^2,w^4)/sqrt(3)`` with ``w = exp(2*pi*i/3)``.
    """
    w = np.exp(2j * np.pi / 3)
    x = np.array([1, 1, 1], dtype=np.complex128) / np.sqrt(3)
    y = np.array([1, w, w**2], dtype=np.complex128) / np.sqrt(3)
    z = np.array([1, w**2, w**4], dtype=np.complex128) / np.sqrt(3)
    return x, y, z


def subspace_operators() -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Complementary rank-2 projector pairs on C^4 from two Pauli decompositions.

    Returns ``(B_x, C_x, B_z, C_z)`` where ``B_u = (1 - s_u x s_u)/2`` and
    ``C_u = (1 + s_u x s_u)/2``; each pair sums to the identity.
    """
    eye4 = np.eye(4, dtype=np.complex128)
    xx = np.kron(sigma_x(), sigma_x())
    zz = np.kron(sigma_z(), sigma_z())
    b_x = (eye4 - xx) / 2
    c_x = (eye4 + xx) / 2
    b_z = (eye4 - zz) / 2
    c_z = (eye4 + zz) / 2
    return b_x, c_x, b_z, c_z
