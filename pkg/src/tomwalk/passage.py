"""Monitored evolution, first-passage statistics and exact classical oracles.

The monitored cycle for a target ``j`` and view ``P`` is

    alpha(1) = E(alpha(0)),   alpha(t) = E(P_j(alpha(t-1)))  for t >= 2,

where ``P_j`` conjugates component ``j`` by the view complement and leaves
every other component alone.  The per-step detection is
``p_t = Tr(P alpha_j(t))`` and the first-passage time is ``sum_t t * p_t``,
truncated once the undetected residual ``1 - sum_t p_t`` falls below the
configured threshold.  Runs whose detection mass stops growing short of that
are reported as infinite together with the mass they did accumulate.

For speed the iteration runs on a sparse matrix compiled from the TOM (one
``kron(E, conj(E))`` block per cell); this is algebraically the same map as
:func:`tomwalk.tom.apply_tom` and the test suite holds the two to 1e-12 over
long runs.  Aggregates over all sources of one target reuse a single run by
propagating the detection functional through the transposed step matrix,
which yields the identical ``p_t`` sequence for every source at once.
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .apollonian import ApollonianNetwork
from .qcore import StateClass, ViewOperator, as_matrix, check_state
from .tom import TransitionOperationMatrix, apply_tom, vertex_masses
from .walks import WalkSpec

DEFAULT_RESIDUAL_THRESHOLD = 1e-6
DEFAULT_T_MAX = 10**6
DEFAULT_STALL_INCREMENT = 1e-15


@dataclass(frozen=True)
class PassageConfig:
    """Termination control for monitored runs.

    ``stall_window`` defaults to ``10 * n_vertices`` at run time; a run is
    declared infinite once that many consecutive detection increments stay
    below ``stall_increment`` while the cumulative mass is still short of
    ``1 - residual_threshold``.
    """

    residual_threshold: float = DEFAULT_RESIDUAL_THRESHOLD
    t_max: int = DEFAULT_T_MAX
    stall_window: int | None = None
    stall_increment: float = DEFAULT_STALL_INCREMENT

    def __post_init__(self):
        if not (0.0 < self.residual_threshold < 1.0):
            raise ValueError("residual_threshold must lie in (0, 1)")
        if self.t_max < 1:
            raise ValueError("t_max must be at least 1")

    def window(self, n_vertices: int) -> int:
        return self.stall_window if self.stall_window is not None else 10 * n_vertices


@dataclass(frozen=True)
class PassageResult:
    """Outcome of one monitored run (or an aggregate of runs).

    ``value`` is the expected passage time in steps, ``math.inf`` when the
    target (or some aggregated term) is unreachable.  ``converged`` is False
    only when the run exhausted ``t_max`` without a verdict.
    """

    value: float
    cumulative_detection: float
    steps_executed: int
    converged: bool

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.value)


def aggregate_results(results) -> PassageResult:
    """Mean of finite values; any infinite term makes the aggregate infinite."""
    results = list(results)
    if not results:
        raise ValueError("nothing to aggregate")
    finite = all(r.is_finite for r in results)
    value = sum(r.value for r in results) / len(results) if finite else math.inf
    return PassageResult(
        value=value,
        cumulative_detection=min(r.cumulative_detection for r in results),
        steps_executed=max(r.steps_executed for r in results),
        converged=all(r.converged for r in results),
    )


# ---------------------------------------------------------------------------
# Compiled step matrix

_SUPEROP_CACHE: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def _compile_step(tom: TransitionOperationMatrix):
    """Sparse matrix acting on the stacked row-major vec of a vector state."""
    cached = _SUPEROP_CACHE.get(tom)
    if cached is not None:
        return cached
    d, n = tom.internal_dim, tom.n_vertices
    dd = d * d
    rows, cols, vals = [], [], []
    for (i, j), kmap in tom.cells():
        block = np.zeros((dd, dd), dtype=np.complex128)
        for e in kmap.operators:
            block += np.kron(e, np.conj(e))
        r, c = np.nonzero(block)
        rows.append(r + i * dd)
        cols.append(c + j * dd)
        vals.append(block[r, c])
    if rows:
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        vals = np.concatenate(vals)
    step = sp.coo_matrix((vals, (rows, cols)), shape=(n * dd, n * dd)).tocsr()
    pair = (step, step.T.tocsr())
    _SUPEROP_CACHE[tom] = pair
    return pair


def _kahan_add(total, comp, term):
    y = term - comp
    t = total + y
    return t, (t - total) - y


def _resolve(spec: WalkSpec, rho0, view, cfg):
    rho0 = spec.default_initial if rho0 is None else as_matrix(rho0)
    if rho0.shape != (spec.internal_dim, spec.internal_dim):
        raise ValueError("rho0 does not match the walk's internal dimension")
    if check_state(rho0, 1e-9) is not StateClass.NORMALIZED:
        raise ValueError("rho0 must be a normalized quantum state")
    view = ViewOperator.identity(spec.internal_dim) if view is None else view
    if view.dim != spec.internal_dim:
        raise ValueError("view does not match the walk's internal dimension")
    cfg = PassageConfig() if cfg is None else cfg
    return rho0, view, cfg


def qmfpt(
    spec: WalkSpec,
    i: int,
    j: int,
    rho0=None,
    view: ViewOperator | None = None,
    cfg: PassageConfig | None = None,
    _record: list | None = None,
) -> PassageResult:
    """Quantum mean first passage time from vertex ``i`` to vertex ``j``.

    Runs the monitored cycle directly on the stacked state.  When ``_record``
    is a list, ``(t, p_t, remaining_after_projection)`` triples are appended
    for bookkeeping checks.
    """
    n, d = spec.n_vertices, spec.internal_dim
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError("vertex index out of range")
    rho0, view, cfg = _resolve(spec, rho0, view, cfg)
    step, _ = _compile_step(spec.tom)
    dd = d * d
    comp = view.complement
    wvec = view.projector.T.ravel()
    trace_vec = np.tile(np.eye(d).ravel(), n)

    x = np.zeros(n * dd, dtype=np.complex128)
    x[i * dd : (i + 1) * dd] = rho0.ravel()
    x = step @ x

    window = cfg.window(n)
    q = qc = c = cc = 0.0
    stall = 0
    t = 1
    while True:
        p = max(float(np.real(wvec @ x[j * dd : (j + 1) * dd])), 0.0)
        q, qc = _kahan_add(q, qc, t * p)
        c, cc = _kahan_add(c, cc, p)
        block = x[j * dd : (j + 1) * dd].reshape(d, d)
        x[j * dd : (j + 1) * dd] = (comp @ block @ comp).ravel()
        if _record is not None:
            remaining = float(np.real(trace_vec @ x))
            _record.append((t, p, remaining))
        if 1.0 - c < cfg.residual_threshold:
            return PassageResult(q, c, t, True)
        stall = stall + 1 if p < cfg.stall_increment else 0
        if stall >= window:
            return PassageResult(math.inf, c, t, True)
        if t >= cfg.t_max:
            return PassageResult(math.inf, c, t, False)
        x = step @ x
        t += 1


def qmfpt_all_sources(
    spec: WalkSpec,
    j: int,
    rho0=None,
    view: ViewOperator | None = None,
    cfg: PassageConfig | None = None,
) -> list[PassageResult]:
    """One result per source vertex, from a single backward-propagated run.

    The detection functional ``p_t(i) = w^T M^(t-1) S (e_i (x) vec rho0)`` is
    evaluated for every source at once by iterating the transposed step
    matrix, so each source sees exactly the monitored-cycle sequence.
    """
    n, d = spec.n_vertices, spec.internal_dim
    if not 0 <= j < n:
        raise IndexError("vertex index out of range")
    rho0, view, cfg = _resolve(spec, rho0, view, cfg)
    _, step_t = _compile_step(spec.tom)
    dd = d * d
    comp_t = view.complement.T.copy()
    rho_vec = rho0.ravel()

    r = np.zeros(n * dd, dtype=np.complex128)
    r[j * dd : (j + 1) * dd] = view.projector.T.ravel()
    r = step_t @ r

    window = cfg.window(n)
    q = np.zeros(n)
    qc = np.zeros(n)
    c = np.zeros(n)
    cc = np.zeros(n)
    stall = np.zeros(n, dtype=np.int64)
    active = np.ones(n, dtype=bool)
    value = np.full(n, math.inf)
    cum = np.zeros(n)
    steps = np.zeros(n, dtype=np.int64)
    converged = np.zeros(n, dtype=bool)

    t = 1
    while True:
        p = np.maximum(np.real(r.reshape(n, dd) @ rho_vec), 0.0)
        upd = np.where(active, p, 0.0)
        q, qc = _kahan_add(q, qc, t * upd)
        c, cc = _kahan_add(c, cc, upd)

        finite_now = active & (1.0 - c < cfg.residual_threshold)
        if finite_now.any():
            value[finite_now] = q[finite_now]
            cum[finite_now] = c[finite_now]
            steps[finite_now] = t
            converged[finite_now] = True
            active &= ~finite_now

        stall = np.where(active & (p < cfg.stall_increment), stall + 1, 0)
        stalled = active & (stall >= window)
        if stalled.any():
            cum[stalled] = c[stalled]
            steps[stalled] = t
            converged[stalled] = True
            active &= ~stalled

        if not active.any():
            break
        if t >= cfg.t_max:
            cum[active] = c[active]
            steps[active] = t
            break

        block = r[j * dd : (j + 1) * dd].reshape(d, d)
        r[j * dd : (j + 1) * dd] = (comp_t @ block @ comp_t).ravel()
        r = step_t @ r
        t += 1

    return [
        PassageResult(float(value[i]), float(cum[i]), int(steps[i]), bool(converged[i]))
        for i in range(n)
    ]


def vertex_qmfpt(
    spec: WalkSpec,
    j: int,
    rho0=None,
    view: ViewOperator | None = None,
    cfg: PassageConfig | None = None,
) -> PassageResult:
    """Mean passage time to ``j`` over all other sources."""
    results = qmfpt_all_sources(spec, j, rho0, view, cfg)
    return aggregate_results(r for i, r in enumerate(results) if i != j)


def degree_qmfpt(
    spec: WalkSpec,
    d: int,
    rho0=None,
    view: ViewOperator | None = None,
    cfg: PassageConfig | None = None,
) -> PassageResult:
    """Mean vertex passage time over all vertices of degree ``d``."""
    targets = spec.network.vertices_with_degree(d)
    if not targets:
        raise ValueError(f"no vertices of degree {d}")
    return aggregate_results(vertex_qmfpt(spec, j, rho0, view, cfg) for j in targets)


def degree_qart(
    spec: WalkSpec,
    d: int,
    rho0=None,
    view: ViewOperator | None = None,
    cfg: PassageConfig | None = None,
) -> PassageResult:
    """Mean return time over all vertices of degree ``d``."""
    targets = spec.network.vertices_with_degree(d)
    if not targets:
        raise ValueError(f"no vertices of degree {d}")
    return aggregate_results(
        qmfpt_all_sources(spec, j, rho0, view, cfg)[j] for j in targets
    )


# ---------------------------------------------------------------------------
# Exact classical oracles

def classical_transition_matrix(net: ApollonianNetwork) -> np.ndarray:
    """Column-stochastic matrix of the homogeneous walk (exit prob 1/degree)."""
    n = net.n_vertices
    p = np.zeros((n, n))
    for u in range(n):
        for v in net.neighbors[u]:
            p[v, u] = 1.0 / net.degree(u)
    return p


def classical_hitting_times(net: ApollonianNetwork, j: int) -> np.ndarray:
    """Expected steps to reach ``j`` from every vertex (entry ``j`` = return time).

    Solves ``T_i = 1 + sum_{v != j} P(i -> v) T_v`` by dense elimination.
    """
    n = net.n_vertices
    m = classical_transition_matrix(net).T.copy()
    m[:, j] = 0.0
    return np.linalg.solve(np.eye(n) - m, np.ones(n))


def classical_mfpt_exact(net: ApollonianNetwork, i: int, j: int) -> float:
    return float(classical_hitting_times(net, j)[i])


def classical_mfpt_matrix(net: ApollonianNetwork) -> np.ndarray:
    """All pairs at once: entry ``(i, j)`` is the passage time from i to j."""
    n = net.n_vertices
    out = np.empty((n, n))
    for j in range(n):
        out[:, j] = classical_hitting_times(net, j)
    return out


def classical_art_formula(net: ApollonianNetwork, i: int) -> float:
    """Degree-only return time ``sum_j d_j / d_i`` of the homogeneous walk."""
    total = sum(net.degree(v) for v in range(net.n_vertices))
    return total / net.degree(i)


# ---------------------------------------------------------------------------
# Unmonitored evolution tables

def step_distribution(
    spec: WalkSpec,
    alpha0: np.ndarray | None = None,
    view: ViewOperator | None = None,
    t_steps: int = 1,
) -> np.ndarray:
    """Rows ``t = 0..t_steps`` of per-vertex detection under plain evolution.

    ``alpha0`` defaults to the walk's default initial state parked at the
    highest-degree vertex.  With the identity view the rows are the full
    vertex masses.
    """
    if t_steps < 1:
        raise ValueError("t_steps must be at least 1")
    n = spec.n_vertices
    if alpha0 is None:
        alpha0 = np.zeros((n, spec.internal_dim, spec.internal_dim), dtype=np.complex128)
        alpha0[spec.network.central_vertex()] = spec.default_initial
    alpha = np.asarray(alpha0, dtype=np.complex128)
    rows = [vertex_masses(alpha, view)]
    for _ in range(t_steps):
        alpha = apply_tom(spec.tom, alpha)
        rows.append(vertex_masses(alpha, view))
    return np.asarray(rows)
