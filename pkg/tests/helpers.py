"""Shared fixtures: random valid TOMs, reference evolutions, exact oracles."""

from __future__ import annotations

import numpy as np

# Filled by the acceptance module; echoed in the terminal summary.
ACCEPTANCE_LINES: list[str] = []

from tomwalk.apollonian import ApollonianNetwork
from tomwalk.qcore import KrausMap, dagger
from tomwalk.tom import TransitionOperationMatrix, apply_tom, localized_state


def random_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_tom(rng, n_vertices: int, dim: int, max_kraus: int = 2) -> TransitionOperationMatrix:
    """A random valid TOM: each column's pooled Kraus sum is whitened to identity."""
    grid = {}
    for j in range(n_vertices):
        targets = [i for i in range(n_vertices) if rng.random() < 0.6]
        if not targets:
            targets = [int(rng.integers(n_vertices))]
        raw = {
            i: [random_complex(rng, (dim, dim)) for _ in range(int(rng.integers(1, max_kraus + 1)))]
            for i in targets
        }
        total = np.zeros((dim, dim), dtype=np.complex128)
        for ops in raw.values():
            for e in ops:
                total += dagger(e) @ e
        w, v = np.linalg.eigh(total)
        whiten = v @ np.diag(1.0 / np.sqrt(w)) @ dagger(v)
        for i, ops in raw.items():
            grid[(i, j)] = KrausMap.from_operators([e @ whiten for e in ops])
    return TransitionOperationMatrix(n_vertices=n_vertices, internal_dim=dim, grid=grid)


def random_density(rng, dim: int, trace: float = 1.0) -> np.ndarray:
    g = random_complex(rng, (dim, dim))
    rho = g @ dagger(g)
    return rho * (trace / np.real(np.trace(rho)))


def random_vector_state(rng, n_vertices: int, dim: int) -> np.ndarray:
    """A full vector state with random positive components summing to trace 1."""
    weights = rng.dirichlet(np.ones(n_vertices))
    alpha = np.zeros((n_vertices, dim, dim), dtype=np.complex128)
    for i, w in enumerate(weights):
        alpha[i] = random_density(rng, dim, trace=w)
    return alpha


def monitored_reference(spec, i: int, j: int, rho0, projector, threshold=1e-10, t_max=100000):
    """Literal monitored evolution via apply_tom; returns the p_t list and value.

    Independent of the compiled engine: detection and projection are done on
    the (n, d, d) state with explicit matrix products.
    """
    comp = np.eye(spec.internal_dim) - projector
    alpha = localized_state(spec.n_vertices, i, rho0)
    alpha = apply_tom(spec.tom, alpha)
    ps = []
    q = c = 0.0
    t = 1
    while t <= t_max:
        p = max(float(np.real(np.trace(projector @ alpha[j]))), 0.0)
        ps.append(p)
        q += t * p
        c += p
        if 1.0 - c < threshold:
            break
        alpha[j] = comp @ alpha[j] @ comp
        alpha = apply_tom(spec.tom, alpha)
        t += 1
    return ps, q, c


def color_chain_matrix(net: ApollonianNetwork, color: int) -> np.ndarray:
    """Column-stochastic chain of one basis state in the projector-pair walk.

    Last-generation exits route only along the two pairs containing the
    basis state (probability 1/2 each); every other exit is homogeneous.
    """
    n = net.n_vertices
    pairs = [(0, 1), (1, 2), (2, 0)]
    p = np.zeros((n, n))
    for u in range(n):
        if net.vertex_generation[u] == net.generation and net.generation >= 1:
            for k, corner in enumerate(net.host_triangle[u]):
                if color in pairs[k]:
                    p[corner, u] = 0.5
        else:
            for v in net.neighbors[u]:
                p[v, u] = 1.0 / net.degree(u)
    return p


def chain_hitting_times(p: np.ndarray, j: int) -> np.ndarray:
    """Fundamental-matrix hitting times for a column-stochastic chain."""
    n = p.shape[0]
    m = p.T.copy()
    m[:, j] = 0.0
    return np.linalg.solve(np.eye(n) - m, np.ones(n))
