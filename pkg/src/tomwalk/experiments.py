"""Experiment orchestration and deterministic table emission.

Reports are written as delimited tables (CSV with a single ``#`` metadata
line, or a JSON mirror of the same schema) plus rendered figures.  All
numeric output is formatted to 9 significant digits with the C locale, so
repeated runs of the same configuration are byte-identical; infinite passage
times appear as the literal token ``inf`` next to the detection mass the run
did accumulate.  Files are written atomically (temp file + rename).
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .apollonian import generate
from .passage import (
    PassageConfig,
    PassageResult,
    aggregate_results,
    classical_art_formula,
    classical_mfpt_matrix,
    qmfpt_all_sources,
    step_distribution,
)
from .qcore import ViewOperator, ket, maximally_mixed, projector, qutrit_fourier_kets, view_from_ket
from .walks import WALK_LABELS, WalkSpec, build_walk


class ConfigError(ValueError):
    """Unknown or inconsistent experiment configuration keys."""


# ---------------------------------------------------------------------------
# Registries

VIEW_KEYS = ("identity", "e0", "e1", "e2", "e3", "x", "y", "z", "plus", "imag")
INITIAL_KEYS = ("default", "maximally-mixed", "ket-x")


def make_view(key: str, dim: int) -> ViewOperator:
    """View operator for a registry key at the given internal dimension.

    ``e0..e3`` are computational projectors (the natural extension point for
    further projectors); ``x/y/z`` are the qutrit Fourier projectors and are
    defined only at dimension 3; ``plus`` and ``imag`` are the qubit
    ``(|0>+|1>)/sqrt2`` and ``(|0>+i|1>)/sqrt2`` projectors.
    """
    if key == "identity":
        return ViewOperator.identity(dim)
    if key in ("e0", "e1", "e2", "e3"):
        idx = int(key[1])
        if idx >= dim:
            raise ConfigError(f"view {key!r} needs internal dimension > {idx}, got {dim}")
        return ViewOperator(projector(ket(idx, dim)))
    if key in ("x", "y", "z"):
        if dim != 3:
            raise ConfigError(f"view {key!r} is defined for qutrit walks only (dim 3), got {dim}")
        kets = dict(zip("xyz", qutrit_fourier_kets()))
        return view_from_ket(kets[key])
    if key == "plus":
        if dim != 2:
            raise ConfigError(f"view 'plus' is defined for qubit walks only, got dim {dim}")
        return view_from_ket(np.array([1.0, 1.0]) / math.sqrt(2))
    if key == "imag":
        if dim != 2:
            raise ConfigError(f"view 'imag' is defined for qubit walks only, got dim {dim}")
        return view_from_ket(np.array([1.0, 1.0j]) / math.sqrt(2))
    raise ConfigError(f"unknown view key {key!r}; choose from {VIEW_KEYS}")


def make_initial(key: str, spec: WalkSpec) -> np.ndarray:
    if key == "default":
        return spec.default_initial
    if key == "maximally-mixed":
        return maximally_mixed(spec.internal_dim)
    if key == "ket-x":
        if spec.internal_dim != 3:
            raise ConfigError("initial 'ket-x' is defined for qutrit walks only")
        x, _, _ = qutrit_fourier_kets()
        return projector(x)
    raise ConfigError(f"unknown initial key {key!r}; choose from {INITIAL_KEYS}")


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    generation: int | None = None
    view: str = "identity"
    initial: str = "default"
    threshold: float = 1e-6
    t_max: int = 10**6
    fmt: str = "csv"
    out: Path = field(default_factory=lambda: Path("."))
    jobs: int | None = None
    plot: bool = True

    def validate(self) -> None:
        if self.experiment not in WALK_LABELS:
            raise ConfigError(
                f"unknown experiment {self.experiment!r}; choose from {WALK_LABELS}"
            )
        if self.view not in VIEW_KEYS:
            raise ConfigError(f"unknown view key {self.view!r}; choose from {VIEW_KEYS}")
        if self.initial not in INITIAL_KEYS:
            raise ConfigError(
                f"unknown initial key {self.initial!r}; choose from {INITIAL_KEYS}"
            )
        if self.fmt not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.fmt!r}")
        if not (0.0 < self.threshold < 1.0):
            raise ConfigError("threshold must lie in (0, 1)")
        if self.t_max < 1:
            raise ConfigError("t-max must be at least 1")

    def passage_config(self) -> PassageConfig:
        return PassageConfig(residual_threshold=self.threshold, t_max=self.t_max)


def resolve(cfg: ExperimentConfig) -> tuple[WalkSpec, ViewOperator, np.ndarray]:
    """Validate keys and build the walk, view and initial state."""
    cfg.validate()
    try:
        spec = build_walk(cfg.experiment, cfg.generation)
    except ValueError as err:
        raise ConfigError(str(err)) from err
    view = make_view(cfg.view, spec.internal_dim)
    rho0 = make_initial(cfg.initial, spec)
    return spec, view, rho0


# ---------------------------------------------------------------------------
# Number formatting and table IO

def format_number(x: float) -> str:
    if math.isinf(x):
        return "inf"
    return format(float(x), ".9g")


def _cell_to_text(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_number(float(value))
    return str(value)


def _cell_to_json(value):
    if isinstance(value, bool):
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return "inf" if math.isinf(v) else float(format_number(v))
    return str(value)


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_table(path: Path, meta: dict, columns: list[str], rows: list[list], fmt: str) -> Path:
    if fmt == "csv":
        meta_line = "# " + " ".join(f"{k}={v}" for k, v in meta.items())
        lines = [meta_line, ",".join(columns)]
        lines.extend(",".join(_cell_to_text(v) for v in row) for row in rows)
        _atomic_write(path, "\n".join(lines) + "\n")
    else:
        doc = {
            "meta": {k: str(v) for k, v in meta.items()},
            "columns": columns,
            "rows": [[_cell_to_json(v) for v in row] for row in rows],
        }
        _atomic_write(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path


def _parse_cell(text: str):
    if text == "true":
        return True
    if text == "false":
        return False
    if text == "inf":
        return math.inf
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def read_table(path: Path) -> tuple[dict, list[str], list[list]]:
    """Parse a table written by :func:`write_table` back into values."""
    path = Path(path)
    if path.suffix == ".json":
        doc = json.loads(path.read_text())
        rows = [[math.inf if v == "inf" else v for v in row] for row in doc["rows"]]
        return doc["meta"], doc["columns"], rows
    lines = path.read_text().splitlines()
    meta_items = (item.split("=", 1) for item in lines[0].lstrip("# ").split())
    meta = {k: v for k, v in meta_items}
    columns = lines[1].split(",")
    rows = [[_parse_cell(cell) for cell in line.split(",")] for line in lines[2:] if line]
    return meta, columns, rows


# ---------------------------------------------------------------------------
# The passage-time grid

def _matrix_column(args):
    spec, j, rho0, view, pcfg = args
    return j, qmfpt_all_sources(spec, j, rho0, view, pcfg)


def qmfpt_grid(
    spec: WalkSpec,
    rho0,
    view: ViewOperator,
    pcfg: PassageConfig,
    jobs: int | None = None,
) -> list[list[PassageResult]]:
    """All-pairs passage results; ``columns[j][i]`` is the run from i to j.

    The target grid is embarrassingly parallel; results are assembled by
    target index so the output is independent of worker count and schedule.
    """
    n = spec.n_vertices
    tasks = [(spec, j, rho0, view, pcfg) for j in range(n)]
    columns: list = [None] * n
    jobs = jobs if jobs is not None else (os.cpu_count() or 1)
    if jobs <= 1 or n <= 1:
        for task in tasks:
            j, col = _matrix_column(task)
            columns[j] = col
    else:
        with ProcessPoolExecutor(max_workers=min(jobs, n)) as pool:
            for j, col in pool.map(_matrix_column, tasks, chunksize=max(1, n // (4 * jobs))):
                columns[j] = col
    return columns


def degree_rows(
    spec: WalkSpec, columns: list[list[PassageResult]]
) -> list[tuple[int, int, PassageResult, PassageResult, float, float]]:
    """Per-degree aggregates plus the exact classical companions."""
    net = spec.network
    classical = classical_mfpt_matrix(net)
    rows = []
    for d in sorted(net.degree_histogram()):
        targets = net.vertices_with_degree(d)
        vertex_means = [
            aggregate_results(r for i, r in enumerate(columns[j]) if i != j)
            for j in targets
        ]
        qm = aggregate_results(vertex_means)
        qa = aggregate_results(columns[j][j] for j in targets)
        cm = float(
            np.mean(
                [
                    np.mean([classical[i, j] for i in range(net.n_vertices) if i != j])
                    for j in targets
                ]
            )
        )
        ca = float(np.mean([classical_art_formula(net, j) for j in targets]))
        rows.append((d, len(targets), qm, qa, cm, ca))
    return rows


# ---------------------------------------------------------------------------
# Report emission

def _meta(cfg: ExperimentConfig, table: str, extra: dict | None = None) -> dict:
    meta = {
        "table": table,
        "experiment": cfg.experiment,
        "generation": "-" if cfg.generation is None else cfg.generation,
        "view": cfg.view,
        "initial": cfg.initial,
        "threshold": format_number(cfg.threshold),
        "t_max": cfg.t_max,
        "version": __version__,
    }
    if extra:
        meta.update(extra)
    return meta


def run_experiment(cfg: ExperimentConfig) -> list[Path]:
    """Emit the passage-time matrix and degree tables (plus figures)."""
    spec, view, rho0 = resolve(cfg)
    pcfg = cfg.passage_config()
    columns = qmfpt_grid(spec, rho0, view, pcfg, cfg.jobs)
    classical = classical_mfpt_matrix(spec.network)

    matrix_rows = []
    n = spec.n_vertices
    for i in range(n):
        for j in range(n):
            r = columns[j][i]
            matrix_rows.append(
                [i, j, r.value, r.cumulative_detection, r.steps_executed,
                 r.converged, float(classical[i, j])]
            )
    matrix_cols = ["i", "j", "qmfpt", "cumulative_detection", "steps", "converged", "classical_mfpt"]

    deg_rows = []
    for d, count, qm, qa, cm, ca in degree_rows(spec, columns):
        deg_rows.append(
            [d, count, qm.value, qm.cumulative_detection, qa.value,
             qa.cumulative_detection, cm, ca]
        )
    deg_cols = [
        "degree", "n_vertices", "qmfpt", "qmfpt_cumulative",
        "qart", "qart_cumulative", "classical_mfpt", "classical_art",
    ]

    out = Path(cfg.out)
    ext = cfg.fmt
    written = [
        write_table(out / f"qmfpt_matrix.{ext}", _meta(cfg, "qmfpt_matrix"),
                    matrix_cols, matrix_rows, cfg.fmt),
        write_table(out / f"degree_table.{ext}", _meta(cfg, "degree_table"),
                    deg_cols, deg_rows, cfg.fmt),
    ]
    if cfg.plot:
        from . import plots

        written.append(plots.plot_matrix(n, matrix_rows, out / "qmfpt_matrix.png", _meta(cfg, "qmfpt_matrix")))
        written.append(plots.plot_degree_table(deg_rows, out / "degree_table.png", _meta(cfg, "degree_table")))
    return written


def emit_distribution(cfg: ExperimentConfig, t_steps: int, source: int | None = None) -> list[Path]:
    """Emit the unmonitored per-step detection table in long format."""
    if t_steps < 1:
        raise ConfigError("steps must be at least 1")
    spec, view, rho0 = resolve(cfg)
    n = spec.n_vertices
    if source is None:
        source = spec.network.central_vertex()
    if not (0 <= source < n):
        raise ConfigError(f"source vertex {source} out of range for {n} vertices")
    alpha0 = np.zeros((n, spec.internal_dim, spec.internal_dim), dtype=np.complex128)
    alpha0[source] = rho0
    table = step_distribution(spec, alpha0, view, t_steps)
    rows = [
        [t, v, float(table[t, v])]
        for t in range(table.shape[0])
        for v in range(n)
    ]
    out = Path(cfg.out)
    meta = _meta(cfg, "distribution", {"source": source, "steps": t_steps})
    written = [
        write_table(out / f"distribution.{cfg.fmt}", meta, ["t", "vertex", "probability"], rows, cfg.fmt)
    ]
    if cfg.plot:
        from . import plots

        written.append(plots.plot_distribution(table, out / "distribution.png", meta))
    return written


# ---------------------------------------------------------------------------
# Network export

_GEN_SHAPES = ("box", "hexagon", "circle", "pentagon", "diamond", "triangle", "house")
_CLASS_COLORS = (
    "#e41a1c", "#377eb8", "#4daf4a", "#984ea3", "#ff7f00",
    "#ffff33", "#a65628", "#f781bf", "#999999",
)


def export_network(generation: int, fmt: str, out: Path) -> Path:
    """Write the edge list as CSV, or a DOT rendering with class/shape labels."""
    if fmt not in ("csv", "dot"):
        raise ConfigError(f"network format must be csv or dot, got {fmt!r}")
    try:
        net = generate(generation)
    except ValueError as err:
        raise ConfigError(str(err)) from err
    out = Path(out)
    if fmt == "csv":
        meta = {"table": "edges", "generation": generation, "version": __version__}
        rows = [[u, v] for u, v in net.edges()]
        return write_table(out, meta, ["u", "v"], rows, "csv")
    part = net.class_partition()
    lines = [f"graph apollonian_g{generation} {{", "  node [style=filled];"]
    for cid, sig in enumerate(part.signatures):
        lines.append(f"  // class {cid}: neighbor generations {{{','.join(map(str, sig))}}}")
    for v in range(net.n_vertices):
        gen = net.vertex_generation[v]
        cid = part.class_of[v]
        shape = _GEN_SHAPES[gen % len(_GEN_SHAPES)]
        color = _CLASS_COLORS[cid % len(_CLASS_COLORS)]
        lines.append(
            f'  {v} [shape={shape}, fillcolor="{color}", label="{v}", class={cid}];'
        )
    for u, v in net.edges():
        lines.append(f"  {u} -- {v};")
    lines.append("}")
    _atomic_write(out, "\n".join(lines) + "\n")
    return out
