"""CSV ingestion and serialization, run configuration, and SVG histograms.

File formats (all UTF-8, comma-delimited, header row required):

* ``nodes.csv``: precinct_id, population, county_id, muni_id, area,
  perimeter, then one ``<contest>_D``/``<contest>_R`` column pair per
  contest (the contest set is inferred from the header, never declared).
* ``edges.csv``: src, dst, shared_perimeter (shared_perimeter optional,
  default 1.0).
* ``assignment.csv``: precinct_id, district. District labels may be
  arbitrary strings; they are densified to 0..k-1 in first-appearance
  order and the original labels returned alongside the plan.
* ``trace.csv``: step, accepted, then the fixed metric columns documented
  in ``TRACE_COLUMNS``.

The run configuration is a flat ``key = value`` text file whose keys match
:class:`RunConfig` fields exactly; unknown keys are errors.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, fields
from typing import Optional

import numpy as np

from . import errors
from .chain import ChainTrace
from .diagnostics import AcfSeries, SweepResult
from .graph import (
    AdjacencyEdge,
    Contest,
    ElectionSet,
    Plan,
    PrecinctGraph,
    PrecinctNode,
    build_graph,
)
from .metrics import TRACE_METRIC_FIELDS

NODE_COLUMNS = ("precinct_id", "population", "county_id", "muni_id", "area", "perimeter")

TRACE_COLUMNS = ("step", "accepted") + tuple(col for col, _ in TRACE_METRIC_FIELDS)


def _read_rows(path) -> tuple:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            rows = [row for row in reader if row and any(cell.strip() for cell in row)]
    except FileNotFoundError:
        raise
    if not rows:
        raise errors.EmptyFile(f"{path}: no header row")
    header = [h.strip() for h in rows[0]]
    return header, rows[1:]


def read_nodes(path):
    """Parse nodes.csv into ``(nodes, elections)``.

    Every ``<name>_D`` column must pair with ``<name>_R``; vote cells must
    be nonnegative integers.
    """
    header, rows = _read_rows(path)
    if not rows:
        raise errors.EmptyFile(f"{path}: header but no data rows")
    col = {name: i for i, name in enumerate(header)}
    for required in NODE_COLUMNS:
        if required not in col:
            raise errors.MissingColumn(required)

    contest_names = []
    for name in header:
        if name.endswith("_D"):
            base = name[:-2]
            if f"{base}_R" not in col:
                raise errors.MissingColumn(f"{base}_R")
            contest_names.append(base)
        elif name.endswith("_R"):
            base = name[:-2]
            if f"{base}_D" not in col:
                raise errors.MissingColumn(f"{base}_D")

    def number(row_no, row, column, kind):
        raw = row[col[column]].strip()
        try:
            return kind(raw)
        except ValueError:
            cls = (
                errors.NonNumericVotes
                if column.endswith(("_D", "_R"))
                else errors.BadNumericField
            )
            raise cls(
                f"{path}: row {row_no}, column {column!r}: not numeric: {raw!r}"
            ) from None

    nodes = []
    votes = {name: ([], []) for name in contest_names}
    for row_no, row in enumerate(rows, start=2):
        if len(row) < len(header):
            raise errors.BadNumericField(
                f"{path}: row {row_no}: expected {len(header)} cells, got {len(row)}"
            )
        nodes.append(
            PrecinctNode(
                precinct_id=row[col["precinct_id"]].strip(),
                population=number(row_no, row, "population", int),
                county_id=row[col["county_id"]].strip(),
                muni_id=row[col["muni_id"]].strip(),
                area=number(row_no, row, "area", float),
                perimeter=number(row_no, row, "perimeter", float),
            )
        )
        for name in contest_names:
            d = number(row_no, row, f"{name}_D", int)
            r = number(row_no, row, f"{name}_R", int)
            if d < 0 or r < 0:
                raise errors.NonNumericVotes(
                    f"{path}: row {row_no}: negative votes in contest {name!r}"
                )
            votes[name][0].append(d)
            votes[name][1].append(r)

    contests = [
        Contest(name, np.array(dem, dtype=np.int64), np.array(rep, dtype=np.int64))
        for name, (dem, rep) in votes.items()
    ]
    return nodes, ElectionSet(contests)


def read_edges(path, node_index=None):
    """Parse edges.csv; endpoints stay precinct-id strings unless
    ``node_index`` is given, in which case they resolve to ordinals and an
    unknown id raises ``DanglingEdge`` here rather than at build time."""
    header, rows = _read_rows(path)
    col = {name: i for i, name in enumerate(header)}
    for required in ("src", "dst"):
        if required not in col:
            raise errors.MissingColumn(required)
    has_shared = "shared_perimeter" in col

    edges = []
    seen = set()
    for row_no, row in enumerate(rows, start=2):
        src = row[col["src"]].strip()
        dst = row[col["dst"]].strip()
        if has_shared and row[col["shared_perimeter"]].strip():
            raw = row[col["shared_perimeter"]].strip()
            try:
                shared = float(raw)
            except ValueError:
                raise errors.BadNumericField(
                    f"{path}: row {row_no}, column 'shared_perimeter': "
                    f"not numeric: {raw!r}"
                ) from None
        else:
            shared = 1.0
        pair = (src, dst) if src <= dst else (dst, src)
        if pair in seen:
            raise errors.DuplicateEdge(f"{path}: row {row_no}: duplicate edge {pair}")
        seen.add(pair)
        if node_index is not None:
            if src not in node_index:
                raise errors.DanglingEdge(f"{path}: row {row_no}: unknown precinct {src!r}")
            if dst not in node_index:
                raise errors.DanglingEdge(f"{path}: row {row_no}: unknown precinct {dst!r}")
            edges.append(AdjacencyEdge(node_index[src], node_index[dst], shared))
        else:
            edges.append(AdjacencyEdge(src, dst, shared))
    return edges


def read_graph(nodes_path, edges_path) -> PrecinctGraph:
    nodes, elections = read_nodes(nodes_path)
    node_index = {node.precinct_id: i for i, node in enumerate(nodes)}
    edges = read_edges(edges_path, node_index=node_index)
    return build_graph(nodes, edges, elections)


def read_assignment(path, graph: PrecinctGraph):
    """Parse assignment.csv into ``(plan, names)``.

    ``names`` maps each dense district label back to the original label
    string, in first-appearance order. Every graph precinct must appear
    exactly once.
    """
    header, rows = _read_rows(path)
    col = {name: i for i, name in enumerate(header)}
    for required in ("precinct_id", "district"):
        if required not in col:
            raise errors.MissingColumn(required)

    assignment = np.full(graph.n, -1, dtype=np.int64)
    label_of = {}
    names = {}
    for row_no, row in enumerate(rows, start=2):
        pid = row[col["precinct_id"]].strip()
        raw = row[col["district"]].strip()
        if pid not in graph.node_index:
            raise errors.UnknownPrecinct(f"{path}: row {row_no}: unknown precinct {pid!r}")
        i = graph.node_index[pid]
        if assignment[i] >= 0:
            raise errors.DuplicatePrecinctId(
                f"{path}: row {row_no}: precinct {pid!r} assigned twice"
            )
        if raw not in label_of:
            label_of[raw] = len(label_of)
            names[label_of[raw]] = raw
        assignment[i] = label_of[raw]
    if (assignment < 0).any():
        missing = [graph.nodes[i].precinct_id for i in np.flatnonzero(assignment < 0)]
        raise errors.MissingPrecinct(
            f"{path}: precincts missing from assignment: {missing[:8]}"
            + ("..." if len(missing) > 8 else "")
        )
    return Plan(assignment, len(label_of)), names


def write_nodes(graph: PrecinctGraph, path) -> None:
    header = list(NODE_COLUMNS)
    for contest in graph.elections:
        header += [f"{contest.name}_D", f"{contest.name}_R"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i, node in enumerate(graph.nodes):
            row = [
                node.precinct_id,
                str(node.population),
                node.county_id,
                node.muni_id,
                repr(float(node.area)),
                repr(float(node.perimeter)),
            ]
            for contest in graph.elections:
                row += [str(int(contest.dem[i])), str(int(contest.rep[i]))]
            writer.writerow(row)


def write_edges(graph: PrecinctGraph, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["src", "dst", "shared_perimeter"])
        for edge in graph.edges:
            writer.writerow(
                [
                    graph.nodes[edge.a].precinct_id,
                    graph.nodes[edge.b].precinct_id,
                    repr(float(edge.shared_perimeter)),
                ]
            )


def write_assignment(plan: Plan, graph: PrecinctGraph, path, names=None) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["precinct_id", "district"])
        for i, node in enumerate(graph.nodes):
            label = int(plan.assignment[i])
            writer.writerow([node.precinct_id, names[label] if names else str(label)])


def _format_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_trace(trace: ChainTrace, path) -> None:
    """One row per recorded step with the fixed ``TRACE_COLUMNS`` header.

    Floats use shortest-roundtrip repr, so identical runs produce
    byte-identical files.
    """
    if not trace.entries:
        raise errors.EmptyInput("refusing to write an empty trace")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_COLUMNS)
        for entry in trace.entries:
            row = [str(entry.step), str(int(entry.accepted))]
            for _, field_name in TRACE_METRIC_FIELDS:
                row.append(_format_cell(getattr(entry.report, field_name)))
            writer.writerow(row)


def write_summary(trace: ChainTrace, path) -> None:
    """Per-metric mean/std/min/max rows for a trace."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "mean", "std", "min", "max"])
        for column, field_name in TRACE_METRIC_FIELDS:
            values = trace.series(field_name)
            std = float(values.std(ddof=1)) if values.size > 1 else 0.0
            writer.writerow(
                [
                    column,
                    repr(float(values.mean())),
                    repr(std),
                    repr(float(values.min())),
                    repr(float(values.max())),
                ]
            )


def write_acf_csv(acf: AcfSeries, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["lag", "rho"])
        for lag, rho in zip(acf.lags, acf.rho):
            writer.writerow([str(int(lag)), repr(float(rho))])


def write_sweep_csv(result: SweepResult, path) -> None:
    """Observed points get fitted=0; the extrapolated point gets fitted=1."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["cap", "mean", "std", "n", "fitted"])
        for p in result.points:
            writer.writerow([str(p.cap), repr(p.mean), repr(p.std), str(p.n), "0"])
        writer.writerow(
            [
                repr(result.extrapolated_at),
                repr(result.extrapolated_value),
                "",
                "",
                "1",
            ]
        )


# --- SVG ----------------------------------------------------------------------

_SVG_W, _SVG_H = 640, 400
_MARGIN = 40.0


def histogram_counts(values, bins: int):
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise errors.EmptyInput("histogram needs at least one value")
    if bins < 1:
        raise ValueError("bins must be >= 1")
    return np.histogram(values, bins=bins)


def write_histogram_svg(values, bins: int, path, reference_line=None) -> None:
    """Standalone SVG: one <rect class="bar"> per bin (with a data-count
    attribute) plus an optional vertical <line class="refline">."""
    counts, edges = histogram_counts(values, bins)
    lo, hi = float(edges[0]), float(edges[-1])
    if reference_line is not None:
        lo = min(lo, float(reference_line))
        hi = max(hi, float(reference_line))
    span = hi - lo or 1.0
    peak = int(counts.max()) or 1
    plot_w = _SVG_W - 2 * _MARGIN
    plot_h = _SVG_H - 2 * _MARGIN

    def x_of(v: float) -> float:
        return _MARGIN + (v - lo) / span * plot_w

    def y_of(count: float) -> float:
        return _SVG_H - _MARGIN - count / peak * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SVG_W}" height="{_SVG_H}" '
        f'viewBox="0 0 {_SVG_W} {_SVG_H}">',
        f'<line class="axis" x1="{_MARGIN:.2f}" y1="{_SVG_H - _MARGIN:.2f}" '
        f'x2="{_SVG_W - _MARGIN:.2f}" y2="{_SVG_H - _MARGIN:.2f}" stroke="black"/>',
    ]
    for i, count in enumerate(counts):
        x0 = x_of(float(edges[i]))
        x1 = x_of(float(edges[i + 1]))
        y = y_of(float(count))
        parts.append(
            f'<rect class="bar" data-count="{int(count)}" x="{x0:.2f}" '
            f'y="{y:.2f}" width="{x1 - x0:.2f}" '
            f'height="{_SVG_H - _MARGIN - y:.2f}" fill="steelblue" stroke="white"/>'
        )
    if reference_line is not None:
        xr = x_of(float(reference_line))
        parts.append(
            f'<line class="refline" x1="{xr:.2f}" y1="{_MARGIN:.2f}" '
            f'x2="{xr:.2f}" y2="{_SVG_H - _MARGIN:.2f}" stroke="black" stroke-width="2"/>'
        )
    parts.append(
        f'<text x="{_MARGIN:.2f}" y="{_SVG_H - 10:.2f}" font-size="12">{lo:.4g}</text>'
    )
    parts.append(
        f'<text x="{_SVG_W - _MARGIN:.2f}" y="{_SVG_H - 10:.2f}" font-size="12" '
        f'text-anchor="end">{hi:.4g}</text>'
    )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")


def write_sweep_svg(result: SweepResult, path) -> None:
    """Scatter of sweep points, the OLS line, and the optional baseline."""
    caps = [p.cap for p in result.points] + [result.extrapolated_at]
    means = [p.mean for p in result.points] + [result.extrapolated_value]
    if result.baseline is not None:
        means.append(result.baseline)
    lo_x, hi_x = min(caps), max(caps)
    lo_y, hi_y = min(means), max(means)
    span_x = (hi_x - lo_x) or 1.0
    span_y = (hi_y - lo_y) or 1.0
    plot_w = _SVG_W - 2 * _MARGIN
    plot_h = _SVG_H - 2 * _MARGIN

    def x_of(v):
        return _MARGIN + (v - lo_x) / span_x * plot_w

    def y_of(v):
        return _SVG_H - _MARGIN - (v - lo_y) / span_y * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SVG_W}" height="{_SVG_H}" '
        f'viewBox="0 0 {_SVG_W} {_SVG_H}">'
    ]
    y0 = result.fit_intercept + result.fit_slope * lo_x
    y1 = result.fit_intercept + result.fit_slope * hi_x
    parts.append(
        f'<line class="fit" x1="{x_of(lo_x):.2f}" y1="{y_of(y0):.2f}" '
        f'x2="{x_of(hi_x):.2f}" y2="{y_of(y1):.2f}" stroke="steelblue"/>'
    )
    if result.baseline is not None:
        yb = y_of(result.baseline)
        parts.append(
            f'<line class="baseline" x1="{_MARGIN:.2f}" y1="{yb:.2f}" '
            f'x2="{_SVG_W - _MARGIN:.2f}" y2="{yb:.2f}" stroke="seagreen" '
            f'stroke-dasharray="4 3"/>'
        )
    for p in result.points:
        parts.append(
            f'<circle class="point" cx="{x_of(p.cap):.2f}" cy="{y_of(p.mean):.2f}" '
            f'r="4" fill="navy"/>'
        )
    parts.append(
        f'<circle class="extrapolated" cx="{x_of(result.extrapolated_at):.2f}" '
        f'cy="{y_of(result.extrapolated_value):.2f}" r="4" fill="crimson"/>'
    )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")


# --- run configuration ---------------------------------------------------------


@dataclass
class RunConfig:
    """Flat run configuration; field names double as config-file keys."""

    nodes: str = ""
    edges: str = ""
    assignment: str = ""
    steps: int = 1000
    pop_tolerance: float = 0.02
    seed: int = 0
    burn_in: int = -1  # -1 means auto (one estimated correlation length)
    thinning: int = 1
    mode: str = "permissive"  # permissive | reject | gibbs
    county_cap: int = 0
    muni_cap: int = 0
    gibbs_weight_county: float = 0.0
    gibbs_weight_muni: float = 0.0
    gibbs_weight_district_county: float = 0.0
    contests: tuple = ()  # empty means every contest in the node file
    out_dir: str = "out"
    districts: int = 0  # 0 means take k from the assignment file
    n_chains: int = 1
    workers: int = 1
    n_plans: int = 100
    tree_method: str = "uniform"
    pair_selection: str = "uniform"
    max_tree_retries: int = 50
    tree_retry_cap: int = 1000
    hist_bins: int = 20
    acf_max_lag: int = 50
    fractional_sigma: float = 0.05
    sweep_caps: tuple = ()
    sweep_metric: str = "seats_avg"
    sweep_replicates: int = 3
    sweep_extrapolate_cap: float = float("nan")
    bench_iterations: int = 1000
    bench_tree_plans: int = 20

    def validate(self) -> None:
        if self.steps < 1:
            raise errors.ConfigError(f"steps must be >= 1, got {self.steps}")
        if not 0.0 < self.pop_tolerance < 1.0:
            raise errors.ConfigError(
                f"pop_tolerance must lie in (0, 1), got {self.pop_tolerance}"
            )
        if self.county_cap < 0 or self.muni_cap < 0:
            raise errors.ConfigError("caps must be >= 0")
        if self.mode not in ("permissive", "reject", "gibbs"):
            raise errors.ConfigError(f"unknown mode {self.mode!r}")
        for key in (
            "gibbs_weight_county",
            "gibbs_weight_muni",
            "gibbs_weight_district_county",
        ):
            if getattr(self, key) < 0:
                raise errors.ConfigError(f"{key} must be >= 0")
        if self.thinning < 1:
            raise errors.ConfigError("thinning must be >= 1")
        if self.burn_in < -1:
            raise errors.ConfigError("burn_in must be >= 0, or -1 for auto")
        if self.n_chains < 1 or self.n_plans < 1 or self.workers < 1:
            raise errors.ConfigError("n_chains, n_plans, workers must be >= 1")
        if self.hist_bins < 1:
            raise errors.ConfigError("hist_bins must be >= 1")
        if not 0.0 < self.fractional_sigma < 0.5:
            raise errors.ConfigError("fractional_sigma must lie in (0, 0.5)")
        if self.tree_method not in ("uniform", "mst"):
            raise errors.ConfigError(f"unknown tree_method {self.tree_method!r}")
        if self.pair_selection not in ("uniform", "edges"):
            raise errors.ConfigError(f"unknown pair_selection {self.pair_selection!r}")

    def validate_contests(self, graph: PrecinctGraph) -> tuple:
        """Resolve the contest sample against the graph; empty means all."""
        available = graph.elections.names()
        if not self.contests:
            if not available:
                raise errors.ConfigError("node file declares no contests")
            return available
        for name in self.contests:
            if name not in graph.elections:
                raise errors.ConfigError(
                    f"contest {name!r} not present in node file; available: {available}"
                )
        return tuple(self.contests)


_CONFIG_FIELDS = {f.name: f for f in fields(RunConfig)}


def _parse_config_value(key: str, raw: str):
    raw = raw.strip()
    if key in ("contests",):
        return tuple(s.strip() for s in raw.split(",") if s.strip())
    if key in ("sweep_caps",):
        return tuple(int(s) for s in raw.split(",") if s.strip())
    if key == "burn_in":
        return -1 if raw == "auto" else int(raw)
    default = _CONFIG_FIELDS[key].default
    if isinstance(default, bool):
        return raw.lower() in ("1", "true", "yes")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return raw


def read_config(path, overrides: Optional[dict] = None) -> RunConfig:
    """Parse a key=value config file. Unknown keys fail fast; ``overrides``
    (e.g. CLI flags) win over file values."""
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise errors.ConfigError(
                        f"{path}: line {line_no}: expected key = value"
                    )
                key, _, raw = line.partition("=")
                key = key.strip()
                if key not in _CONFIG_FIELDS:
                    raise errors.ConfigError(f"{path}: line {line_no}: unknown key {key!r}")
                try:
                    values[key] = _parse_config_value(key, raw)
                except ValueError:
                    raise errors.ConfigError(
                        f"{path}: line {line_no}: bad value for {key!r}: {raw.strip()!r}"
                    ) from None
    except FileNotFoundError:
        raise errors.ConfigError(f"config file not found: {path}") from None
    for key, raw in (overrides or {}).items():
        if key not in _CONFIG_FIELDS:
            raise errors.ConfigError(f"unknown config key {key!r}")
        values[key] = (
            _parse_config_value(key, raw) if isinstance(raw, str) else raw
        )
    config = RunConfig(**values)
    config.validate()
    return config
