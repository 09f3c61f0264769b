"""Edge-list ingestion and delimited output with frozen schemas."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

from .graph import DynamicGraph

#: Column orders are frozen: downstream tooling diffs these files byte-wise.
FIXATION_SCHEMA = (
    "lambda", "mu", "m", "mechanism", "dynamics", "alpha", "b", "c", "delta",
    "replicates", "pure_first", "pure_second", "extinct", "timeout",
    "p_hat", "se",
)
SERIES_SCHEMA = ("t", "N", "count_first", "mean_degree")
STATIONARY_SCHEMA = ("kind", "value", "count")


class EdgeListError(ValueError):
    """Malformed edge-list line, reported with its 1-based line number."""


@dataclass
class LoadedEdgeList:
    """Ingested graph plus the token mapping and what was skipped."""

    graph: DynamicGraph
    names: dict[int, str] = field(default_factory=dict)   # node id -> token
    self_loops_skipped: int = 0
    duplicates_skipped: int = 0


def load_edge_list(path: str | Path, track_half_edges: bool = False) -> LoadedEdgeList:
    """Read an undirected simple graph: one edge per line, two whitespace-
    separated node tokens. '#' lines are comments, blank lines are ignored,
    self-loops and repeated edges are skipped and counted. Tokens are
    arbitrary strings, mapped to dense node ids in first-appearance order.
    """
    graph = DynamicGraph(track_half_edges=track_half_edges)
    ids: dict[str, int] = {}
    names: dict[int, str] = {}
    loops = 0
    dups = 0
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            tokens = line.split()
            if len(tokens) != 2:
                raise EdgeListError(
                    f"{path}:{lineno}: expected two node tokens, got {len(tokens)}"
                )
            u_tok, v_tok = tokens
            if u_tok == v_tok:
                loops += 1
                if u_tok not in ids:
                    node = graph.add_node()
                    ids[u_tok] = node
                    names[node] = u_tok
                continue
            for tok in (u_tok, v_tok):
                if tok not in ids:
                    node = graph.add_node()
                    ids[tok] = node
                    names[node] = tok
            if not graph.add_edge(ids[u_tok], ids[v_tok]):
                dups += 1
    return LoadedEdgeList(
        graph=graph, names=names,
        self_loops_skipped=loops, duplicates_skipped=dups,
    )


def format_value(value) -> str:
    """CSV cell text: 10 significant digits for floats, '' for None."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, float):
        return format(value, ".10g")
    return str(value)


def emit_csv(rows, schema, path: str | Path) -> None:
    """Header then data rows; rows are sequences aligned with ``schema``."""
    schema = tuple(schema)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(schema)
        for row in rows:
            if len(row) != len(schema):
                raise ValueError(
                    f"row has {len(row)} fields, schema has {len(schema)}"
                )
            writer.writerow([format_value(v) for v in row])


def fixation_row(params, estimate) -> tuple:
    """One FIXATION_SCHEMA row from resolved params and an estimate."""
    from .dynamics import DriftParams, SelectionParams

    dyn = params.dynamics
    alpha = b = c = delta = None
    if isinstance(dyn, DriftParams):
        kind = "drift"
        alpha = dyn.alpha
    elif isinstance(dyn, SelectionParams):
        kind = "selection"
        pay = dyn.payoff
        if pay.P == 0 and pay.R == pay.T + pay.S:  # prisoner's-dilemma form
            b = pay.T
            c = -pay.S
        delta = dyn.delta
    else:
        kind = "none"
    return (
        params.lam, params.mu, params.m, params.mechanism, kind,
        alpha, b, c, delta,
        estimate.replicates, estimate.pure_first, estimate.pure_second,
        estimate.extinct, estimate.timeout, estimate.p_hat, estimate.se,
    )
