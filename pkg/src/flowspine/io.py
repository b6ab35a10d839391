"""File formats: node/edge CSV, DOT export and JSON output."""

from __future__ import annotations

import csv
import io
import json
import math
import re
from pathlib import Path

import numpy as np

from .errors import EmptySubnetwork, MalformedRecord
from .network import OwnershipNetwork, _load

NODE_COLUMNS = ("id", "kind", "value")
EDGE_COLUMNS = ("source", "target", "weight")

#: Largest subnetwork written as DOT unless forced.
DOT_MAX_NODES = 5000


def _records(path, columns):
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        header = None
        for line_no, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            row = next(csv.reader([line]))
            row = [c.strip() for c in row]
            if header is None:
                header = [c.lower() for c in row]
                missing = [c for c in columns if c not in header]
                if missing:
                    raise MalformedRecord(
                        f"header must contain {','.join(columns)}; missing {missing}",
                        line_no, str(path))
                pos = [header.index(c) for c in columns]
                continue
            if len(row) != len(header):
                raise MalformedRecord(
                    f"expected {len(header)} fields, got {len(row)}", line_no, str(path))
            yield line_no, tuple(row[p] for p in pos)
        if header is None:
            raise MalformedRecord("missing header line", None, str(path))


def read_network(nodes_path, edges_path, *, percent: bool = False) -> OwnershipNetwork:
    """Load a network from ``id,kind,value`` and ``source,target,weight`` CSV files.

    Lines starting with ``#`` and blank lines are ignored.  Errors carry the
    file name and line number.
    """
    return _load(_records(nodes_path, NODE_COLUMNS), _records(edges_path, EDGE_COLUMNS),
                 percent=percent, node_source=str(nodes_path), edge_source=str(edges_path))


def _num(x: float) -> str:
    x = float(x)
    return str(int(x)) if x.is_integer() and abs(x) < 1e15 else repr(x)


def nodes_csv(net: OwnershipNetwork) -> str:
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(NODE_COLUMNS)
    for node in net.nodes:
        value = "" if node.unlisted and node.value == 0 else _num(node.value)
        out.writerow([node.id, node.kind.value, value])
    return buf.getvalue()


def edges_csv(net: OwnershipNetwork) -> str:
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(EDGE_COLUMNS)
    ids = net.ids
    for s, t, w in zip(net.src.tolist(), net.dst.tolist(), net.weight.tolist()):
        out.writerow([ids[s], ids[t], repr(w)])
    return buf.getvalue()


def write_network(net: OwnershipNetwork, nodes_path, edges_path) -> None:
    Path(nodes_path).write_text(nodes_csv(net), encoding="utf-8")
    Path(edges_path).write_text(edges_csv(net), encoding="utf-8")


_DOT_ID = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def _dot_id(name: str) -> str:
    if _DOT_ID.match(name):
        return name
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(net: OwnershipNetwork, name: str = "backbone", force: bool = False) -> str:
    """DOT digraph of a (sub)network.

    Firms are boxes labelled with their value, holders ellipses; edge labels
    give ownership in percent with two decimals.  Nodes and edges are written
    in sorted id order so equal inputs produce identical text.
    """
    if net.n_nodes == 0:
        raise EmptySubnetwork("cannot export an empty subnetwork")
    if net.n_nodes > DOT_MAX_NODES and not force:
        raise ValueError(f"subnetwork has {net.n_nodes} nodes (> {DOT_MAX_NODES}); "
                         "pass force=True to export anyway")
    lines = [f"digraph {_dot_id(name)} {{"]
    for node in sorted(net.nodes, key=lambda x: x.id):
        if node.kind.value == "firm":
            label = f"{node.id}\\n{node.value:g}".replace('"', '\\"')
            lines.append(f'  {_dot_id(node.id)} [shape=box, label="{label}"];')
        else:
            lines.append(f"  {_dot_id(node.id)} [shape=ellipse];")
    for e in sorted(net.edges, key=lambda x: (x.source, x.target)):
        lines.append(f'  {_dot_id(e.source)} -> {_dot_id(e.target)} '
                     f'[label="{100.0 * e.weight:.2f}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def to_json(obj) -> str:
    """Deterministic JSON text; non-finite floats become ``null``."""
    return json.dumps(_clean(obj), indent=2, allow_nan=False) + "\n"
