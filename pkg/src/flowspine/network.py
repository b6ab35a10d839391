"""Ownership network data model, ingestion and normalization.

An edge ``i -> j`` with weight ``W_ij`` means that shareholder ``i`` owns the
fraction ``W_ij`` of the shares of firm ``j``.  Nodes carry a non-negative
value (market capitalization for firms, usually zero for pure holders).

The network is stored as flat numpy arrays with edges sorted by
``(source, target)`` index, so the ownership matrix in CSR form shares the
edge order.  Instances are treated as immutable; every transformation returns
a new network.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import (
    DuplicateNodeId,
    MalformedRecord,
    NegativeValue,
    NegativeWeight,
    OwnershipDataWarning,
    UnknownNode,
)

#: Tolerance on column sums of the ownership matrix.
EPS = 1e-9

# Below this distance from 1 a column is already normalized; keeps
# normalize_ownership idempotent in floating point.
_NORMALIZED_TOL = 1e-12


class NodeKind(enum.Enum):
    FIRM = "firm"
    HOLDER = "holder"

    @classmethod
    def parse(cls, text) -> "NodeKind":
        if isinstance(text, cls):
            return text
        key = str(text).strip().lower()
        aliases = {"firm": cls.FIRM, "stock": cls.FIRM, "holder": cls.HOLDER,
                   "pureholder": cls.HOLDER, "pure_holder": cls.HOLDER}
        if key not in aliases:
            raise ValueError(f"unknown node kind {text!r} (expected firm or holder)")
        return aliases[key]


@dataclass(frozen=True)
class Node:
    id: str
    kind: NodeKind
    value: float = 0.0
    unlisted: bool = False
    auto: bool = False


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    weight: float


class OwnershipNetwork:
    """Directed weighted graph of shareholdings with valued nodes.

    Parameters
    ----------
    ids : sequence of str
        Node identifiers; position defines the node index.
    is_holder : array of bool
        True for pure holders (entities that cannot be owned).
    values : array of float
        Node values ``v_j``.
    src, dst : arrays of int
        Edge endpoints as node indices.  Pairs must be unique.
    weight : array of float
        Ownership fractions ``W_ij``.
    unlisted, auto : arrays of bool, optional
        ``unlisted`` marks firms whose value is unknown (kept at 0);
        ``auto`` marks nodes created because an edge referenced them.
    """

    def __init__(self, ids, is_holder, values, src, dst, weight,
                 unlisted=None, auto=None):
        ids = tuple(str(x) for x in ids)
        n = len(ids)
        index = {}
        for k, node_id in enumerate(ids):
            if node_id in index:
                raise DuplicateNodeId(f"duplicate node id {node_id!r}")
            index[node_id] = k
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        weight = np.asarray(weight, dtype=float)
        if not (src.shape == dst.shape == weight.shape):
            raise ValueError("src, dst and weight must have the same length")
        if src.size and (src.min() < 0 or dst.min() < 0 or max(src.max(), dst.max()) >= n):
            raise ValueError("edge endpoint out of range")
        order = np.lexsort((dst, src))
        src, dst, weight = src[order], dst[order], weight[order]
        if src.size > 1:
            dup = (src[1:] == src[:-1]) & (dst[1:] == dst[:-1])
            if dup.any():
                k = int(np.flatnonzero(dup)[0])
                raise ValueError(
                    f"duplicate edge {ids[src[k]]!r} -> {ids[dst[k]]!r}; "
                    "use load_network to merge duplicates"
                )

        self._ids = ids
        self._index = index
        self._is_holder = _frozen(np.asarray(is_holder, dtype=bool).reshape(n))
        self._values = _frozen(np.asarray(values, dtype=float).reshape(n))
        self._unlisted = _frozen(
            np.zeros(n, bool) if unlisted is None else np.asarray(unlisted, bool).reshape(n))
        self._auto = _frozen(
            np.zeros(n, bool) if auto is None else np.asarray(auto, bool).reshape(n))
        self._src = _frozen(src)
        self._dst = _frozen(dst)
        self._weight = _frozen(weight)
        self._out_ptr = _frozen(np.concatenate(([0], np.cumsum(np.bincount(src, minlength=n)))))
        in_order = np.lexsort((src, dst))
        self._in_order = _frozen(in_order)
        self._in_ptr = _frozen(np.concatenate(([0], np.cumsum(np.bincount(dst, minlength=n)))))
        self._matrix = None

    # -- basic accessors -------------------------------------------------

    @property
    def ids(self) -> tuple:
        return self._ids

    @property
    def n_nodes(self) -> int:
        return len(self._ids)

    @property
    def n_edges(self) -> int:
        return int(self._src.size)

    @property
    def is_holder(self) -> np.ndarray:
        return self._is_holder

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def unlisted(self) -> np.ndarray:
        return self._unlisted

    @property
    def auto(self) -> np.ndarray:
        return self._auto

    @property
    def src(self) -> np.ndarray:
        return self._src

    @property
    def dst(self) -> np.ndarray:
        return self._dst

    @property
    def weight(self) -> np.ndarray:
        return self._weight

    @property
    def out_ptr(self) -> np.ndarray:
        """Edges of node ``k`` as source are ``out_ptr[k]:out_ptr[k+1]``."""
        return self._out_ptr

    @property
    def in_ptr(self) -> np.ndarray:
        """``in_order[in_ptr[k]:in_ptr[k+1]]`` are the in-edges of node ``k``."""
        return self._in_ptr

    @property
    def in_order(self) -> np.ndarray:
        return self._in_order

    def index(self, node_id) -> int:
        try:
            return self._index[str(node_id)]
        except KeyError:
            raise UnknownNode(f"unknown node {node_id!r}") from None

    def __contains__(self, node_id) -> bool:
        return str(node_id) in self._index

    def __len__(self) -> int:
        return self.n_nodes

    def __repr__(self) -> str:
        return f"OwnershipNetwork(n_nodes={self.n_nodes}, n_edges={self.n_edges})"

    def node(self, node_id) -> Node:
        return self._node_at(self.index(node_id))

    def _node_at(self, k: int) -> Node:
        return Node(
            id=self._ids[k],
            kind=NodeKind.HOLDER if self._is_holder[k] else NodeKind.FIRM,
            value=float(self._values[k]),
            unlisted=bool(self._unlisted[k]),
            auto=bool(self._auto[k]),
        )

    @property
    def nodes(self) -> list:
        return [self._node_at(k) for k in range(self.n_nodes)]

    @property
    def edges(self) -> list:
        ids, w = self._ids, self._weight
        return [Edge(ids[s], ids[t], float(w[k]))
                for k, (s, t) in enumerate(zip(self._src.tolist(), self._dst.tolist()))]

    def out_edges(self, node_id) -> list:
        k = self.index(node_id)
        lo, hi = self._out_ptr[k], self._out_ptr[k + 1]
        return [Edge(self._ids[k], self._ids[t], float(w))
                for t, w in zip(self._dst[lo:hi].tolist(), self._weight[lo:hi].tolist())]

    def in_edges(self, node_id) -> list:
        k = self.index(node_id)
        sel = self._in_order[self._in_ptr[k]:self._in_ptr[k + 1]]
        return [Edge(self._ids[s], self._ids[k], float(w))
                for s, w in zip(self._src[sel].tolist(), self._weight[sel].tolist())]

    def in_weights(self, node_id) -> np.ndarray:
        k = self.index(node_id)
        return self._weight[self._in_order[self._in_ptr[k]:self._in_ptr[k + 1]]].copy()

    @property
    def k_in(self) -> np.ndarray:
        return np.diff(self._in_ptr)

    @property
    def k_out(self) -> np.ndarray:
        return np.diff(self._out_ptr)

    def column_sums(self) -> np.ndarray:
        """Total reported ownership of every node, ``sum_i W_ij``."""
        return np.bincount(self._dst, weights=self._weight, minlength=self.n_nodes)

    def matrix(self, weights=None) -> sp.csr_matrix:
        """Sparse ``n x n`` matrix with entry ``[i, j]`` per edge.

        ``weights`` defaults to the ownership fractions; pass a per-edge array
        (in edge order) to build e.g. the control matrix.
        """
        if weights is None:
            if self._matrix is None:
                self._matrix = self._build_matrix(self._weight)
            return self._matrix
        return self._build_matrix(np.asarray(weights, dtype=float))

    def _build_matrix(self, data):
        n = self.n_nodes
        m = sp.csr_matrix((np.array(data, dtype=float), self._dst.copy(), self._out_ptr.copy()),
                          shape=(n, n))
        m.has_sorted_indices = True
        return m

    # -- derived networks -------------------------------------------------

    def with_weights(self, weight) -> "OwnershipNetwork":
        """Copy of the network with new per-edge weights (same edge order)."""
        return OwnershipNetwork(self._ids, self._is_holder, self._values,
                                self._src, self._dst, weight,
                                unlisted=self._unlisted, auto=self._auto)

    def subnetwork(self, edge_mask, keep_nodes=None) -> "OwnershipNetwork":
        """Network induced by the selected edges.

        Nodes incident to a kept edge are retained, plus any node index in
        ``keep_nodes``.  Node order follows the parent network.
        """
        edge_mask = np.asarray(edge_mask, dtype=bool)
        keep = np.zeros(self.n_nodes, dtype=bool)
        keep[self._src[edge_mask]] = True
        keep[self._dst[edge_mask]] = True
        if keep_nodes is not None:
            keep[np.asarray(list(keep_nodes), dtype=np.int64)] = True
        old = np.flatnonzero(keep)
        remap = -np.ones(self.n_nodes, dtype=np.int64)
        remap[old] = np.arange(old.size)
        return OwnershipNetwork(
            [self._ids[k] for k in old], self._is_holder[old], self._values[old],
            remap[self._src[edge_mask]], remap[self._dst[edge_mask]],
            self._weight[edge_mask],
            unlisted=self._unlisted[old], auto=self._auto[old],
        )


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


# -- ingestion ----------------------------------------------------------------

def _parse_value(raw, line, source):
    if raw is None:
        return 0.0, True
    if isinstance(raw, str):
        raw = raw.strip()
        if raw == "":
            return 0.0, True
    try:
        value = float(raw)
    except (TypeError, ValueError):
        raise MalformedRecord(f"value {raw!r} is not a number", line, source) from None
    if math.isnan(value) or math.isinf(value):
        raise MalformedRecord(f"value {raw!r} is not finite", line, source)
    if value < 0:
        raise NegativeValue(f"negative value {value!r}", line, source)
    return value, False


def _parse_weight(raw, line, source, percent):
    try:
        w = float(raw.strip() if isinstance(raw, str) else raw)
    except (TypeError, ValueError):
        raise MalformedRecord(f"weight {raw!r} is not a number", line, source) from None
    if math.isnan(w) or math.isinf(w):
        raise MalformedRecord(f"weight {raw!r} is not finite", line, source)
    if w < 0:
        raise NegativeWeight(f"negative weight {w!r}", line, source)
    if percent:
        w /= 100.0
    if w > 1.0 + EPS:
        hint = "" if percent else " (percentage data? use percent=True)"
        raise MalformedRecord(f"weight {w!r} exceeds 1{hint}", line, source)
    return w


def load_network(node_records: Iterable[Sequence], edge_records: Iterable[Sequence],
                 *, percent: bool = False) -> OwnershipNetwork:
    """Build a network from ``(id, kind, value)`` and ``(source, target, weight)`` records.

    Duplicate edges are merged by summing their weights, self-loops and
    zero-weight edges are dropped; each repair emits an
    :class:`~flowspine.errors.OwnershipDataWarning`.  Nodes that appear only
    in edges are created with value 0 and flagged ``auto``: as pure holders
    when they only own, as unlisted firms when they are owned.

    A value of ``None`` or an empty string marks an unlisted node (value 0).
    With ``percent=True`` the weights are divided by 100.
    """
    return _load(enumerate(node_records, start=1), enumerate(edge_records, start=1),
                 percent=percent)


def _load(node_items, edge_items, *, percent=False, node_source=None, edge_source=None):
    ids, holder, values, unlisted = [], [], [], []
    index = {}
    for line, rec in node_items:
        if len(rec) < 2:
            raise MalformedRecord(f"expected (id, kind, value), got {tuple(rec)!r}",
                                  line, node_source)
        node_id = str(rec[0]).strip()
        if not node_id:
            raise MalformedRecord("empty node id", line, node_source)
        if node_id in index:
            raise DuplicateNodeId(f"duplicate node id {node_id!r}", line, node_source)
        try:
            kind = NodeKind.parse(rec[1])
        except ValueError as exc:
            raise MalformedRecord(str(exc), line, node_source) from None
        value, is_unlisted = _parse_value(rec[2] if len(rec) > 2 else None, line, node_source)
        index[node_id] = len(ids)
        ids.append(node_id)
        holder.append(kind is NodeKind.HOLDER)
        values.append(value)
        unlisted.append(is_unlisted)
    n_declared = len(ids)

    merged = {}
    auto_targets = set()
    for line, rec in edge_items:
        if len(rec) != 3:
            raise MalformedRecord(f"expected (source, target, weight), got {tuple(rec)!r}",
                                  line, edge_source)
        s, t = str(rec[0]).strip(), str(rec[1]).strip()
        if not s or not t:
            raise MalformedRecord("empty edge endpoint", line, edge_source)
        w = _parse_weight(rec[2], line, edge_source, percent)
        for node_id in (s, t):
            if node_id not in index:
                index[node_id] = len(ids)
                ids.append(node_id)
                holder.append(True)
                values.append(0.0)
                unlisted.append(True)
        if s == t:
            warnings.warn(f"self-loop {s!r} -> {t!r} dropped (line {line})",
                          OwnershipDataWarning, stacklevel=3)
            continue
        if w == 0.0:
            warnings.warn(f"zero-weight edge {s!r} -> {t!r} dropped (line {line})",
                          OwnershipDataWarning, stacklevel=3)
            continue
        if index[t] >= n_declared:
            auto_targets.add(index[t])
        key = (index[s], index[t])
        if key in merged:
            warnings.warn(f"duplicate edge {s!r} -> {t!r} merged by summation (line {line})",
                          OwnershipDataWarning, stacklevel=3)
            merged[key] += w
        else:
            merged[key] = w

    n = len(ids)
    auto = np.zeros(n, dtype=bool)
    auto[n_declared:] = True
    holder = np.array(holder, dtype=bool)
    for k in auto_targets:
        holder[k] = False
    if n > n_declared:
        created = [ids[k] for k in range(n_declared, n)]
        warnings.warn(f"{len(created)} node(s) referenced only by edges were created: "
                      + ", ".join(created[:10]) + ("..." if len(created) > 10 else ""),
                      OwnershipDataWarning, stacklevel=3)
    if merged:
        keys = np.array(list(merged.keys()), dtype=np.int64)
        src, dst = keys[:, 0], keys[:, 1]
        weight = np.fromiter(merged.values(), dtype=float, count=len(merged))
    else:
        src = dst = np.zeros(0, dtype=np.int64)
        weight = np.zeros(0)
    return OwnershipNetwork(ids, holder, values, src, dst, weight,
                            unlisted=unlisted, auto=auto)


# -- normalization and validation --------------------------------------------

def normalize_ownership(net: OwnershipNetwork) -> OwnershipNetwork:
    """Rescale every owned node's in-weights so they sum to exactly one.

    Columns summing to less than one (unreported small stakes) are scaled up.
    Columns above ``1 + EPS`` are data errors; they are scaled down and an
    :class:`~flowspine.errors.OwnershipDataWarning` is emitted.
    """
    sums = net.column_sums()
    over = np.flatnonzero(sums > 1.0 + EPS)
    if over.size:
        shown = ", ".join(f"{net.ids[k]} ({sums[k]:.6g})" for k in over[:10])
        warnings.warn(f"{over.size} node(s) owned more than 100%, scaled down: {shown}"
                      + ("..." if over.size > 10 else ""),
                      OwnershipDataWarning, stacklevel=2)
    scale = np.ones(net.n_nodes)
    fix = (net.k_in > 0) & (np.abs(sums - 1.0) > _NORMALIZED_TOL)
    scale[fix] = 1.0 / sums[fix]
    if not fix.any():
        return net
    return net.with_weights(net.weight * scale[net.dst])


@dataclass(frozen=True)
class Violation:
    kind: str
    node: str
    detail: str


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return bool(self.violations)

    def __len__(self) -> int:
        return len(self.violations)

    def __iter__(self):
        return iter(self.violations)

    @property
    def ok(self) -> bool:
        return not self.violations

    def by_kind(self, kind: str) -> list:
        return [v for v in self.violations if v.kind == kind]


def validate(net: OwnershipNetwork) -> ValidationReport:
    """List violations of the network invariants.

    Checked: column sums at most ``1 + EPS``, edge weights in ``(0, 1]``,
    no in-edges on pure holders, and no listed firm with zero value.
    Zero-value firms are kept as they are; the entry only flags them.
    """
    report = ValidationReport()
    ids = net.ids
    sums = net.column_sums()
    for k in np.flatnonzero(sums > 1.0 + EPS):
        report.violations.append(Violation(
            "column_sum", ids[k], f"owned {sums[k]:.12g} > 1"))
    for e in np.flatnonzero((net.weight <= 0) | (net.weight > 1.0 + EPS)):
        report.violations.append(Violation(
            "edge_weight", ids[net.src[e]],
            f"weight {net.weight[e]:.12g} on {ids[net.src[e]]} -> {ids[net.dst[e]]}"))
    for k in np.flatnonzero(net.is_holder & (net.k_in > 0)):
        report.violations.append(Violation(
            "holder_in_edge", ids[k], f"pure holder has {net.k_in[k]} owner(s)"))
    for k in np.flatnonzero(~net.is_holder & (net.values == 0) & ~net.unlisted):
        report.violations.append(Violation(
            "zero_value_firm", ids[k], "listed firm with zero value"))
    return report
