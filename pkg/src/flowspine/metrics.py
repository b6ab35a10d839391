"""Local network measures: degree, strength, concentration and control.

For a stock ``j`` with in-weights ``W_ij`` the concentration index

    s_j = (sum_i W_ij)**2 / sum_i W_ij**2

is the inverse Herfindahl index of the holdings, i.e. the effective number of
shareholders.  The fraction of control shareholder ``i`` has on ``j`` is by
default ``H_ij = W_ij**2 / sum_l W_lj**2``; summing over a shareholder's
portfolio gives the control index ``h_i``, the effective number of controlled
stocks.  Portfolio value ``p_i`` and control value ``c_i`` weight the node
values ``v_j`` by ``W_ij`` and ``H_ij`` respectively.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import NoInEdges, UnknownMetric, WeightNotIncident
from .network import OwnershipNetwork

THRESHOLDS = (0.1, 0.2, 0.5)


@dataclass(frozen=True)
class ControlModel:
    """How ownership maps to control.

    ``ControlModel()`` is the quadratic model; ``ControlModel.threshold(t)``
    gives full control to the unique holder above ``t`` and none otherwise.
    """

    kind: str = "quadratic"
    threshold_value: float | None = None

    @classmethod
    def quadratic(cls) -> "ControlModel":
        return cls()

    @classmethod
    def threshold(cls, t: float) -> "ControlModel":
        t = float(t)
        if not any(math.isclose(t, x) for x in THRESHOLDS):
            raise ValueError(f"threshold must be one of {THRESHOLDS}, got {t}")
        return cls("threshold", t)

    @classmethod
    def parse(cls, text) -> "ControlModel":
        """Parse ``quadratic`` or ``threshold:<t>``."""
        if isinstance(text, cls):
            return text
        if text is None:
            return cls()
        key = str(text).strip().lower()
        if key == "quadratic":
            return cls()
        if key.startswith("threshold:"):
            return cls.threshold(float(key.split(":", 1)[1]))
        raise ValueError(f"unknown control model {text!r}")

    def __str__(self):
        if self.kind == "quadratic":
            return "quadratic"
        return f"threshold:{self.threshold_value:g}"


QUADRATIC = ControlModel()


def concentration_index(weights) -> float:
    """Effective number of shareholders of a stock from its in-weights."""
    w = np.asarray(weights, dtype=float)
    if w.size == 0:
        raise NoInEdges("concentration index is undefined without in-edges")
    s = w.sum() ** 2 / np.dot(w, w)
    return float(min(max(s, 1.0), w.size))


def control_fraction(w_ij: float, in_weights, model: ControlModel = QUADRATIC) -> float:
    """Fraction of control held through the stake ``w_ij`` among ``in_weights``."""
    w = np.asarray(in_weights, dtype=float)
    matches = np.flatnonzero(w == w_ij)
    if matches.size == 0:
        raise WeightNotIncident(f"weight {w_ij!r} is not among the in-weights")
    return float(_column_control(w, model)[matches[0]])


def _column_control(w, model):
    if model.kind == "quadratic":
        sq = w * w
        return sq / sq.sum()
    above = w > model.threshold_value
    if above.sum() == 1:
        return above.astype(float)
    return np.zeros_like(w)


def edge_control(net: OwnershipNetwork, model: ControlModel = QUADRATIC) -> np.ndarray:
    """Per-edge control fractions ``H_ij``, aligned with ``net`` edge order."""
    w, dst, n = net.weight, net.dst, net.n_nodes
    if model.kind == "quadratic":
        sq = w * w
        return sq / np.bincount(dst, weights=sq, minlength=n)[dst]
    above = w > model.threshold_value
    count = np.bincount(dst, weights=above.astype(float), minlength=n)
    return (above & (count[dst] == 1)).astype(float)


def control_matrix(net: OwnershipNetwork, model: ControlModel = QUADRATIC):
    """Sparse control matrix ``H`` with ``H[i, j] = H_ij``."""
    return net.matrix(edge_control(net, model))


def control_index(net: OwnershipNetwork, node_id, model: ControlModel = QUADRATIC) -> float:
    total = 0.0
    for e in net.out_edges(node_id):
        total += control_fraction(e.weight, net.in_weights(e.target), model)
    return total


def portfolio_value(net: OwnershipNetwork, node_id) -> float:
    return sum(e.weight * net.node(e.target).value for e in net.out_edges(node_id))


def control_value(net: OwnershipNetwork, node_id, model: ControlModel = QUADRATIC) -> float:
    return sum(control_fraction(e.weight, net.in_weights(e.target), model)
               * net.node(e.target).value
               for e in net.out_edges(node_id))


@dataclass(frozen=True)
class MetricsTable:
    """Per-node and per-edge measures, arrays aligned with the network.

    ``s`` is NaN for nodes without in-edges (undefined, not zero).
    ``H`` follows the network's edge order.
    """

    ids: tuple
    k_in: np.ndarray
    k_out: np.ndarray
    strength: np.ndarray
    s: np.ndarray
    h: np.ndarray
    p: np.ndarray
    c: np.ndarray
    H: np.ndarray
    model: ControlModel = QUADRATIC

    def row(self, node_id) -> dict:
        k = self.ids.index(node_id)
        s = self.s[k]
        return {"id": node_id, "k_in": int(self.k_in[k]), "k_out": int(self.k_out[k]),
                "strength": float(self.strength[k]),
                "s": None if np.isnan(s) else float(s),
                "h": float(self.h[k]), "p": float(self.p[k]), "c": float(self.c[k])}

    def to_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["id", "k_in", "k_out", "strength", "s", "h", "p", "c"])
        for k, node_id in enumerate(self.ids):
            s = self.s[k]
            out.writerow([node_id, int(self.k_in[k]), int(self.k_out[k]),
                          repr(float(self.strength[k])),
                          "" if np.isnan(s) else repr(float(s)),
                          repr(float(self.h[k])), repr(float(self.p[k])),
                          repr(float(self.c[k]))])
        return buf.getvalue()


def compute_metrics(net: OwnershipNetwork, model: ControlModel = QUADRATIC) -> MetricsTable:
    n, src, dst, w = net.n_nodes, net.src, net.dst, net.weight
    v = net.values
    k_in = np.bincount(dst, minlength=n)
    k_out = np.bincount(src, minlength=n)
    total = np.bincount(dst, weights=w, minlength=n)
    sq = np.bincount(dst, weights=w * w, minlength=n)
    s = np.full(n, np.nan)
    owned = k_in > 0
    s[owned] = np.clip(total[owned] ** 2 / sq[owned], 1.0, k_in[owned])
    H = edge_control(net, model)
    return MetricsTable(
        ids=net.ids,
        k_in=k_in,
        k_out=k_out,
        strength=np.bincount(src, weights=w, minlength=n),
        s=s,
        h=np.bincount(src, weights=H, minlength=n),
        p=np.bincount(src, weights=w * v[dst], minlength=n),
        c=np.bincount(src, weights=H * v[dst], minlength=n),
        H=H,
        model=model,
    )


# -- distributions --------------------------------------------------------------

METRICS = ("s", "h", "k_out")


@dataclass(frozen=True)
class Distribution:
    """Log-binned density and survival function of one metric.

    ``cdf_y[k]`` is the fraction of samples ``>= cdf_x[k]``.
    """

    metric: str
    bin_edges: np.ndarray
    pdf: np.ndarray
    counts: np.ndarray
    cdf_x: np.ndarray
    cdf_y: np.ndarray
    n_samples: int
    count_at_one: int

    @property
    def bin_centers(self) -> np.ndarray:
        return np.sqrt(self.bin_edges[:-1] * self.bin_edges[1:])


def metric_samples(table: MetricsTable, metric: str) -> np.ndarray:
    """Samples of ``metric`` over the nodes where it is meaningful.

    ``s`` is taken over owned nodes, ``h`` and ``k_out`` over shareholders.
    """
    if metric == "s":
        return table.s[table.k_in > 0]
    if metric == "h":
        return table.h[table.k_out > 0]
    if metric == "k_out":
        return table.k_out[table.k_out > 0].astype(float)
    raise UnknownMetric(f"unknown metric {metric!r}; expected one of {METRICS}")


def distribution(samples, metric: str = "s", bins: int = 20) -> Distribution:
    """Log-binned PDF and empirical survival CDF of positive samples."""
    if metric not in METRICS:
        raise UnknownMetric(f"unknown metric {metric!r}; expected one of {METRICS}")
    x = np.asarray(samples, dtype=float)
    x = x[np.isfinite(x)]
    count_at_one = int(np.count_nonzero(x == 1.0))
    pos = np.sort(x[x > 0])
    if pos.size == 0:
        empty = np.zeros(0)
        return Distribution(metric, empty, empty, empty.astype(int), empty, empty, 0,
                            count_at_one)
    lo, hi = pos[0], pos[-1]
    if lo == hi:
        edges = np.array([lo / 10 ** (0.5 / bins), lo * 10 ** (0.5 / bins)])
    else:
        edges = np.logspace(np.log10(lo), np.log10(hi), bins + 1)
        edges[0], edges[-1] = lo, hi
    counts, edges = np.histogram(pos, bins=edges)
    pdf = counts / (pos.size * np.diff(edges))
    cdf_x, first = np.unique(pos, return_index=True)
    cdf_y = 1.0 - first / pos.size
    return Distribution(metric, edges, pdf, counts, cdf_x, cdf_y, int(pos.size), count_at_one)


def distribution_export(table: MetricsTable, metric: str, bins: int = 20) -> Distribution:
    """Plot-ready distribution of ``s``, ``h`` or ``k_out`` from a metrics table."""
    return distribution(metric_samples(table, metric), metric, bins)
