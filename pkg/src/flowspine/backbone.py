"""Cumulative control, backbone extraction and classification.

Shareholders are ranked by integrated control value.  Walking down the
ranking, a stock counts as controlled once a single selected holder owns more
than ``delta`` of it, or once the selected holders together do.  The
controlled market value as a function of the fraction of selected holders is
the cumulative control curve ``(eta, theta)``.  The backbone is the shortest
prefix whose controlled value reaches ``theta_hat`` of the market, together
with the stocks it controls, after pruning each stock's in-edges down to its
effective number of shareholders.
"""

from __future__ import annotations

import csv
import io
import math
from collections import deque
from dataclasses import dataclass
from typing import Mapping

import numpy as np
import scipy.sparse as sp

from .errors import BadThreshold, EmptyBackbone, UnreachableTheta
from .metrics import compute_metrics
from .network import OwnershipNetwork
from .propagation import AUTO, DEFAULT_MAX_ITER, DEFAULT_TOL, flow_steady_state

# Relative slack when comparing accumulated sums against a target fraction.
_REL_TOL = 1e-12


def _check_fraction(name, x, closed_right):
    ok = 0.0 < x < 1.0 or (closed_right and x == 1.0)
    if not ok or math.isnan(x):
        interval = "(0, 1]" if closed_right else "(0, 1)"
        raise BadThreshold(f"{name} must lie in {interval}, got {x!r}")


def rank_shareholders(c_tilde: Mapping) -> list:
    """Node ids by descending integrated control value, ties by ascending id."""
    return sorted(c_tilde, key=lambda k: (-float(c_tilde[k]), k))


@dataclass(frozen=True)
class CumulativeControlCurve:
    """Controlled value along a shareholder ranking.

    Step ``n`` (1-based) selects ``ranking[:n]``.  Per-stock entry steps are
    stored instead of the sets themselves; use :meth:`u_in` and :meth:`u_cu`
    to recover the individually and cumulatively controlled stocks.
    """

    ids: tuple
    ranking: tuple
    delta: float
    n_tot: int
    v_tot: float
    eta: np.ndarray
    theta: np.ndarray
    v_cu: np.ndarray
    in_step: np.ndarray
    cu_step: np.ndarray

    @property
    def points(self) -> list:
        return list(zip(self.eta.tolist(), self.theta.tolist()))

    def _check_step(self, n):
        if not 0 <= n <= self.n_tot:
            raise IndexError(f"step {n} outside 0..{self.n_tot}")

    def u_in_index(self, n: int) -> np.ndarray:
        self._check_step(n)
        return np.flatnonzero((self.in_step > 0) & (self.in_step <= n))

    def u_cu_index(self, n: int) -> np.ndarray:
        self._check_step(n)
        entered = (self.cu_step > 0) & (self.cu_step <= n)
        promoted = (self.in_step > 0) & (self.in_step <= n)
        return np.flatnonzero(entered & ~promoted)

    def u_in(self, n: int) -> frozenset:
        return frozenset(self.ids[k] for k in self.u_in_index(n))

    def u_cu(self, n: int) -> frozenset:
        return frozenset(self.ids[k] for k in self.u_cu_index(n))

    def first_step_reaching(self, fraction: float):
        """Smallest ``n`` with ``theta(n) >= fraction``, or None."""
        hit = np.flatnonzero(self.v_cu >= fraction * self.v_tot * (1.0 - _REL_TOL))
        if self.v_tot <= 0 or hit.size == 0:
            return None
        return int(hit[0]) + 1

    def to_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["eta", "theta"])
        for e, t in zip(self.eta.tolist(), self.theta.tolist()):
            out.writerow([repr(e), repr(t)])
        return buf.getvalue()


def cumulative_control_curve(net: OwnershipNetwork, ranking, delta: float = 0.5
                             ) -> CumulativeControlCurve:
    """Cumulative control curve of ``net`` along ``ranking``.

    Parameters
    ----------
    net : OwnershipNetwork
        Normally already normalized.
    ranking : sequence of node ids
        All shareholders of the market, most important first; its length is
        ``n_tot``.
    delta : float
        Control threshold in ``(0, 1)``; ownership must strictly exceed it.

    Notes
    -----
    A stock both individually and cumulatively controlled belongs to
    ``U_in`` only.  ``v_tot`` is the summed value of every node, including
    stocks nobody could ever control.
    """
    _check_fraction("delta", delta, closed_right=False)
    ranking = tuple(str(x) for x in ranking)
    if len(set(ranking)) != len(ranking):
        raise ValueError("ranking contains repeated node ids")
    order = [net.index(x) for x in ranking]
    n = net.n_nodes
    values = net.values.tolist()
    ptr = net.out_ptr.tolist()
    dst = net.dst.tolist()
    w = net.weight.tolist()

    cum = [0.0] * n
    in_step = [0] * n
    cu_step = [0] * n
    v_cu = np.zeros(len(order))
    total = 0.0
    for step, i in enumerate(order, start=1):
        for e in range(ptr[i], ptr[i + 1]):
            j = dst[e]
            cum[j] += w[e]
            if w[e] > delta:
                if not in_step[j]:
                    in_step[j] = step
                    if not cu_step[j]:
                        total += values[j]
            elif cum[j] > delta and not in_step[j] and not cu_step[j]:
                cu_step[j] = step
                total += values[j]
        v_cu[step - 1] = total

    n_tot = len(order)
    v_tot = float(net.values.sum())
    eta = np.arange(1, n_tot + 1) / n_tot if n_tot else np.zeros(0)
    theta = v_cu / v_tot if v_tot > 0 else np.zeros_like(v_cu)
    return CumulativeControlCurve(
        ids=net.ids, ranking=ranking, delta=float(delta), n_tot=n_tot, v_tot=v_tot,
        eta=eta, theta=theta, v_cu=v_cu,
        in_step=np.asarray(in_step, dtype=np.int64),
        cu_step=np.asarray(cu_step, dtype=np.int64),
    )


def keep_count(s: float) -> int:
    """In-edges a stock keeps when pruning: ``s`` rounded half up, at least one."""
    return max(1, int(math.floor(s + 0.5)))


@dataclass(frozen=True)
class Classification:
    s_bar: float
    h_bar: float
    eta_prime: float | None
    eta_prime_count: float | None
    quadrant: str

    def to_dict(self) -> dict:
        return {"s_bar": self.s_bar, "h_bar": self.h_bar, "eta_prime": self.eta_prime,
                "eta_prime_count": self.eta_prime_count, "quadrant": self.quadrant}


@dataclass(frozen=True)
class Backbone:
    """Power holders, the stocks they control, and the pruned ownership links.

    ``network`` is the pruned subnetwork; ``controlled_value`` is the value
    of the controlled portfolio before pruning.  ``eta_prime`` divides the
    fraction ``eta_hat`` by the count ``n_100``; ``eta_prime_count`` divides
    the count ``n_hat`` by ``n_100``.
    """

    power_holders: tuple
    stocks: tuple
    network: OwnershipNetwork
    s: dict
    s_bar: float
    h_bar: float
    n_hat: int
    n_tot: int
    eta_hat: float
    n_100: int | None
    eta_prime: float | None
    eta_prime_count: float | None
    theta_hat: float
    delta: float
    controlled_value: float
    v_tot: float
    curve: CumulativeControlCurve

    @property
    def edges(self) -> list:
        return self.network.edges

    @property
    def n_st(self) -> int:
        return len(self.stocks)

    @property
    def n_sh(self) -> int:
        return len(self.power_holders)

    def to_dict(self, classification: Classification | None = None) -> dict:
        cls = classification or classify(self)
        return {
            "power_holders": list(self.power_holders),
            "stocks": list(self.stocks),
            "edges": [{"source": e.source, "target": e.target, "weight": e.weight}
                      for e in self.edges],
            "delta": self.delta,
            "theta_hat": self.theta_hat,
            "eta_hat": self.eta_hat,
            "n_hat": self.n_hat,
            "n_tot": self.n_tot,
            "n_100": self.n_100,
            "n_st": self.n_st,
            "n_sh": self.n_sh,
            "controlled_value": self.controlled_value,
            "v_tot": self.v_tot,
            "classification": cls.to_dict(),
        }


def _as_node_array(net, c_tilde):
    if isinstance(c_tilde, Mapping):
        c = np.zeros(net.n_nodes)
        for key, val in c_tilde.items():
            c[net.index(key)] = float(val)
        return c
    c = np.asarray(c_tilde, dtype=float).ravel()
    if c.shape != (net.n_nodes,):
        raise ValueError(f"c_tilde has shape {c.shape}, expected ({net.n_nodes},)")
    return c


def shareholder_ranking(net: OwnershipNetwork, c_tilde) -> list:
    """Rank every node with at least one holding by ``c_tilde``."""
    c = _as_node_array(net, c_tilde)
    holders = np.flatnonzero(net.k_out > 0)
    return rank_shareholders({net.ids[k]: c[k] for k in holders})


def extract_backbone(net: OwnershipNetwork, c_tilde, delta: float = 0.5,
                     theta_hat: float = 0.8) -> Backbone:
    """Select power holders until they control ``theta_hat`` of total value, then prune.

    Parameters
    ----------
    net : OwnershipNetwork
        Normalized ownership network.
    c_tilde : mapping of id to value, or array aligned with ``net``
        Integrated control values used for ranking.  Only nodes holding at
        least one stake are ranked.
    delta : float
        Control threshold, default 0.5.
    theta_hat : float
        Fraction of total value the power holders must control, default 0.8.

    Raises
    ------
    UnreachableTheta
        If the curve never reaches ``theta_hat``.
    """
    _check_fraction("delta", delta, closed_right=False)
    _check_fraction("theta_hat", theta_hat, closed_right=True)
    ranking = shareholder_ranking(net, c_tilde)
    curve = cumulative_control_curve(net, ranking, delta)
    n_hat = curve.first_step_reaching(theta_hat)
    if n_hat is None:
        raise UnreachableTheta(theta_hat, float(curve.theta.max()) if curve.n_tot else 0.0)
    n_100 = curve.first_step_reaching(1.0)

    holders = np.zeros(net.n_nodes, dtype=bool)
    holders[[net.index(x) for x in ranking[:n_hat]]] = True
    portfolio = np.zeros(net.n_nodes, dtype=bool)
    portfolio[curve.u_in_index(n_hat)] = True
    portfolio[curve.u_cu_index(n_hat)] = True

    s_all = compute_metrics(net).s
    candidate = holders[net.src] & portfolio[net.dst]
    keep = np.zeros(net.n_edges, dtype=bool)
    ids, src, w = net.ids, net.src, net.weight
    for j in np.flatnonzero(portfolio):
        edges = net.in_order[net.in_ptr[j]:net.in_ptr[j + 1]]
        edges = edges[candidate[edges]]
        ranked = sorted(edges.tolist(), key=lambda e: (-w[e], ids[src[e]]))
        keep[ranked[:keep_count(s_all[j])]] = True

    sub = net.subnetwork(keep)
    kept_holders = set(ids[k] for k in np.unique(src[keep]))
    power_holders = tuple(x for x in ranking[:n_hat] if x in kept_holders)
    stock_idx = np.flatnonzero(portfolio)
    stocks = tuple(sorted(ids[k] for k in stock_idx))
    s = {ids[k]: float(s_all[k]) for k in stock_idx}
    n_st, n_sh = len(stocks), len(power_holders)
    eta_hat = n_hat / curve.n_tot
    return Backbone(
        power_holders=power_holders,
        stocks=stocks,
        network=sub,
        s=s,
        s_bar=float(np.mean(list(s.values()))) if s else float("nan"),
        h_bar=n_st / n_sh if n_sh else float("nan"),
        n_hat=n_hat,
        n_tot=curve.n_tot,
        eta_hat=eta_hat,
        n_100=n_100,
        eta_prime=eta_hat / n_100 if n_100 else None,
        eta_prime_count=n_hat / n_100 if n_100 else None,
        theta_hat=float(theta_hat),
        delta=float(delta),
        controlled_value=float(net.values[stock_idx].sum()),
        v_tot=curve.v_tot,
        curve=curve,
    )


_QUADRANTS = {("low", "low"): "A", ("high", "high"): "B",
              ("high", "low"): "C", ("low", "high"): "D"}


def _side(x, split, margin):
    lx = math.log(x)
    if lx <= split:
        return "low"
    if lx > split + margin:
        return "high"
    return None


def classify(backbone: Backbone, split_s: float = 0.0, split_h: float = 0.0,
             margin: float = 0.0) -> Classification:
    """Classification scalars of a backbone and its map-of-control quadrant.

    Quadrants by ``(ln s_bar, ln h_bar)`` against the split points:
    A low/low, B high/high, C high ``s_bar`` with low ``h_bar``, D low
    ``s_bar`` with high ``h_bar``.  A value exactly on a split counts as low;
    values in ``(split, split + margin]`` are ambiguous and yield ``"mixed"``.
    """
    if backbone.n_st == 0 or backbone.n_sh == 0:
        raise EmptyBackbone("backbone has no stocks or no power holders")
    sides = (_side(backbone.s_bar, split_s, margin), _side(backbone.h_bar, split_h, margin))
    quadrant = _QUADRANTS.get(sides, "mixed")
    return Classification(backbone.s_bar, backbone.h_bar, backbone.eta_prime,
                          backbone.eta_prime_count, quadrant)


# -- generic flow backbone --------------------------------------------------------

@dataclass(frozen=True)
class FlowBackbone:
    """Top-ranked nodes carrying ``theta_hat`` of the flow plus all their successors."""

    prefix: list
    nodes: list
    edges: list
    eta_hat: float
    theta_hat: float
    phi: np.ndarray

    def to_dict(self) -> dict:
        return {"prefix": list(self.prefix), "nodes": list(self.nodes),
                "edges": [{"source": s, "target": t, "weight": w} for s, t, w in self.edges],
                "eta_hat": self.eta_hat, "theta_hat": self.theta_hat}


def flow_backbone(W, v, theta_hat: float = 0.8, names=None, method: str = AUTO,
                  tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> FlowBackbone:
    """Backbone of a generic flow network.

    Nodes are ranked by steady-state inflow ``phi`` (ties by index); the
    shortest prefix carrying ``theta_hat`` of the total inflow is kept together
    with every node reachable from it along the edges, and the edges among
    them.
    """
    _check_fraction("theta_hat", theta_hat, closed_right=True)
    W = sp.csr_matrix(W, dtype=float, copy=True)
    W.eliminate_zeros()
    n = W.shape[0]
    label = (lambda k: names[k]) if names is not None else (lambda k: k)
    phi = flow_steady_state(W, v, method=method, tol=tol, max_iter=max_iter,
                            names=names).phi
    order = sorted(range(n), key=lambda k: (-phi[k], k))
    total = float(phi.sum())
    prefix = []
    if total > 0:
        acc = np.cumsum(phi[order])
        k_hat = int(np.searchsorted(acc, theta_hat * total * (1.0 - _REL_TOL))) + 1
        prefix = order[:min(k_hat, n)]

    seen = set(prefix)
    queue = deque(prefix)
    while queue:
        i = queue.popleft()
        for j in W.indices[W.indptr[i]:W.indptr[i + 1]].tolist():
            if j not in seen:
                seen.add(j)
                queue.append(j)
    nodes = sorted(seen)
    edges = []
    for i in nodes:
        lo, hi = W.indptr[i], W.indptr[i + 1]
        for j, w in zip(W.indices[lo:hi].tolist(), W.data[lo:hi].tolist()):
            if j in seen:
                edges.append((label(i), label(j), w))
    return FlowBackbone(
        prefix=[label(k) for k in prefix],
        nodes=[label(k) for k in nodes],
        edges=edges,
        eta_hat=len(prefix) / n if n else 0.0,
        theta_hat=float(theta_hat),
        phi=phi,
    )
