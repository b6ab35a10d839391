"""Seeded synthetic ownership networks."""

from __future__ import annotations

import numpy as np

from .errors import RegionEExcluded
from .network import OwnershipNetwork

TOPOLOGIES = ("A", "B", "C", "D")


def _stock_values(rng, n):
    return np.round(rng.lognormal(mean=4.0, sigma=1.5, size=n), 3) + 1.0


def generate_idealized(topology: str, n_stocks: int, n_holders: int, seed=None
                       ) -> OwnershipNetwork:
    """Idealized market for one quadrant of the map of control.

    ====  =====================================================  ========  ========
    kind  construction                                           s_bar     h_bar
    ====  =====================================================  ========  ========
    A     holder ``k`` is the sole owner of stock ``k``          1         1
    B     every holder owns an equal stake of every stock        > 1       > 1
    C     each stock is shared equally by its own >= 2 holders   > 1       < 1
    D     each holder is the sole owner of a block of stocks     1         > 1
    ====  =====================================================  ========  ========

    Stock values are drawn from a log-normal distribution with ``seed``.
    Holder ids are ``P0, P1, ...``, stock ids ``S0, S1, ...``.
    """
    topology = str(topology).strip().upper()
    if topology == "E":
        raise RegionEExcluded("region E of the map of control is inconsistent and "
                              "cannot be generated")
    if topology not in TOPOLOGIES:
        raise ValueError(f"unknown topology {topology!r}; expected one of {TOPOLOGIES}")
    if n_stocks < 1 or n_holders < 1:
        raise ValueError("n_stocks and n_holders must be at least 1")
    rng = np.random.default_rng(seed)

    if topology == "A":
        if n_holders != n_stocks:
            raise ValueError("topology A needs n_holders == n_stocks")
        src = np.arange(n_holders)
        tgt = np.arange(n_stocks)
        w = np.ones(n_stocks)
    elif topology == "B":
        if n_holders < 2 or n_stocks <= n_holders:
            raise ValueError("topology B needs n_holders >= 2 and n_stocks > n_holders")
        src = np.repeat(np.arange(n_holders), n_stocks)
        tgt = np.tile(np.arange(n_stocks), n_holders)
        w = np.full(src.size, 1.0 / n_holders)
    elif topology == "C":
        if n_holders < 2 * n_stocks:
            raise ValueError("topology C needs n_holders >= 2 * n_stocks")
        src = rng.permutation(n_holders)
        tgt = np.arange(n_holders) % n_stocks
        group = np.bincount(tgt, minlength=n_stocks)
        w = 1.0 / group[tgt]
    else:
        if n_stocks < 2 * n_holders:
            raise ValueError("topology D needs n_stocks >= 2 * n_holders")
        src = rng.permutation(np.arange(n_stocks) % n_holders)
        tgt = np.arange(n_stocks)
        w = np.ones(n_stocks)

    ids = [f"P{k}" for k in range(n_holders)] + [f"S{k}" for k in range(n_stocks)]
    is_holder = np.r_[np.ones(n_holders, bool), np.zeros(n_stocks, bool)]
    values = np.r_[np.zeros(n_holders), _stock_values(rng, n_stocks)]
    return OwnershipNetwork(ids, is_holder, values, src, n_holders + tgt, w)


def random_market(n_holders: int, n_firms: int, n_edges: int, seed=None,
                  cross_fraction: float = 0.3, reported: tuple = (0.6, 1.0)
                  ) -> OwnershipNetwork:
    """Random ownership market with pure holders and cross-owning firms.

    Every firm receives at least one stake from a pure holder, so each firm
    column leaks out of any cycle of firms and the integrated model is well
    defined.  A fraction ``cross_fraction`` of the remaining edges start at
    firms.  Sources follow a heavy-tailed (Zipf-like) popularity.  Column
    sums are drawn uniformly from ``reported`` to mimic unreported stakes.
    Nodes without edges are kept.
    """
    if n_firms < 1 or n_holders < 1:
        raise ValueError("need at least one holder and one firm")
    rng = np.random.default_rng(seed)
    n = n_holders + n_firms

    def zipf_pick(size, pool):
        p = 1.0 / np.arange(1, pool + 1) ** 0.8
        return rng.choice(pool, size=size, p=p / p.sum())

    base_src = zipf_pick(n_firms, n_holders)
    base_tgt = n_holders + np.arange(n_firms)
    extra = max(n_edges - n_firms, 0)
    n_cross = int(round(extra * cross_fraction))
    src = np.concatenate([
        base_src,
        zipf_pick(extra - n_cross, n_holders),
        n_holders + rng.permutation(n_firms)[zipf_pick(n_cross, n_firms)] if n_firms else [],
    ]).astype(np.int64)
    tgt = np.concatenate([base_tgt, n_holders + rng.integers(0, n_firms, extra)])
    keep = src != tgt
    src, tgt = src[keep], tgt[keep]
    key = np.unique(src * n + tgt)
    src, tgt = key // n, key % n

    w = rng.uniform(0.01, 1.0, src.size)
    col = np.bincount(tgt, weights=w, minlength=n)
    target_sum = rng.uniform(reported[0], reported[1], n)
    w = w * (target_sum[tgt] / col[tgt])

    ids = [f"H{k}" for k in range(n_holders)] + [f"F{k}" for k in range(n_firms)]
    is_holder = np.r_[np.ones(n_holders, bool), np.zeros(n_firms, bool)]
    values = np.r_[np.zeros(n_holders), _stock_values(rng, n_firms)]
    return OwnershipNetwork(ids, is_holder, values, src, tgt, w)
