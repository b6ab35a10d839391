import numpy as np
import pytest

from flowspine import OwnershipNetwork, load_network


def net_from(edges, values=None, holders=None):
    """Small network from ``(source, target, weight)`` triples.

    Nodes without in-edges are holders unless ``holders`` says otherwise;
    ``values`` maps ids to values (default 0).
    """
    values = values or {}
    ids = []
    for s, t, _ in edges:
        for x in (s, t):
            if x not in ids:
                ids.append(x)
    for x in values:
        if x not in ids:
            ids.append(x)
    owned = {t for _, t, _ in edges}
    if holders is None:
        holders = {x for x in ids if x not in owned}
    nodes = [(x, "holder" if x in holders else "firm", values.get(x, 0)) for x in ids]
    return load_network(nodes, edges)


def random_frobenius_network(rng, n, density, normalize=True, integer_values=False):
    """Random network of ``n`` nodes where every firm has a pure-holder stake.

    The first ``max(1, n // 4)`` nodes are pure holders.  Every firm gets one
    stake from a holder, so every cycle among firms leaks and the integrated
    model exists.  With ``normalize`` every owned column sums to one.
    """
    n_h = max(1, n // 4)
    src, dst = [], []
    for j in range(n_h, n):
        src.append(int(rng.integers(0, n_h)))
        dst.append(j)
    mask = rng.random((n, n)) < density
    np.fill_diagonal(mask, False)
    mask[:, :n_h] = False
    mask[src, dst] = False
    r, c = np.nonzero(mask)
    src += r.tolist()
    dst += c.tolist()
    src, dst = np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64)
    w = rng.uniform(0.05, 1.0, src.size)
    col = np.bincount(dst, weights=w, minlength=n)
    if normalize:
        w = w / col[dst]
    else:
        w = w / col[dst] * rng.uniform(0.4, 1.0, n)[dst]
    if integer_values:
        values = rng.integers(1, 1000, n).astype(float)
    else:
        values = rng.uniform(0.0, 100.0, n)
    values[:n_h] = 0.0
    ids = [f"n{k:03d}" for k in range(n)]
    is_holder = np.arange(n) < n_h
    return OwnershipNetwork(ids, is_holder, values, src, dst, w)


@pytest.fixture
def rng():
    return np.random.default_rng(20071)
