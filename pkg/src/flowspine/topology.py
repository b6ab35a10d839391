"""Strongly connected components and bow-tie decomposition."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import CoreTooSmall
from .network import OwnershipNetwork


@dataclass(frozen=True)
class Scc:
    members: frozenset

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(sorted(self.members))

    def __contains__(self, node_id):
        return node_id in self.members


@dataclass(frozen=True)
class BowTie:
    core: Scc
    in_set: frozenset
    out_set: frozenset
    other: frozenset

    @property
    def weak_component(self) -> frozenset:
        return self.core.members | self.in_set | self.out_set | self.other

    def to_dict(self) -> dict:
        return {"core": sorted(self.core.members), "in": sorted(self.in_set),
                "out": sorted(self.out_set), "other": sorted(self.other)}


def scc_labels(indptr, indices, n: int) -> np.ndarray:
    """Label nodes of a CSR adjacency structure by strongly connected component.

    Iterative version of Tarjan's algorithm.  Labels are assigned in the
    order components are completed (reverse topological order of the
    condensation).
    """
    indptr = np.asarray(indptr).tolist()
    indices = np.asarray(indices).tolist()
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    label = [-1] * n
    stack = []
    counter = 0
    n_comp = 0
    for root in range(n):
        if index[root] != -1:
            continue
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        work = [(root, indptr[root])]
        while work:
            v, pos = work[-1]
            end = indptr[v + 1]
            descended = False
            while pos < end:
                w = indices[pos]
                pos += 1
                if index[w] == -1:
                    work[-1] = (v, pos)
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, indptr[w]))
                    descended = True
                    break
                if on_stack[w] and index[w] < low[v]:
                    low[v] = index[w]
            if descended:
                continue
            work.pop()
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    label[w] = n_comp
                    if w == v:
                        break
                n_comp += 1
            if work:
                u = work[-1][0]
                if low[v] < low[u]:
                    low[u] = low[v]
    return np.asarray(label, dtype=np.int64)


def matrix_scc_labels(A) -> np.ndarray:
    """SCC labels of the support graph of a square matrix (``A[i, j] != 0`` is an arc)."""
    A = sp.csr_matrix(A, copy=True)
    A.eliminate_zeros()
    return scc_labels(A.indptr, A.indices, A.shape[0])


def strongly_connected_components(net: OwnershipNetwork) -> list:
    """All maximal SCCs of the network, ordered by their smallest member id."""
    labels = scc_labels(net.out_ptr, net.dst, net.n_nodes)
    groups = {}
    for node_id, lab in zip(net.ids, labels.tolist()):
        groups.setdefault(lab, []).append(node_id)
    sccs = [Scc(frozenset(m)) for m in groups.values()]
    sccs.sort(key=lambda c: min(c.members))
    return sccs


def _reach(start, ptr, nbr, order=None):
    seen = set(start)
    queue = deque(start)
    while queue:
        v = queue.popleft()
        lo, hi = ptr[v], ptr[v + 1]
        targets = nbr[lo:hi] if order is None else nbr[order[lo:hi]]
        for w in targets.tolist():
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


def bowtie_decompose(net: OwnershipNetwork, core: Scc) -> BowTie:
    """Split the weak component of ``core`` into IN, core, OUT and other nodes.

    IN holds nodes with a directed path into the core (the controlling side),
    OUT the nodes reachable from the core.  Tendrils, tubes and everything
    else attached to the component go to ``other``.
    """
    if len(core.members) < 2:
        raise CoreTooSmall(f"bow-tie core needs at least 2 members, got {len(core.members)}")
    core_idx = {net.index(x) for x in core.members}
    downstream = _reach(core_idx, net.out_ptr, net.dst)
    upstream = _reach(core_idx, net.in_ptr, net.src, order=net.in_order)
    both = (downstream & upstream) - core_idx
    assert not both, "core is not a maximal strongly connected component"

    weak = set(core_idx)
    queue = deque(core_idx)
    while queue:
        v = queue.popleft()
        lo, hi = net.out_ptr[v], net.out_ptr[v + 1]
        nbrs = net.dst[lo:hi].tolist()
        sel = net.in_order[net.in_ptr[v]:net.in_ptr[v + 1]]
        nbrs += net.src[sel].tolist()
        for w in nbrs:
            if w not in weak:
                weak.add(w)
                queue.append(w)

    ids = net.ids
    in_set = frozenset(ids[k] for k in upstream - core_idx)
    out_set = frozenset(ids[k] for k in downstream - core_idx)
    other = frozenset(ids[k] for k in weak - upstream - downstream)
    return BowTie(core=core, in_set=in_set, out_set=out_set, other=other)


def list_bowties(net: OwnershipNetwork) -> list:
    """Bow-tie decomposition around every SCC with at least two members.

    Sorted by core size, largest first; ties by smallest core member id.
    """
    cores = [c for c in strongly_connected_components(net) if len(c.members) >= 2]
    cores.sort(key=lambda c: (-len(c.members), min(c.members)))
    return [bowtie_decompose(net, c) for c in cores]
