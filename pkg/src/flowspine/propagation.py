"""Integrated ownership/control over all paths and steady-state mass flow.

The integrated matrix solves ``At = A + A @ At``, i.e. ``At = (I - A)^-1 A``,
which accumulates the products of weights along every directed path.  The
flow ``phi = W (v + phi)`` collects, at every node, the value produced
downstream of it; with ``W = H`` it equals the integrated control value.

Both problems are solved either by a direct linear solve or by fixed-point
iteration on the recursion.  The fixed-point form only needs sparse
matrix products and is the one used on large networks.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import FrobeniusViolation, NonConvergence
from .network import EPS
from .topology import matrix_scc_labels

log = logging.getLogger(__name__)

DIRECT = "direct"
FIXED_POINT = "fixed-point"
AUTO = "auto"

#: Largest dimension solved densely when ``method="auto"``.
DIRECT_MAX_N = 2000
DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10**6


@dataclass(frozen=True)
class FrobeniusCheck:
    ok: bool
    offending: list

    def __bool__(self):
        return self.ok


@dataclass(frozen=True)
class IntegratedResult:
    matrix: object
    method: str
    iterations: int
    residual: float

    def toarray(self) -> np.ndarray:
        m = self.matrix
        return m.toarray() if sp.issparse(m) else np.asarray(m)


@dataclass(frozen=True)
class FlowResult:
    phi: np.ndarray
    produced: np.ndarray
    method: str
    iterations: int
    residual: float


def _as_csr(A) -> sp.csr_matrix:
    A = sp.csr_matrix(A, dtype=float, copy=True)
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"propagation matrix must be square, got {A.shape}")
    if A.nnz and A.data.min() < 0:
        raise ValueError("propagation matrix has negative entries")
    return A


def check_frobenius_condition(A, labels=None, names=None) -> FrobeniusCheck:
    """Sufficient test for ``lambda(A) < 1`` via leaking strongly connected components.

    Every SCC of the support graph must contain a node ``j`` whose column sum
    restricted to the component is below ``1 - EPS``; otherwise some set of
    nodes is entirely owned by itself.  Singleton components only fail
    through a self-loop of weight one.

    Parameters
    ----------
    A : sparse or dense square matrix
    labels : array of int, optional
        Precomputed SCC label per node.
    names : sequence, optional
        Node names used when reporting offending components.

    Returns
    -------
    FrobeniusCheck
        ``ok`` plus the offending components as sorted lists of names
        (or indices).
    """
    A = _as_csr(A)
    n = A.shape[0]
    if labels is None:
        labels = matrix_scc_labels(A)
    labels = np.asarray(labels)
    coo = A.tocoo()
    inside = labels[coo.row] == labels[coo.col]
    within = np.bincount(coo.col[inside], weights=coo.data[inside], minlength=n)
    n_comp = int(labels.max()) + 1 if n else 0
    leaks = np.zeros(n_comp, dtype=bool)
    np.logical_or.at(leaks, labels, within < 1.0 - EPS)
    offending = []
    for lab in np.flatnonzero(~leaks):
        members = np.flatnonzero(labels == lab)
        key = [names[k] for k in members] if names is not None else members.tolist()
        offending.append(sorted(key))
    offending.sort(key=lambda c: c[0])
    return FrobeniusCheck(ok=not offending, offending=offending)


def _require_frobenius(A, names):
    check = check_frobenius_condition(A, names=names)
    if not check.ok:
        raise FrobeniusViolation(check.offending)


def _pick_method(method, n):
    if method in (None, AUTO):
        return DIRECT if n <= DIRECT_MAX_N else FIXED_POINT
    if method not in (DIRECT, FIXED_POINT):
        raise ValueError(f"unknown method {method!r}; expected direct, fixed-point or auto")
    return method


def _maxabs(x) -> float:
    if sp.issparse(x):
        return float(abs(x).max()) if x.nnz else 0.0
    return float(np.max(np.abs(x))) if np.size(x) else 0.0


def _iterate(step, x0, tol, max_iter, what):
    """Run ``x <- step(x)`` until the estimated remaining error is below ``tol``.

    The error estimate is ``delta * r / (1 - r)`` with ``r`` the observed
    contraction of successive updates; it keeps slowly converging
    iterations from stopping early.  An exact zero update always stops.
    """
    x = x0
    prev = None
    for k in range(1, max_iter + 1):
        x_new = step(x)
        delta = _maxabs(x_new - x)
        x = x_new
        if delta == 0.0:
            return x, k
        if delta < tol and prev is not None and prev > 0:
            r = delta / prev
            if r < 1.0 and delta * r / (1.0 - r) < tol:
                return x, k
        prev = delta
    raise NonConvergence(f"{what}: no convergence after {max_iter} iterations "
                         f"(last update {delta:.3g})")


def integrate(A, method: str = AUTO, tol: float = DEFAULT_TOL,
              max_iter: int = DEFAULT_MAX_ITER, names=None) -> IntegratedResult:
    """Integrated matrix ``At = (I - A)^-1 A`` over all direct and indirect paths.

    ``method="direct"`` solves the linear system (densely up to
    ``DIRECT_MAX_N`` nodes, sparse LU above); ``"fixed-point"`` iterates
    ``At <- A + A @ At`` starting from ``A``.  ``"auto"`` picks direct for
    small matrices.

    Raises
    ------
    FrobeniusViolation
        Some strongly connected component has no leak.
    NonConvergence
        The fixed-point iteration hit ``max_iter``.
    """
    A = _as_csr(A)
    n = A.shape[0]
    _require_frobenius(A, names)
    method = _pick_method(method, n)
    if method == DIRECT:
        if n <= DIRECT_MAX_N:
            At = np.linalg.solve(np.eye(n) - A.toarray(), A.toarray())
            np.maximum(At, 0.0, out=At)
        else:
            At = sp.csr_matrix(spla.spsolve(sp.identity(n, format="csc") - A.tocsc(),
                                            A.tocsc()))
        iterations = 0
    else:
        At, iterations = _iterate(lambda X: (A + A @ X).tocsr(), A.copy(), tol, max_iter,
                                  "integrate")
        At.eliminate_zeros()
    residual = _maxabs(At - A - A @ At)
    log.debug("integrate: method=%s iterations=%d residual=%.3g", method, iterations, residual)
    return IntegratedResult(At, method, iterations, residual)


def integrated_control_value(Ht, v) -> np.ndarray:
    """``c~_i = sum_j Ht_ij v_j`` over every stock reached by any path."""
    if isinstance(Ht, IntegratedResult):
        Ht = Ht.matrix
    v = np.asarray(v, dtype=float)
    return np.asarray(Ht @ v, dtype=float).ravel()


def flow_steady_state(W, v, method: str = AUTO, tol: float = DEFAULT_TOL,
                      max_iter: int = DEFAULT_MAX_ITER, names=None) -> FlowResult:
    """Steady-state inflow ``phi = (I - W)^-1 W v``.

    Node ``j`` produces ``v_j`` units of mass which flow against the edges:
    node ``i`` receives the fraction ``W_ij`` of what ``j`` produces and of
    what ``j`` receives.  The fixed-point form iterates ``phi <- W (v + phi)``
    from ``phi = W v``.
    """
    W = _as_csr(W)
    n = W.shape[0]
    v = np.asarray(v, dtype=float).ravel()
    if v.shape != (n,):
        raise ValueError(f"value vector has shape {v.shape}, expected ({n},)")
    if v.size and v.min() < 0:
        raise ValueError("node values must be non-negative")
    _require_frobenius(W, names)
    method = _pick_method(method, n)
    Wv = W @ v
    if method == DIRECT:
        if n <= DIRECT_MAX_N:
            phi = np.linalg.solve(np.eye(n) - W.toarray(), Wv)
        else:
            phi = spla.spsolve(sp.identity(n, format="csc") - W.tocsc(), Wv)
        np.maximum(phi, 0.0, out=phi)
        iterations = 0
    else:
        phi, iterations = _iterate(lambda x: Wv + W @ x, Wv.copy(), tol, max_iter,
                                   "flow_steady_state")
    residual = _maxabs(phi - W @ (v + phi))
    log.debug("flow: method=%s iterations=%d residual=%.3g", method, iterations, residual)
    return FlowResult(phi, v.copy(), method, iterations, residual)
