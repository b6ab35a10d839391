"""
Backbone of a generic flow network
==================================

Any weighted digraph with values on the nodes can be treated the same way:
mass produced at a node flows against the edges in proportion to the
weights.  The backbone keeps the nodes collecting most of the flow and
everything they reach.
"""

import numpy as np
import scipy.sparse as sp

from flowspine import flow_backbone

rng = np.random.default_rng(6)
n = 400
# a random DAG: edges only from lower to higher index, column sums below one
rows, cols = np.triu_indices(n, k=1)
keep = rng.random(rows.size) < 0.01
W = sp.csr_matrix((rng.uniform(0.1, 1.0, keep.sum()), (rows[keep], cols[keep])), shape=(n, n))
colsum = np.asarray(W.sum(axis=0)).ravel()
W = W @ sp.diags(np.where(colsum > 0, 0.95 / np.maximum(colsum, 1e-300), 0.0))
v = rng.lognormal(0.0, 1.0, n)

for theta in (0.5, 0.8, 0.95):
    fb = flow_backbone(W, v, theta_hat=theta)
    print(f"theta={theta}: {len(fb.prefix)} top nodes, backbone of {len(fb.nodes)} nodes"
          f" and {len(fb.edges)} edges")
