"""
Indirect ownership and integrated control
=========================================

Ownership passes along chains: if A owns 80% of B and B owns 20% of C, A
indirectly owns part of C, and cross-holdings between B and C feed back
into each other.  The integrated matrix sums over all such paths.
"""

import numpy as np

from flowspine import (check_frobenius_condition, control_matrix, flow_steady_state,
                       integrate, integrated_control_value, load_network)

# %%
A = np.array([[0.0, 0.8, 0.0],
              [0.0, 0.0, 0.2],
              [0.0, 0.2, 0.0]])
print(check_frobenius_condition(A, names=["A", "B", "C"]))
for method in ("direct", "fixed-point"):
    res = integrate(A, method=method)
    print(method, res.iterations, np.round(res.toarray(), 4).tolist())

# %%
# A closed loop of full ownership has no outside owner, so the path sums
# diverge.  The check names the offending component.
closed = np.array([[0.0, 1.0], [1.0, 0.0]])
print(check_frobenius_condition(closed, names=["B", "C"]))

# %%
# Replacing ownership by control fractions gives the integrated control
# value.  The same number comes out of the flow formulation, where each
# stock sends its value upstream to its controllers.
nodes = [("P", "holder", 0), ("Q", "holder", 0), ("M", "firm", 10), ("L", "firm", 30)]
edges = [("P", "M", 0.7), ("Q", "M", 0.3), ("M", "L", 0.6), ("Q", "L", 0.4)]
net = load_network(nodes, edges)
H = control_matrix(net)
print(dict(zip(net.ids, integrated_control_value(integrate(H), net.values).round(4).tolist())))
print(dict(zip(net.ids, flow_steady_state(H, net.values).phi.round(4).tolist())))
