"""
Strongly connected components and bow-ties
===========================================

Cross-shareholdings form strongly connected components.  Around each one,
nodes upstream (owners reaching into the core) and downstream (stocks owned
through it) make up a bow-tie.
"""

from flowspine import bowtie_decompose, list_bowties, load_network, strongly_connected_components

# %%
# B and C own each other; X owns into the cycle, Y is owned out of it and
# T hangs off X as a tendril that neither reaches nor leaves the core.
nodes = [(x, "firm", 1) for x in "BCY"] + [("X", "holder", 0), ("T", "firm", 1)]
edges = [("X", "B", 0.5), ("B", "C", 0.5), ("C", "B", 0.5), ("C", "Y", 1.0), ("X", "T", 1.0)]
net = load_network(nodes, edges)

for scc in strongly_connected_components(net):
    print(sorted(scc.members))

# %%
for bt in list_bowties(net):
    print(bt.to_dict())

# %%
# The decomposition can also be requested for a given core.
core = max(strongly_connected_components(net), key=len)
print(bowtie_decompose(net, core).in_set)
