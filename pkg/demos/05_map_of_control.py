"""
Idealized control structures
============================

Four stylized markets sit in the four corners of the (s_bar, h_bar) plane:
one owner per stock and one stock per owner (A), everybody owning
everything (B), many owners sharing few stocks (C) and few owners holding
many stocks each (D).
"""

import numpy as np

from flowspine import classify, control_matrix, extract_backbone, flow_steady_state, generate_idealized

sizes = {"A": (20, 20), "B": (30, 4), "C": (5, 20), "D": (30, 3)}
for topology, (n_stocks, n_holders) in sizes.items():
    net = generate_idealized(topology, n_stocks, n_holders, seed=0)
    c_tilde = flow_steady_state(control_matrix(net), net.values).phi
    cls = classify(extract_backbone(net, c_tilde))
    print(f"{topology}: ln s_bar={np.log(cls.s_bar):+.2f}  ln h_bar={np.log(cls.h_bar):+.2f}"
          f"  -> {cls.quadrant}")
