"""
Cumulative control and the backbone
===================================

Rank shareholders by integrated control value, then add them one at a time
and track which share of total market value ends up controlled, alone or
jointly.  The backbone is the set of top holders reaching a target share
plus the stocks they control.
"""

import warnings

from flowspine import (classify, control_matrix, cumulative_control_curve, extract_backbone,
                       flow_steady_state, normalize_ownership, random_market,
                       shareholder_ranking)

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    net = normalize_ownership(random_market(300, 500, 2500, seed=4))
c_tilde = flow_steady_state(control_matrix(net), net.values).phi

# %%
ranking = shareholder_ranking(net, c_tilde)
curve = cumulative_control_curve(net, ranking, delta=0.5)
for target in (0.5, 0.8, 1.0):
    n = curve.first_step_reaching(target)
    print(f"{target:.0%} of value controlled by the top {n} of {curve.n_tot} holders")

# %%
bb = extract_backbone(net, c_tilde, delta=0.5, theta_hat=0.8)
print(f"{bb.n_hat} power holders, {bb.n_st} stocks, {bb.network.n_edges} edges")
print(f"eta_hat={bb.eta_hat:.4f}  eta'={bb.eta_prime}  s_bar={bb.s_bar:.3f}  h_bar={bb.h_bar:.3f}")
print(classify(bb).to_dict())
