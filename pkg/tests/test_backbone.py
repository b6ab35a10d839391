import itertools

import numpy as np
import pytest

from flowspine import (
    classify,
    control_matrix,
    cumulative_control_curve,
    extract_backbone,
    flow_backbone,
    flow_steady_state,
    generate_idealized,
    keep_count,
    rank_shareholders,
    shareholder_ranking,
)
from flowspine.errors import BadThreshold, EmptyBackbone, RegionEExcluded, UnreachableTheta

from conftest import net_from
from oracles import assert_curve_matches_oracle, exhaustive_fixtures, random_small_market


def c_tilde_of(net):
    return flow_steady_state(control_matrix(net), net.values).phi


def two_stock_market():
    return net_from([("Y", "S2", 1.0), ("X", "S1", 0.6), ("Y", "S1", 0.4)],
                    values={"S1": 100, "S2": 50})


def test_rank_shareholders():
    assert rank_shareholders({"X": 5, "Y": 9}) == ["Y", "X"]
    assert rank_shareholders({"Y": 5, "X": 5}) == ["X", "Y"]
    assert rank_shareholders({"b": 0, "c": 0, "a": 0}) == ["a", "b", "c"]


def test_curve_two_stock_example():
    net = two_stock_market()
    ranking = shareholder_ranking(net, c_tilde_of(net))
    assert ranking == ["Y", "X"]
    curve = cumulative_control_curve(net, ranking)
    assert curve.points == pytest.approx([(0.5, 1 / 3), (1.0, 1.0)], abs=1e-15)
    assert curve.u_in(1) == {"S2"} and curve.u_in(2) == {"S1", "S2"}
    assert_curve_matches_oracle(net, ranking, 0.5)


def test_curve_cumulative_only():
    net = net_from([("Z", "S", 0.45), ("X", "S", 0.30), ("Y", "S", 0.25)], values={"S": 10})
    curve = cumulative_control_curve(net, ["Z", "X", "Y"])
    assert curve.theta.tolist() == [0.0, 1.0, 1.0]
    assert curve.u_cu(2) == {"S"} and curve.u_in(2) == frozenset()


def test_curve_sole_shareholder():
    net = net_from([("P", "A", 1.0), ("P", "B", 1.0)], values={"A": 3, "B": 4})
    assert cumulative_control_curve(net, ["P"]).points == [(1.0, 1.0)]


def test_curve_threshold_is_strict():
    net = net_from([("P", "S", 0.5), ("Q", "S", 0.5)], values={"S": 1})
    assert cumulative_control_curve(net, ["P", "Q"]).theta.tolist() == [0.0, 1.0]


def test_curve_individual_control_takes_precedence():
    # with delta = 0.2, P and Q jointly control S before R alone holds 0.6 of it
    net = net_from([("P", "S", 0.15), ("Q", "S", 0.15), ("R", "S", 0.7)], values={"S": 1})
    curve = assert_curve_matches_oracle(net, ["P", "Q", "R"], 0.2)
    assert curve.u_cu(2) == {"S"}
    assert curve.u_in(3) == {"S"} and curve.u_cu(3) == frozenset()


@pytest.mark.parametrize("delta", [0.0, 1.0, 1.5, -0.2])
def test_curve_bad_threshold(delta):
    with pytest.raises(BadThreshold):
        cumulative_control_curve(two_stock_market(), ["Y", "X"], delta)


def test_curve_oracle_exhaustive_small_fixtures():
    count = 0
    for edges in exhaustive_fixtures():
        net = net_from(edges, values={"A": 3, "B": 5})
        holders = sorted({e[0] for e in edges})
        for ranking in itertools.permutations(holders):
            for delta in (0.5, 0.25):
                curve = assert_curve_matches_oracle(net, list(ranking), delta)
                assert curve.theta[-1] == 1.0
                count += 1
    assert count > 1000


@pytest.mark.parametrize("seed", range(200))
def test_curve_oracle_fuzzed(seed):
    rng = np.random.default_rng(seed)
    net = random_small_market(rng)
    shareholders = [net.ids[k] for k in np.flatnonzero(net.k_out > 0)]
    ranking = [shareholders[k] for k in rng.permutation(len(shareholders))]
    curve = assert_curve_matches_oracle(net, ranking, 0.5)
    # every stock is owned and normalized, so the full market is eventually controlled
    assert curve.theta[-1] == pytest.approx(1.0, abs=1e-12)


def test_backbone_two_stock_market():
    net = two_stock_market()
    bb = extract_backbone(net, c_tilde_of(net), theta_hat=1.0)
    assert bb.power_holders == ("Y", "X")
    assert bb.stocks == ("S1", "S2")
    assert bb.n_hat == 2 and bb.n_100 == 2


def test_backbone_single_holder():
    net = net_from([("P", "A", 1.0), ("P", "B", 1.0), ("P", "C", 1.0)],
                   values={"A": 1, "B": 2, "C": 3})
    bb = extract_backbone(net, c_tilde_of(net))
    assert bb.power_holders == ("P",) and bb.stocks == ("A", "B", "C")
    assert bb.eta_hat == 1.0 and bb.n_tot == 1


def five_holder_fixture():
    stakes = [0.45, 0.25, 0.15, 0.10, 0.05]
    edges = [(f"P{k}", "J", w) for k, w in enumerate(stakes)]
    edges += [(f"P{k}", f"T{k}", 1.0) for k in range(5)]
    values = {"J": 1.0, **{f"T{k}": 100.0 for k in range(5)}}
    return net_from(edges, values=values)


def test_pruning_keeps_rounded_effective_holders():
    net = five_holder_fixture()
    bb = extract_backbone(net, c_tilde_of(net), theta_hat=1.0)
    assert bb.s["J"] == pytest.approx(1 / 0.3)
    assert len(bb.power_holders) == 5
    kept = sorted(e.source for e in bb.network.in_edges("J"))
    assert kept == ["P0", "P1", "P2"]
    # portfolios of the power holders are not pruned
    assert all(bb.network.in_edges(f"T{k}") for k in range(5))


def test_keep_count_rounding():
    assert [keep_count(x) for x in (1.0, 1.49, 1.5, 2.5, 3.33, 0.7)] == [1, 1, 2, 3, 3, 1]


def test_pruning_removes_isolated_holders():
    # Q joins the prefix but every stake of Q is pruned
    net = net_from([("P", "S", 0.9), ("Q", "S", 0.1), ("P", "T", 1.0)],
                   values={"S": 10, "T": 1})
    bb = extract_backbone(net, {"P": 2.0, "Q": 1.0}, theta_hat=1.0)
    assert bb.n_hat == 1
    net2 = net_from([("A", "S", 0.3), ("B", "S", 0.3), ("C", "S", 0.3), ("D", "S", 0.1)],
                    values={"S": 1})
    bb2 = extract_backbone(net2, {"D": 4, "A": 3, "B": 2, "C": 1}, theta_hat=1.0)
    # s ~ 3.57 keeps 4 edges; all four holders are needed only if D is first
    assert set(bb2.power_holders) <= {"A", "B", "C", "D"}
    assert len(bb2.network.in_edges("S")) <= keep_count(bb2.s["S"])


def test_unreachable_theta():
    net = net_from([("P", "A", 1.0)], values={"A": 10, "U": 100}, holders={"P"})
    with pytest.raises(UnreachableTheta) as info:
        extract_backbone(net, c_tilde_of(net))
    assert info.value.max_theta == pytest.approx(10 / 110)


def test_classify_h_bar():
    net = net_from([("P1", "S1", 1.0), ("P1", "S2", 1.0), ("P2", "S3", 1.0), ("P2", "S4", 1.0)],
                   values={"S1": 1, "S2": 2, "S3": 3, "S4": 4})
    cls = classify(extract_backbone(net, c_tilde_of(net), theta_hat=1.0))
    assert cls.h_bar == 2.0 and cls.s_bar == 1.0 and cls.quadrant == "D"


def test_eta_prime_literal_arithmetic():
    edges, values = [], {}
    for k in range(50):
        edges.append((f"D{k:02d}", f"S{k:02d}", 0.9))
        for m in range(9):
            edges.append((f"m{k:02d}_{m}", f"S{k:02d}", 0.1 / 9))
        values[f"S{k:02d}"] = 1.0
    net = net_from(edges, values=values)
    bb = extract_backbone(net, c_tilde_of(net), theta_hat=1.0)
    assert bb.n_tot == 500 and bb.n_hat == 50 and bb.n_100 == 50
    assert bb.eta_hat == pytest.approx(0.1)
    assert bb.eta_prime == pytest.approx(0.002)
    assert bb.eta_prime_count == pytest.approx(1.0)


def test_classify_empty_backbone():
    net = five_holder_fixture()
    bb = extract_backbone(net, c_tilde_of(net))
    empty = type(bb)(**{**bb.__dict__, "stocks": (), "power_holders": ()})
    with pytest.raises(EmptyBackbone):
        classify(empty)


def test_classify_margin_gives_mixed():
    net = generate_idealized("B", 10, 2, seed=0)
    bb = extract_backbone(net, c_tilde_of(net))
    assert classify(bb).quadrant == "B"
    assert classify(bb, margin=1.0).quadrant == "mixed"


@pytest.mark.parametrize("seed", range(40))
def test_backbone_contract_fuzzed(seed):
    rng = np.random.default_rng(10_000 + seed)
    net = random_small_market(rng)
    theta_hat = float(rng.uniform(0.1, 1.0))
    bb = extract_backbone(net, c_tilde_of(net), theta_hat=theta_hat)
    assert bb.controlled_value >= theta_hat * bb.v_tot * (1 - 1e-12)
    for j in bb.stocks:
        assert len(bb.network.in_edges(j)) <= keep_count(bb.s[j])
    assert np.all((bb.network.k_in + bb.network.k_out) > 0)


def test_generate_d_single_holder():
    net = generate_idealized("D", 10, 1, seed=1)
    cls = classify(extract_backbone(net, c_tilde_of(net), theta_hat=1.0))
    assert (cls.s_bar, cls.h_bar) == (1.0, 10.0)


def test_generate_a_pairs():
    net = generate_idealized("A", 7, 7, seed=2)
    cls = classify(extract_backbone(net, c_tilde_of(net)))
    assert (cls.s_bar, cls.h_bar, cls.quadrant) == (1.0, 1.0, "A")


def test_generate_b_two_holders():
    net = generate_idealized("B", 10, 2, seed=3)
    cls = classify(extract_backbone(net, c_tilde_of(net)))
    assert cls.s_bar == pytest.approx(2.0) and cls.h_bar == 5.0


def test_generate_is_deterministic():
    a = generate_idealized("C", 5, 12, seed=7)
    b = generate_idealized("C", 5, 12, seed=7)
    assert a.edges == b.edges and a.nodes == b.nodes


def test_generate_region_e():
    with pytest.raises(RegionEExcluded):
        generate_idealized("E", 5, 5, seed=0)


def test_flow_backbone_single_root():
    net = net_from([("R", "A", 1.0), ("A", "B", 1.0), ("R", "C", 1.0)],
                   values={"A": 1, "B": 2, "C": 3})
    # phi: R collects 6, A collects 2, so R alone carries 0.75 of the inflow
    fb = flow_backbone(net.matrix(), net.values, 0.7, names=net.ids)
    assert fb.prefix == ["R"]
    assert set(fb.nodes) == {"R", "A", "B", "C"}
    assert len(fb.edges) == 3


def test_flow_backbone_two_stars():
    edges = [("R1", f"a{k}", 1.0) for k in range(7)] + [("R2", f"b{k}", 1.0) for k in range(3)]
    values = {**{f"a{k}": 10 for k in range(7)}, **{f"b{k}": 10 for k in range(3)}}
    net = net_from(edges, values=values)
    fb = flow_backbone(net.matrix(), net.values, 0.6, names=net.ids)
    assert fb.prefix == ["R1"]
    assert set(fb.nodes) == {"R1"} | {f"a{k}" for k in range(7)}


def test_flow_backbone_full_theta():
    net = net_from([("R", "M", 0.5), ("Q", "M", 0.5), ("M", "L", 1.0)],
                   values={"M": 4, "L": 6})
    fb = flow_backbone(net.matrix(), net.values, 1.0, names=net.ids)
    phi = fb.phi
    assert set(fb.prefix) == {net.ids[k] for k in np.flatnonzero(phi > 0)}
