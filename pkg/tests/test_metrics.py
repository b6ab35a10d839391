from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from flowspine import (
    ControlModel,
    compute_metrics,
    concentration_index,
    control_fraction,
    control_index,
    control_value,
    distribution,
    distribution_export,
    portfolio_value,
)
from flowspine.errors import NoInEdges, UnknownMetric, WeightNotIncident

from conftest import net_from, random_frobenius_network

weight_lists = st.lists(st.floats(1e-4, 1.0), min_size=1, max_size=40)


def test_concentration_equal_weights():
    assert concentration_index([0.25] * 4) == 4.0


def test_concentration_single_holder():
    assert concentration_index([1.0]) == 1.0


def test_concentration_three_holders():
    expected = Fraction(1) / (Fraction(1, 4) + Fraction(9, 100) + Fraction(1, 25))
    assert concentration_index([0.5, 0.3, 0.2]) == pytest.approx(float(expected), abs=1e-12)
    assert concentration_index([0.5, 0.3, 0.2]) == pytest.approx(2.6316, abs=1e-4)


def test_concentration_undefined_without_owners():
    with pytest.raises(NoInEdges):
        concentration_index([])


def test_control_fraction_sole_owner():
    assert control_fraction(1.0, [1.0]) == 1.0


def test_control_fraction_quadratic():
    w = [0.6, 0.3, 0.1]
    got = [control_fraction(x, w) for x in w]
    assert got == pytest.approx([0.36 / 0.46, 0.09 / 0.46, 0.01 / 0.46], abs=1e-15)
    assert got == pytest.approx([0.7826, 0.1957, 0.0217], abs=1e-4)


def test_control_fraction_threshold():
    model = ControlModel.threshold(0.5)
    assert [control_fraction(x, [0.6, 0.4], model) for x in (0.6, 0.4)] == [1.0, 0.0]


def test_threshold_without_unique_controller():
    model = ControlModel.threshold(0.1)
    w = [0.45, 0.3, 0.25]
    assert [control_fraction(x, w, model) for x in w] == [0.0, 0.0, 0.0]
    assert [control_fraction(x, [0.4, 0.35, 0.05], ControlModel.threshold(0.5))
            for x in (0.4, 0.35, 0.05)] == [0.0, 0.0, 0.0]


def test_control_fraction_weight_not_incident():
    with pytest.raises(WeightNotIncident):
        control_fraction(0.9, [0.6, 0.4])


def test_control_model_parse():
    assert ControlModel.parse("quadratic") == ControlModel()
    assert ControlModel.parse("threshold:0.2") == ControlModel("threshold", 0.2)
    assert str(ControlModel.parse("threshold:0.5")) == "threshold:0.5"
    with pytest.raises(ValueError):
        ControlModel.parse("threshold:0.3")
    with pytest.raises(ValueError):
        ControlModel.parse("banzhaf")


def test_control_index_sole_owner_of_three():
    net = net_from([("i", "a", 1.0), ("i", "b", 1.0), ("i", "c", 1.0)])
    assert control_index(net, "i") == 3.0
    assert compute_metrics(net).h[net.index("i")] == 3.0


def test_portfolio_value_single_term():
    net = net_from([("i", "j", 0.5), ("x", "j", 0.5)], values={"j": 100})
    assert portfolio_value(net, "i") == 50.0


def test_control_value_direct():
    net = net_from([("i", "j", 0.6), ("x", "j", 0.4)], values={"j": 100})
    assert control_value(net, "i") == pytest.approx(100 * 0.36 / 0.52, abs=1e-12)
    assert control_value(net, "i") == pytest.approx(69.23, abs=5e-3)


def test_empty_portfolio_is_zero():
    net = net_from([("i", "j", 1.0)], values={"j": 5, "z": 0})
    assert (control_index(net, "z"), portfolio_value(net, "z"), control_value(net, "z")) == (0, 0, 0)


def test_table_matches_scalar_functions(rng):
    net = random_frobenius_network(rng, 40, 0.15, normalize=False)
    table = compute_metrics(net)
    for k, node_id in enumerate(net.ids):
        w = net.in_weights(node_id)
        if w.size:
            assert table.s[k] == pytest.approx(concentration_index(w), rel=1e-12)
        else:
            assert np.isnan(table.s[k])
        assert table.h[k] == pytest.approx(control_index(net, node_id), abs=1e-12)
        assert table.p[k] == pytest.approx(portfolio_value(net, node_id), abs=1e-9)
        assert table.c[k] == pytest.approx(control_value(net, node_id), abs=1e-9)
        assert table.strength[k] == pytest.approx(sum(e.weight for e in net.out_edges(node_id)))


def test_metrics_csv_has_empty_cells_for_undefined():
    net = net_from([("i", "j", 1.0)], values={"j": 5})
    lines = compute_metrics(net).to_csv().splitlines()
    assert lines[0] == "id,k_in,k_out,strength,s,h,p,c"
    assert lines[1].split(",")[4] == ""
    assert lines[2].split(",")[4] == "1.0"


@settings(max_examples=300, deadline=None)
@given(weight_lists)
def test_concentration_range(w):
    s = concentration_index(w)
    assert 1.0 <= s <= len(w)


@settings(max_examples=300, deadline=None)
@given(st.floats(1e-4, 1.0), st.integers(1, 60))
def test_concentration_equal_weights_is_degree(x, k):
    assert concentration_index([x] * k) == pytest.approx(k, abs=1e-12)


@settings(max_examples=300, deadline=None)
@given(weight_lists)
def test_concentration_below_degree_when_unequal(w):
    assume(max(w) - min(w) > 1e-6 * max(w))
    assert concentration_index(w) < len(w)


@settings(max_examples=300, deadline=None)
@given(weight_lists, st.floats(1e-3, 1e3))
def test_scale_invariance(w, lam):
    scaled = [lam * x for x in w]
    assert concentration_index(scaled) == pytest.approx(concentration_index(w), rel=1e-12)
    for x, y in zip(w, scaled):
        assert control_fraction(y, scaled) == pytest.approx(control_fraction(x, w), rel=1e-9)


@settings(max_examples=300, deadline=None)
@given(weight_lists)
def test_inverse_herfindahl(w):
    shares = np.asarray(w) / np.sum(w)
    assert concentration_index(w) == pytest.approx(1.0 / np.sum(shares ** 2), rel=1e-12)


@pytest.mark.parametrize("seed", range(20))
def test_control_sums_to_one_and_h_total(seed):
    rng = np.random.default_rng(seed)
    net = random_frobenius_network(rng, int(rng.integers(4, 50)), 0.2, normalize=False)
    table = compute_metrics(net)
    col = np.bincount(net.dst, weights=table.H, minlength=net.n_nodes)
    owned = net.k_in > 0
    assert np.all(np.abs(col[owned] - 1.0) <= 1e-12)
    assert table.h.sum() == pytest.approx(owned.sum(), abs=1e-9)


def test_distribution_single_value():
    d = distribution([2.0, 2.0, 2.0], "s", bins=10)
    assert np.count_nonzero(d.counts) == 1
    assert d.cdf_x.tolist() == [2.0] and d.cdf_y.tolist() == [1.0]


def test_distribution_h_at_one():
    d = distribution([1, 1, 1, 2], "h")
    assert d.count_at_one == 3


def test_distribution_power_law_survival_monotone():
    rng = np.random.default_rng(3)
    x = (1 - rng.random(1000)) ** (-1 / 1.5)
    d = distribution(x, "k_out", bins=25)
    assert np.all(np.diff(d.cdf_y) <= 0)
    assert d.cdf_y[0] == 1.0 and d.counts.sum() == 1000
    widths = np.diff(d.bin_edges)
    assert np.sum(d.pdf * widths) == pytest.approx(1.0)


def test_distribution_export_from_table(rng):
    net = random_frobenius_network(rng, 30, 0.2)
    table = compute_metrics(net)
    d = distribution_export(table, "s")
    assert d.n_samples == int((net.k_in > 0).sum())
    with pytest.raises(UnknownMetric):
        distribution_export(table, "betweenness")
