"""flowspine: backbones of weighted directed networks with valued nodes.

Typical use on an ownership network::

    import flowspine as fs

    net = fs.normalize_ownership(fs.read_network("nodes.csv", "edges.csv"))
    H = fs.control_matrix(net)
    c_tilde = fs.flow_steady_state(H, net.values).phi
    bb = fs.extract_backbone(net, c_tilde, delta=0.5, theta_hat=0.8)
    print(fs.classify(bb))
"""

__version__ = "0.1.0"

from .backbone import (
    Backbone,
    Classification,
    CumulativeControlCurve,
    FlowBackbone,
    classify,
    cumulative_control_curve,
    extract_backbone,
    flow_backbone,
    keep_count,
    rank_shareholders,
    shareholder_ranking,
)
from .errors import *  # noqa: F401,F403
from .generators import generate_idealized, random_market
from .io import export_dot, read_network, write_network
from .metrics import (
    ControlModel,
    MetricsTable,
    compute_metrics,
    concentration_index,
    control_fraction,
    control_index,
    control_matrix,
    control_value,
    distribution,
    distribution_export,
    edge_control,
    portfolio_value,
)
from .network import (
    Edge,
    Node,
    NodeKind,
    OwnershipNetwork,
    ValidationReport,
    load_network,
    normalize_ownership,
    validate,
)
from .pipeline import RunConfig, analyze_network, run_pipeline
from .propagation import (
    FlowResult,
    IntegratedResult,
    check_frobenius_condition,
    flow_steady_state,
    integrate,
    integrated_control_value,
)
from .topology import BowTie, Scc, bowtie_decompose, list_bowties, strongly_connected_components
