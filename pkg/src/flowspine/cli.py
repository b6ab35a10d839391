"""Command-line interface.

Every analysis subcommand reads ``--nodes`` and ``--edges`` CSV files and
writes to ``--out`` (or stdout).  Verbosity is taken from the
``FLOWSPINE_LOG`` environment variable (``DEBUG``, ``INFO``, ``WARNING``...).
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .backbone import cumulative_control_curve, flow_backbone, shareholder_ranking
from .errors import FlowspineError
from .generators import generate_idealized, random_market
from .io import export_dot, read_network, to_json, write_network
from .metrics import METRICS, ControlModel, compute_metrics, control_matrix, distribution_export
from .network import normalize_ownership
from .pipeline import RunConfig, analyze_network
from .propagation import AUTO, DIRECT, FIXED_POINT, flow_steady_state, integrate
from .topology import list_bowties

log = logging.getLogger("flowspine")


def _setup_logging():
    level = os.environ.get("FLOWSPINE_LOG", "WARNING").strip().upper()
    if level.isdigit():
        level = int(level)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s",
                        stream=sys.stderr)
    logging.captureWarnings(True)


def _emit(text: str, out):
    if out is None or str(out) == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _load(args):
    net = read_network(args.nodes, args.edges, percent=args.percent)
    return normalize_ownership(net)


def _config(args) -> RunConfig:
    return RunConfig(nodes=args.nodes, edges=args.edges,
                     delta=getattr(args, "delta", 0.5), theta=getattr(args, "theta", 0.8),
                     model=args.model, method=args.method, tol=args.tol,
                     max_iter=args.max_iter, percent=args.percent, seed=args.seed,
                     split_s=getattr(args, "split_s", 0.0),
                     split_h=getattr(args, "split_h", 0.0))


def cmd_analyze(args):
    net = _load(args)
    table = compute_metrics(net, ControlModel.parse(args.model))
    if args.format == "json":
        _emit(to_json([table.row(x) for x in table.ids]), args.out)
    else:
        _emit(table.to_csv(), args.out)


def cmd_bowtie(args):
    net = _load(args)
    _emit(to_json({"bowties": [b.to_dict() for b in list_bowties(net)]}), args.out)


def cmd_integrate(args):
    net = _load(args)
    model = ControlModel.parse(args.model)
    H = control_matrix(net, model)
    kw = dict(method=args.method, tol=args.tol, max_iter=args.max_iter, names=net.ids)
    c_tilde = flow_steady_state(H, net.values, **kw).phi
    phi = flow_steady_state(net.matrix(), net.values, **kw).phi
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(["id", "c_tilde", "phi"])
    for k, node_id in enumerate(net.ids):
        out.writerow([node_id, repr(float(c_tilde[k])), repr(float(phi[k]))])
    _emit(buf.getvalue(), args.out)
    if args.emit_matrix:
        Ht = integrate(H, **kw).matrix
        coo = Ht.tocoo() if hasattr(Ht, "tocoo") else None
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["i", "j", "value"])
        if coo is None:
            rows, cols = np.nonzero(Ht)
            vals = Ht[rows, cols]
        else:
            rows, cols, vals = coo.row, coo.col, coo.data
        triples = sorted(zip(rows.tolist(), cols.tolist(), vals.tolist()))
        for i, j, v in triples:
            if v != 0.0:
                out.writerow([net.ids[i], net.ids[j], repr(v)])
        Path(args.emit_matrix).write_text(buf.getvalue(), encoding="utf-8")


def _ranked_curve(args):
    cfg = _config(args)
    cfg.check()
    net = _load(args)
    H = control_matrix(net, cfg.model)
    c_tilde = flow_steady_state(H, net.values, method=cfg.method, tol=cfg.tol,
                                max_iter=cfg.max_iter, names=net.ids).phi
    return net, c_tilde


def cmd_curve(args):
    net, c_tilde = _ranked_curve(args)
    curve = cumulative_control_curve(net, shareholder_ranking(net, c_tilde), args.delta)
    if args.format == "json":
        _emit(to_json({"ranking": list(curve.ranking), "eta": curve.eta.tolist(),
                       "theta": curve.theta.tolist()}), args.out)
    else:
        _emit(curve.to_csv(), args.out)


def cmd_backbone(args):
    cfg = _config(args)
    cfg.check()
    result = analyze_network(read_network(args.nodes, args.edges, percent=args.percent), cfg)
    bb = result.backbone
    if args.curve:
        Path(args.curve).write_text(result.curve.to_csv(), encoding="utf-8")
    if args.dot:
        Path(args.dot).write_text(export_dot(bb.network, force=args.force_dot),
                                  encoding="utf-8")
    if args.format == "dot":
        _emit(export_dot(bb.network, force=args.force_dot), args.out)
    else:
        _emit(to_json(bb.to_dict(result.classification)), args.out)


def cmd_classify(args):
    cfg = _config(args)
    result = analyze_network(read_network(args.nodes, args.edges, percent=args.percent), cfg)
    payload = result.classification.to_dict()
    payload.update(n_st=result.backbone.n_st, n_sh=result.backbone.n_sh,
                   eta_hat=result.backbone.eta_hat, n_100=result.backbone.n_100)
    _emit(to_json(payload), args.out)


def cmd_flow_backbone(args):
    net = _load(args)
    if args.weights == "control":
        W = control_matrix(net, ControlModel.parse(args.model))
    else:
        W = net.matrix()
    fb = flow_backbone(W, net.values, args.theta, names=net.ids, method=args.method,
                       tol=args.tol, max_iter=args.max_iter)
    if args.format == "dot":
        sub = net.subnetwork(np.isin(net.src, [net.index(x) for x in fb.nodes])
                             & np.isin(net.dst, [net.index(x) for x in fb.nodes]),
                             keep_nodes=[net.index(x) for x in fb.nodes])
        _emit(export_dot(sub, name="flow_backbone", force=args.force_dot), args.out)
    else:
        _emit(to_json(fb.to_dict()), args.out)


def cmd_generate(args):
    if args.topology.lower() == "random":
        net = random_market(args.n_holders, args.n_stocks, args.n_edges, seed=args.seed)
    else:
        net = generate_idealized(args.topology, args.n_stocks, args.n_holders, seed=args.seed)
    write_network(net, args.out_nodes, args.out_edges)


def cmd_distributions(args):
    net = _load(args)
    table = compute_metrics(net, ControlModel.parse(args.model))
    d = distribution_export(table, args.metric, args.bins)
    log.info("%s: %d samples, %d at exactly 1", d.metric, d.n_samples, d.count_at_one)
    pdf = io.StringIO()
    out = csv.writer(pdf, lineterminator="\n")
    out.writerow([args.metric, "pdf"])
    for x, y in zip(d.bin_centers.tolist(), d.pdf.tolist()):
        out.writerow([repr(x), repr(y)])
    cdf = io.StringIO()
    out = csv.writer(cdf, lineterminator="\n")
    out.writerow([args.metric, "ccdf"])
    for x, y in zip(d.cdf_x.tolist(), d.cdf_y.tolist()):
        out.writerow([repr(x), repr(y)])
    if args.out_prefix:
        Path(f"{args.out_prefix}_pdf.csv").write_text(pdf.getvalue(), encoding="utf-8")
        Path(f"{args.out_prefix}_cdf.csv").write_text(cdf.getvalue(), encoding="utf-8")
    else:
        _emit(to_json({"metric": d.metric, "n_samples": d.n_samples,
                       "count_at_one": d.count_at_one,
                       "pdf": {"x": d.bin_centers.tolist(), "y": d.pdf.tolist()},
                       "cdf": {"x": d.cdf_x.tolist(), "y": d.cdf_y.tolist()}}), args.out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flowspine",
        description="Backbone extraction for ownership and flow networks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    io_args = argparse.ArgumentParser(add_help=False)
    io_args.add_argument("--nodes", required=True, help="nodes CSV (id,kind,value)")
    io_args.add_argument("--edges", required=True, help="edges CSV (source,target,weight)")
    io_args.add_argument("--percent", action="store_true",
                         help="edge weights are percentages")
    io_args.add_argument("--model", default="quadratic",
                         help="control model: quadratic or threshold:T (T in 0.1, 0.2, 0.5)")
    io_args.add_argument("--method", default=AUTO, choices=[AUTO, DIRECT, FIXED_POINT])
    io_args.add_argument("--tol", type=float, default=1e-10)
    io_args.add_argument("--max-iter", type=int, default=10**6)
    io_args.add_argument("--seed", type=int, default=None)
    io_args.add_argument("--out", default=None, help="output file (default stdout)")

    def add(name, func, help_text, formats=("json",), default=None):
        p = sub.add_parser(name, parents=[io_args], help=help_text)
        p.add_argument("--format", choices=formats, default=default or formats[0])
        p.set_defaults(func=func)
        return p

    add("analyze", cmd_analyze, "per-node metrics table", ("csv", "json"))
    add("bowtie", cmd_bowtie, "bow-tie decomposition as JSON")
    p = add("integrate", cmd_integrate, "integrated control value and inflow", ("csv",))
    p.add_argument("--emit-matrix", default=None,
                   help="write integrated control matrix as i,j,value triples")
    p = add("curve", cmd_curve, "cumulative control curve", ("csv", "json"))
    p.add_argument("--delta", type=float, default=0.5)
    for name, func, formats in (("backbone", cmd_backbone, ("json", "dot")),
                                ("classify", cmd_classify, ("json",))):
        help_text = {"backbone": "power holders and the stocks they control",
                     "classify": "map-of-control quadrant of the backbone"}[name]
        p = add(name, func, help_text, formats)
        p.add_argument("--delta", type=float, default=0.5)
        p.add_argument("--theta", type=float, default=0.8)
        p.add_argument("--split-s", type=float, default=0.0)
        p.add_argument("--split-h", type=float, default=0.0)
        if name == "backbone":
            p.add_argument("--dot", default=None, help="also write DOT to this file")
            p.add_argument("--curve", default=None, help="also write eta,theta CSV here")
            p.add_argument("--force-dot", action="store_true")
    p = add("flow-backbone", cmd_flow_backbone, "generic flow backbone", ("json", "dot"))
    p.add_argument("--theta", type=float, default=0.8)
    p.add_argument("--weights", choices=["ownership", "control"], default="ownership")
    p.add_argument("--force-dot", action="store_true")
    p = add("distributions", cmd_distributions, "PDF and CDF series of a metric")
    p.add_argument("--metric", choices=list(METRICS), default="s")
    p.add_argument("--bins", type=int, default=20)
    p.add_argument("--out-prefix", default=None,
                   help="write <prefix>_pdf.csv and <prefix>_cdf.csv")

    p = sub.add_parser("generate", help="write a synthetic network")
    p.add_argument("--topology", required=True, help="A, B, C, D or random")
    p.add_argument("--n-stocks", type=int, required=True)
    p.add_argument("--n-holders", type=int, required=True)
    p.add_argument("--n-edges", type=int, default=0, help="edge count for random")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out-nodes", required=True)
    p.add_argument("--out-edges", required=True)
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (FlowspineError, ValueError, OSError) as exc:
        print(f"flowspine {args.command}: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
