"""Command-line entry point.

Exit codes: 0 success, 2 validation/invariant breach, 3 inconclusive numerics,
4 input error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
import time
from dataclasses import asdict, dataclass, field

from . import __version__
from .certificate import CERTIFICATE_LIMIT, CertificateError, certify_supports, corrupted_fixture, independence_certificate
from .chain import verify_chain
from .cycles import cycle_facet_family
from .geometry import GeometryError
from .homotopy import TrackerConfig, TrackingError
from .network import NetworkError, OscillatorNetwork, generate, load_network
from .system import BoundDisagreement, ReductionError, ap_bound, baseline_bound
from .solver import solve_network, tree_solve

EXIT_OK, EXIT_INVALID, EXIT_INCONCLUSIVE, EXIT_INPUT = 0, 2, 3, 4


class InputError(ValueError):
    pass


@dataclass
class RunManifest:
    command: str
    arguments: dict
    input_hash: str | None = None
    seeds: dict = field(default_factory=dict)
    config: dict | None = None
    version: str = __version__
    timing: dict | None = None

    def to_json(self, with_timing: bool = True) -> dict:
        out = asdict(self)
        if not with_timing:
            out.pop("timing")
        return out


def _stable(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def report_hash(report: dict) -> str:
    """sha256 of a report with the timing entry removed."""
    body = dict(report)
    manifest = dict(body.get("manifest", {}))
    manifest.pop("timing", None)
    body["manifest"] = manifest
    body.pop("report_hash", None)
    return hashlib.sha256(_stable(body).encode()).hexdigest()


# ---------------------------------------------------------------------------
# network selection
# ---------------------------------------------------------------------------


def _parse_omega(text: str | None):
    if text is None:
        return None
    try:
        return [complex(t.replace(" ", "")) for t in text.split(",")]
    except ValueError as exc:
        raise InputError(f"cannot parse --omega {text!r}") from exc


def _int_arg(text: str, flag: str) -> int:
    try:
        return int(text)
    except ValueError as exc:
        raise InputError(f"{flag} expects an integer, got {text!r}") from exc


def network_from_args(args) -> OscillatorNetwork:
    omega = _parse_omega(getattr(args, "omega", None))
    kw = dict(seed=args.seed, mode=args.mode, omega_scale=args.omega_scale)
    if args.input:
        try:
            text = sys.stdin.read() if args.input == "-" else open(args.input).read()
        except OSError as exc:
            raise InputError(f"cannot read network: {exc}") from exc
        net = load_network(text)
    elif args.tree:
        kind, _, num = args.tree.partition(":")
        if kind not in ("path", "star", "random") or not num:
            raise InputError("--tree expects path:N, star:N or random:N")
        topo = "random-tree" if kind == "random" else kind
        net = generate(topo, _int_arg(num, "--tree"), **kw)
    elif args.star is not None:
        net = generate("star", args.star, **kw)
    elif args.random_tree is not None:
        net = generate("random-tree", args.random_tree, **kw)
    elif args.cycle is not None:
        net = generate("cycle", args.cycle, **kw)
    else:
        raise InputError("no network given (use an input file or a generator flag)")
    if omega is not None:
        if len(omega) == 1:
            omega = omega * net.n
        if len(omega) != net.n:
            raise InputError(f"--omega needs 1 or {net.n} values")
        net = net.with_omega(omega)
    return net


def _add_network_flags(p: argparse.ArgumentParser):
    p.add_argument("input", nargs="?", help="network JSON file ('-' for stdin)")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--tree", metavar="KIND:N", help="path:N, star:N or random:N")
    g.add_argument("--star", type=int, metavar="N")
    g.add_argument("--random-tree", type=int, metavar="N")
    g.add_argument("--cycle", type=int, metavar="N")
    p.add_argument("--seed", type=int, default=0, help="instance seed")
    p.add_argument("--mode", choices=["complex", "symmetric-real"], default="complex")
    p.add_argument("--omega", help="comma separated natural frequencies (one value is broadcast)")
    p.add_argument("--omega-scale", type=float, default=1.0)


def _load_config(args) -> TrackerConfig:
    data = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config: {exc}") from exc
    if getattr(args, "tracker_seed", None) is not None:
        data["seed"] = args.tracker_seed
    data.setdefault("seed", args.seed)
    try:
        return TrackerConfig.from_json(data)
    except (TypeError, ValueError) as exc:
        raise InputError(f"invalid tracker config: {exc}") from exc


# ---------------------------------------------------------------------------
# commands; each returns (report dict, summary rows, exit code)
# ---------------------------------------------------------------------------


def cmd_bound(args):
    net = network_from_args(args)
    try:
        b = ap_bound(net, args.method)
    except BoundDisagreement as exc:
        return {"error": str(exc), "N": net.N}, [], EXIT_INVALID
    body = b.to_json()
    body.update({"N": net.N, "baseline": baseline_bound(net.N), "below_baseline": b.value < baseline_bound(net.N)})
    return body, [{k: body[k] for k in ("N", "topology", "ap_bound", "formula", "triangulation", "baseline", "agree")}], EXIT_OK


def cmd_facets(args):
    if args.cycle is None or args.cycle < 3:
        raise InputError("facets needs --cycle N with N >= 3")
    census = cycle_facet_family(args.cycle)
    body = census.to_json()
    body["facet_volumes"] = sorted(census.facet_volumes)
    row = {k: body[k] for k in ("N", "facets", "expected_facets", "facet_nvol", "total", "nvol", "ok")}
    return body, [row], EXIT_OK if census.ok else EXIT_INVALID


def cmd_solve(args):
    net = network_from_args(args)
    cfg = _load_config(args)
    bound = ap_bound(net).value
    if args.solver == "tree":
        solset = tree_solve(net, cfg.accept_tol, cfg.torus_tol)
    else:
        solset = solve_network(net, cfg)
    res = [s.residual for s in solset.solutions]
    summary = {
        "N": net.N,
        "count": solset.count,
        "torus_count": len(solset.torus),
        "ap_bound": bound,
        "max_residual": max(res) if res else None,
        "inconclusive": solset.inconclusive,
    }
    body = {"summary": summary, "solution_set": solset.to_json(), "config": cfg.to_json()}
    code = EXIT_OK
    if solset.count > bound:
        body["error"] = "C*-solution count exceeds the AP bound"
        code = EXIT_INVALID
    elif solset.inconclusive:
        code = EXIT_INCONCLUSIVE
    return body, [summary], code


def cmd_certify(args):
    if args.fixture:
        cert = certify_supports(corrupted_fixture(), label="corrupted-fixture", all_cones=True)
    else:
        if args.cycle is None:
            raise InputError("certify needs --cycle N or --fixture corrupted")
        net = generate("cycle", args.cycle, seed=args.seed)
        all_cones = {"auto": None, "all": True, "non-monomial": False}[args.cones]
        cert = independence_certificate(net, limit=args.limit, all_cones=all_cones)
    body = cert.to_json()
    row = {k: body[k] for k in ("label", "pass", "mode", "directions_checked", "failures")}
    return body, [row], EXIT_OK if cert.passed else EXIT_INVALID


def cmd_verify_chain(args):
    net = network_from_args(args)
    cfg = _load_config(args)
    report = verify_chain(net, cfg)
    body = report.to_json()
    row = {"N": net.N, "topology": report.topology, **body["chain"], "status": report.status}
    code = {"ok": EXIT_OK, "violation": EXIT_INVALID, "partial": EXIT_INCONCLUSIVE}[report.status]
    return body, [row], code


COMMANDS = {
    "bound": cmd_bound,
    "facets": cmd_facets,
    "solve": cmd_solve,
    "certify": cmd_certify,
    "verify-chain": cmd_verify_chain,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kuramoto-ap", description="Adjacency polytope bounds for Kuramoto equilibria")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--csv", action="store_true", help="print a CSV summary instead of JSON")
        p.add_argument("--no-timing", action="store_true", help="omit wall-clock timing from the manifest")
        p.add_argument("-o", "--output", help="write the JSON report here as well")

    p = sub.add_parser("bound", help="adjacency polytope bound")
    _add_network_flags(p)
    p.add_argument("--method", choices=["auto", "formula", "triangulation", "both"], default="auto")
    common(p)

    p = sub.add_parser("facets", help="facet census of P_N")
    p.add_argument("--cycle", type=int, metavar="N", required=True)
    p.add_argument("--seed", type=int, default=0)
    common(p)

    for name in ("solve", "verify-chain"):
        p = sub.add_parser(name, help="C*-solutions" if name == "solve" else "inequality chain")
        _add_network_flags(p)
        p.add_argument("--config", help="JSON file with TrackerConfig fields")
        p.add_argument("--tracker-seed", type=int, help="seed for gamma (defaults to --seed)")
        if name == "solve":
            p.add_argument("--solver", choices=["homotopy", "tree"], default="homotopy")
        common(p)

    p = sub.add_parser("certify", help="independence certificate for a cycle")
    p.add_argument("--cycle", type=int, metavar="N")
    p.add_argument("--fixture", choices=["corrupted"])
    p.add_argument("--cones", choices=["auto", "all", "non-monomial"], default="auto")
    p.add_argument("--limit", type=int, default=CERTIFICATE_LIMIT)
    p.add_argument("--seed", type=int, default=0)
    common(p)
    return parser


def _manifest(args, body: dict, elapsed: float) -> RunManifest:
    skip = {"csv", "no_timing", "output", "command"}
    arguments = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    seeds = {"instance": args.seed}
    config = body.get("config")
    if config is not None:
        seeds["tracker"] = config["seed"]
    input_hash = None
    if getattr(args, "input", None) and args.input != "-":
        with open(args.input, "rb") as fh:
            input_hash = hashlib.sha256(fh.read()).hexdigest()
    m = RunManifest(args.command, arguments, input_hash, seeds, config)
    if not args.no_timing:
        m.timing = {"wall_seconds": round(elapsed, 3)}
    return m


def _to_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        body, rows, code = COMMANDS[args.command](args)
    except (InputError, NetworkError, GeometryError, CertificateError, ReductionError, TrackingError) as exc:
        print(json.dumps({"error": str(exc), "command": args.command}), file=sys.stderr)
        return EXIT_INPUT
    elapsed = time.perf_counter() - start
    body["manifest"] = _manifest(args, body, elapsed).to_json(with_timing=not args.no_timing)
    body["report_hash"] = report_hash(body)
    text = json.dumps(body, sort_keys=True, indent=2)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    print(_to_csv(rows) if args.csv else text, end="" if args.csv else "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
