"""Command-line front end: ``crnlyap {check,equilibrium,cbp,simulate,certify}``.

JSON goes to stdout; CSV and generated networks go to files. Diagnostics go
to stderr as a single line. Exit codes:

    0  success / certified        6  integration step-size underflow
    2  parse or usage error       7  certification refuted
    3  I/O failure                8  certification inconclusive
    4  equilibrium solver failure 9  source not complex balanced
    5  producing matrix rejected  10 network is not the source's image
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import errors
from .cbp import Direction, Integrality, ProducingMatrix, cbp_generate, cbp_structure_relation, map_equilibrium
from .certify import CERTIFIED, INCONCLUSIVE, REFUTED, BoundarySpec, CertifyOptions, certify
from .dsl import network_from_dict, network_to_dict, parse_complex, parse_network, print_network
from .dynamics import integrate
from .equilibria import (
    class_equilibrium,
    complex_balance_residuals,
    find_complex_balanced_equilibrium,
    solve_equilibrium_in_class,
    verify_equilibrium,
)
from .jsonout import dumps
from .lyapunov import LyapunovCandidate
from .network import Network, structure

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_IO = 3
EXIT_SOLVER = 4
EXIT_CBP = 5
EXIT_UNDERFLOW = 6
EXIT_REFUTED = 7
EXIT_INCONCLUSIVE = 8
EXIT_NOT_BALANCED = 9
EXIT_MISMATCH = 10

_ERROR_CODES = [
    (errors.NewtonDivergence, EXIT_SOLVER),
    (errors.NotAnEquilibriumReference, EXIT_SOLVER),
    (errors.NonIntegerProduct, EXIT_CBP),
    (errors.NegativeProductCoefficient, EXIT_CBP),
    (errors.SelfLoopProduced, EXIT_CBP),
    (errors.StepSizeUnderflow, EXIT_UNDERFLOW),
    (errors.SourceNotComplexBalanced, EXIT_NOT_BALANCED),
    (errors.StructuralMismatch, EXIT_MISMATCH),
    (errors.CrnError, EXIT_PARSE),
]
_VERDICT_CODES = {CERTIFIED: EXIT_OK, REFUTED: EXIT_REFUTED, INCONCLUSIVE: EXIT_INCONCLUSIVE}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def default_seed() -> int:
    env = os.environ.get("CRNLYAP_SEED")
    if env is None:
        return 42
    try:
        return int(env)
    except ValueError:
        raise _UsageError(f"CRNLYAP_SEED must be an integer, got {env!r}") from None


def _vector(text: str, n: int | None = None, what: str = "vector") -> list[float]:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise _UsageError(f"{what}: expected comma-separated numbers, got {text!r}") from None
    if n is not None and len(vals) != n:
        raise _UsageError(f"{what}: expected {n} entries, got {len(vals)}")
    return vals


def _read_network(path: str) -> Network:
    text = Path(path).read_bytes()  # OSError -> exit 3
    if path.endswith(".json"):
        try:
            data = json.loads(text)
        except (ValueError, UnicodeDecodeError) as exc:
            raise errors.CrnSyntaxError(f"{path}: invalid JSON: {exc}") from None
        return network_from_dict(data)
    try:
        return parse_network(text).network
    except errors.CrnError as exc:
        raise type(exc)(f"{path}: {exc.message}", exc.line, exc.column) from None


def _producing(text: str, n: int) -> ProducingMatrix:
    d = ProducingMatrix.of(text)
    if len(d) != n:
        raise _UsageError(f"producing matrix: expected {n} entries, got {text!r}")
    return d


def _emit(obj) -> None:
    sys.stdout.write(dumps(obj) + "\n")


def cmd_check(args) -> int:
    net = _read_network(args.input)
    out = {"species": list(net.species), "reactions": net.n_reactions, **structure(net).to_dict()}
    if args.json:
        out["network"] = network_to_dict(net)
    _emit(out)
    return EXIT_OK


def cmd_equilibrium(args) -> int:
    net = _read_network(args.input)
    n = net.n_species
    if (args.at is None) == (args.class_from is None):
        raise _UsageError("exactly one of --at and --class-from is required")
    if args.at is not None:
        x = _vector(args.at, n, "--at")
        check = verify_equilibrium(net, x, args.tol)
        cb = complex_balance_residuals(net, x, args.tol)
        _emit({
            "point": x,
            "equilibrium": check.is_equilibrium,
            "residual_norm": check.residual_norm,
            "complex_balance": cb.to_dict(),
        })
        return EXIT_OK

    x0 = _vector(args.class_from, n, "--class-from")
    if args.source is not None:
        if args.d is None:
            raise _UsageError("--source requires --d")
        src = _read_network(args.source)
        d = _producing(args.d, n)
        xs_src = find_complex_balanced_equilibrium(src)
        xs = map_equilibrium(xs_src, d, Direction.TO_CBP)
        res = class_equilibrium(net, xs, x0, weights=d.diag)
        method = "birch_via_source"
    else:
        try:
            xs = find_complex_balanced_equilibrium(net)
            res = class_equilibrium(net, xs, x0)
            method = "birch"
        except errors.NewtonDivergence:
            res = solve_equilibrium_in_class(net, x0)
            method = "direct"
    check = verify_equilibrium(net, res.point)
    _emit({
        "class_anchor": x0,
        "point": res.point,
        "method": method,
        "newton_iterations": res.newton_iterations,
        "residual_norm": res.residual_norm,
        "equilibrium": check.is_equilibrium,
    })
    return EXIT_OK


def cmd_cbp(args) -> int:
    src = _read_network(args.input)
    d = _producing(args.d, src.n_species)
    mode = Integrality.ALLOW_FRACTIONAL if args.allow_fractional else Integrality.REQUIRE_INTEGER
    result = cbp_generate(src, d, mode)
    record = cbp_structure_relation(src, result)
    out = {
        "input": args.input,
        "output": args.output,
        "producing_matrix": str(d),
        "mode": mode.value,
        "source_fingerprint": result.source_fingerprint,
        "verification": record.to_dict(),
    }
    Path(args.output).write_text(print_network(result.network))
    sidecar = args.sidecar or args.output + ".json"
    Path(sidecar).write_text(dumps(out) + "\n")
    _emit(out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    net = _read_network(args.input)
    n = net.n_species
    x0 = _vector(args.x0, n, "--x0")
    sample_every = args.sample_every if args.sample_every is not None else args.t_end / 100
    traj = integrate(net, x0, args.t_end, args.rel_tol, args.abs_tol, sample_every=sample_every)
    extra = None
    summary = {}
    if args.lyapunov is not None:
        if args.d is None:
            raise _UsageError("--lyapunov requires --d")
        src = _read_network(args.lyapunov)
        d = _producing(args.d, n)
        xs = map_equilibrium(find_complex_balanced_equilibrium(src), d, Direction.TO_CBP)
        cand = LyapunovCandidate(d.as_floats(), xs)
        values = cand.value(traj.states)
        extra = {"G_e": values}
        summary = {"G_e_initial": float(values[0]), "G_e_final": float(values[-1]),
                   "G_e_max_uphill": float(max(0.0, np.max(np.diff(values), initial=0.0)))}
    Path(args.output).write_text(traj.to_csv(net.species, extra))
    _emit({
        "output": args.output,
        "config": {"x0": x0, "t_end": args.t_end, "rel_tol": args.rel_tol, "abs_tol": args.abs_tol,
                   "sample_every": sample_every},
        "samples": len(traj),
        "accepted_steps": traj.accepted,
        "rejected_steps": traj.rejected,
        "final_state": traj.final,
        **summary,
    })
    return EXIT_OK


def _boundary_spec(text: str, net: Network) -> BoundarySpec:
    point_txt, _, complexes_txt = text.partition(";")
    point = _vector(point_txt, net.n_species, "--boundary point")
    complexes_txt = complexes_txt.strip()
    if complexes_txt in ("", "all"):
        return BoundarySpec(point)
    zs = [parse_complex(z, net.species) for z in complexes_txt.split(",") if z.strip()]
    return BoundarySpec(point, zs)


def cmd_certify(args) -> int:
    net = _read_network(args.input)
    n = net.n_species
    source = _read_network(args.source) if args.source else None
    d = _producing(args.d, n) if args.d else None
    region = tuple(_vector(args.region, 2, "--region")) if args.region else (0.1, 10.0)
    seed = args.seed if args.seed is not None else default_seed()
    opts = CertifyOptions(
        region=region,
        samples=args.samples,
        seed=seed,
        t_end=args.t_end,
        initial_states=[_vector(x, n, "--x0") for x in args.x0.split(";")] if args.x0 else None,
        boundaries=tuple(_boundary_spec(b, net) for b in args.boundary),
        override_weights=_vector(args.override_d, n, "--override-d") if args.override_d else None,
    )
    report = certify(net, source, d, opts=opts)
    text = dumps(report.to_dict()) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    sys.stdout.write(text)
    return _VERDICT_CODES[report.verdict]


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="crnlyap", description="Mass-action networks, producing matrices and Lyapunov certificates.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("check", help="structural report")
    c.add_argument("input")
    c.add_argument("--json", action="store_true", help="include the network's JSON form")
    c.set_defaults(func=cmd_check)

    e = sub.add_parser("equilibrium", help="equilibrium and complex-balance checks")
    e.add_argument("input")
    e.add_argument("--at", help="point to check, e.g. '2,1'")
    e.add_argument("--class-from", help="x0 whose compatibility class is solved")
    e.add_argument("--source", help="complex-balanced source network (for generated networks)")
    e.add_argument("--d", help="producing matrix diagonal, e.g. '1/3,1'")
    e.add_argument("--tol", type=float, default=1e-9)
    e.set_defaults(func=cmd_equilibrium)

    g = sub.add_parser("cbp", help="generate a network with a producing matrix")
    g.add_argument("input")
    g.add_argument("--d", required=True)
    g.add_argument("--allow-fractional", action="store_true")
    g.add_argument("-o", "--output", required=True)
    g.add_argument("--sidecar", help="verification JSON path (default: OUTPUT.json)")
    g.set_defaults(func=cmd_cbp)

    s = sub.add_parser("simulate", help="integrate and write a trajectory CSV")
    s.add_argument("input")
    s.add_argument("--x0", required=True)
    s.add_argument("--t-end", type=float, required=True)
    s.add_argument("--sample-every", type=float)
    s.add_argument("--rel-tol", type=float, default=1e-8)
    s.add_argument("--abs-tol", type=float, default=1e-10)
    s.add_argument("--lyapunov", metavar="SOURCE", help="append the candidate built from SOURCE and --d")
    s.add_argument("--d")
    s.add_argument("-o", "--output", default="trajectory.csv")
    s.set_defaults(func=cmd_simulate)

    k = sub.add_parser("certify", help="certify the (generalised) pseudo-Helmholtz candidate")
    k.add_argument("input")
    k.add_argument("--source")
    k.add_argument("--d")
    k.add_argument("--region", help="'lo,hi' sampling box (default 0.1,10)")
    k.add_argument("--samples", type=int, default=1000)
    k.add_argument("--x0", help="initial states separated by ';', e.g. '3,4;1,2'")
    k.add_argument("--boundary", action="append", default=[],
                   help="'point;complexes', e.g. '0,1;all' or '0,1;2 S1, 3 S1'")
    k.add_argument("--t-end", type=float, default=50.0)
    k.add_argument("--seed", type=int)
    k.add_argument("--override-d", help=argparse.SUPPRESS)
    k.add_argument("-o", "--output")
    k.set_defaults(func=cmd_certify)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except errors.CrnError as exc:
        for cls, code in _ERROR_CODES:
            if isinstance(exc, cls):
                print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
                return code
        raise


if __name__ == "__main__":
    sys.exit(main())
