"""Command-line front end.

Subcommands: dcor (non-private estimates), private (one in-process
protocol run), alice/bob (the two network roles over TCP), bench
(epsilon sweeps to CSV + JSON), bound (concentration-bound calculator),
synth (synthetic dataset writer). Every command prints a single-line
JSON document that includes the full effective configuration, seeds
included, so any run can be reproduced from its own output.

Exit codes: 0 success, 2 usage or configuration error, 3 data error,
4 protocol or transport error.
"""

from __future__ import annotations

import argparse
import sys

from . import serial
from .bench import SweepConfig, allocate_budget, emit_report, run_sweep
from .bounds import BoundInputs, error_bound, t_threshold
from .datasets import SYNTH_RECIPES, load_csv, split_features, synth_dataset
from .errors import DpdcorError, exit_code_for
from .estimators import EstimateRecord, unbiased_dcov, unbiased_dcorr
from .privacy import PROTOCOL_VARIANTS
from .protocol import ProtocolConfig, connect_and_send, run_session, serve_bob
from .serial import format_float


def _emit(doc: dict) -> None:
    sys.stdout.write(serial.dumps(doc) + "\n")


def _addr(value: str) -> tuple[str, int]:
    host, sep, port = value.rpartition(":")
    if not sep or not host or not port.isdigit():
        raise argparse.ArgumentTypeError(f"address must be host:port, got {value!r}")
    return host, int(port)


def _add_header_flag(p: argparse.ArgumentParser) -> None:
    p.add_argument("--no-header", action="store_true", help="CSV files have no header row")


def _protocol_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--eps", type=float, required=True, help="session privacy budget (total by default)")
    p.add_argument("--delta", type=float, default=0.05, help="Gaussian-mechanism delta (default 0.05)")
    p.add_argument("--k", type=int, required=True, help="number of projections")
    p.add_argument("--variant", choices=PROTOCOL_VARIANTS, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--normalize", action="store_true", help="per-column min-max scaling before use")
    p.add_argument("--per-projection", action="store_true", help="treat --eps as the per-projection budget")
    p.add_argument("--eps-variance", type=float, default=None, help="explicit variance-release budget")


def _allocation(args) -> tuple[float, float, str]:
    semantics = "per-projection" if args.per_projection else "total"
    eps_per, eps_var = allocate_budget(args.eps, args.k, args.variant, semantics, args.eps_variance)
    return eps_per, eps_var, semantics


def _cmd_dcor(args) -> int:
    dx = load_csv(args.x, header=not args.no_header)
    dy = load_csv(args.y, header=not args.no_header)
    dcov = unbiased_dcov(dx.values, dy.values)
    dvar_x = unbiased_dcov(dx.values, dx.values)
    dvar_y = unbiased_dcov(dy.values, dy.values)
    dcorr = unbiased_dcorr(dx.values, dy.values)
    _emit(
        {
            "command": "dcor",
            "config": {"x": str(args.x), "y": str(args.y), "header": not args.no_header},
            "n": dx.n,
            "dropped_rows": [dx.dropped_rows, dy.dropped_rows],
            "estimates": {
                "dcov": EstimateRecord(dcov, "unbiased").as_dict(),
                "dvar_x": EstimateRecord(dvar_x, "unbiased").as_dict(),
                "dvar_y": EstimateRecord(dvar_y, "unbiased").as_dict(),
            },
            "dcorr": dcorr,
        }
    )
    return 0


def _cmd_private(args) -> int:
    ds = load_csv(args.dataset, header=not args.no_header)
    X, Y = split_features(ds, args.split)
    eps_per, eps_var, semantics = _allocation(args)
    cfg = ProtocolConfig(
        k=args.k,
        variant=args.variant,
        eps_per_projection=eps_per,
        delta=args.delta,
        eps_variance=eps_var,
        seed=args.seed,
        normalization="min-max" if args.normalize else "none",
    )
    result = run_session(X, Y, cfg, "in-process")
    _emit(
        {
            "command": "private",
            "config": {
                "dataset": str(args.dataset),
                "split": int(args.split),
                "eps": args.eps,
                "delta": args.delta,
                "k": args.k,
                "variant": args.variant,
                "seed": args.seed,
                "normalize": bool(args.normalize),
                "header": not args.no_header,
                "allocation": {"semantics": semantics, "eps_per_projection": eps_per, "eps_variance": eps_var},
            },
            "result": result.as_dict(),
        }
    )
    return 0


def _cmd_alice(args) -> int:
    dx = load_csv(args.x, header=not args.no_header)
    eps_per, eps_var, semantics = _allocation(args)
    cfg = ProtocolConfig(
        k=args.k,
        variant=args.variant,
        eps_per_projection=eps_per,
        delta=args.delta,
        eps_variance=eps_var,
        seed=args.seed,
        normalization="min-max" if args.normalize else "none",
    )
    host, port = args.connect
    sent = connect_and_send(host, port, dx.values, cfg)
    _emit(
        {
            "command": "alice",
            "config": {
                "x": str(args.x),
                "connect": f"{host}:{port}",
                "eps": args.eps,
                "delta": args.delta,
                "k": args.k,
                "variant": args.variant,
                "seed": args.seed,
                "normalize": bool(args.normalize),
                "header": not args.no_header,
                "allocation": {"semantics": semantics, "eps_per_projection": eps_per, "eps_variance": eps_var},
            },
            "messages_sent": sent,
        }
    )
    return 0


def _cmd_bob(args) -> int:
    dy = load_csv(args.y, header=not args.no_header)
    host, port = args.listen
    result = serve_bob(host, port, dy.values, seed=args.seed, timeout=args.timeout)
    doc = {
        "command": "bob",
        "config": {
            "y": str(args.y),
            "listen": f"{host}:{port}",
            "seed": args.seed,
            "header": not args.no_header,
        },
        "result": result.as_dict(),
    }
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fp:
            fp.write(serial.dumps(doc) + "\n")
    _emit(doc)
    return 0


def _cmd_bench(args) -> int:
    ds = load_csv(args.dataset, header=not args.no_header)
    split = args.split if args.split is not None else max(1, ds.dim // 2)
    cfg = SweepConfig(
        eps_grid=tuple(args.eps_grid),
        trials=args.trials,
        k=args.k,
        variant=args.variant,
        delta=args.delta,
        split_index=split,
        seed=args.seed,
        normalization="min-max" if args.normalize else "none",
        grid_semantics="per-projection" if args.per_projection else "total",
        eps_variance=args.eps_variance,
        zero_noise=args.zero_noise,
    )
    result = run_sweep(ds, cfg)
    csv_path, json_path = emit_report(result, args.out)
    with open(json_path, "r", encoding="utf-8") as fp:
        sys.stdout.write(fp.read())
    if result.aborted is not None:
        print(f"sweep aborted: {result.aborted}", file=sys.stderr)
        return result.aborted_code
    return 0


def _cmd_bound(args) -> int:
    t1 = args.t1 if args.t1 is not None else t_threshold(args.sigma1, args.n, args.alpha)
    t2 = args.t2 if args.t2 is not None else t_threshold(args.sigma2, args.n, args.alpha)
    inputs = BoundInputs(
        n=args.n,
        k=args.k,
        sigma1=args.sigma1,
        sigma2=args.sigma2,
        alpha=args.alpha,
        t1=t1,
        t2=t2,
        coefficient=args.coefficient,
    )
    bound = error_bound(inputs)
    _emit(
        {
            "command": "bound",
            "config": {
                "n": args.n,
                "k": args.k,
                "sigma1": args.sigma1,
                "sigma2": args.sigma2,
                "alpha": args.alpha,
                "t1": t1,
                "t2": t2,
                "coefficient": inputs.coefficient,
            },
            "bound_value": bound.bound_value,
            "confidence": bound.confidence,
        }
    )
    return 0


def _cmd_synth(args) -> int:
    ds = synth_dataset(args.recipe, args.n, noise_sd=args.noise, seed=args.seed)
    lines = [",".join(ds.columns)]
    for row in ds.values:
        lines.append(",".join(format_float(v) for v in row))
    with open(args.out, "w", encoding="utf-8", newline="\n") as fp:
        fp.write("\n".join(lines) + "\n")
    _emit(
        {
            "command": "synth",
            "config": {
                "recipe": args.recipe,
                "n": args.n,
                "noise": args.noise,
                "seed": args.seed,
                "out": str(args.out),
            },
            "rows": ds.n,
            "columns": list(ds.columns),
        }
    )
    return 0


def _grid(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse epsilon grid {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dpdcor", description="Differentially private distance correlation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dcor", help="non-private distance covariance and correlation of two CSVs")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    _add_header_flag(p)
    p.set_defaults(func=_cmd_dcor)

    p = sub.add_parser("private", help="one in-process private protocol run on a split dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--split", type=int, required=True, help="columns 1..j go to Alice, the rest to Bob")
    _protocol_args(p)
    _add_header_flag(p)
    p.set_defaults(func=_cmd_private)

    p = sub.add_parser("alice", help="stream noisy projections of X to a listening bob")
    p.add_argument("--x", required=True)
    p.add_argument("--connect", type=_addr, required=True, metavar="HOST:PORT")
    _protocol_args(p)
    _add_header_flag(p)
    p.set_defaults(func=_cmd_alice)

    p = sub.add_parser("bob", help="listen for one session and compute the private dcorr")
    p.add_argument("--y", required=True)
    p.add_argument("--listen", type=_addr, required=True, metavar="HOST:PORT")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="also write the result JSON here")
    p.add_argument("--timeout", type=float, default=60.0)
    _add_header_flag(p)
    p.set_defaults(func=_cmd_bob)

    p = sub.add_parser("bench", help="epsilon sweep with repeated trials; writes records.csv + summary.json")
    p.add_argument("--dataset", required=True)
    p.add_argument("--split", type=int, default=None, help="default: half the columns")
    p.add_argument("--eps-grid", type=_grid, required=True, metavar="E1,E2,...")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--variant", choices=PROTOCOL_VARIANTS, required=True)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--per-projection", action="store_true")
    p.add_argument("--eps-variance", type=float, default=None)
    p.add_argument("--zero-noise", action="store_true", help="noise-free testing hook")
    _add_header_flag(p)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("bound", help="concentration bound value and confidence")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--sigma1", type=float, required=True)
    p.add_argument("--sigma2", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--t1", type=float, default=None, help="default: the alpha threshold for sigma1")
    p.add_argument("--t2", type=float, default=None, help="default: the alpha threshold for sigma2")
    p.add_argument("--coefficient", type=float, default=None, help="default: 4 / (k n (n-2) (n-3))")
    p.set_defaults(func=_cmd_bound)

    p = sub.add_parser("synth", help="write a synthetic two-column dataset as CSV")
    p.add_argument("--recipe", choices=SYNTH_RECIPES, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else 0
    try:
        return args.func(args)
    except DpdcorError as e:
        print(f"error: {e}", file=sys.stderr)
        return exit_code_for(e)
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
