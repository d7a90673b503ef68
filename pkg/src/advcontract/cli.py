"""Command-line entry point: analyze, monitor, dataset-build, train, eval, serve."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import httpx

from advcontract.chain.monitor import StreamError, watch_blocks
from advcontract.chain.snapshot import MODES
from advcontract.ml.system import TrainConfig, load_bundle
from advcontract.pipeline.commands import (
    cmd_analyze,
    cmd_dataset_build,
    cmd_eval,
    cmd_eval_cv,
    cmd_eval_importance,
    cmd_monitor,
    cmd_train,
    format_rows,
    is_address,
)
from advcontract.pipeline.config import PipelineConfig, build_context, load_config
from advcontract.pipeline.core import format_summary, parse_code
from advcontract.pipeline.dataset import read_events, read_label_file

EXIT_BENIGN, EXIT_ADVERSARIAL, EXIT_ERROR = 0, 10, 2


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="key-value config file ([advcontract] section)")
    p.add_argument("--snapshot", help="snapshot directory for recorded external responses")
    p.add_argument("--mode", choices=MODES, help="live | record | replay-strict")
    p.add_argument("--model", help="model bundle directory")
    p.add_argument("--seed", type=int, help="training seed")
    p.add_argument("--no-verified-feature", action="store_true", help="drop the verified-source feature")
    p.add_argument("--from-block", type=int, help="first block to scan")
    p.add_argument("--to-block", type=int, help="last block to scan (default: current head)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    ap = argparse.ArgumentParser(prog="advcontract", description="Detect adversarial DeFi contracts at deployment.")
    sub = ap.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", parents=[common], help="analyze one contract (address or bytecode file)")
    a.add_argument("target", help="contract address, or a file with hex/raw bytecode")
    a.add_argument("--deployment", help="JSON sidecar with deployment context for file targets")
    a.add_argument("--report", help="write the JSON report here")
    a.add_argument("--json", action="store_true", help="print the JSON report instead of the summary")
    a.add_argument("--server", help="send the request to a running service at this URL")

    m = sub.add_parser("monitor", parents=[common], help="scan blocks and raise alerts")
    m.add_argument("--alert-log", help="append-only alert log (one JSON object per line)")
    m.add_argument("--timings-log", help="per-contract stage timings (one JSON object per line)")
    m.add_argument("--workers", type=int, help="concurrent analyses (default: CPU cores)")
    m.add_argument("--follow", action="store_true", help="keep polling for new blocks")

    d = sub.add_parser("dataset-build", parents=[common], help="build a labeled feature dataset")
    d.add_argument("--events", help="deployment events file (one JSON object per line); default: scan blocks")
    d.add_argument("--labels", required=True, help="adversarial contract addresses, one per line")
    d.add_argument("--min-callers", type=int, help="unique-caller threshold for benign candidates")
    d.add_argument("--out", required=True, help="output dataset file")

    t = sub.add_parser("train", parents=[common], help="train all models and write a bundle")
    t.add_argument("dataset")
    t.add_argument("--out", required=True, help="bundle directory")

    e = sub.add_parser("eval", parents=[common], help="evaluate a bundle on a dataset")
    e.add_argument("dataset")
    e.add_argument("--all", action="store_true", help="evaluate every record, not just the test slice")
    e.add_argument("--cv", type=int, metavar="N", help="expanding-window cross-validation with N splits")
    e.add_argument("--importance", action="store_true", help="permutation importance of tabular features")
    e.add_argument("--json", action="store_true")

    s = sub.add_parser("serve", parents=[common], help="run the HTTP service")
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--port", type=int, default=8000)
    return ap


def _config(args) -> PipelineConfig:
    include = False if args.no_verified_feature else None
    return load_config(
        args.config,
        snapshot=args.snapshot,
        mode=args.mode,
        model=args.model,
        seed=args.seed,
        include_verified=include,
        from_block=args.from_block,
        to_block=args.to_block,
    )


def _analyze(args, cfg: PipelineConfig) -> int:
    deployment = json.loads(Path(args.deployment).read_text()) if args.deployment else None
    if args.server:
        body: dict = {"deployment": deployment}
        if is_address(args.target) and not Path(args.target).exists():
            body["address"] = args.target
        else:
            try:
                body["bytecode"] = "0x" + parse_code(Path(args.target).read_bytes()).hex()
            except (OSError, ValueError) as exc:
                print(f"{args.target}: analysis error: {exc}", file=sys.stderr)
                return EXIT_ERROR
        r = httpx.post(args.server.rstrip("/") + "/analyze", json=body, timeout=120.0)
        r.raise_for_status()
        report = r.json()
    else:
        system = load_bundle(cfg.model) if cfg.model else None
        report = cmd_analyze(args.target, build_context(cfg, system=system), deployment).to_dict()
    if args.report:
        Path(args.report).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    print(json.dumps(report, indent=2, sort_keys=True) if args.json else format_summary(report))
    return int(report["exit_code"])


def _monitor(args, cfg: PipelineConfig) -> int:
    if not cfg.model:
        raise SystemExit("monitor needs --model (or model = ... in the config)")
    ctx = build_context(cfg, system=load_bundle(cfg.model))
    res = cmd_monitor(ctx, cfg.from_block, cfg.to_block,
                      alert_log=args.alert_log or cfg.alert_log,
                      timings_log=args.timings_log or cfg.timings_log,
                      workers=args.workers or cfg.n_workers, follow=args.follow)
    print(f"analyzed {res.analyzed} deployments: {res.alerts} alerts, {res.errors} errors, {len(res.gaps)} gaps")
    return 0


def _dataset_build(args, cfg: PipelineConfig) -> int:
    ctx = build_context(cfg)
    if args.events:
        events = read_events(args.events)
    else:
        if ctx.rpc is None or cfg.from_block is None:
            raise SystemExit("dataset-build without --events needs an RPC endpoint and --from-block")
        events = []
        for ev in watch_blocks(ctx.rpc, cfg.from_block, cfg.to_block):
            if isinstance(ev, StreamError):
                print(f"gap: block {ev.block_number}: {ev.message}", file=sys.stderr)
            else:
                events.append(ev)
    min_callers = args.min_callers if args.min_callers is not None else cfg.benign_min_callers
    res = cmd_dataset_build(events, ctx, read_label_file(args.labels), args.out, min_callers)
    n_adv = sum(r.label for r in res.records)
    print(f"wrote {len(res.records)} records ({n_adv} adversarial) to {args.out}; "
          f"dropped {len(res.dropped)}, failed {len(res.failed)}")
    for addr, why in sorted(res.dropped.items()):
        print(f"  dropped {addr}: {why}")
    for addr, why in sorted(res.failed.items()):
        print(f"  failed {addr}: {why}")
    return 0


def _train(args, cfg: PipelineConfig) -> int:
    system = cmd_train(args.dataset, args.out, cfg.seed, cfg.include_verified)
    sizes = system.info["sizes"]
    print(f"bundle written to {args.out}: candidate {system.selected_candidate}, meta {system.selected_meta}, "
          f"splits {sizes}")
    return 0


def _eval(args, cfg: PipelineConfig) -> int:
    if args.cv:
        res = cmd_eval_cv(args.dataset, TrainConfig(seed=cfg.seed, include_verified=cfg.include_verified), args.cv)
        rows = [(f"fold{i + 1}", f.report) for i, f in enumerate(res.folds) if f.report is not None]
        for msg in res.diagnostics:
            print(msg, file=sys.stderr)
        if args.json:
            print(json.dumps({n: r.to_dict() for n, r in rows}, indent=2, sort_keys=True))
        else:
            print(format_rows(rows))
            print(f"mean F1 over {len(rows)} folds: {res.mean_f1:.4f}")
        return 0
    if not cfg.model:
        raise SystemExit("eval needs --model")
    if args.importance:
        imp = cmd_eval_importance(args.dataset, cfg.model, seed=cfg.seed, all_records=args.all)
        if args.json:
            print(json.dumps(dict(imp), indent=2))
        else:
            for name, v in imp:
                print(f"{name:<28}{v:>9.4f}")
        return 0
    rows = cmd_eval(args.dataset, cfg.model, args.all)
    print(json.dumps({n: r.to_dict() for n, r in rows}, indent=2, sort_keys=True) if args.json else format_rows(rows))
    return 0


def _serve(args, cfg: PipelineConfig) -> int:
    import uvicorn

    from advcontract.service.app import create_app

    uvicorn.run(create_app(cfg), host=args.host, port=args.port)
    return 0


COMMANDS = {"analyze": _analyze, "monitor": _monitor, "dataset-build": _dataset_build, "train": _train,
            "eval": _eval, "serve": _serve}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = _config(args)
        return COMMANDS[args.command](args, cfg)
    except (ValueError, FileNotFoundError, FileExistsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR if args.command == "analyze" else 1


if __name__ == "__main__":
    sys.exit(main())
