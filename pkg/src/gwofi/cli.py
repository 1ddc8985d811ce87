"""Command line entry point.

Exit codes: 0 success, 1 usage or config error, 2 data or schema error,
3 runtime or numeric error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .apriori import rank_rules, rules_to_tsv
from .config import PipelineConfig, load_config
from .errors import ConfigError, GwofiError, UsageError
from .pipeline import load_prepared, mine_factor_rules, mine_itemsets, run_gwofi, train_fixed

COMMANDS = ("mine", "rules", "train", "run", "report")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("dataset", nargs="?", help="CSV file (used when --config is absent)")
    common.add_argument("--config", type=Path, help="key = value configuration file")
    common.add_argument("--schema", type=Path, help="schema TSV for a positional dataset")
    common.add_argument("--binspec", type=Path, help="bin rule TSV (default: built-in rules)")
    common.add_argument("--seed", type=int)
    common.add_argument("--min-support", type=float)
    common.add_argument("--max-len", type=int)
    common.add_argument("--target")
    common.add_argument("--positive", help="positive label of the target")
    common.add_argument("--out", type=Path, help="output directory")
    common.add_argument("--mode", choices=("multi", "single", "filtered"))
    common.add_argument("--rank-by")
    common.add_argument("--no-augment", action="store_true")
    common.add_argument("--classifier")
    common.add_argument("--workers", type=int)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="gwofi", description="Frequent-itemset augmentation with grey wolf search")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("mine", parents=[common], help="frequent itemsets as TSV")
    sub.add_parser("rules", parents=[common], help="ranked rule tables per consequent")
    sub.add_parser("train", parents=[common], help="train with fixed hyperparameters")
    sub.add_parser("run", parents=[common], help="full search, evaluation and rule mining")
    sub.add_parser("report", parents=[common], help="pretty-print a run's report.tsv")
    return parser


def config_from_args(args) -> PipelineConfig:
    if args.config is not None:
        cfg = load_config(args.config)
    elif args.dataset is not None:
        if args.schema is None:
            raise UsageError("a positional dataset needs --schema")
        cfg = PipelineConfig(data_path=Path(args.dataset), schema_path=args.schema)
    else:
        raise UsageError("give --config PATH or a dataset path")
    changes = {}
    if args.config is not None and args.dataset is not None:
        changes["data_path"] = Path(args.dataset)
    if args.schema is not None:
        changes["schema_path"] = args.schema
    if args.binspec is not None:
        changes["binspec_path"] = args.binspec
    for field, value in (
        ("seed", args.seed),
        ("min_support", args.min_support),
        ("max_len", args.max_len),
        ("target", args.target),
        ("positive", args.positive),
        ("out_dir", args.out),
        ("rule_mode", args.mode),
        ("rank_by", args.rank_by),
        ("classifier", args.classifier),
        ("workers", args.workers),
    ):
        if value is not None:
            changes[field] = value
    if args.target is not None and args.config is not None:
        # a new target invalidates the configured positive label unless restated
        if args.positive is None and args.target != cfg.target:
            changes["positive"] = None
    if args.no_augment:
        changes["augment"] = False
    return cfg.replace(**changes) if changes else cfg


def _emit(text: str, out: Path | None, name: str):
    if out is None:
        sys.stdout.write(text)
        return
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(text, encoding="utf-8", newline="\n")


def _report(args) -> int:
    src = args.out or (Path(args.dataset) if args.dataset else None)
    if src is None and args.config is not None:
        src = load_config(args.config).out_dir
    if src is None:
        raise UsageError("report needs --out DIR or a run directory")
    path = src / "report.tsv" if src.is_dir() else src
    if not path.is_file():
        raise ConfigError(f"no report at {path}")
    rows = [ln.split("\t") for ln in path.read_text(encoding="utf-8").splitlines() if ln]
    widths = [max(len(r[j]) for r in rows) for j in range(len(rows[0]))]
    for r in rows:
        sys.stdout.write("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() + "\n")
    return 0


def _dispatch(args) -> int:
    if args.command == "report":
        return _report(args)
    cfg = config_from_args(args)
    if args.command == "mine":
        _emit(mine_itemsets(cfg), cfg.out_dir, "itemsets.tsv")
    elif args.command == "rules":
        ds = load_prepared(cfg)
        groups = mine_factor_rules(cfg, ds=ds)
        everything = rank_rules([r for g in groups.values() for r in g], cfg.rank_by)
        _emit(rules_to_tsv(everything), cfg.out_dir, f"rules_{ds.target_column()}.tsv")
    elif args.command == "train":
        report = train_fixed(cfg)
        if cfg.out_dir is None:
            sys.stdout.write(report.report_tsv())
    else:
        report = run_gwofi(cfg)
        if cfg.out_dir is None:
            sys.stdout.write(report.report_tsv())
    return 0


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"gwofi: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except SystemExit as exc:
        # --help exits 0 through argparse
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _dispatch(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"gwofi: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except GwofiError as exc:
        print(f"gwofi: error: {exc}", file=sys.stderr)
        return exc.exit_code


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
