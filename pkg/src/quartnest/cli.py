"""Command-line front end: verify, sweep, merge, targeted, sieve, report, class, selftest."""

from __future__ import annotations

import argparse
import glob
import json
import logging
import re
import sys
from fractions import Fraction

from . import __version__
from .exactnum import covers, parse_rat
from .nests import FAMILY_IDS


EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        # let "-9/4" through as a value, like "-3"
        self._negative_number_matcher = re.compile(r"^-\d+$|^-\d*\.\d+$|^-\d+/\d+$")

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _target_range(text: str) -> tuple[int, int]:
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            return int(lo), int(hi)
        n = int(text)
        return n, n
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO..HI, got {text!r}") from None


def _shard(text: str) -> tuple[int, int]:
    try:
        i, n = text.split("/", 1)
        return int(i), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected i/n, got {text!r}") from None


def _rat(text: str) -> Fraction:
    try:
        return parse_rat(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> _Parser:
    p = _Parser(prog="quartnest", description="Exact search and verification for A^4 + aB^4 = C^4 + aD^4.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--config", help="JSON object of flag values; explicit flags win")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("verify", help="re-check every record of a store file")
    s.add_argument("store")

    s = sub.add_parser("sweep", help="height-bounded sweep of one family")
    s.add_argument("--family", choices=FAMILY_IDS, required=True)
    s.add_argument("--max-height", type=int, required=True)
    s.add_argument("--targets", type=_target_range, default=(1, 1000))
    s.add_argument("--shard", type=_shard, default=(1, 1))
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--allow-zero-components", action="store_true")
    s.add_argument("--positive-params-only", action="store_true")
    s.add_argument("--min-height-exclusive", type=int, default=1)
    s.add_argument("--out", required=True)

    s = sub.add_parser("merge", help="merge store files (shards or families) into one")
    s.add_argument("inputs", nargs="+")
    s.add_argument("--out", required=True)

    s = sub.add_parser("targeted", help="search u^2 + c X^4 = a Y^4")
    s.add_argument("--a", type=int, required=True)
    s.add_argument("--c", type=_rat)
    s.add_argument("--xmax", type=int, default=20000)
    s.add_argument("--experimental-c", type=_rat, help="unsupported shift, e.g. -9/4")
    s.add_argument("--out", help="write hit records as a store file")

    s = sub.add_parser("sieve", help="mod-8 parity table")
    s.add_argument("--a", type=int, required=True)
    s.add_argument("--c", type=_rat, required=True)

    s = sub.add_parser("report", help="coverage table from store files")
    s.add_argument("--in", dest="inputs", action="append", required=True, help="store file or glob")
    s.add_argument("--format", choices=("csv", "json", "text"), default="text")
    s.add_argument("--order", help="comma-separated row order, '+' joins families")
    s.add_argument("--nmax", type=int, default=1000)
    s.add_argument("--out")

    s = sub.add_parser("class", help="coverage verdict for a single value")
    s.add_argument("--alpha", type=_rat, required=True)
    s.add_argument("--n", type=int, required=True)

    s = sub.add_parser("selftest", help="randomized identity checks over every family")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--points", type=int, default=200)
    return p


def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    return cfg


def _apply_config(sub: argparse.ArgumentParser, command: str, cfg: dict) -> None:
    """Install config values as subcommand defaults, so explicit flags still win."""
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, value in cfg.items():
        dest = key.replace("-", "_")
        if dest not in actions or dest == "help":
            raise UsageError(f"config key {key!r} is not a flag of {command}")
        action = actions[dest]
        if isinstance(value, str) and action.type is not None:
            try:
                value = action.type(value)
            except argparse.ArgumentTypeError as exc:
                raise UsageError(f"config key {key!r}: {exc}") from None
        defaults[dest] = value
        action.required = False
    sub.set_defaults(**defaults)


def parse_args(argv) -> argparse.Namespace:
    argv = list(argv)
    pre = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    pre.add_argument("--config")
    known, rest = pre.parse_known_args(argv)
    parser = build_parser()
    if known.config:
        cfg = _load_config(known.config)
        subs = parser._subparsers._group_actions[0].choices
        command = next((t for t in rest if t in subs), None)
        if command is not None:
            _apply_config(subs[command], command, cfg)
    args = parser.parse_args(argv)
    if args.command is None:
        raise UsageError("a subcommand is required")
    return args


def cmd_verify(args) -> int:
    from .sweep import read_store, verify_record

    store = read_store(args.store)
    bad = 0
    for rec in store.records:
        problems = verify_record(rec)
        if problems:
            bad += 1
            print(f"FAIL n={rec.n} {rec.family} {rec.mode}: {'; '.join(problems)}")
    print(f"{len(store.records)} records, {bad} failed")
    return EXIT_VERIFY if bad else EXIT_OK


def cmd_sweep(args) -> int:
    from .sweep import SweepConfig, sweep

    try:
        cfg = SweepConfig(
            family=args.family,
            max_height=args.max_height,
            targets=tuple(args.targets),
            include_negative=not args.positive_params_only,
            min_height_exclusive=args.min_height_exclusive,
            allow_zero_components=args.allow_zero_components,
            shard=tuple(args.shard),
            threads=args.threads,
            output_path=args.out,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _, summary = sweep(cfg)
    print(f"{cfg.family} M={cfg.max_height} shard {cfg.shard[0]}/{cfg.shard[1]}: "
          f"D={summary.direct} I={summary.indirect} D+I={summary.unique}")
    return EXIT_OK


def cmd_merge(args) -> int:
    from .sweep import merge_runs

    merge_runs(_expand(args.inputs)).write(args.out)
    return EXIT_OK


def cmd_targeted(args) -> int:
    from .sieve import TargetedQuery, targeted
    from .sweep import CoverageStore

    if (args.c is None) == (args.experimental_c is None):
        raise UsageError("give exactly one of --c or --experimental-c")
    c = args.c if args.c is not None else args.experimental_c
    try:
        query = TargetedQuery(args.a, c, args.xmax, experimental=args.experimental_c is not None)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    hits = targeted(query)
    for h in hits:
        cov = f"{h.record.mode} k={h.record.k}" if h.record else "no witness"
        print(f"hit u={h.u} X={h.X} Y={h.Y} uhat={h.uhat} parity={'/'.join(h.parities)} {cov}")
    print(f"{len(hits)} hits for a={args.a} c={c} X<={args.xmax}")
    if args.out:
        meta = {"targeted": {"a": args.a, "c": str(c), "xmax": args.xmax}}
        CoverageStore([meta], [h.record for h in hits if h.record]).write(args.out)
    return EXIT_OK


def cmd_sieve(args) -> int:
    from .sieve import parity_table

    try:
        rows = parity_table(args.a, args.c)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print("a\tc\tu\tX\tY\tlhs\trhs\tmatched")
    for r in rows:
        print("\t".join(r.cells()))
    return EXIT_OK


def cmd_report(args) -> int:
    from .report import DEFAULT_ORDER, coverage_table, render
    from .sweep import read_store

    paths = _expand(args.inputs)
    stores = [read_store(p) for p in paths]
    order = args.order.split(",") if args.order else DEFAULT_ORDER
    try:
        rows = coverage_table(stores, order, args.nmax)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    text = render(rows, args.format)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_class(args) -> int:
    if args.alpha == 0 or args.n <= 0:
        raise UsageError("need alpha != 0 and n > 0")
    verdict = covers(args.n, args.alpha)
    if verdict:
        print(f"{verdict.mode.capitalize()}, k = {verdict.k}")
    else:
        print("None")
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .identity import IdentityError
    from .nests import self_test

    try:
        self_test(points=args.points, seed=args.seed)
    except IdentityError as exc:
        print(f"FAIL {exc}")
        return EXIT_VERIFY
    print(f"ok: {len(FAMILY_IDS)} families x {args.points} points (seed {args.seed})")
    return EXIT_OK


def _expand(patterns) -> list[str]:
    out = []
    for pat in patterns:
        matches = sorted(glob.glob(pat))
        if not matches:
            raise FileNotFoundError(f"no files match {pat}")
        out.extend(matches)
    return out


COMMANDS = {
    "verify": cmd_verify,
    "sweep": cmd_sweep,
    "merge": cmd_merge,
    "targeted": cmd_targeted,
    "sieve": cmd_sieve,
    "report": cmd_report,
    "class": cmd_class,
    "selftest": cmd_selftest,
}


def main(argv=None) -> int:
    try:
        args = parse_args(sys.argv[1:] if argv is None else argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(exc, file=sys.stderr)
        return EXIT_IO
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(asctime)s %(levelname)s %(message)s",
        stream=sys.stderr,
    )
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        # corrupt store files surface here
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFY if args.command == "verify" else EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
