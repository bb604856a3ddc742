"""Command-line entry point: ``cardproto run|list|report``."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .harness import SCENARIOS, ConfigError, ScenarioConfig, Transcript, render_report, run_scenario


def _parse_skew(text: str):
    principal, sep, value = text.partition("=")
    if not sep or not principal:
        raise argparse.ArgumentTypeError(f"expected PRINCIPAL=N, got {text!r}")
    try:
        return principal, int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"skew must be an integer, got {value!r}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cardproto", description="Smart-card authentication protocol lab")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="run a named scenario")
    r.add_argument("scenario")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--window", type=int, default=60, help="freshness window in ticks")
    r.add_argument("--latency", type=int, default=1, help="ticks per channel delivery")
    r.add_argument("--skew", type=_parse_skew, action="append", default=[],
                   metavar="PRINCIPAL=N", help="constant clock offset for a principal")
    r.add_argument("--user", action="append", default=[], metavar="ID:PASSWORD",
                   help="register a user (repeatable; default alice and bob)")
    r.add_argument("--dict", dest="dictionary", help="dictionary file, one password per line")
    r.add_argument("--out", help="write the JSON-lines transcript here")
    r.add_argument("-q", "--quiet", action="store_true")

    sub.add_parser("list", help="list built-in scenarios")

    rep = sub.add_parser("report", help="render a transcript file")
    rep.add_argument("transcript")
    return p


def _cmd_run(args) -> int:
    seed = args.seed
    if os.environ.get("CARDPROTO_SEED"):
        try:
            seed = int(os.environ["CARDPROTO_SEED"])
        except ValueError:
            print("CARDPROTO_SEED must be an integer", file=sys.stderr)
            return 2
    config = ScenarioConfig(args.scenario, seed, args.window, dict(args.skew),
                            dictionary_path=args.dictionary, latency=args.latency)
    if args.user:
        users = []
        for spec in args.user:
            uid, sep, pw = spec.partition(":")
            if not sep:
                print(f"--user expects ID:PASSWORD, got {spec!r}", file=sys.stderr)
                return 2
            users.append((uid, pw))
        config.users = users
    try:
        transcript = run_scenario(config)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    if args.out:
        Path(args.out).write_text(transcript.to_jsonl(), encoding="utf-8")
    if not args.quiet:
        print(render_report(transcript))
    return 0 if transcript.all_pass else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        for name in SCENARIOS:
            print(name)
        return 0
    if args.command == "report":
        try:
            transcript = Transcript.from_jsonl(Path(args.transcript).read_text(encoding="utf-8"))
        except (OSError, ValueError, KeyError) as exc:
            print(f"cannot read transcript: {exc}", file=sys.stderr)
            return 2
        print(render_report(transcript))
        return 0
    return _cmd_run(args)


if __name__ == "__main__":
    sys.exit(main())
