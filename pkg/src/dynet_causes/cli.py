"""Command-line entry point.

Exit codes: 0 success / causes found / word matches, 1 hazard unreachable /
word replays but does not match, 2 diagnostics (or word not replayable),
3 shortest witness beyond ``--max-len``.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass

from .causality import VERDICT_BOUND, VERDICT_FOUND, VERDICT_UNREACHABLE, CauseOptions, analyse
from .errors import DynetError
from .hazard import anchored, compile_dfa, match_word, parse_hazard
from .labels import parse_word
from .language import load_spec
from .lts import SYNC_ARITIES, SYNC_MATCH_MODES, build_lts, default_max_states, export_lts
from .terms import NetworkSpec

EXIT_OK, EXIT_NEGATIVE, EXIT_DIAGNOSTIC, EXIT_BOUND = 0, 1, 2, 3


class ConfigError(DynetError):
    stage = "config"


class InputError(DynetError):
    stage = "io"


@dataclass
class RunConfig:
    spec_path: str
    hazard: str | None = None
    hazard_file: str | None = None
    anchor: str = "anywhere"
    sync_match: str = "syntactic"
    sync_arity: str = "multi"
    max_states: int | None = None
    max_len: int | None = None
    format: str = "text"
    output: str | None = None

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        return cls(
            spec_path=args.spec,
            hazard=getattr(args, "hazard", None),
            hazard_file=getattr(args, "hazard_file", None),
            anchor=getattr(args, "anchor", "anywhere"),
            sync_match=args.sync_match,
            sync_arity=args.sync_arity,
            max_states=args.max_states if args.max_states is not None else default_max_states(),
            max_len=getattr(args, "max_len", None),
            format=getattr(args, "format", "text"),
            output=getattr(args, "output", None),
        )


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from None


def _hazard_text(config: RunConfig) -> str:
    if config.hazard is not None and config.hazard_file is not None:
        raise ConfigError("give either --hazard or --hazard-file, not both")
    if config.hazard_file is not None:
        return _read(config.hazard_file).strip()
    if config.hazard is None:
        raise ConfigError("a hazard is required (--hazard or --hazard-file)")
    return config.hazard


def _emit(text: str, config: RunConfig) -> None:
    if config.output:
        try:
            with open(config.output, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            raise InputError(f"cannot write {config.output}: {exc}") from None
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


def _load(config: RunConfig) -> NetworkSpec:
    return load_spec(_read(config.spec_path))


def cmd_lts(config: RunConfig) -> int:
    spec = _load(config)
    lts = build_lts(spec, config.max_states, config.sync_match, config.sync_arity)
    _emit(export_lts(lts, config.format), config)
    return EXIT_OK


def cmd_causes(config: RunConfig) -> int:
    spec = _load(config)
    hazard = _hazard_text(config)
    lts = build_lts(spec, config.max_states, config.sync_match, config.sync_arity)
    options = CauseOptions(config.anchor, config.sync_match, config.sync_arity, config.max_states, config.max_len)
    report = analyse(lts, hazard, options)
    _emit(report.to_json() if config.format == "json" else report.to_text(), config)
    return {VERDICT_FOUND: EXIT_OK, VERDICT_UNREACHABLE: EXIT_NEGATIVE, VERDICT_BOUND: EXIT_BOUND}[report.verdict]


def cmd_check_word(config: RunConfig, word_text: str) -> int:
    spec = _load(config)
    expr = anchored(parse_hazard(_hazard_text(config), spec), config.anchor)
    word = parse_word(word_text, spec)
    lts = build_lts(spec, config.max_states, config.sync_match, config.sync_arity)
    if not lts.replays(word):
        print("word does not replay in the LTS", file=sys.stderr)
        return EXIT_DIAGNOSTIC
    if match_word(expr, word):
        _emit("match\n", config)
        return EXIT_OK
    _emit("no match\n", config)
    return EXIT_NEGATIVE


def cmd_dfa(config: RunConfig) -> int:
    spec = _load(config)
    expr = anchored(parse_hazard(_hazard_text(config), spec), config.anchor)
    lts = build_lts(spec, config.max_states, config.sync_match, config.sync_arity)
    _emit(compile_dfa(expr, lts.alphabet(), spec).to_json(spec), config)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dynet-causes",
        description="Build LTS models of DyNetKAT specifications and explain hazards causally.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("spec", help="specification file (.dnk)")
    common.add_argument("--max-states", type=int, default=None,
                        help="state budget (default 100000, or $DYNET_CAUSES_MAX_STATES)")
    common.add_argument("--sync-match", choices=SYNC_MATCH_MODES, default="syntactic",
                        help="how sent and received policies are matched")
    common.add_argument("--sync-arity", choices=SYNC_ARITIES, default="multi",
                        help="receivers per synchronisation: any non-empty set, or exactly one")
    common.add_argument("-o", "--output", help="write to this file instead of stdout")

    hazard = argparse.ArgumentParser(add_help=False)
    hazard.add_argument("--hazard", help="hazard expression")
    hazard.add_argument("--hazard-file", help="file containing the hazard expression")
    hazard.add_argument("--anchor", choices=("anywhere", "start"), default="anywhere",
                        help="whether the hazard may start mid-trace (default) or only at the initial state")

    p = sub.add_parser("lts", parents=[common], help="build and export the LTS")
    p.add_argument("--format", choices=("text", "json", "dot"), default="text")

    p = sub.add_parser("causes", parents=[common, hazard], help="compute causal explanations")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--max-len", type=int, default=None,
                   help="longest witness to accept (default: number of product states)")

    p = sub.add_parser("check-word", parents=[common, hazard], help="replay a word and match it against the hazard")
    p.add_argument("--word", default="",
                   help="labels separated by spaces, e.g. 'proc(s1,s2) proc(s3,s4)'; empty for the empty word")

    sub.add_parser("dfa", parents=[common, hazard], help="export the hazard DFA as JSON")
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        config = RunConfig.from_args(args)
        if args.command == "lts":
            return cmd_lts(config)
        if args.command == "causes":
            return cmd_causes(config)
        if args.command == "check-word":
            return cmd_check_word(config, args.word)
        return cmd_dfa(config)
    except DynetError as exc:
        print(exc.diagnostic(), file=sys.stderr)
        return EXIT_DIAGNOSTIC


if __name__ == "__main__":
    sys.exit(main())
