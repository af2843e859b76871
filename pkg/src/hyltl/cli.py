"""Command-line driver: ``hyltl <subcommand> ...``.

Exit status: 0 success, 1 usage error, 2 bad input, 3 internal invariant
violation (including a failing ``check``). The stage log goes to stderr.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from . import haformat, hoa
from .errors import AutomatonError, HyltlError
from .formula import AUX_ACTION, action_names, is_positive, simplify, to_ltl_text, to_nnf, to_text
from .hybrid import BuchiHybridAutomaton, HybridAutomaton, as_buchi, compose
from .parser import parse_hyltl
from .pi import pi
from .pipeline import compile_property

log = logging.getLogger("hyltl")

EXIT_USAGE, EXIT_INPUT, EXIT_INVARIANT = 1, 2, 3


class _Usage(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _Usage(message)


def _names(text: str | None) -> list[str] | None:
    if text is None:
        return None
    return [s.strip() for s in text.split(",") if s.strip()]


def _pins(text: str | None) -> dict | None:
    if not text:
        return None
    out = {}
    for part in text.split(","):
        name, sep, value = part.partition("=")
        if not sep or not value.strip().isdigit():
            raise _Usage(f"bad --encoding entry {part!r}; expected action=pattern")
        out[name.strip()] = int(value)
    return out


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _formula(args):
    if args.formula is not None and args.formula_file is not None:
        raise _Usage("give --formula or --formula-file, not both")
    text = args.formula if args.formula is not None else (
        _read(args.formula_file) if args.formula_file is not None else None
    )
    if text is None:
        raise _Usage("a formula is required (--formula or --formula-file)")
    return parse_hyltl(text.strip(), _names(args.vars), _names(args.actions))


def _emit(args, text: str):
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _render(h: HybridAutomaton, fmt: str) -> str:
    if fmt == "text":
        return haformat.export_ha(h)
    if fmt == "dot":
        return haformat.export_dot(h)
    if fmt == "hoa":
        return hoa.export_bha_hoa(as_buchi(h))
    return haformat.export_monitor(as_buchi(h))


def _compile(args):
    phi = _formula(args)
    external = hoa.import_hoa(_read(args.from_hoa)) if args.from_hoa else None
    c = compile_property(phi, _names(args.actions), _names(args.vars), _pins(args.encoding), external)
    for line in c.log:
        log.info(line)
    return c


# ---------------------------------------------------------------------------
# subcommands


def cmd_parse(args):
    _emit(args, to_text(_formula(args)) + "\n")


def cmd_nnf(args):
    _emit(args, to_text(to_nnf(_formula(args))) + "\n")


def cmd_pi(args):
    nnf = to_nnf(_formula(args))
    if is_positive(nnf):
        log.info("pi: skipped (formula already positive)")
        out = nnf
    else:
        out = simplify(pi(nnf))
    _emit(args, to_text(out) + "\n")


def cmd_gamma(args):
    c = _compile(args)
    _emit(args, to_ltl_text(c.ltl) + "\n")


def cmd_ba(args):
    if args.format not in ("text", "hoa"):
        raise _Usage("ba supports --format text or hoa")
    c = _compile(args)
    _emit(args, hoa.export_hoa(c.buchi) if args.format == "hoa" else str(c.buchi) + "\n")


def cmd_bha(args):
    c = _compile(args)
    _emit(args, _render(c.bha, args.format))


def cmd_compose(args):
    sys_ha = haformat.parse_ha(_read(args.system))
    if args.property:
        prop = haformat.parse_ha(_read(args.property))
        if not isinstance(prop, BuchiHybridAutomaton):
            raise AutomatonError("the property automaton needs a 'final:' section")
    else:
        if args.vars is None:
            args.vars = ",".join(sys_ha.variables)
        if args.actions is None:
            args.actions = ",".join(a for a in sys_ha.actions if a != AUX_ACTION)
        prop = _compile(args).bha
    product = compose(sys_ha, prop)
    log.info(f"compose: {len(product.locations)} locations, {len(product.edges)} edges")
    _emit(args, _render(product, args.format))


def cmd_export(args):
    h = haformat.parse_ha(_read(args.input))
    _emit(args, _render(h, args.format))


def cmd_check(args):
    from .oracle import suites
    from .oracle.generators import formula_batch

    seed = int(os.environ.get("HYLTL_SEED", "0"))
    if args.formula is None and args.formula_file is None:
        count = args.random
        formulas = formula_batch(seed, count, args.depth, 3)
        actions = ("off", "on")
    else:
        phi = _formula(args)
        formulas = [phi]
        actions = tuple(sorted(set(_names(args.actions) or ()) | action_names(phi))) or ("off", "on")
    nnfs = [to_nnf(f) for f in formulas]
    plus = [f if is_positive(f) else simplify(pi(f)) for f in nnfs]
    reports = [
        suites.gamma_suite(formulas, actions, args.bound_stem, args.bound_loop),
        suites.split_suite(nnfs, actions=actions, seed=seed, max_stem=args.bound_stem,
                            max_loop=args.bound_loop, max_atoms=args.bound_atoms),
        suites.bha_suite(plus, actions, args.bound_stem, args.bound_loop),
    ]
    failed = False
    for rep in reports:
        print(rep.line())
        for phi, detail in rep.mismatches[:5]:
            print(f"  {phi}: {detail}")
        failed |= not rep.ok
    return EXIT_INVARIANT if failed else 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hyltl", description="HyLTL to Büchi hybrid automata")
    p.add_argument("-q", "--quiet", action="store_true", help="suppress the stage log")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def formula_opts(sp):
        sp.add_argument("-f", "--formula")
        sp.add_argument("--formula-file")
        sp.add_argument("--actions", help="comma-separated action names")
        sp.add_argument("--vars", help="comma-separated variable names")
        sp.add_argument("--out")
        quiet_opt(sp)

    def quiet_opt(sp):
        sp.add_argument("-q", "--quiet", action="store_true", default=argparse.SUPPRESS)

    def pipeline_opts(sp, formats=("text", "dot", "hoa", "monitor")):
        sp.add_argument("--encoding", help="pinned bit patterns, e.g. on=1,off=2")
        sp.add_argument("--from-hoa", help="use this HOA automaton instead of the internal translation")
        sp.add_argument("--format", choices=formats, default="text")

    for name, fn in (("parse", cmd_parse), ("nnf", cmd_nnf), ("pi", cmd_pi)):
        sp = sub.add_parser(name)
        formula_opts(sp)
        sp.set_defaults(func=fn)

    sp = sub.add_parser("gamma")
    formula_opts(sp)
    sp.add_argument("--encoding", help="pinned bit patterns, e.g. on=1,off=2")
    sp.set_defaults(func=cmd_gamma, from_hoa=None)

    for name, fn in (("ba", cmd_ba), ("bha", cmd_bha)):
        sp = sub.add_parser(name)
        formula_opts(sp)
        pipeline_opts(sp)
        sp.set_defaults(func=fn)

    sp = sub.add_parser("compose")
    formula_opts(sp)
    pipeline_opts(sp)
    sp.add_argument("--system", required=True)
    sp.add_argument("--property", help="BHA file; otherwise built from --formula")
    sp.set_defaults(func=cmd_compose)

    sp = sub.add_parser("export")
    sp.add_argument("input")
    sp.add_argument("--format", choices=("text", "dot", "hoa", "monitor"), default="text")
    sp.add_argument("--out")
    quiet_opt(sp)
    sp.set_defaults(func=cmd_export)

    sp = sub.add_parser("check")
    formula_opts(sp)
    sp.add_argument("--bound-stem", type=int, default=2)
    sp.add_argument("--bound-loop", type=int, default=2)
    sp.add_argument("--bound-atoms", type=int, default=2)
    sp.add_argument("--random", type=int, default=20, help="formula count when no formula is given")
    sp.add_argument("--depth", type=int, default=3)
    sp.set_defaults(func=cmd_check)
    return p


def main(argv=None) -> int:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(message)s"))
    log.handlers[:] = [handler]
    log.propagate = False
    try:
        args = build_parser().parse_args(argv)
        log.setLevel(logging.WARNING if args.quiet else logging.INFO)
        if args.command is None:
            raise _Usage("a subcommand is required")
        return args.func(args) or 0
    except _Usage as exc:
        print(f"hyltl: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (HyltlError, OSError) as exc:
        print(f"hyltl: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except AssertionError as exc:
        print(f"hyltl: internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
