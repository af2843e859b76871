"""Text formats for hybrid automata.

Native format::

    vars: x
    actions: on, off
    location cool { flow: x' = -0.1 * x; x >= 18; }
    location heat { flow: x' = 5 - 0.1 * x; x <= 22; }
    edge cool -on-> heat { reset: x = ~x; }
    edge heat -off-> cool { reset: x = ~x; }
    init: cool
    final: heat

``#`` starts a comment. A file with a ``final:`` line parses to a
:class:`BuchiHybridAutomaton`, otherwise to a plain
:class:`HybridAutomaton`. Runs are assumed non-Zeno and extendable; the
parser does not check either.
"""

from __future__ import annotations

import re

from .errors import AutomatonError, ParseError
from .formula import AUX_ACTION, BinOp, Const, Func, JumpConstraint, Neg, Var, expr_text
from .hybrid import BuchiHybridAutomaton, Edge, HybridAutomaton
from .parser import parse_flow_constraint, parse_jump_constraint

_NAME = r"[A-Za-z_][A-Za-z0-9_]*"


class _Scanner:
    """Position-tracking cursor; skips blanks and ``#``/``//`` comments."""

    _SKIP = re.compile(r"(?:\s+|#[^\n]*|//[^\n]*)*")

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip(self):
        self.pos = self._SKIP.match(self.text, self.pos).end()

    def at_end(self) -> bool:
        self.skip()
        return self.pos >= len(self.text)

    def look(self, pattern: str):
        self.skip()
        return re.compile(pattern).match(self.text, self.pos)

    def expect(self, pattern: str, what: str) -> str:
        m = self.look(pattern)
        if not m:
            found = self.text[self.pos:self.pos + 12].split("\n")[0] or "end of input"
            raise ParseError(f"expected {what}, found {found!r}", self.pos, self.text)
        self.pos = m.end()
        return m.group(0)

    def name(self, what: str = "name") -> str:
        return self.expect(_NAME, what)

    def name_list(self) -> list[str]:
        """Comma-separated names up to end of line (possibly empty)."""
        m = re.compile(r"[ \t]*([^\n#]*)").match(self.text, self.pos)
        self.pos = m.end()
        body = m.group(1).strip()
        if not body:
            return []
        out = []
        for part in body.split(","):
            part = part.strip()
            if not re.fullmatch(_NAME, part):
                raise ParseError(f"bad name {part!r}", m.start(1), self.text)
            out.append(part)
        return out

    def block(self) -> tuple[str, int]:
        self.expect(r"\{", "'{'")
        end = self.text.find("}", self.pos)
        if end < 0:
            raise ParseError("unterminated block", self.pos, self.text)
        start = self.pos
        self.pos = end + 1
        return self.text[start:end], start


def _items(body: str, start: int, key: str, text: str):
    """Split ``key: c1; c2;`` into (constraint text, absolute offset)."""
    m = re.match(r"\s*(?:" + key + r"\s*:)?", body)
    if body.strip() and not re.match(r"\s*" + key + r"\s*:", body):
        raise ParseError(f"expected '{key}:'", start + m.end(), text)
    pos = m.end()
    out = []
    for piece in body[pos:].split(";"):
        if piece.strip():
            lead = len(piece) - len(piece.lstrip())
            out.append((piece.strip(), start + pos + lead))
        pos += len(piece) + 1
    return out


def parse_ha(text: str) -> HybridAutomaton:
    sc = _Scanner(text)
    variables = actions = None
    locations: dict = {}
    edges: dict = {}
    init = None
    finals = None
    while not sc.at_end():
        kw_pos = sc.pos
        kw = sc.expect(r"vars:|actions:|location\b|edge\b|init:|final:", "a section keyword")
        if kw == "vars:":
            variables = sc.name_list()
        elif kw == "actions:":
            actions = sc.name_list()
        elif kw in ("init:", "final:"):
            names = sc.name_list()
            if kw == "init:":
                init = names
            else:
                finals = names
        elif kw == "location":
            if variables is None:
                raise ParseError("'vars:' must come before locations", kw_pos, text)
            name = sc.name("location name")
            if name in locations:
                raise ParseError(f"location {name!r} declared twice", kw_pos, text)
            body, start = sc.block()
            locations[name] = frozenset(
                parse_flow_constraint(c, variables, off) for c, off in _items(body, start, "flow", text)
            )
        else:
            if variables is None:
                raise ParseError("'vars:' must come before edges", kw_pos, text)
            src = sc.name("source location")
            sc.expect(r"-", "'-'")
            act = sc.name("action")
            sc.expect(r"->", "'->'")
            dst = sc.name("target location")
            resets = frozenset()
            if sc.look(r"\{"):
                body, start = sc.block()
                resets = frozenset(
                    parse_jump_constraint(c, variables, off) for c, off in _items(body, start, "reset", text)
                )
            e = Edge(src, act, dst)
            if e in edges:
                raise ParseError(f"edge {e} declared twice", kw_pos, text)
            edges[e] = resets
    if variables is None or actions is None or init is None:
        missing = [k for k, v in (("vars:", variables), ("actions:", actions), ("init:", init)) if v is None]
        raise ParseError(f"missing section(s) {', '.join(missing)}", len(text), text)
    try:
        args = (tuple(locations), tuple(variables), tuple(actions), tuple(edges), locations, edges, frozenset(init))
        if finals is None:
            return HybridAutomaton(*args)
        return BuchiHybridAutomaton(*args, frozenset(finals))
    except AutomatonError as exc:
        raise ParseError(str(exc), None, text) from None


def _constraints(cs) -> str:
    return "; ".join(sorted(c.text for c in cs))


def export_ha(h: HybridAutomaton) -> str:
    lines = [
        f"vars: {', '.join(h.variables)}",
        f"actions: {', '.join(h.actions)}",
    ]
    for l in h.locations:
        flow = _constraints(h.dyn[l])
        lines.append(f"location {l} {{ flow: {flow}; }}" if flow else f"location {l} {{ }}")
    for e in h.edges:
        rst = _constraints(h.rst[e])
        lines.append(f"edge {e.src} -{e.action}-> {e.dst}" + (f" {{ reset: {rst}; }}" if rst else ""))
    lines.append(f"init: {', '.join(sorted(h.init))}")
    if isinstance(h, BuchiHybridAutomaton):
        lines.append(f"final: {', '.join(sorted(h.finals))}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# dot


def _dot_id(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def _action_label(a: str) -> str:
    return "T" if a == AUX_ACTION else a


def export_dot(h: HybridAutomaton, name: str = "H") -> str:
    finals = h.finals if isinstance(h, BuchiHybridAutomaton) else frozenset()
    lines = [f"digraph {_dot_id(name)} {{", "  rankdir=LR;", "  node [shape=box];"]
    for l in h.locations:
        flow = "\n".join(sorted(c.text for c in h.dyn[l])) or "true"
        extra = ", peripheries=2" if l in finals else ""
        lines.append(f"  {_dot_id(l)} [label={_dot_id(l + chr(10) + flow)}{extra}];")
    for k, l in enumerate(sorted(h.init)):
        lines.append(f"  __init_{k} [shape=point];")
        lines.append(f"  __init_{k} -> {_dot_id(l)};")
    grouped: dict = {}
    for e in h.edges:
        grouped.setdefault((e.src, e.dst), []).append(e)
    for (s, d), es in sorted(grouped.items()):
        label = ", ".join(_action_label(e.action) for e in es)
        rst = sorted({c.text for e in es for c in h.rst[e]})
        if rst:
            label += "\n" + "; ".join(rst)
        lines.append(f"  {_dot_id(s)} -> {_dot_id(d)} [label={_dot_id(label)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# PhaVer-style monitor


def _remark(e, table: dict):
    if isinstance(e, Var):
        return Var(e.name, table.get(e.mark, e.mark))
    if isinstance(e, Neg):
        return Neg(_remark(e.arg, table))
    if isinstance(e, Func):
        return Func(e.name, _remark(e.arg, table))
    if isinstance(e, BinOp):
        return BinOp(e.op, _remark(e.left, table), _remark(e.right, table))
    assert isinstance(e, Const)
    return e


def _phaver_rel(rel: str) -> str:
    return "==" if rel == "=" else rel


def _phaver_reset(c: JumpConstraint) -> str:
    # post-state x becomes x', pre-state ~x becomes x
    table = {"": "'", "~": ""}
    return f"{expr_text(_remark(c.lhs, table))} {_phaver_rel(c.rel)} {expr_text(_remark(c.rhs, table))}"


def _phaver_flow(c) -> str:
    return f"{expr_text(c.lhs)} {_phaver_rel(c.rel)} {expr_text(c.rhs)}"


def _conj(parts: list[str]) -> str:
    return " & ".join(parts) if parts else "true"


def export_monitor(h: BuchiHybridAutomaton, name: str = "monitor") -> str:
    """PhaVer-style automaton block. Flow constraints without derivatives
    go to the invariant, the others to ``wait``; the Büchi set travels in a
    ``// final:`` comment."""
    if not h.locations:
        raise AutomatonError("cannot export an automaton without locations")
    finals = h.finals if isinstance(h, BuchiHybridAutomaton) else frozenset(h.locations)
    lines = [
        f"// final: {', '.join(sorted(finals))}",
        f"automaton {name}",
        f"state_var: {', '.join(h.variables)};",
        f"synclabs: {', '.join(h.actions)};",
    ]
    for l in h.locations:
        cs = sorted(h.dyn[l], key=lambda c: c.text)
        inv = [_phaver_flow(c) for c in cs if all(v.mark == "" for v in c.variables())]
        der = [_phaver_flow(c) for c in cs if any(v.mark == "'" for v in c.variables())]
        lines.append(f"loc {l}: while {_conj(inv)} wait {{{_conj(der)}}};")
        for e in h.out[l]:
            rst = _conj([_phaver_reset(c) for c in sorted(h.rst[e], key=lambda c: c.text)])
            lines.append(f"  when true sync {e.action} do {{{rst}}} goto {e.dst};")
    lines.append(f"initially: {', '.join(f'{l} & true' for l in sorted(h.init))};")
    lines.append("end")
    return "\n".join(lines) + "\n"


def _split_conj(text: str, offset: int):
    pos = 0
    for piece in text.split("&"):
        stripped = piece.strip()
        if stripped and stripped != "true":
            yield stripped.replace("==", "="), offset + pos + len(piece) - len(piece.lstrip())
        pos += len(piece) + 1


def parse_monitor(text: str) -> BuchiHybridAutomaton:
    """Inverse of :func:`export_monitor`."""
    finals_m = re.search(r"//\s*final:([^\n]*)", text)
    finals = [s.strip() for s in finals_m.group(1).split(",") if s.strip()] if finals_m else None
    stripped = re.sub(r"//[^\n]*", lambda m: " " * len(m.group(0)), text)
    sc = _Scanner(stripped)
    sc.expect(r"automaton\b", "'automaton'")
    sc.name("automaton name")
    sc.expect(r"state_var\s*:", "'state_var:'")
    variables = [v.strip() for v in sc.expect(r"[^;]*", "variables").split(",") if v.strip()]
    sc.expect(";", "';'")
    sc.expect(r"synclabs\s*:", "'synclabs:'")
    actions = [a.strip() for a in sc.expect(r"[^;]*", "labels").split(",") if a.strip()]
    sc.expect(";", "';'")
    locs: dict = {}
    edges: dict = {}
    init = []
    while sc.look(r"loc\b"):
        sc.expect(r"loc\b", "'loc'")
        l = sc.name("location")
        sc.expect(":", "':'")
        sc.expect(r"while\b", "'while'")
        sc.skip()
        inv_start = sc.pos
        inv = sc.expect(r"[^{]*?(?=\s*wait\b)", "invariant")
        sc.expect(r"wait\b", "'wait'")
        der, der_start = sc.block()
        sc.expect(";", "';'")
        flows = [parse_flow_constraint(c, variables, off) for c, off in _split_conj(inv, inv_start)]
        flows += [parse_flow_constraint(c, variables, off) for c, off in _split_conj(der, der_start)]
        locs[l] = frozenset(flows)
        while sc.look(r"when\b"):
            sc.expect(r"when\b", "'when'")
            sc.expect(r"true\b", "'true' guard")
            sc.expect(r"sync\b", "'sync'")
            act = sc.name("label")
            sc.expect(r"do\b", "'do'")
            body, start = sc.block()
            sc.expect(r"goto\b", "'goto'")
            dst = sc.name("target")
            sc.expect(";", "';'")
            resets = []
            for c, off in _split_conj(body, start):
                raw = parse_flow_constraint(c, variables, off)
                table = {"": "~", "'": ""}
                resets.append(JumpConstraint(_remark(raw.lhs, table), raw.rel, _remark(raw.rhs, table)))
            edges[Edge(l, act, dst)] = frozenset(resets)
    sc.expect(r"initially\s*:", "'initially:'")
    body = sc.expect(r"[^;]*", "initial states")
    sc.expect(";", "';'")
    for part in body.split(","):
        loc = part.split("&")[0].strip()
        if loc:
            init.append(loc)
    sc.expect(r"end\b", "'end'")
    if not sc.at_end():
        raise ParseError("trailing text after 'end'", sc.pos, text)
    try:
        return BuchiHybridAutomaton(
            tuple(locs), tuple(variables), tuple(actions), tuple(edges), locs, edges, frozenset(init),
            frozenset(locs if finals is None else finals),
        )
    except AutomatonError as exc:
        raise ParseError(str(exc), None, text) from None
