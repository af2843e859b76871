"""HOA v1 reading and writing for state-based Büchi automata."""

from __future__ import annotations

import re

from .buchi import BuchiAutomaton, Cocube, Transition, to_dnf
from .errors import ParseError, UnsupportedError
from .formula import AUX_ACTION, BitAtom, Bottom, FlowAtom, Formula, Not, Top, conj, disj
from .parser import parse_flow_constraint

_BIT = re.compile(r"b(\d+)\Z")


def ap_name(atom) -> str:
    if isinstance(atom, BitAtom):
        return f"b{atom.index}"
    if isinstance(atom, FlowAtom):
        return atom.constraint.text
    raise TypeError(atom)


def ap_atom(name: str):
    m = _BIT.match(name)
    if m:
        return BitAtom(int(m.group(1)))
    return FlowAtom(parse_flow_constraint(name))


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_hoa(aut: BuchiAutomaton, name: str | None = None) -> str:
    order = {q: i for i, q in enumerate(aut.states)}
    atoms = aut.atoms()
    ap_index = {a: i for i, a in enumerate(atoms)}
    lines = ["HOA: v1"]
    if name:
        lines.append(f"name: {_quote(name)}")
    lines += [
        f"States: {len(aut.states)}",
        f"Start: {order[aut.initial]}",
        "AP: " + " ".join([str(len(atoms))] + [_quote(ap_name(a)) for a in atoms]),
        "acc-name: Buchi",
        "Acceptance: 1 Inf(0)",
        "properties: trans-labels explicit-labels state-acc",
        "--BODY--",
    ]
    for q in aut.states:
        acc = " {0}" if q in aut.finals else ""
        lines.append(f"State: {order[q]} {_quote(q)}{acc}")
        for t in aut.out[q]:
            cubes = [t.label] if isinstance(t.label, Cocube) else to_dnf(t.label)
            for c in cubes:
                lits = [("" if pos else "!") + str(ap_index[a]) for a, pos in c.literals()]
                lines.append(f"  [{' & '.join(lits) if lits else 't'}] {order[t.dst]}")
    lines.append("--END--")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# import

_TOKEN = re.compile(
    r'\s*(?:(?P<str>"(?:[^"\\]|\\.)*")|(?P<int>\d+)|(?P<hdr>[A-Za-z_][A-Za-z0-9_-]*:)'
    r"|(?P<ident>[A-Za-z_@][A-Za-z0-9_-]*)|(?P<sym>--BODY--|--END--|--ABORT--|[\[\]{}()!&|]))"
)


def _tokens(text: str):
    pos = 0
    out = []
    while pos < len(text):
        if not text[pos:].strip():
            break
        if text.startswith("/*", pos) or text[pos:].lstrip().startswith("/*"):
            start = text.index("/*", pos)
            end = text.find("*/", start)
            if end < 0:
                raise ParseError("unterminated comment", start, text)
            pos = end + 2
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError("unexpected character in HOA input", pos, text)
        kind = m.lastgroup
        value = m.group(kind)
        if kind == "str":
            value = re.sub(r"\\(.)", r"\1", value[1:-1])
        out.append((kind, value, m.start(kind)))
        pos = m.end()
    out.append(("eof", "", len(text)))
    return out


class _HoaParser:
    def __init__(self, text):
        self.text = text
        self.toks = _tokens(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, kind=None, value=None):
        tok = self.toks[self.i]
        if (kind and tok[0] != kind) or (value is not None and tok[1] != value):
            want = value or kind
            raise ParseError(f"expected {want}, found {tok[1] or 'end of input'!r}", tok[2], self.text)
        self.i += 1
        return tok

    def parse(self) -> BuchiAutomaton:
        tok = self.take("hdr")
        if tok[1] != "HOA:":
            raise ParseError("input must start with 'HOA:'", tok[2], self.text)
        version = self.take("ident")
        if version[1] != "v1":
            raise UnsupportedError(f"HOA version {version[1]} is not supported")
        n_states = None
        starts = []
        aps: list = []
        acceptance = None
        while self.peek()[0] == "hdr":
            key = self.take("hdr")[1]
            if key == "States:":
                n_states = int(self.take("int")[1])
            elif key == "Start:":
                first = int(self.take("int")[1])
                if self.peek()[1] == "&":
                    raise UnsupportedError("alternating start conjunctions are not supported")
                starts.append(first)
            elif key == "AP:":
                count = int(self.take("int")[1])
                aps = [self.take("str")[1] for _ in range(count)]
            elif key == "Acceptance:":
                acceptance = self._acceptance()
            elif key == "Alias:":
                raise UnsupportedError("aliases are not supported")
            else:
                self._skip_header_values()
        if len(starts) != 1:
            raise UnsupportedError(f"exactly one initial state required, found {len(starts)}")
        if acceptance is None:
            raise ParseError("missing Acceptance header", len(self.text), self.text)
        atoms = []
        for name in aps:
            try:
                atoms.append(ap_atom(name))
            except ParseError as exc:
                raise ParseError(f"AP {name!r} is neither a bit nor a flow constraint: {exc}", 0, self.text) from None
        self.take("sym", "--BODY--")
        states: dict = {}
        finals = set()
        trans = []
        while self.peek()[1] == "State:":
            self.take("hdr")
            if self.peek()[1] == "[":
                raise UnsupportedError("state labels are not supported")
            sid = int(self.take("int")[1])
            name = self.take("str")[1] if self.peek()[0] == "str" else f"s{sid}"
            states[sid] = name
            if self.peek()[1] == "{":
                marks = self._marks()
                if marks and acceptance == "inf0":
                    finals.add(sid)
            while self.peek()[1] == "[":
                self.take("sym", "[")
                label = self._label(atoms)
                self.take("sym", "]")
                dst = int(self.take("int")[1])
                if self.peek()[1] == "&":
                    raise UnsupportedError("universal branching is not supported")
                if self.peek()[1] == "{":
                    raise UnsupportedError("transition-based acceptance is not supported")
                trans.append((sid, label, dst))
            if self.peek()[0] == "int":
                raise UnsupportedError("implicit labels are not supported")
        end = self.take("sym")
        if end[1] != "--END--":
            raise ParseError("expected --END--", end[2], self.text)
        if n_states is None:
            n_states = max(list(states) + [d for _, _, d in trans] + starts) + 1
        names = {i: states.get(i, f"s{i}") for i in range(n_states)}
        if len(set(names.values())) != len(names):
            names = {i: f"s{i}" for i in range(n_states)}
        if acceptance == "all":
            finals = set(range(n_states))
        out = []
        for s, label, d in trans:
            for c in to_dnf(label):
                out.append(Transition(names[s], c, names[d]))
        return BuchiAutomaton(
            tuple(names[i] for i in range(n_states)),
            names[starts[0]],
            tuple(out),
            frozenset(names[i] for i in finals),
        )

    def _skip_header_values(self):
        while self.peek()[0] in ("int", "str", "ident") or self.peek()[1] in ("!", "&", "|", "(", ")"):
            self.i += 1

    def _acceptance(self) -> str:
        start = self.peek()[2]
        count = int(self.take("int")[1])
        body = []
        while self.peek()[0] != "hdr" and self.peek()[1] != "--BODY--":
            body.append(self.take()[1])
        cond = "".join(body)
        if count == 0 and cond == "t":
            return "all"
        if count == 1 and cond == "Inf(0)":
            return "inf0"
        raise UnsupportedError(f"acceptance '{count} {' '.join(body)}' is not state-based Büchi (at {start})")

    def _marks(self):
        self.take("sym", "{")
        marks = []
        while self.peek()[0] == "int":
            marks.append(int(self.take("int")[1]))
        self.take("sym", "}")
        if any(m != 0 for m in marks):
            raise UnsupportedError("only acceptance set 0 is supported")
        return marks

    def _label(self, atoms) -> Formula:
        def disjunction():
            parts = [conjunction()]
            while self.peek()[1] == "|":
                self.take()
                parts.append(conjunction())
            return disj(*parts)

        def conjunction():
            parts = [unary()]
            while self.peek()[1] == "&":
                self.take()
                parts.append(unary())
            return conj(*parts)

        def unary():
            kind, value, pos = self.peek()
            if value == "!":
                self.take()
                return Not(unary())
            if value == "(":
                self.take()
                inner = disjunction()
                self.take("sym", ")")
                return inner
            if kind == "int":
                self.take()
                k = int(value)
                if k >= len(atoms):
                    raise ParseError(f"AP index {k} out of range", pos, self.text)
                return atoms[k]
            if kind == "ident" and value in ("t", "f"):
                self.take()
                return Top() if value == "t" else Bottom()
            raise ParseError(f"unexpected {value!r} in label", pos, self.text)

        return disjunction()


def import_hoa(text: str) -> BuchiAutomaton:
    return _HoaParser(text).parse()


def export_bha_hoa(h) -> str:
    """Discrete skeleton of a BHA: APs are the actions, each edge is labelled
    by its action; flows appear in the state names."""
    order = {l: i for i, l in enumerate(h.locations)}
    acts = list(h.actions)
    lines = [
        "HOA: v1",
        f"States: {len(h.locations)}",
        *[f"Start: {order[l]}" for l in sorted(h.init)],
        "AP: " + " ".join([str(len(acts))] + [_quote("T" if a == AUX_ACTION else a) for a in acts]),
        "acc-name: Buchi",
        "Acceptance: 1 Inf(0)",
        "properties: trans-labels explicit-labels state-acc",
        "--BODY--",
    ]
    for l in h.locations:
        flow = " & ".join(sorted(c.text for c in h.dyn[l])) or "true"
        acc = " {0}" if l in h.finals else ""
        lines.append(f"State: {order[l]} {_quote(f'{l} [{flow}]')}{acc}")
        for e in h.out[l]:
            k = acts.index(e.action)
            lits = [str(i) if i == k else f"!{i}" for i in range(len(acts))]
            lines.append(f"  [{' & '.join(lits)}] {order[e.dst]}")
    lines.append("--END--")
    return "\n".join(lines) + "\n"
