"""Parser, validator and pretty-printer for the ``.ta`` model format.

Example::

    clock x;
    var n : [0, 1] = 0;
    channel c;
    automaton A {
      init q0;
      location q0;
      location q2 inv (x < 2) labels {p};
      trans t1: q0 -> q2 when (n = 0) sync c! reset {x} do {n := n + 1};
    }

``when`` mixes clock atoms (``<``, ``>``, ``<=``, ``>=`` against natural
constants, top-level conjuncts only) and variable atoms (``<`` or ``=``
against an integer or another variable, under ``not``/``and``).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Union

from .core import (
    Assignment, Automaton, BinOp, ClockAtom, ClockConstraint, Const, Location,
    Network, Span, SyncLabel, Transition, VarAnd, VarCmp, VariableDecl, VarNot,
    VarRef, VarTrue, bit_width, expr_names, var_constraint_names,
)

__all__ = ["ParseDiagnostic", "ParseError", "parse_network", "parse_file",
           "validate_network", "format_network", "Lexer", "Token"]

INT32_MIN, INT32_MAX = -(2 ** 31), 2 ** 31 - 1

KEYWORDS = {"clock", "var", "channel", "automaton", "init", "location", "inv",
            "labels", "trans", "when", "sync", "reset", "do", "and", "not",
            "true", "false", "or"}


@dataclass(frozen=True)
class ParseDiagnostic:
    severity: str  # "error" | "warning"
    span: Optional[Span]
    message: str
    code: str

    def __str__(self):
        where = f"{self.span}: " if self.span else ""
        return f"{where}{self.severity} {self.code}: {self.message}"


class ParseError(ValueError):
    def __init__(self, diagnostics, source_name: str = "<model>"):
        self.diagnostics = list(diagnostics)
        self.source_name = source_name
        super().__init__("\n".join(f"{source_name}:{d}" for d in self.diagnostics))


# -- lexer ------------------------------------------------------------------

@dataclass(frozen=True)
class Token:
    kind: str   # "ident" | "int" | "op" | "eof"
    text: str
    span: Span


_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+|//[^\n]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<int>[0-9]+)
  | (?P<op>->|:=|<=|>=|&&|\|\||[≤≥¬∧∨{}()\[\];:,<>=!?\#@+\-.])
""", re.VERBOSE)

_UNICODE_OPS = {"≤": "<=", "≥": ">=", "¬": "!", "∧": "&&", "∨": "||"}


class Lexer:
    def __init__(self, text: str):
        self.text = text

    def tokens(self):
        text = self.text
        pos, line, col = 0, 1, 1
        out = []
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if not m:
                raise ParseError([ParseDiagnostic(
                    "error", Span(line, col, line, col + 1),
                    f"unexpected character {text[pos]!r}", "E001")])
            chunk = m.group(0)
            kind = m.lastgroup
            end_line, end_col = line, col
            for ch in chunk:
                if ch == "\n":
                    end_line, end_col = end_line + 1, 1
                else:
                    end_col += 1
            if kind != "ws":
                tok_text = _UNICODE_OPS.get(chunk, chunk)
                out.append(Token(kind, tok_text, Span(line, col, end_line, end_col)))
            pos = m.end()
            line, col = end_line, end_col
        out.append(Token("eof", "", Span(line, col, line, col)))
        return out


# -- raw guard trees (resolved once all declarations are known) -------------

@dataclass(frozen=True)
class _Atom:
    name: str
    rel: str
    rhs: Union[str, int]
    span: Span


@dataclass(frozen=True)
class _Not:
    arg: object
    span: Span


@dataclass(frozen=True)
class _And:
    left: object
    right: object


@dataclass(frozen=True)
class _True:
    pass


@dataclass
class _RawTransition:
    name: Optional[str]
    source: str
    target: str
    when: object
    sync: Optional[tuple]
    resets: list
    assigns: list
    span: Span
    sync_span: Optional[Span] = None
    reset_spans: Optional[list] = None


@dataclass
class _RawLocation:
    name: str
    inv: list
    labels: list
    span: Span


@dataclass
class _RawAutomaton:
    name: str
    init: Optional[tuple]
    locations: list
    transitions: list
    span: Span


class _Parser:
    def __init__(self, text: str):
        self.toks = Lexer(text).tokens()
        self.pos = 0

    # token helpers
    @property
    def cur(self) -> Token:
        return self.toks[self.pos]

    def advance(self) -> Token:
        tok = self.toks[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def error(self, message: str, tok: Optional[Token] = None):
        tok = tok or self.cur
        raise ParseError([ParseDiagnostic("error", tok.span, message, "E002")])

    def at(self, text: str) -> bool:
        return self.cur.text == text and self.cur.kind in ("op", "ident")

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.advance()
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.cur.text or "end of input"
            self.error(f"expected {text!r}, found {found!r}")
        return self.advance()

    def ident(self, what: str = "identifier") -> Token:
        tok = self.cur
        if tok.kind != "ident" or tok.text in KEYWORDS:
            self.error(f"expected {what}, found {tok.text or 'end of input'!r}")
        return self.advance()

    def integer(self) -> tuple:
        neg = self.accept("-")
        tok = self.cur
        if tok.kind != "int":
            self.error(f"expected integer, found {tok.text or 'end of input'!r}")
        self.advance()
        value = -int(tok.text) if neg else int(tok.text)
        return value, tok.span

    # grammar
    def model(self):
        decls = {"clock": [], "var": [], "channel": [], "automaton": []}
        while self.cur.kind != "eof":
            tok = self.cur
            if self.accept("clock"):
                decls["clock"].extend(self.name_list(";"))
            elif self.accept("channel"):
                decls["channel"].extend(self.name_list(";"))
            elif self.accept("var"):
                decls["var"].append(self.var_decl())
            elif self.accept("automaton"):
                decls["automaton"].append(self.automaton(tok))
            else:
                self.error(f"expected a declaration, found {tok.text!r}")
        return decls

    def name_list(self, end: str):
        names = [self.ident()]
        while self.accept(","):
            names.append(self.ident())
        self.expect(end)
        return [(t.text, t.span) for t in names]

    def var_decl(self):
        name = self.ident("variable name")
        self.expect(":")
        self.expect("[")
        lo, lo_span = self.integer()
        self.expect(",")
        hi, hi_span = self.integer()
        self.expect("]")
        init = None
        if self.accept("="):
            init, _ = self.integer()
        self.expect(";")
        return name.text, lo, hi, init, name.span

    def automaton(self, start: Token):
        name = self.ident("automaton name")
        self.expect("{")
        init = None
        locations, transitions = [], []
        while not self.accept("}"):
            if self.cur.kind == "eof":
                self.error("unterminated automaton block")
            if self.accept("init"):
                tok = self.ident("location name")
                init = (tok.text, tok.span)
                self.expect(";")
            elif self.accept("location"):
                locations.append(self.location())
            elif self.accept("trans"):
                transitions.append(self.transition())
            else:
                self.error(f"expected 'init', 'location' or 'trans', found {self.cur.text!r}")
        return _RawAutomaton(name.text, init, locations, transitions, name.span)

    def location(self):
        name = self.ident("location name")
        inv, labels = [], []
        while not self.accept(";"):
            if self.accept("inv"):
                inv = self.clock_conj()
            elif self.accept("labels"):
                self.expect("{")
                if not self.at("}"):
                    labels = [(t.text, t.span) for t in [self.ident("label")]]
                    while self.accept(","):
                        tok = self.ident("label")
                        labels.append((tok.text, tok.span))
                self.expect("}")
            else:
                self.error(f"expected 'inv', 'labels' or ';', found {self.cur.text!r}")
        return _RawLocation(name.text, inv, labels, name.span)

    def clock_conj(self):
        atoms = [self.clock_atom()]
        while self.accept("and") or self.accept("&&"):
            atoms.append(self.clock_atom())
        return atoms

    def clock_atom(self):
        if self.accept("("):
            inner = self.clock_conj()
            self.expect(")")
            if len(inner) != 1:
                return _flatten_group(inner)
            return inner[0]
        name = self.ident("clock name")
        rel = self.cur
        if rel.text not in ("<", ">", "<=", ">="):
            self.error(f"expected clock relation, found {rel.text!r}")
        self.advance()
        value, _ = self.integer()
        return _Atom(name.text, rel.text, value, name.span)

    def transition(self):
        first = self.ident()
        name = None
        if self.accept(":"):
            name = first
            first = self.ident("source location")
        self.expect("->")
        target = self.ident("target location")
        when, sync, resets, assigns = _True(), None, [], []
        sync_span, reset_spans = None, []
        while not self.accept(";"):
            if self.accept("when"):
                when = self.bexpr()
            elif self.accept("sync"):
                chan = self.ident("channel name")
                kind = self.cur
                if kind.text not in ("!", "?", "#", "@"):
                    self.error(f"expected one of ! ? # @ after channel, found {kind.text!r}")
                self.advance()
                sync, sync_span = (chan.text, kind.text), chan.span
            elif self.accept("reset"):
                self.expect("{")
                if not self.at("}"):
                    tok = self.ident("clock name")
                    resets.append(tok.text)
                    reset_spans.append(tok.span)
                    while self.accept(","):
                        tok = self.ident("clock name")
                        resets.append(tok.text)
                        reset_spans.append(tok.span)
                self.expect("}")
            elif self.accept("do"):
                self.expect("{")
                if not self.at("}"):
                    assigns.append(self.assignment())
                    while self.accept(",") or self.accept(";"):
                        if self.at("}"):
                            break
                        assigns.append(self.assignment())
                self.expect("}")
            else:
                self.error(f"expected 'when', 'sync', 'reset', 'do' or ';', found {self.cur.text!r}")
        return _RawTransition(name.text if name else None, first.text, target.text,
                              when, sync, resets, assigns, (name or first).span,
                              sync_span, reset_spans)

    def assignment(self):
        target = self.ident("variable name")
        self.expect(":=")
        return target.text, self.expr(), target.span

    def expr(self):
        left = self.primary()
        while self.at("+") or self.at("-"):
            op = self.advance().text
            left = BinOp(op, left, self.primary())
        return left

    def primary(self):
        if self.accept("("):
            inner = self.expr()
            self.expect(")")
            return inner
        if self.cur.kind == "int" or self.at("-"):
            value, _ = self.integer()
            return Const(value)
        tok = self.ident("variable or integer")
        return _SpannedRef(tok.text, tok.span)

    def bexpr(self):
        left = self.bterm()
        while self.accept("and") or self.accept("&&"):
            left = _And(left, self.bterm())
        return left

    def bterm(self):
        tok = self.cur
        if self.accept("not") or self.accept("!"):
            return _Not(self.bterm(), tok.span)
        if self.accept("true"):
            return _True()
        if self.accept("("):
            inner = self.bexpr()
            self.expect(")")
            return inner
        name = self.ident("clock or variable name")
        rel = self.cur
        if rel.text not in ("<", ">", "<=", ">=", "="):
            self.error(f"expected comparison, found {rel.text!r}")
        self.advance()
        if self.cur.kind == "ident":
            rhs = self.ident("variable name").text
        else:
            rhs, _ = self.integer()
        return _Atom(name.text, rel.text, rhs, name.span)


class _SpannedRef(VarRef):
    """VarRef remembering where it was written; replaced during resolution."""

    def __init__(self, name, span):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "span", span)


def _flatten_group(atoms):
    out = atoms[0]
    for a in atoms[1:]:
        out = _And(out, a)
    return out


def _conjuncts(node):
    if isinstance(node, _And):
        return _conjuncts(node.left) + _conjuncts(node.right)
    if isinstance(node, _True):
        return []
    return [node]


# -- semantic resolution ----------------------------------------------------

class _Resolver:
    def __init__(self, decls):
        self.decls = decls
        self.diags = []
        self.clocks = [n for n, _ in decls["clock"]]
        self.vars = {v[0]: v for v in decls["var"]}
        self.channels = [n for n, _ in decls["channel"]]

    def err(self, span, msg, code):
        self.diags.append(ParseDiagnostic("error", span, msg, code))

    def check_clock(self, name, span) -> bool:
        if name not in self.clocks:
            self.err(span, f"undeclared clock {name!r}", "E011")
            return False
        return True

    def clock_atoms(self, atoms):
        out = []
        for a in _conjuncts(_flatten_group(atoms) if atoms else _True()):
            if not self.check_clock(a.name, a.span):
                continue
            if a.rhs < 0:
                self.err(a.span, f"clock {a.name!r} must be compared with a natural number", "E017")
                continue
            out.append(ClockAtom(a.name, a.rel, a.rhs))
        return ClockConstraint(tuple(out))

    def guard(self, node):
        clock, rest = [], []
        for c in _conjuncts(node):
            if isinstance(c, _Atom) and c.name in self.clocks:
                if not isinstance(c.rhs, int) or c.rhs < 0:
                    self.err(c.span, f"clock {c.name!r} must be compared with a natural number", "E017")
                elif c.rel == "=":
                    self.err(c.span, "clock constraints use <, >, <= or >=", "E017")
                else:
                    clock.append(ClockAtom(c.name, c.rel, c.rhs))
            else:
                rest.append(self.var_guard(c))
        var = VarTrue()
        for r in rest:
            var = r if isinstance(var, VarTrue) else VarAnd(var, r)
        return ClockConstraint(tuple(clock)), var

    def var_guard(self, node):
        if isinstance(node, _True):
            return VarTrue()
        if isinstance(node, _And):
            return VarAnd(self.var_guard(node.left), self.var_guard(node.right))
        if isinstance(node, _Not):
            return VarNot(self.var_guard(node.arg))
        if node.name in self.clocks:
            self.err(node.span, f"clock {node.name!r} may only appear in top-level conjuncts", "E017")
            return VarTrue()
        if node.name not in self.vars:
            self.err(node.span, f"undeclared clock or variable {node.name!r}", "E012")
            return VarTrue()
        if node.rel not in ("<", "="):
            self.err(node.span, "variable constraints use < or =", "E017")
            return VarTrue()
        if isinstance(node.rhs, str) and node.rhs not in self.vars:
            self.err(node.span, f"undeclared variable {node.rhs!r}", "E012")
            return VarTrue()
        if isinstance(node.rhs, int) and not INT32_MIN <= node.rhs <= INT32_MAX:
            self.err(node.span, f"integer literal {node.rhs} outside the 32-bit range", "E018")
        return VarCmp(node.name, node.rel, node.rhs)

    def expr(self, e, span):
        if isinstance(e, _SpannedRef):
            if e.name not in self.vars:
                self.err(e.span, f"undeclared variable {e.name!r}", "E012")
            return VarRef(e.name)
        if isinstance(e, BinOp):
            return BinOp(e.op, self.expr(e.left, span), self.expr(e.right, span))
        if isinstance(e, Const) and not INT32_MIN <= e.value <= INT32_MAX:
            self.err(span, f"integer literal {e.value} outside the 32-bit range", "E018")
        return e

    def automaton(self, raw: _RawAutomaton):
        if not raw.locations:
            self.err(raw.span, f"automaton {raw.name!r} has no locations", "E019")
            return None
        order = list(raw.locations)
        if raw.init is not None:
            names = [l.name for l in order]
            if raw.init[0] not in names:
                self.err(raw.init[1], f"unknown initial location {raw.init[0]!r}", "E016")
            else:
                idx = names.index(raw.init[0])
                order.insert(0, order.pop(idx))
        index = {}
        locations = []
        for loc in order:
            if loc.name in index:
                self.err(loc.span, f"duplicate location {loc.name!r} in {raw.name!r}", "E010")
                continue
            index[loc.name] = len(locations)
            locations.append(Location(loc.name, self.clock_atoms(loc.inv),
                                      frozenset(p for p, _ in loc.labels), loc.span))
        transitions = []
        seen = set()
        for n, rt in enumerate(raw.transitions):
            name = rt.name or f"t{n}"
            if name in seen:
                self.err(rt.span, f"duplicate transition {name!r} in {raw.name!r}", "E010")
            seen.add(name)
            ok = True
            for end in (rt.source, rt.target):
                if end not in index:
                    self.err(rt.span, f"unknown location {end!r} in {raw.name!r}", "E016")
                    ok = False
            guard, var_guard = self.guard(rt.when)
            sync = None
            if rt.sync is not None:
                if rt.sync[0] not in self.channels:
                    self.err(rt.sync_span, f"undeclared channel {rt.sync[0]!r}", "E013")
                sync = SyncLabel(*rt.sync)
            for x, sp in zip(rt.resets, rt.reset_spans or []):
                self.check_clock(x, sp)
            assigns = []
            for target, exp, sp in rt.assigns:
                if target not in self.vars:
                    self.err(sp, f"undeclared variable {target!r}", "E012")
                assigns.append(Assignment(target, self.expr(exp, sp)))
            if ok:
                transitions.append(Transition(name, index[rt.source], index[rt.target], sync,
                                              guard, var_guard, tuple(rt.resets), tuple(assigns), rt.span))
        return Automaton(raw.name, tuple(locations), tuple(transitions), raw.span)


def parse_network(text: str, source_name: str = "<model>") -> Network:
    """Parse and validate model text; raises :class:`ParseError` on errors."""
    try:
        decls = _Parser(text).model()
    except ParseError as exc:
        exc.source_name = source_name
        raise ParseError(exc.diagnostics, source_name) from None
    except RecursionError:
        raise ParseError([ParseDiagnostic("error", None, "input nested too deeply", "E002")],
                         source_name) from None
    res = _Resolver(decls)
    automata = [a for a in (res.automaton(r) for r in decls["automaton"]) if a is not None]
    spans = {}
    for name, span in decls["clock"] + decls["channel"]:
        spans.setdefault(name, span)
    variables = []
    for name, lo, hi, init, span in decls["var"]:
        spans.setdefault(name, span)
        if init is None:
            init = 0 if lo <= 0 <= hi else lo
        variables.append(VariableDecl(name, lo, hi, init, span))
    net = Network(tuple(automata), tuple(n for n, _ in decls["clock"]), tuple(variables),
                  tuple(n for n, _ in decls["channel"]), spans)
    diags = res.diags + validate_network(net)
    errors = [d for d in diags if d.severity == "error"]
    if errors:
        raise ParseError(_dedupe(errors), source_name)
    return net


def parse_file(path) -> Network:
    with open(path, encoding="utf-8") as fh:
        return parse_network(fh.read(), str(path))


def _dedupe(diags):
    seen, out = set(), []
    for d in diags:
        if d not in seen:
            seen.add(d)
            out.append(d)
    return out


# -- validation -------------------------------------------------------------

def validate_network(net: Network) -> list:
    """Cross-cutting static checks; returns errors and warnings."""
    out = []

    def err(span, msg, code):
        out.append(ParseDiagnostic("error", span, msg, code))

    def warn(span, msg, code):
        out.append(ParseDiagnostic("warning", span, msg, code))

    seen = {}
    for kind, names in (("clock", net.clocks), ("channel", net.channels),
                        ("variable", [v.name for v in net.variables]),
                        ("automaton", [a.name for a in net.automata])):
        for name in names:
            span = net.spans.get(name)
            if kind == "automaton":
                span = next((a.span for a in net.automata if a.name == name), None)
            if name in seen:
                err(span, f"duplicate name {name!r} ({seen[name]} and {kind})", "E010")
            else:
                seen[name] = kind
    if not net.automata:
        err(None, "network has no automata", "E019")
    widths = {}
    for v in net.variables:
        if not (INT32_MIN <= v.lo <= INT32_MAX and INT32_MIN <= v.hi <= INT32_MAX):
            err(v.span, f"range of {v.name!r} exceeds the 32-bit signed range", "E018")
        if v.lo > v.hi:
            err(v.span, f"empty range [{v.lo}, {v.hi}] for {v.name!r}", "E014")
        elif not v.lo <= v.init <= v.hi:
            err(v.span, f"initial value {v.init} of {v.name!r} outside [{v.lo}, {v.hi}]", "E014")
        widths[v.name] = bit_width(min(v.lo, v.hi), max(v.lo, v.hi))
    clocks, channels = set(net.clocks), set(net.channels)
    kinds = {}
    for a in net.automata:
        if not a.locations:
            err(a.span, f"automaton {a.name!r} has no locations", "E019")
            continue
        for loc in a.locations:
            for atom in loc.invariant.atoms:
                if atom.clock not in clocks:
                    err(loc.span, f"invariant of {a.name}.{loc.name} uses undeclared clock {atom.clock!r}", "E011")
        for t in a.transitions:
            if not (0 <= t.source < len(a.locations) and 0 <= t.target < len(a.locations)):
                err(t.span, f"transition {t.name!r} references a missing location", "E016")
            for atom in t.guard.atoms:
                if atom.clock not in clocks:
                    err(t.span, f"guard of {t.name!r} uses undeclared clock {atom.clock!r}", "E011")
            for x in t.resets:
                if x not in clocks:
                    err(t.span, f"reset of undeclared clock {x!r}", "E011")
            for name in var_constraint_names(t.var_guard):
                if name not in widths:
                    err(t.span, f"guard of {t.name!r} uses undeclared variable {name!r}", "E012")
            targets = [asg.target for asg in t.assignments]
            if len(targets) != len(set(targets)):
                err(t.span, f"transition {t.name!r} assigns a variable twice", "E020")
            for asg in t.assignments:
                if asg.target not in widths:
                    err(t.span, f"assignment to undeclared variable {asg.target!r}", "E012")
                    continue
                for name in expr_names(asg.expr):
                    if name not in widths:
                        err(t.span, f"expression uses undeclared variable {name!r}", "E012")
                    elif widths[name] > widths[asg.target]:
                        err(t.span, f"{name!r} ({widths[name]} bits) is wider than assignment target "
                                    f"{asg.target!r} ({widths[asg.target]} bits)", "E015")
            if t.sync is not None:
                if t.sync.channel not in channels:
                    err(t.span, f"undeclared channel {t.sync.channel!r}", "E013")
                kinds.setdefault(t.sync.channel, set()).add(t.sync.kind)
    for c in net.channels:
        used = kinds.get(c, set())
        if used & {"!", "?"} and used & {"#", "@"}:
            err(net.spans.get(c), f"channel {c!r} mixes one-to-one and broadcast synchronization", "E021")
        if ("!" in used) != ("?" in used):
            warn(net.spans.get(c), f"channel {c!r} is used with only one of ! and ?: dead synchronization", "W001")
        if "@" in used and "#" not in used:
            warn(net.spans.get(c), f"channel {c!r} has broadcast receivers but no sender", "W001")
    return out


# -- pretty printing --------------------------------------------------------

def _fmt_clock(g: ClockConstraint) -> str:
    return " and ".join(f"({a.clock} {a.rel} {a.const})" for a in g.atoms)


def _fmt_var(xi) -> str:
    if isinstance(xi, VarCmp):
        return f"({xi.var} {xi.rel} {xi.rhs})"
    if isinstance(xi, VarNot):
        return f"not {_fmt_var(xi.arg)}"
    if isinstance(xi, VarAnd):
        return f"({_fmt_var(xi.left)} and {_fmt_var(xi.right)})"
    return "true"


def _fmt_expr(e) -> str:
    if isinstance(e, BinOp):
        return f"({_fmt_expr(e.left)} {e.op} {_fmt_expr(e.right)})"
    return str(e)


def format_network(net: Network) -> str:
    """Render ``net`` in the model format; parsing the result yields ``net`` again."""
    lines = []
    if net.clocks:
        lines.append(f"clock {', '.join(net.clocks)};")
    for v in net.variables:
        lines.append(f"var {v.name} : [{v.lo}, {v.hi}] = {v.init};")
    if net.channels:
        lines.append(f"channel {', '.join(net.channels)};")
    for a in net.automata:
        lines.append(f"automaton {a.name} {{")
        lines.append(f"  init {a.locations[0].name};")
        for loc in a.locations:
            parts = [f"  location {loc.name}"]
            if loc.invariant:
                parts.append(f"inv {_fmt_clock(loc.invariant)}")
            if loc.labels:
                parts.append(f"labels {{{', '.join(sorted(loc.labels))}}}")
            lines.append(" ".join(parts) + ";")
        for t in a.transitions:
            parts = [f"  trans {t.name}: {a.locations[t.source].name} -> {a.locations[t.target].name}"]
            guards = []
            if t.guard:
                guards.append(_fmt_clock(t.guard))
            if not isinstance(t.var_guard, VarTrue):
                guards.append(_fmt_var(t.var_guard))
            if guards:
                parts.append("when " + " and ".join(guards))
            if t.sync is not None:
                parts.append(f"sync {t.sync}")
            if t.resets:
                parts.append(f"reset {{{', '.join(t.resets)}}}")
            if t.assignments:
                body = ", ".join(f"{asg.target} := {_fmt_expr(asg.expr)}" for asg in t.assignments)
                parts.append(f"do {{{body}}}")
            lines.append(" ".join(parts) + ";")
        lines.append("}")
    return "\n".join(lines) + "\n"
