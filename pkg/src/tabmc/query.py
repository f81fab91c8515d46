"""State formulas, verification queries and their bounded encoding."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from . import terms as T
from .core import (Configuration, ModelError, Network, VarCmp, VarNot, eval_var_constraint)

__all__ = ["At", "Label", "VarAtom", "Not", "And", "Or", "Const", "Query", "QueryError",
           "parse_query", "parse_state_formula", "encode_query", "formula_term",
           "eval_state_formula", "check_formula", "witness_positions"]


class QueryError(ValueError):
    pass


@dataclass(frozen=True)
class At:
    automaton: str
    location: str

    def __str__(self):
        return f"{self.automaton}.{self.location}"


@dataclass(frozen=True)
class Label:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class VarAtom:
    """Wraps a variable constraint (``n < c``, ``n = m``, ...)."""

    constraint: object

    def __str__(self):
        return f"({self.constraint})"


@dataclass(frozen=True)
class Not:
    arg: "StateFormula"

    def __str__(self):
        return f"!{_paren(self.arg)}"


@dataclass(frozen=True)
class And:
    args: tuple

    def __str__(self):
        return " && ".join(_paren(a) for a in self.args)


@dataclass(frozen=True)
class Or:
    args: tuple

    def __str__(self):
        return " || ".join(_paren(a) for a in self.args)


@dataclass(frozen=True)
class Const:
    value: bool

    def __str__(self):
        return "true" if self.value else "false"


StateFormula = Union[At, Label, VarAtom, Not, And, Or, Const]


def _paren(f) -> str:
    return f"({f})" if isinstance(f, (And, Or)) else str(f)


@dataclass(frozen=True)
class Query:
    kind: str               # "invariant" or "reachable"
    formula: StateFormula

    def __post_init__(self):
        if self.kind not in ("invariant", "reachable"):
            raise QueryError(f"unknown query kind {self.kind!r}")

    def __str__(self):
        return f"{self.kind} {self.formula}"


# -- text syntax -------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(&&|\|\||<=|>=|[!()<>=.]|-?\d+)|([A-Za-z_][A-Za-z0-9_]*))")


def _tokenize(text: str) -> list:
    out, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise QueryError(f"unexpected character {text[pos]!r} at offset {pos}")
        out.append(m.group(1) or m.group(2))
        pos = m.end()
    return out


class _QueryParser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.pos = 0

    def peek(self, offset: int = 0):
        i = self.pos + offset
        return self.toks[i] if i < len(self.toks) else None

    def take(self):
        tok = self.peek()
        if tok is None:
            raise QueryError("unexpected end of query")
        self.pos += 1
        return tok

    def expect(self, tok):
        got = self.take()
        if got != tok:
            raise QueryError(f"expected {tok!r}, found {got!r}")

    def done(self):
        if self.peek() is not None:
            raise QueryError(f"unexpected token {self.peek()!r}")

    def disj(self):
        args = [self.conj()]
        while self.peek() in ("||", "or"):
            self.take()
            args.append(self.conj())
        return args[0] if len(args) == 1 else Or(tuple(args))

    def conj(self):
        args = [self.unary()]
        while self.peek() in ("&&", "and"):
            self.take()
            args.append(self.unary())
        return args[0] if len(args) == 1 else And(tuple(args))

    def unary(self):
        tok = self.peek()
        if tok in ("!", "not"):
            self.take()
            return Not(self.unary())
        if tok == "(":
            self.take()
            inner = self.disj()
            self.expect(")")
            return inner
        if tok in ("true", "false"):
            self.take()
            return Const(tok == "true")
        name = self.take()
        if not re.match(r"[A-Za-z_]", name):
            raise QueryError(f"expected a name, found {name!r}")
        nxt = self.peek()
        if nxt == ".":
            self.take()
            return At(name, self.take())
        if nxt in ("<", "=", ">", "<=", ">="):
            return self.comparison(name)
        return Label(name)

    def comparison(self, name):
        rel = self.take()
        rhs = self.take()
        if re.fullmatch(r"-?\d+", rhs):
            rhs = int(rhs)
        elif not re.match(r"[A-Za-z_]", rhs):
            raise QueryError(f"expected variable or integer, found {rhs!r}")
        # only < and = exist in the constraint grammar; rewrite the others
        if rel == "<":
            return VarAtom(VarCmp(name, "<", rhs))
        if rel == "=":
            return VarAtom(VarCmp(name, "=", rhs))
        if rel == ">=":
            return VarAtom(VarNot(VarCmp(name, "<", rhs)))
        if isinstance(rhs, int):
            if rel == ">":
                return VarAtom(VarNot(VarCmp(name, "<", rhs + 1)))
            return VarAtom(VarCmp(name, "<", rhs + 1))
        flipped = VarCmp(rhs, "<", name)
        return VarAtom(flipped) if rel == ">" else VarAtom(VarNot(flipped))


def parse_state_formula(text: str) -> StateFormula:
    p = _QueryParser(text)
    f = p.disj()
    p.done()
    return f


def parse_query(text: str) -> Query:
    """Parse ``invariant <formula>`` or ``reachable <formula>``."""
    m = re.match(r"\s*(invariant|reachable)\b(.*)$", text, re.S)
    if not m:
        raise QueryError("query must start with 'invariant' or 'reachable'")
    return Query(m.group(1), parse_state_formula(m.group(2)))


# -- checking against a network ---------------------------------------------

def check_formula(net: Network, f: StateFormula):
    """Raise QueryError if ``f`` references unknown automata, locations, labels or variables."""
    from .core import var_constraint_names
    if isinstance(f, At):
        try:
            a = net.automata[net.automaton_index(f.automaton)]
            a.location_index(f.location)
        except (KeyError, ModelError) as exc:
            raise QueryError(str(exc).strip("'\"")) from None
    elif isinstance(f, Label):
        if f.name not in net.labels:
            raise QueryError(f"unknown label {f.name!r}")
    elif isinstance(f, VarAtom):
        declared = {v.name for v in net.variables}
        for n in sorted(var_constraint_names(f.constraint)):
            if n not in declared:
                raise QueryError(f"unknown variable {n!r}")
    elif isinstance(f, Not):
        check_formula(net, f.arg)
    elif isinstance(f, (And, Or)):
        for a in f.args:
            check_formula(net, a)


def formula_term(hook, f: StateFormula, l: int) -> T.Term:
    """Boolean term for ``f`` at position ``l``."""
    net = hook.net
    if isinstance(f, Const):
        return T.bool_literal(f.value)
    if isinstance(f, At):
        i = net.automaton_index(f.automaton)
        return hook.at(i, net.automata[i].location_index(f.location), l)
    if isinstance(f, Label):
        return T.or_(*(hook.at(i, q, l)
                       for i, a in enumerate(net.automata)
                       for q, loc in enumerate(a.locations) if f.name in loc.labels))
    if isinstance(f, VarAtom):
        return hook.var_guard(f.constraint, l)
    if isinstance(f, Not):
        return T.not_(formula_term(hook, f.arg, l))
    if isinstance(f, And):
        return T.and_(*(formula_term(hook, a, l) for a in f.args))
    if isinstance(f, Or):
        return T.or_(*(formula_term(hook, a, l) for a in f.args))
    raise TypeError(f"not a state formula: {f!r}")


def encode_query(hook, q: Query, k: int = None) -> list:
    """Assertions that are satisfiable exactly when a violation (invariant) or witness (reachable) exists."""
    check_formula(hook.net, q.formula)
    if k is not None and k != hook.k:
        raise QueryError(f"query bound {k} does not match encoding bound {hook.k}")
    target = q.formula if q.kind == "reachable" else Not(q.formula)
    return [T.or_(*(formula_term(hook, target, l) for l in range(hook.k + 2)))]


def eval_state_formula(cfg: Configuration, net: Network, f: StateFormula) -> bool:
    check_formula(net, f)
    return _eval(cfg, net, f)


def _eval(cfg, net, f) -> bool:
    if isinstance(f, Const):
        return f.value
    if isinstance(f, At):
        i = net.automaton_index(f.automaton)
        return cfg.locations[i] == net.automata[i].location_index(f.location)
    if isinstance(f, Label):
        return any(f.name in a.locations[cfg.locations[i]].labels for i, a in enumerate(net.automata))
    if isinstance(f, VarAtom):
        return eval_var_constraint(cfg.vars, f.constraint)
    if isinstance(f, Not):
        return not _eval(cfg, net, f.arg)
    if isinstance(f, And):
        return all(_eval(cfg, net, a) for a in f.args)
    if isinstance(f, Or):
        return any(_eval(cfg, net, a) for a in f.args)
    raise TypeError(f"not a state formula: {f!r}")


def witness_positions(configs, net: Network, q: Query) -> list:
    """Positions whose configuration violates (invariant) or satisfies (reachable) the query."""
    want = q.kind == "reachable"
    return [l for l, cfg in enumerate(configs) if eval_state_formula(cfg, net, q.formula) == want]
