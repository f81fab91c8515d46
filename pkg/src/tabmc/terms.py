"""Small solver-agnostic term IR over Bool, Real and fixed-width BitVector sorts.

Terms are immutable and well-sorted by construction: every constructor checks
the sorts of its arguments and raises :class:`SortError` otherwise.  A
:class:`Script` collects declarations, macro definitions and assertions and
is rendered to SMT-LIB2 text by :func:`emit_smtlib2`.

The module also contains a tiny concrete evaluator (:func:`evaluate`) that is
used by the test-suite and by the model re-substitution check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Union

__all__ = [
    "Sort", "BOOL", "REAL", "BV", "Term", "SortError", "Script",
    "const", "ref", "bool_literal", "bv_literal", "real_literal",
    "not_", "and_", "or_", "implies", "iff", "eq",
    "bvnot", "bvand", "bvor", "bvxor", "bvadd", "bvsub",
    "bvslt", "bvsle", "bvult", "bvule", "slice", "bit", "concat",
    "sign_extend", "real_add", "real_lt", "real_le", "real_gt", "real_ge",
    "emit_smtlib2", "evaluate", "compile_term", "term_to_smt", "free_names",
]


class SortError(TypeError):
    """Raised when a term would be ill-sorted or malformed."""


@dataclass(frozen=True)
class Sort:
    kind: str  # "bool" | "real" | "bv"
    width: int = 0

    def __post_init__(self):
        if self.kind not in ("bool", "real", "bv"):
            raise SortError(f"unknown sort kind {self.kind!r}")
        if self.kind == "bv" and self.width < 1:
            raise SortError(f"BitVector width must be >= 1, got {self.width}")

    @property
    def is_bv(self) -> bool:
        return self.kind == "bv"

    def smt(self) -> str:
        if self.kind == "bool":
            return "Bool"
        if self.kind == "real":
            return "Real"
        return f"(_ BitVec {self.width})"

    def __str__(self):
        return self.smt()


BOOL = Sort("bool")
REAL = Sort("real")


def BV(width: int) -> Sort:
    return Sort("bv", width)


@dataclass(frozen=True)
class Term:
    op: str
    args: tuple = ()
    sort: Sort = BOOL
    params: tuple = ()

    # Python operators are deliberately not overloaded: `==` must stay
    # structural equality so terms can be hashed and compared in tests.

    def __repr__(self):
        return term_to_smt(self)


Value = Union[bool, int, Fraction]


# -- leaves -----------------------------------------------------------------

def const(name: str, sort: Sort) -> Term:
    return Term("const", (), sort, (name,))


def ref(name: str, sort: Sort) -> Term:
    """Reference to a macro introduced with :meth:`Script.define`."""
    return Term("ref", (), sort, (name,))


def bool_literal(value: bool) -> Term:
    return Term("true" if value else "false", (), BOOL)


TRUE = bool_literal(True)
FALSE = bool_literal(False)


def bv_literal(value: int, width: int) -> Term:
    """BitVector literal; negative values use twos complement.

    The value must be representable in ``width`` bits either as an unsigned
    number or as a signed twos-complement number.
    """
    if width < 1:
        raise SortError(f"BitVector width must be >= 1, got {width}")
    if not (-(1 << (width - 1)) <= value < (1 << width)):
        raise SortError(f"value {value} is not representable in {width} bits")
    return Term("bvlit", (), BV(width), (value % (1 << width),))


def real_literal(value) -> Term:
    return Term("reallit", (), REAL, (Fraction(value),))


# -- checking helpers -------------------------------------------------------

def _need(term: Term, kind: str, what: str):
    if not isinstance(term, Term):
        raise SortError(f"{what}: expected a Term, got {type(term).__name__}")
    if term.sort.kind != kind:
        raise SortError(f"{what}: expected {kind} argument, got {term.sort}")


def _same_bv(what: str, *terms: Term) -> Sort:
    if not terms:
        raise SortError(f"{what}: needs at least one argument")
    for t in terms:
        _need(t, "bv", what)
    sort = terms[0].sort
    if any(t.sort != sort for t in terms):
        raise SortError(f"{what}: width mismatch {[t.sort.width for t in terms]}")
    return sort


# -- boolean connectives ----------------------------------------------------

def not_(a: Term) -> Term:
    _need(a, "bool", "not")
    if a.op == "true":
        return FALSE
    if a.op == "false":
        return TRUE
    return Term("not", (a,), BOOL)


def and_(*args: Term) -> Term:
    flat = []
    for a in args:
        _need(a, "bool", "and")
        if a.op == "false":
            return FALSE
        if a.op == "true":
            continue
        flat.append(a)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return Term("and", tuple(flat), BOOL)


def or_(*args: Term) -> Term:
    flat = []
    for a in args:
        _need(a, "bool", "or")
        if a.op == "true":
            return TRUE
        if a.op == "false":
            continue
        flat.append(a)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return Term("or", tuple(flat), BOOL)


def implies(a: Term, b: Term) -> Term:
    _need(a, "bool", "=>")
    _need(b, "bool", "=>")
    if a.op == "true":
        return b
    if a.op == "false" or b.op == "true":
        return TRUE
    return Term("=>", (a, b), BOOL)


def iff(a: Term, b: Term) -> Term:
    _need(a, "bool", "iff")
    _need(b, "bool", "iff")
    return Term("=", (a, b), BOOL)


def eq(a: Term, b: Term) -> Term:
    if not isinstance(a, Term) or not isinstance(b, Term):
        raise SortError("=: expected Terms")
    if a.sort != b.sort:
        raise SortError(f"=: sort mismatch {a.sort} vs {b.sort}")
    return Term("=", (a, b), BOOL)


# -- bit-vectors ------------------------------------------------------------

def bvnot(a: Term) -> Term:
    _need(a, "bv", "bvnot")
    return Term("bvnot", (a,), a.sort)


def _bv_nary(op: str, args) -> Term:
    sort = _same_bv(op, *args)
    if len(args) == 1:
        return args[0]
    return Term(op, tuple(args), sort)


def bvand(*args: Term) -> Term:
    return _bv_nary("bvand", args)


def bvor(*args: Term) -> Term:
    return _bv_nary("bvor", args)


def bvxor(a: Term, b: Term) -> Term:
    sort = _same_bv("bvxor", a, b)
    return Term("bvxor", (a, b), sort)


def bvadd(a: Term, b: Term) -> Term:
    sort = _same_bv("bvadd", a, b)
    return Term("bvadd", (a, b), sort)


def bvsub(a: Term, b: Term) -> Term:
    sort = _same_bv("bvsub", a, b)
    return Term("bvsub", (a, b), sort)


def _bv_cmp(op: str, a: Term, b: Term) -> Term:
    _same_bv(op, a, b)
    return Term(op, (a, b), BOOL)


def bvslt(a: Term, b: Term) -> Term:
    return _bv_cmp("bvslt", a, b)


def bvsle(a: Term, b: Term) -> Term:
    return _bv_cmp("bvsle", a, b)


def bvult(a: Term, b: Term) -> Term:
    return _bv_cmp("bvult", a, b)


def bvule(a: Term, b: Term) -> Term:
    return _bv_cmp("bvule", a, b)


def slice(t: Term, hi: int, lo: int) -> Term:  # noqa: A001 - SMT-LIB extract
    """Bits ``hi`` down to ``lo`` (inclusive) of ``t``."""
    _need(t, "bv", "extract")
    w = t.sort.width
    if not (0 <= lo <= hi < w):
        raise SortError(f"extract [{hi}:{lo}] out of range for width {w}")
    if lo == 0 and hi == w - 1:
        return t
    return Term("extract", (t,), BV(hi - lo + 1), (hi, lo))


def bit(t: Term, index: int) -> Term:
    """Boolean view of a single bit: ``t[index] = 1``."""
    return eq(slice(t, index, index), bv_literal(1, 1))


def concat(*args: Term) -> Term:
    """Concatenate; the first argument supplies the most significant bits."""
    for a in args:
        _need(a, "bv", "concat")
    if not args:
        raise SortError("concat: needs at least one argument")
    if len(args) == 1:
        return args[0]
    return Term("concat", tuple(args), BV(sum(a.sort.width for a in args)))


def sign_extend(t: Term, extra: int) -> Term:
    _need(t, "bv", "sign_extend")
    if extra < 0:
        raise SortError("sign_extend: negative extension")
    if extra == 0:
        return t
    return Term("sign_extend", (t,), BV(t.sort.width + extra), (extra,))


# -- reals ------------------------------------------------------------------

def real_add(*args: Term) -> Term:
    for a in args:
        _need(a, "real", "+")
    if len(args) == 1:
        return args[0]
    return Term("+", tuple(args), REAL)


def _real_cmp(op: str, a: Term, b: Term) -> Term:
    _need(a, "real", op)
    _need(b, "real", op)
    return Term(op, (a, b), BOOL)


def real_lt(a, b):
    return _real_cmp("<", a, b)


def real_le(a, b):
    return _real_cmp("<=", a, b)


def real_gt(a, b):
    return _real_cmp(">", a, b)


def real_ge(a, b):
    return _real_cmp(">=", a, b)


# -- scripts ----------------------------------------------------------------

@dataclass
class Script:
    """Declarations, macro definitions and assertions, in insertion order."""

    declarations: dict = field(default_factory=dict)   # name -> Sort
    definitions: dict = field(default_factory=dict)    # name -> Term
    assertions: list = field(default_factory=list)

    def declare(self, name: str, sort: Sort) -> Term:
        if name in self.declarations or name in self.definitions:
            raise ValueError(f"name {name!r} declared twice")
        self.declarations[name] = sort
        return const(name, sort)

    def define(self, name: str, body: Term) -> Term:
        if name in self.declarations or name in self.definitions:
            raise ValueError(f"name {name!r} declared twice")
        self._check_names(body)
        self.definitions[name] = body
        return ref(name, body.sort)

    def add(self, assertion: Term):
        _need(assertion, "bool", "assert")
        if assertion.op == "true":
            return
        self._check_names(assertion)
        self.assertions.append(assertion)

    def extend(self, assertions: Iterable[Term]):
        for a in assertions:
            self.add(a)

    def _check_names(self, term: Term):
        for name, kind in free_names(term):
            table = self.declarations if kind == "const" else self.definitions
            if name not in table:
                raise ValueError(f"term uses undeclared name {name!r}")


def free_names(term: Term) -> set:
    """Set of ``(name, kind)`` pairs for constants and macro references."""
    out = set()
    seen = set()
    stack = [term]
    while stack:
        t = stack.pop()
        if id(t) in seen:
            continue
        seen.add(id(t))
        if t.op in ("const", "ref"):
            out.add((t.params[0], t.op))
        stack.extend(t.args)
    return out


# -- serialization ----------------------------------------------------------

def _fmt_real(q: Fraction) -> str:
    if q.denominator == 1:
        s = f"{abs(q.numerator)}.0"
    else:
        s = f"(/ {abs(q.numerator)}.0 {q.denominator}.0)"
    return f"(- {s})" if q < 0 else s


def term_to_smt(t: Term) -> str:
    op = t.op
    if op in ("const", "ref"):
        return t.params[0]
    if op in ("true", "false"):
        return op
    if op == "bvlit":
        return "#b" + format(t.params[0], f"0{t.sort.width}b")
    if op == "reallit":
        return _fmt_real(t.params[0])
    args = " ".join(term_to_smt(a) for a in t.args)
    if op == "extract":
        return f"((_ extract {t.params[0]} {t.params[1]}) {args})"
    if op == "sign_extend":
        return f"((_ sign_extend {t.params[0]}) {args})"
    return f"({op} {args})"


def emit_smtlib2(script: Script, logic: str = "ALL") -> str:
    """Render ``script`` as deterministic SMT-LIB2 text ending in ``(check-sat)``."""
    lines = ["(set-option :produce-models true)", f"(set-logic {logic})"]
    for name, sort in script.declarations.items():
        lines.append(f"(declare-const {name} {sort.smt()})")
    for name, body in script.definitions.items():
        lines.append(f"(define-fun {name} () {body.sort.smt()} {term_to_smt(body)})")
    for a in script.assertions:
        lines.append(f"(assert {term_to_smt(a)})")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


# -- concrete evaluation ----------------------------------------------------

def _signed(value: int, width: int) -> int:
    return value - (1 << width) if value >> (width - 1) else value


def _bv_and(t, vals, w):
    out = (1 << w) - 1
    for v in vals:
        out &= v
    return out


def _bv_or(t, vals, w):
    out = 0
    for v in vals:
        out |= v
    return out


def _concat(t, vals, w):
    out = 0
    for a, v in zip(t.args, vals):
        out = (out << a.sort.width) | v
    return out


def _extract(t, vals, w):
    hi, lo = t.params
    return (vals[0] >> lo) & ((1 << (hi - lo + 1)) - 1)


# (term, argument values, width of the first argument) -> value
_EVAL = {
    "not": lambda t, v, w: not v[0],
    "and": lambda t, v, w: all(v),
    "or": lambda t, v, w: any(v),
    "=>": lambda t, v, w: (not v[0]) or v[1],
    "=": lambda t, v, w: v[0] == v[1],
    "bvnot": lambda t, v, w: ~v[0] & ((1 << w) - 1),
    "bvand": _bv_and,
    "bvor": _bv_or,
    "bvxor": lambda t, v, w: v[0] ^ v[1],
    "bvadd": lambda t, v, w: (v[0] + v[1]) & ((1 << w) - 1),
    "bvsub": lambda t, v, w: (v[0] - v[1]) & ((1 << w) - 1),
    "bvult": lambda t, v, w: v[0] < v[1],
    "bvule": lambda t, v, w: v[0] <= v[1],
    "bvslt": lambda t, v, w: _signed(v[0], w) < _signed(v[1], w),
    "bvsle": lambda t, v, w: _signed(v[0], w) <= _signed(v[1], w),
    "extract": _extract,
    "concat": _concat,
    "sign_extend": lambda t, v, w: _signed(v[0], w) % (1 << t.sort.width),
    "+": lambda t, v, w: sum(v, Fraction(0)),
    "<": lambda t, v, w: v[0] < v[1],
    "<=": lambda t, v, w: v[0] <= v[1],
    ">": lambda t, v, w: v[0] > v[1],
    ">=": lambda t, v, w: v[0] >= v[1],
}


def evaluate(t: Term, env: Mapping[str, Value],
             definitions: Mapping[str, Term] | None = None,
             _cache: dict | None = None) -> Value:
    """Evaluate a ground term.

    ``env`` maps constant names to values: ``bool`` for Bool, unsigned
    ``int`` for BitVectors and ``Fraction`` (or int) for Reals.  Macro
    references are expanded through ``definitions``.  Passing the same
    ``_cache`` to several calls shares work between them; it is only valid
    while ``env`` stays the same.
    """
    if _cache is None:
        _cache = {}
    op = t.op
    if op == "const":
        v = env[t.params[0]]
        if t.sort.is_bv:
            return int(v) % (1 << t.sort.width)
        return v
    if op == "ref":
        name = t.params[0]
        if name not in _cache:
            _cache[name] = evaluate(definitions[name], env, definitions, _cache)
        return _cache[name]
    if op == "true":
        return True
    if op == "false":
        return False
    if op in ("bvlit", "reallit"):
        return t.params[0]
    key = id(t)
    hit = _cache.get(key)
    if hit is not None and hit[0] is t:
        return hit[1]
    fn = _EVAL.get(op)
    if fn is None:
        raise ValueError(f"cannot evaluate operator {op!r}")
    vals = [evaluate(a, env, definitions, _cache) for a in t.args]
    w = t.args[0].sort.width if t.args and t.args[0].sort.is_bv else 0
    out = fn(t, vals, w)
    _cache[key] = (t, out)
    return out


def _fast_path(u: Term, op: str, kids: list, w: int):
    """Direct closures for the hot bit-level operators (None: use the generic table)."""
    if op in ("bvand", "bvor", "=") and len(kids) == 2:
        a, b = kids
        if op == "bvand":
            return lambda env: a(env) & b(env)
        if op == "bvor":
            return lambda env: a(env) | b(env)
        return lambda env: a(env) == b(env)
    if op == "bvnot":
        a, m = kids[0], (1 << w) - 1
        return lambda env: ~a(env) & m
    if op == "extract":
        a, (hi, lo) = kids[0], u.params
        m = (1 << (hi - lo + 1)) - 1
        return lambda env: (a(env) >> lo) & m
    if op == "and":
        return lambda env: all(k(env) for k in kids)
    if op == "or":
        return lambda env: any(k(env) for k in kids)
    if op == "not":
        a = kids[0]
        return lambda env: not a(env)
    return None


def compile_term(t: Term, definitions: Mapping[str, Term] | None = None) -> Callable[[Mapping[str, Value]], Value]:
    """Turn ``t`` into a function of ``env`` that agrees with :func:`evaluate`.

    Worth it when one term is evaluated under many environments, e.g. in
    exhaustive checks.
    """
    compiled: dict = {}

    def build(u: Term):
        key = id(u)
        if key in compiled:
            return compiled[key][1]
        op = u.op
        if op == "const":
            name = u.params[0]
            if u.sort.is_bv:
                m = (1 << u.sort.width) - 1
                fn = lambda env: int(env[name]) & m  # noqa: E731
            else:
                fn = lambda env: env[name]  # noqa: E731
        elif op == "ref":
            fn = build(definitions[u.params[0]])
        elif op in ("true", "false", "bvlit", "reallit"):
            value = {"true": True, "false": False}.get(op, u.params[0] if u.params else None)
            fn = lambda env: value  # noqa: E731
        else:
            ev = _EVAL.get(op)
            if ev is None:
                raise ValueError(f"cannot evaluate operator {op!r}")
            kids = [build(a) for a in u.args]
            w = u.args[0].sort.width if u.args and u.args[0].sort.is_bv else 0
            fn = _fast_path(u, op, kids, w) or (lambda env: ev(u, [k(env) for k in kids], w))
        compiled[key] = (u, fn)
        return fn

    return build(t)
