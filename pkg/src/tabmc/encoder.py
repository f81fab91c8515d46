"""Bounded BitVector/real encoding of lasso-shaped runs of a network.

Positions ``0..k+1`` are packed into BitVectors of width ``k+2`` (bit ``l`` is
position ``l``).  For every automaton the active transition is stored in
``ceil(log2 |T|)`` vectors ``tb_<i>_<j>`` where ``T`` contains one null
(self-loop) transition per location followed by the declared transitions.
Locations are never stored: a location is active at ``l`` exactly when one of
the transitions leaving it is.  Variables are twos-complement vectors
``vb_<n>_<j>``; clocks are real constants ``x_<clock>_<l>``, delays
``delta_<l>`` and the loop start is the BitVector ``loop``.

A transition active at position ``l`` fires at the end of interval ``l``: its
guard sees ``x(l) + delta(l)`` and its effects are visible at ``l + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

from . import terms as T
from .core import (
    BinOp, ClockConstraint, Const, Network, Transition, VarAnd, VarCmp, VarNot,
    VarRef, VarTrue, bit_width, clock_ceilings,
)
from .terms import BV, REAL, Script

__all__ = ["EncoderOptions", "TransitionSlot", "EncodingContext", "PropertyHook",
           "augment_with_null_transitions", "build_context", "transition_alias",
           "location_alias", "encode_succession", "clock_guard_term", "encode_clock_guards",
           "encode_var_guards", "encode_clock_updates", "encode_assignments",
           "encode_invariants", "encode_idle_invariants", "encode_frame_conditions",
           "encode_init", "encode_sync", "encode_loop", "encode_liveness",
           "encode_well_formedness", "encode_network", "num_bits", "EncodingError"]


class EncodingError(ValueError):
    pass


@dataclass(frozen=True)
class EncoderOptions:
    edges: str = "right-closed"      # or "free"
    liveness: str = "strong"         # or "none"

    def __post_init__(self):
        if self.edges not in ("right-closed", "free"):
            raise EncodingError(f"unknown edge policy {self.edges!r}")
        if self.liveness not in ("strong", "none"):
            raise EncodingError(f"unknown liveness mode {self.liveness!r}")


@dataclass(frozen=True)
class TransitionSlot:
    """Entry of the augmented transition set: a null self-loop or a declared transition."""

    source: int
    target: int
    transition: Optional[Transition] = None   # None for the null transition
    declared_index: Optional[int] = None

    @property
    def is_null(self) -> bool:
        return self.transition is None


def augment_with_null_transitions(net: Network) -> list:
    """Per automaton: one null slot per location (by location id), then declared transitions."""
    out = []
    for a in net.automata:
        slots = [TransitionSlot(q, q) for q in range(len(a.locations))]
        slots += [TransitionSlot(t.source, t.target, t, idx) for idx, t in enumerate(a.transitions)]
        out.append(slots)
    return out


def num_bits(count: int) -> int:
    """ceil(log2(count)); 0 for a single element."""
    return (count - 1).bit_length()


@dataclass
class EncodingContext:
    net: Network
    k: int
    script: Script
    slots: list
    tb: list               # tb[i][j] : BV(k+2)
    edge: list             # edge[i]  : BV(k+2)
    vb: dict               # vb[n][j] : BV(k+2)
    clock: dict            # clock[x][l] : Real
    delta: list            # delta[l] : Real
    loop: T.Term
    alias: list = field(default_factory=list)       # alias[i][h]
    loc_alias: list = field(default_factory=list)   # loc_alias[i][q]
    nonnull: list = field(default_factory=list)     # nonnull[i] : BV(k+2)
    widths: dict = field(default_factory=dict)
    _var_at: dict = field(default_factory=dict)

    @property
    def width(self) -> int:
        return self.k + 2

    @property
    def positions(self) -> range:
        return range(self.k + 2)

    @property
    def firing_positions(self) -> range:
        return range(self.k + 1)

    def var_at(self, n: str, l: int) -> T.Term:
        """Value of variable ``n`` at position ``l`` (width lambda(n))."""
        key = (n, l)
        if key not in self._var_at:
            bits = [T.slice(self.vb[n][j], l, l) for j in reversed(range(self.widths[n]))]
            self._var_at[key] = self.script.define(f"val_{n}_{l}", T.concat(*bits))
        return self._var_at[key]

    def x(self, clock: str, l: int) -> T.Term:
        return self.clock[clock][l]

    def fires(self, i: int, h: int, l: int) -> T.Term:
        return T.bit(self.alias[i][h], l)

    def at(self, i: int, q: int, l: int) -> T.Term:
        return T.bit(self.loc_alias[i][q], l)

    def step(self, l: int) -> T.Term:
        """Some automaton takes a declared (non-null) transition at ``l``."""
        return T.or_(*(T.bit(nn, l) for nn in self.nonnull if nn is not None))

    def code_at(self, i: int, l: int) -> Optional[T.Term]:
        if not self.tb[i]:
            return None
        return T.concat(*(T.slice(self.tb[i][j], l, l) for j in reversed(range(len(self.tb[i])))))


def build_context(net: Network, k: int) -> EncodingContext:
    if k < 2:
        raise EncodingError(f"bound k must be >= 2 (loop needs 0 < loop < k), got {k}")
    script = Script()
    w = k + 2
    slots = augment_with_null_transitions(net)
    tb, edge = [], []
    for i, a in enumerate(net.automata, start=1):
        tb.append([script.declare(f"tb_{i}_{j}", BV(w)) for j in range(num_bits(len(slots[i - 1])))])
        edge.append(script.declare(f"edgeRC_{i}", BV(w)))
    widths = {v.name: v.width for v in net.variables}
    vb = {v.name: [script.declare(f"vb_{v.name}_{j}", BV(w)) for j in range(widths[v.name])]
          for v in net.variables}
    clock = {x: [script.declare(f"x_{x}_{l}", REAL) for l in range(w)] for x in net.clocks}
    delta = [script.declare(f"delta_{l}", REAL) for l in range(k + 1)]
    loop = script.declare("loop", BV(w))
    ctx = EncodingContext(net, k, script, slots, tb, edge, vb, clock, delta, loop, widths=widths)
    for i in range(len(net.automata)):
        ctx.alias.append([script.define(f"al_{i + 1}_{h}", transition_alias(ctx, i, h))
                          for h in range(len(slots[i]))])
    for i, a in enumerate(net.automata):
        ctx.loc_alias.append([script.define(f"loc_{i + 1}_{q}", location_alias(ctx, i, q))
                              for q in range(len(a.locations))])
        declared = [ctx.alias[i][h] for h, s in enumerate(slots[i]) if not s.is_null]
        ctx.nonnull.append(script.define(f"nn_{i + 1}", T.bvor(*declared)) if declared else None)
    return ctx


def transition_alias(ctx: EncodingContext, i: int, h: int) -> T.Term:
    """Bit-wise minterm over ``tb_i_*`` selecting transition id ``h``."""
    vectors = ctx.tb[i]
    if not vectors:
        return T.bv_literal((1 << ctx.width) - 1, ctx.width)
    parts = []
    for j in reversed(range(len(vectors))):
        parts.append(vectors[j] if (h >> j) & 1 else T.bvnot(vectors[j]))
    return T.bvand(*parts)


def location_alias(ctx: EncodingContext, i: int, q: int) -> T.Term:
    """Bit-wise disjunction of the aliases of all transitions leaving ``q``."""
    return T.bvor(*(ctx.alias[i][h] for h, s in enumerate(ctx.slots[i]) if s.source == q))


# -- clock and variable sub-terms -------------------------------------------

def _cmp(lhs: T.Term, rel: str, c: int, weak: bool) -> T.Term:
    rhs = T.real_literal(c)
    strict = {"<": T.real_lt, ">": T.real_gt, "<=": T.real_le, ">=": T.real_ge}[rel](lhs, rhs)
    if weak and rel in ("<", ">"):
        return T.or_(strict, T.eq(lhs, rhs))
    return strict


def clock_guard_term(ctx: EncodingContext, l: int, gamma: ClockConstraint, variant: str) -> T.Term:
    """Clock constraint at position ``l``.

    ``variant`` is ``"plain"`` (x(l)), ``"delta"`` (x(l)+delta(l)), ``"weak"``
    or ``"weak-delta"``; weak variants also accept equality with the constant.
    """
    if variant not in ("plain", "delta", "weak", "weak-delta"):
        raise ValueError(f"unknown variant {variant!r}")
    use_delta = variant in ("delta", "weak-delta")
    weak = variant in ("weak", "weak-delta")
    atoms = []
    for a in gamma.atoms:
        value = ctx.x(a.clock, l)
        if use_delta:
            value = T.real_add(value, ctx.delta[l])
        atoms.append(_cmp(value, a.rel, a.const, weak))
    return T.and_(*atoms)


def _signed_literal(value: int, width: int) -> T.Term:
    return T.bv_literal(value % (1 << width), width)


def _extend(term: T.Term, width: int) -> T.Term:
    return T.sign_extend(term, width - term.sort.width)


def var_guard_term(ctx: EncodingContext, l: int, xi) -> T.Term:
    """Signed BitVector encoding of a variable constraint at position ``l``."""
    if isinstance(xi, VarTrue):
        return T.TRUE
    if isinstance(xi, VarNot):
        return T.not_(var_guard_term(ctx, l, xi.arg))
    if isinstance(xi, VarAnd):
        return T.and_(var_guard_term(ctx, l, xi.left), var_guard_term(ctx, l, xi.right))
    if isinstance(xi, VarCmp):
        lhs = ctx.var_at(xi.var, l)
        if isinstance(xi.rhs, int):
            w = max(lhs.sort.width, bit_width(xi.rhs, xi.rhs))
            rhs = _signed_literal(xi.rhs, w)
        else:
            rhs = ctx.var_at(xi.rhs, l)
            w = max(lhs.sort.width, rhs.sort.width)
            rhs = _extend(rhs, w)
        lhs = _extend(lhs, w)
        return T.bvslt(lhs, rhs) if xi.rel == "<" else T.eq(lhs, rhs)
    raise TypeError(f"not a variable constraint: {xi!r}")


def _expr_bounds(ctx, exp):
    if isinstance(exp, Const):
        return exp.value, exp.value
    if isinstance(exp, VarRef):
        d = ctx.net.variable(exp.name)
        return d.lo, d.hi
    a_lo, a_hi = _expr_bounds(ctx, exp.left)
    b_lo, b_hi = _expr_bounds(ctx, exp.right)
    if exp.op == "+":
        return a_lo + b_lo, a_hi + b_hi
    return a_lo - b_hi, a_hi - b_lo


def expr_term(ctx: EncodingContext, l: int, exp, width: int) -> T.Term:
    """Expression over values at ``l``, every leaf cast to ``width`` bits."""
    if isinstance(exp, Const):
        return _signed_literal(exp.value, width)
    if isinstance(exp, VarRef):
        v = ctx.var_at(exp.name, l)
        if v.sort.width > width:
            return T.slice(v, width - 1, 0)
        return _extend(v, width)
    left = expr_term(ctx, l, exp.left, width)
    right = expr_term(ctx, l, exp.right, width)
    return T.bvadd(left, right) if exp.op == "+" else T.bvsub(left, right)


# -- constraint families ----------------------------------------------------

def encode_well_formedness(ctx: EncodingContext) -> list:
    """Exclude tb codes that name no transition (when |T| is not a power of two)."""
    out = []
    for i, slots in enumerate(ctx.slots):
        m = len(ctx.tb[i])
        if m and len(slots) < (1 << m):
            bound = T.bv_literal(len(slots), m)
            out.extend(T.bvult(ctx.code_at(i, l), bound) for l in ctx.positions)
    return out


def encode_succession(ctx: EncodingContext) -> list:
    """A transition active at l puts its target location active at l+1."""
    k = ctx.k
    ones = T.bv_literal((1 << (k + 1)) - 1, k + 1)
    out = []
    for i, slots in enumerate(ctx.slots):
        for h, s in enumerate(slots):
            now = T.slice(ctx.alias[i][h], k, 0)
            nxt = T.slice(ctx.loc_alias[i][s.target], k + 1, 1)
            out.append(T.eq(T.bvor(T.bvnot(now), nxt), ones))
    return out


def _declared(ctx):
    for i, slots in enumerate(ctx.slots):
        for h, s in enumerate(slots):
            if not s.is_null:
                yield i, h, s.transition


def encode_clock_guards(ctx: EncodingContext) -> list:
    out = []
    for i, h, t in _declared(ctx):
        if t.guard:
            for l in ctx.firing_positions:
                out.append(T.implies(ctx.fires(i, h, l), clock_guard_term(ctx, l, t.guard, "delta")))
    return out


def encode_var_guards(ctx: EncodingContext) -> list:
    out = []
    for i, h, t in _declared(ctx):
        if not isinstance(t.var_guard, VarTrue):
            for l in ctx.firing_positions:
                out.append(T.implies(ctx.fires(i, h, l), var_guard_term(ctx, l, t.var_guard)))
    return out


def encode_clock_updates(ctx: EncodingContext) -> list:
    zero = T.real_literal(0)
    out = []
    for i, h, t in _declared(ctx):
        for x in t.resets:
            for l in ctx.firing_positions:
                out.append(T.implies(ctx.fires(i, h, l), T.eq(ctx.x(x, l + 1), zero)))
    return out


def _range_guard(ctx, l, exp, decl) -> T.Term:
    """The exact value of ``exp`` at ``l`` stays in ``decl``'s range."""
    lo, hi = _expr_bounds(ctx, exp)
    if decl.lo <= lo and hi <= decl.hi:
        return T.TRUE
    w = max(_exact_width(ctx, exp), bit_width(decl.lo, decl.hi))
    value = _wide_expr_term(ctx, l, exp, w)
    return T.and_(T.bvsle(_signed_literal(decl.lo, w), value),
                  T.bvsle(value, _signed_literal(decl.hi, w)))


def _exact_width(ctx, exp) -> int:
    """Width at which ``exp`` and all its sub-expressions evaluate without overflow."""
    lo, hi = _expr_bounds(ctx, exp)
    w = bit_width(lo, hi)
    if isinstance(exp, VarRef):
        w = max(w, ctx.widths[exp.name])
    elif isinstance(exp, BinOp):
        w = max(w, _exact_width(ctx, exp.left), _exact_width(ctx, exp.right))
    return w


def _wide_expr_term(ctx, l, exp, width):
    if isinstance(exp, Const):
        return _signed_literal(exp.value, width)
    if isinstance(exp, VarRef):
        return _extend(ctx.var_at(exp.name, l), width)
    left = _wide_expr_term(ctx, l, exp.left, width)
    right = _wide_expr_term(ctx, l, exp.right, width)
    return T.bvadd(left, right) if exp.op == "+" else T.bvsub(left, right)


def encode_assignments(ctx: EncodingContext) -> list:
    """Assignments hold at l+1; firing is blocked when the value would leave the range."""
    out = []
    for i, h, t in _declared(ctx):
        for asg in t.assignments:
            decl = ctx.net.variable(asg.target)
            w = ctx.widths[asg.target]
            for l in ctx.firing_positions:
                effect = T.eq(ctx.var_at(asg.target, l + 1), expr_term(ctx, l, asg.expr, w))
                out.append(T.implies(ctx.fires(i, h, l),
                                     T.and_(_range_guard(ctx, l, asg.expr, decl), effect)))
    return out


def encode_invariants(ctx: EncodingContext) -> list:
    """Source/target invariants at a firing, relaxed on the open side of the edge."""
    out = []
    for i, h, t in _declared(ctx):
        a = ctx.net.automata[i]
        inv_src = a.locations[t.source].invariant
        inv_dst = a.locations[t.target].invariant
        if not inv_src and not inv_dst:
            continue
        for l in ctx.firing_positions:
            right_closed = T.and_(clock_guard_term(ctx, l, inv_src, "delta"),
                                  clock_guard_term(ctx, l + 1, inv_dst, "weak"),
                                  T.bit(ctx.edge[i], l))
            left_closed = T.and_(clock_guard_term(ctx, l, inv_src, "weak-delta"),
                                 clock_guard_term(ctx, l + 1, inv_dst, "plain"),
                                 T.not_(T.bit(ctx.edge[i], l)))
            out.append(T.implies(ctx.fires(i, h, l), T.or_(right_closed, left_closed)))
    return out


def encode_idle_invariants(ctx: EncodingContext) -> list:
    """Invariant obligations of an automaton taking its null transition.

    The delay ending the interval must keep the invariant weakly; when some
    other automaton fires at that instant, the invariant must hold strictly
    just before and just after the discrete step.
    """
    out = []
    for i, slots in enumerate(ctx.slots):
        a = ctx.net.automata[i]
        for h, s in enumerate(slots):
            inv = a.locations[s.source].invariant
            if not s.is_null or not inv:
                continue
            for l in ctx.firing_positions:
                during = clock_guard_term(ctx, l, inv, "weak-delta")
                at_step = T.implies(ctx.step(l), T.and_(clock_guard_term(ctx, l, inv, "delta"),
                                                        clock_guard_term(ctx, l + 1, inv, "plain")))
                out.append(T.implies(ctx.fires(i, h, l), T.and_(during, at_step)))
    return out


def encode_frame_conditions(ctx: EncodingContext) -> list:
    """Clocks advance by delta unless reset; variables keep values unless assigned; delta > 0."""
    out = []
    zero = T.real_literal(0)
    resetters, writers = {}, {}
    for i, h, t in _declared(ctx):
        for x in t.resets:
            resetters.setdefault(x, []).append((i, h))
        for asg in t.assignments:
            writers.setdefault(asg.target, []).append((i, h))
    for l in ctx.firing_positions:
        out.append(T.real_gt(ctx.delta[l], zero))
        for x in ctx.net.clocks:
            advance = T.eq(ctx.x(x, l + 1), T.real_add(ctx.x(x, l), ctx.delta[l]))
            reset = T.and_(T.or_(*(ctx.fires(i, h, l) for i, h in resetters.get(x, []))),
                           T.eq(ctx.x(x, l + 1), zero))
            out.append(T.or_(advance, reset))
        for v in ctx.net.variables:
            keep = T.eq(ctx.var_at(v.name, l + 1), ctx.var_at(v.name, l))
            out.append(T.or_(keep, *(ctx.fires(i, h, l) for i, h in writers.get(v.name, []))))
    return out


def encode_domains(ctx: EncodingContext) -> list:
    """Redundant range constraints on every variable at every position."""
    out = []
    for v in ctx.net.variables:
        w = ctx.widths[v.name]
        if v.lo == -(1 << (w - 1)) and v.hi == (1 << (w - 1)) - 1:
            continue
        for l in ctx.positions:
            value = ctx.var_at(v.name, l)
            out.append(T.and_(T.bvsle(_signed_literal(v.lo, w), value),
                              T.bvsle(value, _signed_literal(v.hi, w))))
    return out


def encode_init(ctx: EncodingContext) -> list:
    out = []
    zero = T.real_literal(0)
    for i, a in enumerate(ctx.net.automata):
        out.append(ctx.at(i, 0, 0))
        out.append(clock_guard_term(ctx, 0, a.locations[0].invariant, "plain"))
    for x in ctx.net.clocks:
        out.append(T.eq(ctx.x(x, 0), zero))
    for v in ctx.net.variables:
        out.append(T.eq(ctx.var_at(v.name, 0), _signed_literal(v.init, ctx.widths[v.name])))
    return out


def _fire_any(ctx, i, pred, l):
    """Disjunction of firing bits of automaton i's declared transitions satisfying pred."""
    return T.or_(*(ctx.fires(i, h, l) for h, s in enumerate(ctx.slots[i])
                   if not s.is_null and pred(s.transition)))


def _at_most_one(terms):
    return [T.not_(T.and_(a, b)) for a, b in combinations(terms, 2)]


def encode_sync(ctx: EncodingContext) -> list:
    """Channel synchronization and edge agreement among simultaneous partners."""
    out = []
    n_aut = len(ctx.net.automata)

    def has(i, pred):
        return any(pred(t) for t in ctx.net.automata[i].transitions)

    for c in ctx.net.channels:
        kinds = {kind: (lambda t, kind=kind: t.sync is not None and t.sync.channel == c and t.sync.kind == kind)
                 for kind in ("!", "?", "#", "@")}
        on_c = lambda t: t.sync is not None and t.sync.channel == c  # noqa: E731
        members = [i for i in range(n_aut) if has(i, on_c)]
        for l in ctx.firing_positions:
            by_kind = {kind: [(i, _fire_any(ctx, i, pred, l)) for i in range(n_aut) if has(i, pred)]
                       for kind, pred in kinds.items()}
            send = [b for _, b in by_kind["!"]]
            recv = [b for _, b in by_kind["?"]]
            if send or recv:
                out.extend(_at_most_one(send))
                out.extend(_at_most_one(recv))
                out.append(T.eq(T.or_(*send), T.or_(*recv)) if send and recv
                           else T.not_(T.or_(*send, *recv)))
            bsend = by_kind["#"]
            brecv = by_kind["@"]
            out.extend(_at_most_one([b for _, b in bsend]))
            for j, fired in brecv:
                others = [b for i, b in bsend if i != j]
                out.append(T.implies(fired, T.or_(*others)))
                able = T.or_(*(T.and_(ctx.at(j, t.source, l),
                                      clock_guard_term(ctx, l, t.guard, "delta"),
                                      var_guard_term(ctx, l, t.var_guard))
                               for t in ctx.net.automata[j].transitions if kinds["@"](t)))
                out.append(T.implies(T.and_(T.or_(*others), able), fired))
            for i, j in combinations(members, 2):
                both = T.and_(_fire_any(ctx, i, on_c, l), _fire_any(ctx, j, on_c, l))
                out.append(T.implies(both, _same_edge(ctx, i, j, l)))
    for v in ctx.net.variables:
        writes = lambda t, n=v.name: any(a.target == n for a in t.assignments)  # noqa: E731
        members = [i for i in range(n_aut) if has(i, writes)]
        for i, j in combinations(members, 2):
            for l in ctx.firing_positions:
                both = T.and_(_fire_any(ctx, i, writes, l), _fire_any(ctx, j, writes, l))
                out.append(T.implies(both, _same_edge(ctx, i, j, l)))
    return out


def _same_edge(ctx, i, j, l):
    return T.eq(T.slice(ctx.edge[i], l, l), T.slice(ctx.edge[j], l, l))


def _loop_is(ctx, p):
    return T.eq(ctx.loop, T.bv_literal(p, ctx.width))


def encode_loop(ctx: EncodingContext) -> list:
    """0 < loop < k, and position k+1 repeats position loop.

    Repetition is exact for locations (via the active transition),
    variables and edges.  A clock repeats if its values are equal or both
    exceed the largest constant the clock is ever compared with.
    """
    k, w = ctx.k, ctx.width
    out = [T.bvult(T.bv_literal(0, w), ctx.loop), T.bvult(ctx.loop, T.bv_literal(k, w))]
    ceilings = clock_ceilings(ctx.net)
    last = k + 1
    for p in range(1, k):
        same = []
        for i in range(len(ctx.net.automata)):
            for vec in ctx.tb[i] + [ctx.edge[i]]:
                same.append(T.eq(T.slice(vec, p, p), T.slice(vec, last, last)))
        for v in ctx.net.variables:
            same.append(T.eq(ctx.var_at(v.name, p), ctx.var_at(v.name, last)))
        for x in ctx.net.clocks:
            c = T.real_literal(ceilings.get(x, 0))
            same.append(T.or_(T.eq(ctx.x(x, p), ctx.x(x, last)),
                              T.and_(T.real_gt(ctx.x(x, p), c), T.real_gt(ctx.x(x, last), c))))
        out.append(T.implies(_loop_is(ctx, p), T.and_(*same)))
    return out


def encode_liveness(ctx: EncodingContext, mode: str = "strong") -> list:
    """Strong transition liveness: every automaton fires a declared transition inside the loop."""
    if mode == "none":
        return []
    if mode != "strong":
        raise EncodingError(f"unknown liveness mode {mode!r}")
    out = []
    for i, nn in enumerate(ctx.nonnull):
        if nn is None:
            out.append(T.FALSE)
            continue
        for p in range(1, ctx.k):
            busy = T.or_(*(T.bit(nn, l) for l in range(p, ctx.k + 1)))
            out.append(T.implies(_loop_is(ctx, p), busy))
    return out


def encode_edge_policy(ctx: EncodingContext, policy: str) -> list:
    if policy == "free":
        return []
    ones = T.bv_literal((1 << ctx.width) - 1, ctx.width)
    return [T.eq(e, ones) for e in ctx.edge]


@dataclass
class PropertyHook:
    """Named per-position terms exposed to the property encoder."""

    ctx: EncodingContext

    @property
    def net(self) -> Network:
        return self.ctx.net

    @property
    def k(self) -> int:
        return self.ctx.k

    def at(self, automaton: int, location: int, l: int) -> T.Term:
        return self.ctx.at(automaton, location, l)

    def var(self, name: str, l: int) -> T.Term:
        return self.ctx.var_at(name, l)

    def fires(self, automaton: int, transition: int, l: int) -> T.Term:
        """Declared transition ``transition`` of ``automaton`` is active at ``l``."""
        h = len(self.net.automata[automaton].locations) + transition
        return self.ctx.fires(automaton, h, l)

    def var_guard(self, xi, l: int) -> T.Term:
        return var_guard_term(self.ctx, l, xi)


def encode_network(net: Network, k: int, options: EncoderOptions = EncoderOptions()):
    """Build the complete Script for ``net`` at bound ``k``; returns ``(script, hook)``."""
    ctx = build_context(net, k)
    s = ctx.script
    s.extend(encode_well_formedness(ctx))
    s.extend(encode_init(ctx))
    s.extend(encode_succession(ctx))
    s.extend(encode_clock_guards(ctx))
    s.extend(encode_var_guards(ctx))
    s.extend(encode_clock_updates(ctx))
    s.extend(encode_assignments(ctx))
    s.extend(encode_invariants(ctx))
    s.extend(encode_idle_invariants(ctx))
    s.extend(encode_frame_conditions(ctx))
    s.extend(encode_domains(ctx))
    s.extend(encode_sync(ctx))
    s.extend(encode_edge_policy(ctx, options.edges))
    s.extend(encode_loop(ctx))
    s.extend(encode_liveness(ctx, options.liveness))
    return s, PropertyHook(ctx)
