"""Networks of timed automata with bounded integer variables.

This module holds the static model (:class:`Network` and friends), dynamic
configurations, and an executable version of the signal-based semantics:
strict and weak satisfaction of clock constraints, discrete steps with
left/right-closed edges, time steps, and synchronization rules.  The checkers
return lists of :class:`Violation`; an empty list means the step is legal.

Clock values are kept as :class:`fractions.Fraction` so boundary cases such as
``x = 2`` against ``x < 2`` are decided exactly.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence, Union

__all__ = [
    "ModelError", "Span", "ClockAtom", "ClockConstraint", "TRUE_CONSTRAINT",
    "VarTrue", "VarCmp", "VarNot", "VarAnd", "VarConstraint",
    "Const", "VarRef", "BinOp", "Expr", "Assignment",
    "SyncLabel", "Edge", "Transition", "Location", "Automaton",
    "VariableDecl", "Network", "Configuration", "StepEntry", "StepLabel",
    "Violation", "StepResult",
    "eval_clock_constraint", "eval_var_constraint", "eval_expr",
    "transition_enabled", "check_discrete_step", "check_time_step",
    "bit_width", "clock_ceilings", "initial_configuration",
    "var_constraint_names", "expr_names",
]


class ModelError(ValueError):
    """Reference to an unknown automaton, clock, variable or channel."""


@dataclass(frozen=True)
class Span:
    line: int
    col: int
    end_line: int = 0
    end_col: int = 0

    def __str__(self):
        return f"{self.line}:{self.col}"


# -- clock constraints ------------------------------------------------------

CLOCK_RELATIONS = ("<", ">", "<=", ">=")


@dataclass(frozen=True)
class ClockAtom:
    clock: str
    rel: str
    const: int

    def __post_init__(self):
        if self.rel not in CLOCK_RELATIONS:
            raise ValueError(f"clock relation must be one of {CLOCK_RELATIONS}, got {self.rel!r}")
        if not isinstance(self.const, int) or self.const < 0:
            raise ValueError(f"clock constant must be a natural number, got {self.const!r}")

    def __str__(self):
        return f"{self.clock} {self.rel} {self.const}"


@dataclass(frozen=True)
class ClockConstraint:
    """Conjunction of clock atoms; the empty conjunction is true."""

    atoms: tuple = ()

    def __bool__(self):
        return bool(self.atoms)

    def clocks(self) -> set:
        return {a.clock for a in self.atoms}

    def __str__(self):
        return " and ".join(f"({a})" for a in self.atoms) if self.atoms else "true"


TRUE_CONSTRAINT = ClockConstraint()


def _compare(lhs, rel: str, rhs) -> bool:
    if rel == "<":
        return lhs < rhs
    if rel == ">":
        return lhs > rhs
    if rel == "<=":
        return lhs <= rhs
    if rel == ">=":
        return lhs >= rhs
    if rel == "=":
        return lhs == rhs
    raise ValueError(rel)


def eval_clock_constraint(v: Mapping[str, Fraction], gamma: ClockConstraint,
                          mode: str = "strict") -> bool:
    """Evaluate ``gamma`` under ``v``.

    ``mode="weak"`` additionally accepts every atom whose clock sits exactly
    on its constant.
    """
    if mode not in ("strict", "weak"):
        raise ValueError(f"mode must be 'strict' or 'weak', got {mode!r}")
    for atom in gamma.atoms:
        if atom.clock not in v:
            raise ModelError(f"unknown clock {atom.clock!r}")
        value = v[atom.clock]
        ok = _compare(value, atom.rel, atom.const)
        if not ok and mode == "weak":
            ok = value == atom.const
        if not ok:
            return False
    return True


# -- variable constraints and expressions ------------------------------------

@dataclass(frozen=True)
class VarTrue:
    def __str__(self):
        return "true"


@dataclass(frozen=True)
class VarCmp:
    """``var < rhs`` or ``var = rhs``; ``rhs`` is a variable name or an int."""

    var: str
    rel: str
    rhs: Union[str, int]

    def __post_init__(self):
        if self.rel not in ("<", "="):
            raise ValueError(f"variable relation must be '<' or '=', got {self.rel!r}")

    def __str__(self):
        return f"{self.var} {self.rel} {self.rhs}"


@dataclass(frozen=True)
class VarNot:
    arg: "VarConstraint"

    def __str__(self):
        return f"!({self.arg})"


@dataclass(frozen=True)
class VarAnd:
    left: "VarConstraint"
    right: "VarConstraint"

    def __str__(self):
        return f"({self.left}) and ({self.right})"


VarConstraint = Union[VarTrue, VarCmp, VarNot, VarAnd]


def _lookup(v_var: Mapping[str, int], name: str) -> int:
    try:
        return v_var[name]
    except KeyError:
        raise ModelError(f"unknown variable {name!r}") from None


def eval_var_constraint(v_var: Mapping[str, int], xi: VarConstraint) -> bool:
    if isinstance(xi, VarTrue):
        return True
    if isinstance(xi, VarCmp):
        lhs = _lookup(v_var, xi.var)
        rhs = xi.rhs if isinstance(xi.rhs, int) else _lookup(v_var, xi.rhs)
        return _compare(lhs, xi.rel, rhs)
    if isinstance(xi, VarNot):
        return not eval_var_constraint(v_var, xi.arg)
    if isinstance(xi, VarAnd):
        # evaluate both sides so unknown names are always reported
        left = eval_var_constraint(v_var, xi.left)
        right = eval_var_constraint(v_var, xi.right)
        return left and right
    raise TypeError(f"not a variable constraint: {xi!r}")


def var_constraint_names(xi: VarConstraint) -> set:
    if isinstance(xi, VarCmp):
        return {xi.var} | ({xi.rhs} if isinstance(xi.rhs, str) else set())
    if isinstance(xi, VarNot):
        return var_constraint_names(xi.arg)
    if isinstance(xi, VarAnd):
        return var_constraint_names(xi.left) | var_constraint_names(xi.right)
    return set()


@dataclass(frozen=True)
class Const:
    value: int

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class VarRef:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class BinOp:
    op: str  # "+" | "-"
    left: "Expr"
    right: "Expr"

    def __post_init__(self):
        if self.op not in ("+", "-"):
            raise ValueError(f"operator must be '+' or '-', got {self.op!r}")

    def __str__(self):
        right = f"({self.right})" if isinstance(self.right, BinOp) else str(self.right)
        return f"{self.left} {self.op} {right}"


Expr = Union[Const, VarRef, BinOp]


def eval_expr(v_var: Mapping[str, int], exp: Expr) -> int:
    if isinstance(exp, Const):
        return exp.value
    if isinstance(exp, VarRef):
        return _lookup(v_var, exp.name)
    if isinstance(exp, BinOp):
        a = eval_expr(v_var, exp.left)
        b = eval_expr(v_var, exp.right)
        return a + b if exp.op == "+" else a - b
    raise TypeError(f"not an expression: {exp!r}")


def expr_names(exp: Expr) -> set:
    if isinstance(exp, VarRef):
        return {exp.name}
    if isinstance(exp, BinOp):
        return expr_names(exp.left) | expr_names(exp.right)
    return set()


@dataclass(frozen=True)
class Assignment:
    target: str
    expr: Expr

    def __str__(self):
        return f"{self.target} := {self.expr}"


# -- automata ---------------------------------------------------------------

SYNC_KINDS = ("!", "?", "#", "@")


@dataclass(frozen=True)
class SyncLabel:
    channel: str
    kind: str

    def __post_init__(self):
        if self.kind not in SYNC_KINDS:
            raise ValueError(f"sync kind must be one of {SYNC_KINDS}, got {self.kind!r}")

    @property
    def broadcast(self) -> bool:
        return self.kind in ("#", "@")

    @property
    def sending(self) -> bool:
        return self.kind in ("!", "#")

    def __str__(self):
        return f"{self.channel}{self.kind}"


class Edge(enum.Enum):
    """Closedness of the firing instant.

    ``IE`` (right-closed, ``](``): the old configuration holds at the instant.
    ``EI`` (left-closed, ``)[``): the new configuration holds at the instant.
    """

    EI = "ei"
    IE = "ie"

    @property
    def marker(self) -> str:
        return ")[" if self is Edge.EI else "]("


@dataclass(frozen=True)
class Transition:
    name: str
    source: int
    target: int
    sync: Optional[SyncLabel] = None
    guard: ClockConstraint = TRUE_CONSTRAINT
    var_guard: VarConstraint = VarTrue()
    resets: tuple = ()
    assignments: tuple = ()
    span: Optional[Span] = field(default=None, compare=False)

    @property
    def updated(self) -> set:
        return {a.target for a in self.assignments}


@dataclass(frozen=True)
class Location:
    name: str
    invariant: ClockConstraint = TRUE_CONSTRAINT
    labels: frozenset = frozenset()
    span: Optional[Span] = field(default=None, compare=False)


@dataclass(frozen=True)
class Automaton:
    """One automaton; location 0 is the initial location."""

    name: str
    locations: tuple
    transitions: tuple = ()
    span: Optional[Span] = field(default=None, compare=False)

    def location_index(self, name: str) -> int:
        for idx, loc in enumerate(self.locations):
            if loc.name == name:
                return idx
        raise ModelError(f"automaton {self.name!r} has no location {name!r}")


@dataclass(frozen=True)
class VariableDecl:
    name: str
    lo: int
    hi: int
    init: int
    span: Optional[Span] = field(default=None, compare=False)

    @property
    def width(self) -> int:
        return bit_width(self.lo, self.hi)


def bit_width(lo: int, hi: int) -> int:
    """Smallest twos-complement width able to hold every value in [lo, hi]."""
    w = 1
    while not (-(1 << (w - 1)) <= lo and hi <= (1 << (w - 1)) - 1):
        w += 1
    return w


@dataclass(frozen=True)
class Network:
    automata: tuple
    clocks: tuple = ()
    variables: tuple = ()
    channels: tuple = ()
    spans: Mapping = field(default_factory=dict, compare=False, hash=False)

    def automaton_index(self, name: str) -> int:
        for idx, a in enumerate(self.automata):
            if a.name == name:
                return idx
        raise ModelError(f"unknown automaton {name!r}")

    def variable(self, name: str) -> VariableDecl:
        for v in self.variables:
            if v.name == name:
                return v
        raise ModelError(f"unknown variable {name!r}")

    @property
    def labels(self) -> set:
        return {p for a in self.automata for loc in a.locations for p in loc.labels}


def clock_ceilings(net: Network) -> dict:
    """Largest constant each clock is compared against (0 if never compared)."""
    ceil = {x: 0 for x in net.clocks}
    for a in net.automata:
        constraints = [loc.invariant for loc in a.locations] + [t.guard for t in a.transitions]
        for g in constraints:
            for atom in g.atoms:
                ceil[atom.clock] = max(ceil.get(atom.clock, 0), atom.const)
    return ceil


# -- configurations and steps ----------------------------------------------

@dataclass(frozen=True)
class Configuration:
    locations: tuple
    vars: Mapping = field(default_factory=dict, hash=False)
    clocks: Mapping = field(default_factory=dict, hash=False)

    def delayed(self, delta) -> "Configuration":
        return Configuration(self.locations, dict(self.vars),
                             {x: v + delta for x, v in self.clocks.items()})


def initial_configuration(net: Network) -> Configuration:
    return Configuration(tuple(0 for _ in net.automata),
                         {v.name: v.init for v in net.variables},
                         {x: Fraction(0) for x in net.clocks})


@dataclass(frozen=True)
class StepEntry:
    """Non-idle entry of a step label: the event fired and its edge."""

    sync: Optional[SyncLabel]
    edge: Edge


StepLabel = Sequence[Optional[StepEntry]]  # None plays the role of "_"


@dataclass(frozen=True)
class Violation:
    clause: str
    message: str
    automaton: Optional[int] = None
    position: Optional[int] = None

    def __str__(self):
        where = f"@{self.position} " if self.position is not None else ""
        return f"{where}[{self.clause}] {self.message}"


@dataclass
class StepResult:
    violations: list
    selected: Optional[tuple] = None  # transition index per automaton (None = idle)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


def transition_enabled(net: Network, cfg: Configuration, i: int, t: Transition) -> bool:
    if not 0 <= i < len(net.automata):
        raise ModelError(f"unknown automaton index {i}")
    if t not in net.automata[i].transitions:
        raise ModelError(f"transition {t.name!r} does not belong to automaton {net.automata[i].name!r}")
    return (cfg.locations[i] == t.source
            and eval_clock_constraint(cfg.clocks, t.guard, "strict")
            and eval_var_constraint(cfg.vars, t.var_guard))


def check_time_step(net: Network, cfg: Configuration, delta, cfg2: Configuration) -> StepResult:
    """Pure elapse of ``delta`` time units from ``cfg`` to ``cfg2``."""
    out = []
    delta = Fraction(delta)
    if delta <= 0:
        out.append(Violation("time-positive", f"delay {delta} is not positive"))
    if tuple(cfg2.locations) != tuple(cfg.locations):
        out.append(Violation("time-locations", "locations changed during a delay"))
    if dict(cfg2.vars) != dict(cfg.vars):
        out.append(Violation("time-vars", "variables changed during a delay"))
    for x in net.clocks:
        if cfg2.clocks.get(x) != cfg.clocks.get(x, 0) + delta:
            out.append(Violation("time-clocks",
                                 f"clock {x} is {cfg2.clocks.get(x)}, expected {cfg.clocks.get(x, 0) + delta}"))
    for i, a in enumerate(net.automata):
        loc = a.locations[cfg2.locations[i]]
        if not eval_clock_constraint(cfg2.clocks, loc.invariant, "weak"):
            out.append(Violation("time-invariant",
                                 f"{a.name}.{loc.name}: invariant {loc.invariant} not even weakly satisfied after delay", i))
    return StepResult(out)


def _candidates(net, cfg, cfg2, label, chosen):
    per_automaton = []
    early = []
    for i, a in enumerate(net.automata):
        entry = label[i]
        if entry is None:
            per_automaton.append([None])
            continue
        if chosen is not None and chosen[i] is not None:
            pool = [(chosen[i], a.transitions[chosen[i]])]
        else:
            pool = list(enumerate(a.transitions))
        matches = [idx for idx, t in pool
                   if t.source == cfg.locations[i] and t.target == cfg2.locations[i]
                   and t.sync == entry.sync]
        if not matches:
            early.append(Violation(
                "match", f"{a.name}: no transition {a.locations[cfg.locations[i]].name} -> "
                         f"{a.locations[cfg2.locations[i]].name} labelled {entry.sync or 'tau'}", i))
        per_automaton.append(matches)
    return per_automaton, early


def check_discrete_step(net: Network, cfg: Configuration, label: StepLabel,
                        cfg2: Configuration, chosen: Optional[Sequence] = None) -> StepResult:
    """Check a discrete configuration change labelled ``label``.

    Every non-idle entry must be realised by some transition of its automaton;
    when several transitions fit, any combination satisfying every rule is
    accepted and reported in :attr:`StepResult.selected`.  ``chosen``
    optionally pins the transition index per automaton.
    """
    if len(label) != len(net.automata):
        return StepResult([Violation("label", f"label has {len(label)} entries for {len(net.automata)} automata")])
    if all(e is None for e in label):
        return StepResult([Violation("label", "all entries idle: not a discrete step")])
    per_automaton, early = _candidates(net, cfg, cfg2, label, chosen)
    if early:
        return StepResult(early)
    best = None
    for combo in itertools.product(*per_automaton):
        violations = _check_combo(net, cfg, label, cfg2, combo)
        if not violations:
            return StepResult([], tuple(combo))
        if best is None or len(violations) < len(best):
            best = violations
    return StepResult(best)


def _check_combo(net, cfg, label, cfg2, combo) -> list:
    out = []
    reset_all = set()
    written = {}  # var -> list of (automaton, value)
    for i, (a, entry, idx) in enumerate(zip(net.automata, label, combo)):
        here = a.locations[cfg.locations[i]]
        there = a.locations[cfg2.locations[i]]
        if idx is None:
            if cfg2.locations[i] != cfg.locations[i]:
                out.append(Violation("idle", f"{a.name} is idle but moved {here.name} -> {there.name}", i))
            if not eval_clock_constraint(cfg.clocks, here.invariant, "strict"):
                out.append(Violation("idle", f"{a.name}.{here.name}: invariant {here.invariant} fails before the step", i))
            if not eval_clock_constraint(cfg2.clocks, there.invariant, "strict"):
                out.append(Violation("idle", f"{a.name}.{there.name}: invariant {there.invariant} fails after the step", i))
            continue
        t = a.transitions[idx]
        if not eval_clock_constraint(cfg.clocks, t.guard, "strict"):
            out.append(Violation("guard", f"{a.name}.{t.name}: clock guard {t.guard} false", i))
        if not eval_var_constraint(cfg.vars, t.var_guard):
            out.append(Violation("guard", f"{a.name}.{t.name}: variable guard {t.var_guard} false", i))
        for x in t.resets:
            reset_all.add(x)
            if cfg2.clocks.get(x) != 0:
                out.append(Violation("reset", f"{a.name}.{t.name}: clock {x} not reset", i))
        targets = [asg.target for asg in t.assignments]
        if len(targets) != len(set(targets)):
            out.append(Violation("assignment", f"{a.name}.{t.name}: variable assigned twice", i))
        for asg in t.assignments:
            value = eval_expr(cfg.vars, asg.expr)
            written.setdefault(asg.target, []).append((i, value))
            decl = net.variable(asg.target)
            if not decl.lo <= value <= decl.hi:
                out.append(Violation("range", f"{a.name}.{t.name}: {asg.target} := {value} leaves [{decl.lo}, {decl.hi}]", i))
            if cfg2.vars.get(asg.target) != value:
                out.append(Violation("assignment",
                                     f"{a.name}.{t.name}: {asg.target} is {cfg2.vars.get(asg.target)}, expected {value}", i))
        if entry.edge is Edge.EI:
            pre_ok = eval_clock_constraint(cfg.clocks, here.invariant, "weak")
            post_ok = eval_clock_constraint(cfg2.clocks, there.invariant, "strict")
        else:
            pre_ok = eval_clock_constraint(cfg.clocks, here.invariant, "strict")
            post_ok = eval_clock_constraint(cfg2.clocks, there.invariant, "weak")
        clause = f"invariant-{entry.edge.value}"
        if not pre_ok:
            out.append(Violation(clause, f"{a.name}.{here.name}: source invariant {here.invariant} fails at firing", i))
        if not post_ok:
            out.append(Violation(clause, f"{a.name}.{there.name}: target invariant {there.invariant} fails after firing", i))

    for x in net.clocks:
        if x not in reset_all and cfg2.clocks.get(x) != cfg.clocks.get(x):
            out.append(Violation("frame", f"clock {x} changed without a reset"))
    for v in net.variables:
        if v.name not in written and cfg2.vars.get(v.name) != cfg.vars.get(v.name):
            out.append(Violation("frame", f"variable {v.name} changed without an assignment"))
    out.extend(_check_sync(net, cfg, label, combo))
    out.extend(_check_edges(net, label, combo, written))
    return out


def _check_sync(net, cfg, label, combo) -> list:
    out = []
    by_channel = {}
    for i, idx in enumerate(combo):
        if idx is None:
            continue
        t = net.automata[i].transitions[idx]
        if t.sync is not None:
            by_channel.setdefault(t.sync.channel, {}).setdefault(t.sync.kind, []).append(i)
    for c in net.channels:
        parts = by_channel.get(c, {})
        send, recv = parts.get("!", []), parts.get("?", [])
        if len(send) > 1:
            out.append(Violation("sync", f"channel {c}: {len(send)} simultaneous senders"))
        if len(recv) > 1:
            out.append(Violation("sync", f"channel {c}: {len(recv)} simultaneous receivers"))
        if bool(send) != bool(recv):
            out.append(Violation("sync", f"channel {c}: {'sender' if send else 'receiver'} without partner"))
        bsend, brecv = parts.get("#", []), parts.get("@", [])
        if len(bsend) > 1:
            out.append(Violation("sync", f"channel {c}: {len(bsend)} simultaneous broadcast senders"))
        if brecv and not bsend:
            out.append(Violation("sync", f"channel {c}: broadcast receive without a sender"))
        if bsend:
            for j, a in enumerate(net.automata):
                if j in bsend or j in brecv:
                    continue
                for t in a.transitions:
                    if t.sync == SyncLabel(c, "@") and transition_enabled(net, cfg, j, t):
                        out.append(Violation("sync", f"{a.name} can receive broadcast {c} via {t.name} but does not", j))
                        break
    return out


def _check_edges(net, label, combo, written) -> list:
    out = []
    groups = {}
    for i, idx in enumerate(combo):
        if idx is None:
            continue
        t = net.automata[i].transitions[idx]
        if t.sync is not None:
            groups.setdefault(("channel", t.sync.channel), []).append(i)
    for var, writers in written.items():
        groups[("variable", var)] = [i for i, _ in writers]
        if len({value for _, value in writers}) > 1:
            out.append(Violation("edge-consistency", f"variable {var} written with different values"))
    for (kind, name), members in groups.items():
        edges = {label[i].edge for i in members}
        if len(edges) > 1:
            out.append(Violation("edge-consistency",
                                 f"{kind} {name}: participants fire with different edges"))
    return out
