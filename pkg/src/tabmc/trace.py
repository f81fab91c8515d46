"""Lasso traces: decoding from solver models, replay validation, signal projection."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .core import (
    Configuration, Edge, Network, StepEntry, Violation, check_discrete_step,
    check_time_step, clock_ceilings, eval_clock_constraint, initial_configuration,
)
from .encoder import augment_with_null_transitions, num_bits

__all__ = ["TraceError", "LassoTrace", "decode_trace", "validate_trace", "Interval", "Signal",
           "project_signal", "format_table", "format_structured", "trace_to_dict"]


class TraceError(ValueError):
    pass


@dataclass
class LassoTrace:
    """A run of ``k+2`` positions whose last position repeats position ``loop``.

    ``transitions[l][i]`` is the declared transition index fired by automaton
    ``i`` at the end of interval ``l`` (``None`` for its null transition) and
    ``edges[l][i]`` the closedness of that firing.  ``slots[l][i]`` is the
    raw transition code, kept for all ``k+2`` positions.
    """

    k: int
    loop: int
    configs: list
    delays: list
    transitions: list
    edges: list
    slots: list = field(default_factory=list)

    @property
    def times(self) -> list:
        """Absolute start time of each position."""
        out, t = [Fraction(0)], Fraction(0)
        for d in self.delays:
            t += d
            out.append(t)
        return out


def _bit(value: int, l: int) -> int:
    return (value >> l) & 1


def _signed(value: int, width: int) -> int:
    return value - (1 << width) if value >> (width - 1) & 1 else value


def decode_trace(model: dict, net: Network, k: int) -> LassoTrace:
    """Rebuild the run encoded in ``model`` using the reserved naming scheme."""
    def get(name):
        if name not in model:
            raise TraceError(f"model has no value for {name}")
        return model[name]

    slots = augment_with_null_transitions(net)
    n_pos = k + 2
    codes = []
    for l in range(n_pos):
        row = []
        for i, a_slots in enumerate(slots, start=1):
            code = 0
            for j in range(num_bits(len(a_slots))):
                code |= _bit(get(f"tb_{i}_{j}"), l) << j
            if code >= len(a_slots):
                raise TraceError(f"automaton {i} has unused transition code {code} at position {l}")
            row.append(code)
        codes.append(row)
    edge_vecs = [get(f"edgeRC_{i}") for i in range(1, len(net.automata) + 1)]
    configs = []
    for l in range(n_pos):
        locs = tuple(slots[i][codes[l][i]].source for i in range(len(net.automata)))
        vars_ = {}
        for v in net.variables:
            raw = 0
            for j in range(v.width):
                raw |= _bit(get(f"vb_{v.name}_{j}"), l) << j
            vars_[v.name] = _signed(raw, v.width)
        clocks = {x: Fraction(get(f"x_{x}_{l}")) for x in net.clocks}
        configs.append(Configuration(locs, vars_, clocks))
    delays = [Fraction(get(f"delta_{l}")) for l in range(k + 1)]
    transitions = [[slots[i][codes[l][i]].declared_index for i in range(len(net.automata))]
                   for l in range(n_pos)]
    edges = [[Edge.IE if _bit(edge_vecs[i], l) else Edge.EI for i in range(len(net.automata))]
             for l in range(n_pos)]
    loop = get("loop")
    if not 0 < loop < k:
        raise TraceError(f"loop position {loop} outside (0, {k})")
    return LassoTrace(k, loop, configs, delays, transitions, edges, codes)


def _label(tr: LassoTrace, net: Network, l: int):
    label = []
    for i, idx in enumerate(tr.transitions[l]):
        if idx is None:
            label.append(None)
        else:
            label.append(StepEntry(net.automata[i].transitions[idx].sync, tr.edges[l][i]))
    return label


def _tag(violations, l):
    return [Violation(v.clause, v.message, v.automaton, l) for v in violations]


def _successor(net, cfg, tr, l, target_cfg):
    """Configuration reached from ``cfg`` by replaying step ``l``'s delay and firings."""
    mid = cfg.delayed(tr.delays[l])
    clocks = dict(mid.clocks)
    for i, idx in enumerate(tr.transitions[l]):
        if idx is not None:
            for x in net.automata[i].transitions[idx].resets:
                clocks[x] = Fraction(0)
    return mid, Configuration(target_cfg.locations, dict(target_cfg.vars), clocks)


def _region_equivalent(net, a: Configuration, b: Configuration, ceilings) -> list:
    out = []
    if tuple(a.locations) != tuple(b.locations):
        out.append("locations differ")
    if dict(a.vars) != dict(b.vars):
        out.append("variables differ")
    for x in net.clocks:
        va, vb = a.clocks[x], b.clocks[x]
        c = ceilings.get(x, 0)
        if va != vb and not (va > c and vb > c):
            out.append(f"clock {x}: {va} vs {vb}")
    return out


def validate_trace(tr: LassoTrace, net: Network) -> list:
    """Replay ``tr`` against the executable semantics; returns all violations found."""
    out = []
    k = tr.k
    if len(tr.configs) != k + 2 or len(tr.delays) != k + 1:
        return [Violation("shape", "trace has the wrong number of positions")]
    if not 0 < tr.loop < k:
        out.append(Violation("loop", f"loop position {tr.loop} outside (0, {k})"))
    init = initial_configuration(net)
    c0 = tr.configs[0]
    if tuple(c0.locations) != init.locations or dict(c0.vars) != init.vars or dict(c0.clocks) != init.clocks:
        out.append(Violation("init", "position 0 is not the initial configuration", position=0))
    for i, a in enumerate(net.automata):
        inv = a.locations[c0.locations[i]].invariant
        if not eval_clock_constraint(c0.clocks, inv, "strict"):
            out.append(Violation("init", f"{a.name}: initial invariant {inv} fails", i, 0))
    for l in range(k + 1):
        cfg, nxt = tr.configs[l], tr.configs[l + 1]
        for i, idx in enumerate(tr.transitions[l]):
            if idx is not None and net.automata[i].transitions[idx].source != cfg.locations[i]:
                out.append(Violation("decode", "fired transition does not leave the current location", i, l))
        mid = cfg.delayed(tr.delays[l])
        out.extend(_tag(check_time_step(net, cfg, tr.delays[l], mid).violations, l))
        label = _label(tr, net, l)
        if all(e is None for e in label):
            if (tuple(mid.locations) != tuple(nxt.locations) or dict(mid.vars) != dict(nxt.vars)
                    or dict(mid.clocks) != dict(nxt.clocks)):
                out.append(Violation("continuation", "no transition fired but the configuration changed",
                                     position=l))
        else:
            res = check_discrete_step(net, mid, label, nxt, chosen=tr.transitions[l])
            out.extend(_tag(res.violations, l))
    # the wrap-around: position k+1 must be a legal stand-in for position loop
    last, back = tr.configs[k + 1], tr.configs[tr.loop]
    ceilings = clock_ceilings(net)
    for msg in _region_equivalent(net, last, back, ceilings):
        out.append(Violation("loop-wrap", msg, position=k + 1))
    if tr.slots and tr.slots[k + 1] != tr.slots[tr.loop]:
        out.append(Violation("loop-wrap", "active transitions at the wrap differ", position=k + 1))
    if tr.edges and len(tr.edges) > k + 1 and tr.edges[k + 1] != tr.edges[tr.loop]:
        out.append(Violation("loop-wrap", "edges at the wrap differ", position=k + 1))
    if not out:
        mid, replay = _successor(net, last, tr, tr.loop, tr.configs[tr.loop + 1])
        label = _label(tr, net, tr.loop)
        tag = lambda vs: [Violation("loop-replay:" + v.clause, v.message, v.automaton, k + 1) for v in vs]  # noqa: E731
        out.extend(tag(check_time_step(net, last, tr.delays[tr.loop], mid).violations))
        if any(e is not None for e in label):
            out.extend(tag(check_discrete_step(net, mid, label, replay,
                                               chosen=tr.transitions[tr.loop]).violations))
        for msg in _region_equivalent(net, replay, tr.configs[tr.loop + 1], ceilings):
            out.append(Violation("loop-replay", msg, position=k + 1))
    return out


# -- signal projection --------------------------------------------------------

@dataclass(frozen=True)
class Interval:
    start: Fraction
    end: Optional[Fraction]          # None: unbounded
    left_closed: bool
    right_closed: bool
    props: frozenset
    vars: tuple                      # sorted (name, value) pairs
    locations: tuple                 # location name per automaton

    def __str__(self):
        lb = "[" if self.left_closed else "("
        rb = "]" if self.right_closed else ")"
        end = "inf" if self.end is None else str(self.end)
        return f"{lb}{self.start}, {end}{rb}"


@dataclass
class Signal:
    intervals: list
    horizon: Optional[Fraction]      # end of the covered prefix; None if unbounded

    def value_at(self, t) -> Interval:
        t = Fraction(t)
        for iv in self.intervals:
            after = t > iv.start or (t == iv.start and iv.left_closed)
            before = iv.end is None or t < iv.end or (t == iv.end and iv.right_closed)
            if after and before:
                return iv
        raise KeyError(t)


def _observation(net, cfg):
    props = frozenset(p for i, a in enumerate(net.automata) for p in a.locations[cfg.locations[i]].labels)
    names = tuple(a.locations[cfg.locations[i]].name for i, a in enumerate(net.automata))
    return props, tuple(sorted(cfg.vars.items())), names


def _instant(net, tr, l):
    """Observation at the firing instant closing interval ``l``, and the edge mix there."""
    old, new = tr.configs[l], tr.configs[l + 1]
    props, names = set(), []
    kinds = set()
    for i, a in enumerate(net.automata):
        idx = tr.transitions[l][i]
        new_side = idx is not None and tr.edges[l][i] is Edge.EI
        if idx is not None:
            kinds.add(tr.edges[l][i])
        loc = a.locations[(new if new_side else old).locations[i]]
        props |= loc.labels
        names.append(loc.name)
    values = {}
    for v in net.variables:
        writer_edges = {tr.edges[l][i] for i, idx in enumerate(tr.transitions[l])
                        if idx is not None and v.name in net.automata[i].transitions[idx].updated}
        if len(writer_edges) > 1:
            raise TraceError(f"variable {v.name} written with both edge kinds at position {l}")
        values[v.name] = new.vars[v.name] if writer_edges == {Edge.EI} else old.vars[v.name]
    return (frozenset(props), tuple(sorted(values.items())), tuple(names)), kinds


def project_signal(tr: LassoTrace, net: Network) -> Signal:
    """Piecewise-constant observation over ``[0, horizon)``.

    Positions where nobody fires extend the current interval.  At a firing
    instant the observation is taken per automaton from the old side
    (right-closed or idle) or the new side (left-closed); the instant joins the
    neighbour it agrees with, or becomes a point interval when edges are mixed.
    """
    times = tr.times
    k = tr.k
    steps = [l for l in range(k + 1) if any(idx is not None for idx in tr.transitions[l])]
    horizon = times[k + 1]
    if not steps:
        props, vars_, names = _observation(net, tr.configs[0])
        return Signal([Interval(Fraction(0), None, True, False, props, vars_, names)], None)
    intervals = []
    start, left_closed, seg = Fraction(0), True, 0
    for l in steps:
        t = times[l + 1]
        old_obs = _observation(net, tr.configs[seg])
        new_obs = _observation(net, tr.configs[l + 1])
        inst, kinds = _instant(net, tr, l)
        if kinds == {Edge.IE} or (len(kinds) > 1 and inst == old_obs):
            intervals.append(Interval(start, t, left_closed, True, *old_obs))
            left_closed = False
        elif kinds == {Edge.EI} or inst == new_obs:
            intervals.append(Interval(start, t, left_closed, False, *old_obs))
            left_closed = True
        else:
            intervals.append(Interval(start, t, left_closed, False, *old_obs))
            intervals.append(Interval(t, t, True, True, *inst))
            left_closed = False
        start, seg = t, l + 1
    if start < horizon:
        intervals.append(Interval(start, horizon, left_closed, False, *_observation(net, tr.configs[seg])))
    # the covered prefix is half-open: drop what sits exactly on the horizon
    intervals = [iv if iv.end != horizon else Interval(iv.start, iv.end, iv.left_closed, False, iv.props,
                                                       iv.vars, iv.locations)
                 for iv in intervals if iv.start < horizon]
    return Signal(intervals, horizon)


# -- rendering ------------------------------------------------------------------

def _frac(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def trace_to_dict(tr: LassoTrace, net: Network) -> dict:
    n_pos = tr.k + 2
    automata = [a.name for a in net.automata]
    return {
        "positions": list(range(n_pos)),
        "loop": tr.loop,
        "delta": [_frac(d) for d in tr.delays],
        "times": [_frac(t) for t in tr.times],
        "transitions": {
            name: [None if tr.transitions[l][i] is None else net.automata[i].transitions[tr.transitions[l][i]].name
                   for l in range(tr.k + 1)]
            for i, name in enumerate(automata)},
        "edges": {
            name: [None if tr.transitions[l][i] is None else tr.edges[l][i].value for l in range(tr.k + 1)]
            for i, name in enumerate(automata)},
        "locations": {
            name: [net.automata[i].locations[tr.configs[l].locations[i]].name for l in range(n_pos)]
            for i, name in enumerate(automata)},
        "vars": {v.name: [tr.configs[l].vars[v.name] for l in range(n_pos)] for v in net.variables},
        "clocks": {x: [_frac(tr.configs[l].clocks[x]) for l in range(n_pos)] for x in net.clocks},
    }


def format_structured(tr: LassoTrace, net: Network) -> str:
    return json.dumps(trace_to_dict(tr, net), indent=2)


def format_table(tr: LassoTrace, net: Network) -> str:
    """Fixed-width table with one column per position and rows p=, n=, t=, edge=."""
    d = trace_to_dict(tr, net)
    n_pos = tr.k + 2
    rows = [("pos", [str(l) + ("*" if l == tr.loop else "") for l in range(n_pos)]),
            ("time", d["times"]),
            ("delta", d["delta"] + [""])]
    for name in d["locations"]:
        rows.append((f"{name}.p=", d["locations"][name]))
    for v, vals in d["vars"].items():
        rows.append((f"{v}=", [str(x) for x in vals]))
    for x, vals in d["clocks"].items():
        rows.append((f"{x}=", vals))
    for name in d["transitions"]:
        rows.append((f"{name}.t=", [t or "-" for t in d["transitions"][name]] + [""]))
        rows.append((f"{name}.edge=", [Edge(e).marker if e else "" for e in d["edges"][name]] + [""]))
    head = max(len(r[0]) for r in rows)
    widths = [max(len(r[1][c]) for r in rows) for c in range(n_pos)]
    lines = []
    for title, cells in rows:
        lines.append(title.ljust(head) + " | " + " | ".join(c.ljust(w) for c, w in zip(cells, widths)))
    lines.append(f"(* marks the loop start: position {tr.k + 1} repeats position {tr.loop})")
    return "\n".join(line.rstrip() for line in lines)
