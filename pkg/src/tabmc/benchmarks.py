"""Model generators: Fischer mutual exclusion, token ring, a small demo automaton, random networks."""

from __future__ import annotations

import random
from typing import Optional

from .core import bit_width

__all__ = ["gen_fischer", "gen_token_ring", "fischer_query", "token_ring_query",
           "demo_model", "random_network_text", "random_query_text", "FISCHER_DELAY"]

#: Timing constant of the Fischer generator: a process must write ``id`` within
#: this many time units of seeing it free, and waits strictly longer before
#: entering its critical section.
FISCHER_DELAY = 2


def gen_fischer(n: int, broken: bool = False, delay: int = FISCHER_DELAY) -> str:
    """Fischer's protocol for ``n`` processes sharing ``id`` in ``[0, n]``.

    Process ``Pi`` moves ``a -> b`` when ``id = 0``, writes ``id := i`` within
    ``delay`` time units (``b -> c``), and enters ``cs`` after waiting more than
    ``delay`` if ``id`` still equals ``i``.  ``broken`` drops that re-check.
    """
    if n < 2:
        raise ValueError("Fischer needs at least 2 processes")
    lines = [f"// Fischer mutual exclusion, {n} processes" + (" (re-check removed)" if broken else "")]
    lines.append("clock " + ", ".join(f"x{i}" for i in range(1, n + 1)) + ";")
    lines.append(f"var id : [0, {n}] = 0;")
    for i in range(1, n + 1):
        enter = f"x{i} > {delay}" if broken else f"x{i} > {delay} and id = {i}"
        lines += [
            f"automaton P{i} {{",
            "  init a;",
            "  location a;",
            f"  location b inv (x{i} <= {delay});",
            "  location c;",
            f"  location cs labels {{crit{i}}};",
            f"  trans try{i}: a -> b when id = 0 reset {{x{i}}};",
            f"  trans set{i}: b -> c when x{i} <= {delay} reset {{x{i}}} do {{id := {i}}};",
            f"  trans enter{i}: c -> cs when {enter};",
            f"  trans retry{i}: c -> a when !(id = {i});",
            f"  trans leave{i}: cs -> a do {{id := 0}};",
            "}",
        ]
    return "\n".join(lines) + "\n"


def fischer_query(i: int = 1, j: int = 2) -> str:
    return f"invariant !(P{i}.cs && P{j}.cs)"


def gen_token_ring(n: int, hold_bound: int = 2) -> str:
    """``n`` agents and a ring process passing one token over one-to-one channels.

    The ring hands the token to agent ``i`` on ``give_i`` and takes it back on
    ``back_i``, after which it may move on to either neighbour.  An agent gives
    the token back either directly or after a local ``leaving`` step; it may
    keep it at most ``hold_bound`` time units.
    """
    if n < 2:
        raise ValueError("token ring needs at least 2 agents")
    lines = [f"// token ring with {n} agents"]
    lines.append("clock " + ", ".join(f"y{i}" for i in range(1, n + 1)) + ";")
    lines.append("channel " + ", ".join(f"give{i}, back{i}" for i in range(1, n + 1)) + ";")
    for i in range(1, n + 1):
        lines += [
            f"automaton A{i} {{",
            "  init idle;",
            "  location idle;",
            f"  location hold inv (y{i} <= {hold_bound}) labels {{tok{i}}};",
            f"  location leaving inv (y{i} <= {hold_bound});",
            f"  trans take{i}: idle -> hold sync give{i}? reset {{y{i}}};",
            f"  trans ret{i}: hold -> idle sync back{i}!;",
            f"  trans finish{i}: hold -> leaving;",
            f"  trans drop{i}: leaving -> idle sync back{i}!;",
            "}",
        ]
    lines += ["automaton Ring {", "  init r1;"]
    lines += [f"  location r{i};" for i in range(1, n + 1)]
    lines += [f"  location busy{i};" for i in range(1, n + 1)]
    for i in range(1, n + 1):
        nxt = i % n + 1
        prv = (i - 2) % n + 1
        lines.append(f"  trans pass{i}: r{i} -> busy{i} sync give{i}!;")
        lines.append(f"  trans fwd{i}: busy{i} -> r{nxt} sync back{i}?;")
        if prv != nxt:
            lines.append(f"  trans rev{i}: busy{i} -> r{prv} sync back{i}?;")
    lines.append("}")
    return "\n".join(lines) + "\n"


def token_ring_query(i: int = 1, j: int = 2) -> str:
    return f"invariant !(A{i}.hold && A{j}.hold)"


def demo_model() -> str:
    """Three-location automaton with one clock and a 0/1 counter."""
    return """\
clock x;
var n : [0, 1] = 0;
automaton A {
  init q0;
  location q0;
  location q1;
  location q2 inv (x < 2);
  trans t1: q0 -> q2 when n = 0;
  trans t2: q0 -> q1 when x > 5 reset {x};
  trans t3: q1 -> q0 reset {x};
  trans t4: q2 -> q0 do {n := n + 1};
}
"""


# -- random models ----------------------------------------------------------------

def _clock_atom(rng, clocks):
    return f"{rng.choice(clocks)} {rng.choice(['<', '>', '<=', '>='])} {rng.randint(0, 4)}"


def random_network_text(rng: random.Random, max_automata: int = 3, max_locations: int = 4,
                        max_clocks: int = 2, max_vars: int = 2, max_transitions: int = 5,
                        channels: bool = True) -> str:
    """A random, always-valid model within the given size limits."""
    n_aut = rng.randint(1, max_automata)
    clocks = [f"c{j}" for j in range(rng.randint(0, max_clocks))]
    variables = []
    for j in range(rng.randint(0, max_vars)):
        lo = rng.randint(-3, 1)
        hi = rng.randint(max(lo, 0), 4)
        variables.append((f"v{j}", lo, hi, rng.randint(lo, hi)))
    width = {name: bit_width(lo, hi) for name, lo, hi, _ in variables}
    chans = ["ch", "bc"] if channels and n_aut > 1 else []
    out = []
    if clocks:
        out.append("clock " + ", ".join(clocks) + ";")
    for name, lo, hi, init in variables:
        out.append(f"var {name} : [{lo}, {hi}] = {init};")
    if chans:
        out.append("channel " + ", ".join(chans) + ";")
    kinds = {"ch": ["!", "?"], "bc": ["#", "@"]}
    for a in range(n_aut):
        n_loc = rng.randint(1, max_locations)
        out.append(f"automaton M{a} {{")
        out.append("  init l0;")
        for q in range(n_loc):
            parts = [f"  location l{q}"]
            if clocks and q > 0 and rng.random() < 0.3:
                parts.append(f"inv ({rng.choice(clocks)} {rng.choice(['<', '<='])} {rng.randint(1, 5)})")
            if rng.random() < 0.3:
                parts.append(f"labels {{p{rng.randint(0, 2)}}}")
            out.append(" ".join(parts) + ";")
        for t in range(rng.randint(0 if n_loc == 1 else 1, max_transitions)):
            src, dst = rng.randrange(n_loc), rng.randrange(n_loc)
            parts = [f"  trans m{a}t{t}: l{src} -> l{dst}"]
            conds = []
            if clocks and rng.random() < 0.5:
                conds.append(_clock_atom(rng, clocks))
            if variables and rng.random() < 0.4:
                name = rng.choice(variables)[0]
                if rng.random() < 0.5:
                    conds.append(f"{name} {rng.choice(['<', '='])} {rng.randint(-2, 3)}")
                else:
                    conds.append(f"!({name} = {rng.choice(variables)[0]})")
            if conds:
                parts.append("when " + " and ".join(conds))
            if chans and rng.random() < 0.3:
                c = rng.choice(chans)
                parts.append(f"sync {c}{rng.choice(kinds[c])}")
            if clocks and rng.random() < 0.4:
                parts.append(f"reset {{{rng.choice(clocks)}}}")
            if variables and rng.random() < 0.4:
                target = rng.choice(variables)[0]
                sources = [v for v, *_ in variables if width[v] <= width[target]]
                exp = rng.choice([str(rng.randint(-1, 2)), f"{target} + 1", f"{target} - 1",
                                  f"{rng.choice(sources)} + {rng.randint(0, 1)}"])
                parts.append(f"do {{{target} := {exp}}}")
            out.append(" ".join(parts) + ";")
        out.append("}")
    return "\n".join(out) + "\n"


def random_query_text(rng: random.Random, net) -> Optional[str]:
    """A random reachability query over ``net`` (location or variable atom)."""
    a = rng.choice(net.automata)
    atom = f"{a.name}.{rng.choice(a.locations).name}"
    if net.variables and rng.random() < 0.5:
        v = rng.choice(net.variables)
        atom = f"{atom} && {v.name} = {rng.randint(v.lo, v.hi)}"
    return f"reachable {atom}"
