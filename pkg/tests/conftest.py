import shutil

import pytest

from tabmc.encoder import EncoderOptions, encode_network
from tabmc.parser import parse_network
from tabmc.solver import SolverConfig, solve
from tabmc.terms import emit_smtlib2

Z3 = shutil.which("z3")
CVC5 = shutil.which("tabmc-cvc5")

needs_z3 = pytest.mark.skipif(Z3 is None, reason="z3 executable not on PATH")
needs_cvc5 = pytest.mark.skipif(CVC5 is None, reason="tabmc-cvc5 not installed")


def z3_config(**kw):
    return SolverConfig(executable=Z3 or "z3", **kw)


def net_of(text):
    return parse_network(text)


def verdict(text_or_net, k=3, extra=(), edges="free", liveness="none", cfg=None):
    """Encode a network, add ``extra(hook)`` assertions and return the solver verdict."""
    net = net_of(text_or_net) if isinstance(text_or_net, str) else text_or_net
    script, hook = encode_network(net, k, EncoderOptions(edges=edges, liveness=liveness))
    for f in extra:
        script.extend(f(hook))
    res = solve(emit_smtlib2(script), cfg or z3_config(), script.declarations, script.definitions)
    return res.verdict, res, script, hook

