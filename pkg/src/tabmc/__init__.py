"""Bounded model checking of timed automata networks through BitVector/real SMT encodings."""

from .core import Configuration, Edge, Network, StepEntry, check_discrete_step, check_time_step
from .encoder import EncoderOptions, encode_network
from .parser import ParseError, parse_network, validate_network
from .query import parse_query
from .solver import SolverConfig, Verdict, solve
from .trace import decode_trace, project_signal, validate_trace
from .cli import RunReport, run_check

__version__ = "0.1.0"

__all__ = ["Configuration", "Edge", "Network", "StepEntry", "check_discrete_step", "check_time_step",
           "EncoderOptions", "encode_network", "ParseError", "parse_network", "validate_network",
           "parse_query", "SolverConfig", "Verdict", "solve", "decode_trace", "project_signal",
           "validate_trace", "RunReport", "run_check"]
