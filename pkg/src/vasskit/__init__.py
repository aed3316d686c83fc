"""vasskit: counter programs, zero-test gadgets, hardness constructions, and
bounded VASS reachability checking."""

from .core import (
    CaTransition,
    Configuration,
    CounterAutomaton,
    EncodingKind,
    Run,
    Transition,
    Vass,
    VassError,
    ca_validate_run,
    dumps,
    encoded_size,
    fire,
    is_flat,
    loads,
    to_dot,
    validate_run,
)
from .lang import CoreProgram, Program, compile, expand, parse, pretty
from .gadgets import CtrlSpec, PairSpec, TripleSpec
from .reach import Caps, ReachReport, WitnessCertificate, canonical_witness, explore, find_run

__all__ = [
    "CaTransition", "Configuration", "CounterAutomaton", "EncodingKind", "Run",
    "Transition", "Vass", "VassError", "ca_validate_run", "dumps", "encoded_size",
    "fire", "is_flat", "loads", "to_dot", "validate_run",
    "CoreProgram", "Program", "compile", "expand", "parse", "pretty",
    "CtrlSpec", "PairSpec", "TripleSpec",
    "Caps", "ReachReport", "WitnessCertificate", "canonical_witness", "explore", "find_run",
]
