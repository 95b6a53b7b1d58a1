"""Interpreter and execution engine for dynamic reconfigurable architectures.

Components are typed automata whose ports carry local operations. Motifs
group components on a map and coordinate them with guarded interaction terms.
``System`` ties motifs together and ``run`` executes it step by step.
"""
from .core import ComponentType, Configuration, Instance, MotifState, Port, Transition, VarDecl, instantiate
from .errors import DreamError, Quiescent, UniverseTooLarge, WellFormednessError
from .motif import Motif, motif_step
from .system import Engine, Metric, System, Trace, convergence_step, run

__all__ = [
    "ComponentType", "Configuration", "DreamError", "Engine", "Instance", "Metric", "Motif", "MotifState",
    "Port", "Quiescent", "System", "Trace", "Transition", "UniverseTooLarge", "VarDecl", "WellFormednessError",
    "convergence_step", "instantiate", "motif_step", "run",
]
