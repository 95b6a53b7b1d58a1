"""Scenario language, built-in scenarios and command-line tools."""
from .lexer import Diagnostic, ParseError
from .parser import check, parse
from .printer import system as pretty
from .scenarios import BUILTINS, load, scenario_source

__all__ = ["BUILTINS", "Diagnostic", "ParseError", "check", "load", "parse", "pretty", "scenario_source"]
