"""HyLTL formulas to Büchi hybrid automata."""

from .parser import parse_hyltl
from .pipeline import compile_property

__version__ = "0.1.0"
__all__ = ["compile_property", "parse_hyltl"]
