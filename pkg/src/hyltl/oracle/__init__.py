"""Executable reference semantics used to cross-check the translations."""
