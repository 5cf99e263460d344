"""Command-line interface."""

from dumotion.cli.main import dispatch, main

__all__ = ["dispatch", "main"]
