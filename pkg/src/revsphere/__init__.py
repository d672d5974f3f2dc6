"""Command line entry point for revsphere."""

from revsphere.cli.commands import main


__all__ = ['main']
