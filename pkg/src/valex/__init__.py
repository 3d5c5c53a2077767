"""Workbench for syntactic valence lexicons.

Provides a lexicon interchange format, a heuristic lexicon merger, a
subcategorization-frame checker, constituent/relation scoring for parser
output, comparative error mining, and a command-line front end.
"""

__version__ = "0.1.0"
