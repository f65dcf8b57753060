"""Desk-scale neural text-classification lab for social-media text.

Subpackages cover the full experiment loop: text preprocessing, vocabulary
and character encodings, from-scratch numpy networks, cross-validated
evaluation, fold-level significance testing, reporting, and a CLI.
"""

__version__ = "0.1.0"
