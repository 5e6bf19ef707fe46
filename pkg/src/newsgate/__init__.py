"""Pseudonymous news submission, panel analysis, validator gating and
credibility dynamics over a tamper-evident hash-chained ledger."""

__version__ = "0.1.0"
