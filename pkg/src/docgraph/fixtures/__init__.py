"""Deterministic fixture corpus for end-to-end runs."""

from .prometheus import GOLD, expected_report, expected_schema, expected_triples, generate_fixture, script

__all__ = ["GOLD", "expected_report", "expected_schema", "expected_triples", "generate_fixture", "script"]
