"""Tests for model-reply parsers."""

import random

import pytest

from docgraph.errors import ParseError
from docgraph.llm.parsing import parse_name_map, parse_string_list, parse_triples


class TestParseStringList:
    def test_strips_quotes_and_whitespace(self):
        assert parse_string_list("Sure! [ 'Time Series', \"Metric\" ,Label ]") == ["Time Series", "Metric", "Label"]

    def test_first_list_wins(self):
        assert parse_string_list("[a, b] and later [c]") == ["a", "b"]

    def test_empty_list(self):
        assert parse_string_list("[]") == []

    def test_no_list(self):
        with pytest.raises(ParseError):
            parse_string_list("no brackets here")


class TestParseTriples:
    def test_well_formed(self):
        parsed = parse_triples("[(Prometheus, scrapes, target), (target, exposes, metrics)]")
        assert parsed.triples == [("Prometheus", "scrapes", "target"), ("target", "exposes", "metrics")]
        assert parsed.malformed == 0

    def test_counts_malformed(self):
        parsed = parse_triples("[(a, b, c), (only, two), (x, , z), (p, q, r, s)]")
        assert parsed.triples == [("a", "b", "c")]
        assert parsed.malformed == 3

    def test_explicit_empty_answer(self):
        parsed = parse_triples("There are no relations: []")
        assert parsed.triples == []
        assert parsed.malformed == 0

    @pytest.mark.parametrize("text", ["nothing useful", "[(one, two)]", ""])
    def test_unusable(self, text):
        with pytest.raises(ParseError):
            parse_triples(text)


class TestParseNameMap:
    def test_strict_json(self):
        assert parse_name_map('Result: {"Counter": "A cumulative metric.", "Gauge": ["g1", "g2"]}') == {
            "Counter": "A cumulative metric.",
            "Gauge": ["g1", "g2"],
        }

    def test_loose_lists(self):
        assert parse_name_map("{Configuration:[Blackbox.yml, Prometheus.yml, Scrape_configs], Exporter:[Blackbox Exporter]}") == {
            "Configuration": ["Blackbox.yml", "Prometheus.yml", "Scrape_configs"],
            "Exporter": ["Blackbox Exporter"],
        }

    def test_loose_values_with_commas(self):
        reply = '{"Configuration": Prometheus is configured by YAML files, such as prometheus.yml., "Target": An endpoint.}'
        assert parse_name_map(reply) == {
            "Configuration": "Prometheus is configured by YAML files, such as prometheus.yml.",
            "Target": "An endpoint.",
        }

    def test_urls_are_not_keys(self):
        assert parse_name_map("{Exporter: see http://example.com/x}") == {"Exporter": "see http://example.com/x"}

    def test_first_key_wins(self):
        assert parse_name_map("{A: one, A: two}") == {"A": "one"}

    def test_inline_colon_stays_in_value(self):
        reply = "{Label: A key-value pair, such as env: prod, that identifies a series.}"
        assert parse_name_map(reply) == {"Label": "A key-value pair, such as env: prod, that identifies a series."}

    def test_known_lowercase_name_starts_entry(self):
        reply = "{Label: a pair, env: a deployment stage}"
        assert parse_name_map(reply) == {"Label": "a pair, env: a deployment stage"}
        assert parse_name_map(reply, known_names=["Label", "Env"]) == {"Label": "a pair", "env": "a deployment stage"}

    def test_no_mapping(self):
        with pytest.raises(ParseError):
            parse_name_map("[not, a, map]")

    def test_value_without_key(self):
        with pytest.raises(ParseError):
            parse_name_map("{just some words}")


def _random_text(rng: random.Random) -> str:
    alphabet = "[](){},:\"' abcXYZ019\n\t\\/.-"
    if rng.random() < 0.5:
        return bytes(rng.randrange(256) for _ in range(rng.randrange(64))).decode("utf-8", errors="replace")
    return "".join(rng.choice(alphabet) for _ in range(rng.randrange(64)))


def test_parsers_never_crash_on_random_input():
    rng = random.Random(20240417)
    for _ in range(10_000):
        text = _random_text(rng)

        try:
            items = parse_string_list(text)
        except ParseError:
            pass
        else:
            assert all(isinstance(item, str) and item for item in items)

        try:
            parsed = parse_triples(text)
        except ParseError:
            pass
        else:
            assert parsed.malformed >= 0
            assert all(len(t) == 3 and all(t) for t in parsed.triples)

        try:
            mapping = parse_name_map(text)
        except ParseError:
            pass
        else:
            for key, value in mapping.items():
                assert isinstance(key, str) and key
                assert isinstance(value, str) or all(isinstance(v, str) for v in value)
