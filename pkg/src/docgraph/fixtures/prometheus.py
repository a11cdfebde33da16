"""Toy monitoring-documentation corpus with scripted replies and expected artifacts.

Running the build and the evaluation on this corpus with `script()` as the
backend reproduces the files `generate_fixture` writes under ``expected/`` byte for byte.
"""

from __future__ import annotations

import json
from pathlib import Path

import yaml

from ..corpus.models import ROOT_PATH
from ..evaluation.judge import f1
from ..evaluation.models import DocumentScore, EvalReport, GoldMetrics, GoldTriple
from ..evaluation.report import report_json
from ..llm.scripted import Script, ScriptRule
from ..pipeline.models import AccessOrder, EntitySchema, ExtractedEntity, SummaryPhase, SummaryRecord, Triple
from ..utils.jsonl import write_json, write_jsonl

INITIAL = "Summarize the document below"
DIRECTORY = "Summarize the directory below"
ORDER = "Decide the order in which they should be read"
CONTEXT = "Summarize the current document"
ENTITY_TYPES = "classify meaningful entities"
DEFINITION = "merge types that have the same meaning"
ENTITIES = "extract meaningful entities and their types"
RELATIONS = "clear and meaningful relationships"
JUDGE = "decide whether the document supports it"
EQUIVALENCE = "expresses the same fact as the reference triple"

OVERVIEW = "Introduction/overview.md"
FIRST_STEPS = "Introduction/first_steps.md"
DATA_MODEL = "Concepts/data_model.md"
METRIC_TYPES = "Concepts/metric_types.md"
JOBS = "Concepts/jobs_instances.md"
EXPORTER = "Best Practices/multi_target_exporter.md"

DOCUMENTS: dict[str, tuple[str, str]] = {
    OVERVIEW: (
        "# Overview",
        "Prometheus is an open-source systems monitoring and alerting toolkit. It scrapes metrics such as "
        "http_requests_total from instrumented jobs and stores every sample in a local time series database. "
        "Exporters like node_exporter expose metrics of third-party systems, and Alertmanager takes care of "
        "routing alerts.\n",
    ),
    FIRST_STEPS: (
        "# First steps",
        "Download a release, then describe what to monitor in prometheus.yml. The configuration below makes "
        "Prometheus scrape a demo service as its only target every fifteen seconds. Open the expression browser "
        "and query the time series that the target produced.\n",
    ),
    DATA_MODEL: (
        "# Data model",
        "All data is stored as time series. Each time series is uniquely identified by its metric name and an "
        "optional set of key-value pairs called labels. A label adds a dimension to the data. Every sample "
        "consists of a float value and a millisecond-precision timestamp.\n",
    ),
    METRIC_TYPES: (
        "# Metric types",
        "The client libraries offer four core metric types. A counter is a cumulative metric that only goes up. "
        "A gauge is a single numerical value that can go up and down. A histogram counts observations in "
        "configurable buckets, and a summary calculates quantiles over a sliding window. The server flattens "
        "all of them into untyped time series.\n",
    ),
    JOBS: (
        "# Jobs and instances",
        "An endpoint you can scrape is called an instance, usually corresponding to a single process. A "
        "collection of instances with the same purpose is called a job, for example an api-server job with "
        "instance 1 and instance 2. Scraped series receive a job label and an instance label.\n",
    ),
    EXPORTER: (
        "# Multi-target exporter",
        "This guide introduces the multi-target exporter pattern. A Blackbox Exporter is configured through "
        "blackbox.yml with modules that probe remote endpoints. In Prometheus.yml, the scrape_configs section "
        "passes each target to the exporter as a URL parameter.\n",
    ),
}

SUMMARIES: dict[str, str] = {
    OVERVIEW: (
        "Prometheus is an open-source monitoring system that collects metrics from targets and stores them as "
        "time series; exporters expose metrics of other systems and Alertmanager handles alerts."
    ),
    FIRST_STEPS: (
        "The first-steps guide configures Prometheus with prometheus.yml to scrape a demo service as a target and "
        "inspect the resulting time series."
    ),
    DATA_MODEL: (
        "Prometheus stores all data as time series identified by a metric name and a set of key-value labels; "
        "each sample holds a float value and a timestamp."
    ),
    METRIC_TYPES: (
        "Prometheus client libraries offer four core metric types: Counter, Gauge, Histogram, and Summary. These "
        "types are differentiated in client libraries and the wire protocol, but the Prometheus server currently "
        "flattens all data into untyped time series."
    ),
    JOBS: (
        "An endpoint that Prometheus scrapes is an instance, and a collection of instances with the same purpose "
        "forms a job; scraped series receive job and instance labels."
    ),
    EXPORTER: (
        "The document provides a YAML configuration example for setting up Prometheus to scrape metrics from a "
        "Blackbox Exporter using the multi-target exporter pattern."
    ),
}

DIRECTORY_SUMMARIES: dict[str, str] = {
    "Best Practices": "Best practices describe how to run exporters such as the Blackbox Exporter at scale.",
    "Concepts": "The concepts section explains the time series data model, the four metric types, and jobs and instances.",
    "Introduction": "The introduction presents Prometheus and walks through a first scrape configuration.",
    ROOT_PATH: "Documentation of the Prometheus monitoring system, from introduction and concepts to best practices.",
}

ORDER_REPLIES: dict[str, str] = {
    ROOT_PATH: "[3, 2, 1]",
    "Introduction": "[2, 1]",
    "Concepts": "[1, 3, 2]",
}

ACCESS_SEQUENCE = (OVERVIEW, FIRST_STEPS, DATA_MODEL, METRIC_TYPES, JOBS, EXPORTER)

PER_LEVEL_ORDERS: dict[str, tuple[str, ...]] = {
    ROOT_PATH: ("Introduction", "Concepts", "Best Practices"),
    "Introduction": (OVERVIEW, FIRST_STEPS),
    "Concepts": (DATA_MODEL, METRIC_TYPES, JOBS),
    "Best Practices": (EXPORTER,),
}

ENTITY_TYPE_REPLIES: dict[str, str] = {
    OVERVIEW: "[Monitoring System, Time Series, Metric, Alertmanager, Exporter]",
    FIRST_STEPS: "[Configuration, Target, Time Series, Summary, Gauge]",
    DATA_MODEL: "[Time Series, Metric, Label, Sample, counter]",
    METRIC_TYPES: "[Counter, Gauge, Histogram, Summary, Sample, counter]",
    JOBS: "[Job, Instance, Target, Label, Histogram]",
    EXPORTER: "[Configuration, Exporter, Target, Job, Instance]",
}

DEFINITIONS: dict[str, str] = {
    "Configuration": "A configuration is a YAML file such as prometheus.yml that defines scrape targets, intervals and rules.",
    "Counter": "A counter is a cumulative metric whose value only increases or resets to zero on restart.",
    "Exporter": "An exporter is a program that exposes metrics of a third-party system in the Prometheus format.",
    "Gauge": "A gauge is a metric that represents a single numerical value that can go up and down.",
    "Histogram": "A histogram samples observations and counts them in configurable buckets.",
    "Instance": "An instance is an endpoint that Prometheus scrapes, usually a single process.",
    "Job": "A job is a collection of instances with the same purpose.",
    "Label": "A label is a key-value pair that identifies a dimension of a time series.",
    "Metric": "A metric is a named measurement of a monitored system.",
    "Sample": "A sample is a single float value with a millisecond-precision timestamp.",
    "Summary": "A summary samples observations and calculates configurable quantiles over a sliding time window.",
    "Target": "A target is an endpoint from which Prometheus scrapes metrics.",
    "Time Series": "A time series is a stream of timestamped values identified by a metric name and labels.",
}

ENTITY_REPLIES: dict[str, str] = {
    OVERVIEW: json.dumps(
        {
            "Time Series": ["time series database"],
            "Exporter": ["node_exporter"],
            "Metric": ["http_requests_total"],
            "Alertmanager": ["Alertmanager"],
        }
    ),
    FIRST_STEPS: "{Configuration: [prometheus.yml], Target: [demo service]}",
    DATA_MODEL: json.dumps(
        {"Time Series": ["time series"], "Metric": ["metric name"], "Label": ["label"], "Sample": ["sample"]}
    ),
    METRIC_TYPES: json.dumps({"Counter": ["counter"], "Gauge": ["gauge"], "Histogram": ["histogram"], "Summary": ["summary"]}),
    JOBS: json.dumps({"Job": ["api-server"], "Instance": ["instance 1", "instance 2"], "Label": ["job label"]}),
    EXPORTER: "{Configuration:[Blackbox.yml, Prometheus.yml, Scrape_configs], Exporter:[Blackbox Exporter]}",
}

RELATION_REPLIES: dict[str, str] = {
    OVERVIEW: "[(node_exporter, Exposes, http_requests_total), (http_requests_total, Stored In, time series database)]",
    FIRST_STEPS: "[(prometheus.yml, Configures, demo service)]",
    DATA_MODEL: "[(metric name, Identifies, time series), (label, Distinguishes, time series), (sample, Contains, label)]",
    METRIC_TYPES: (
        "[(histogram, Similar To, summary), (counter, Differs From, gauge), (counter, Differs From, gauge), "
        "(Ghost, Haunts, counter), (gauge, Goes Up)]"
    ),
    JOBS: "[(api-server, Has Instance, instance 1), (api-server, Has Instance, instance 2), (job label, Identifies, api-server)]",
    EXPORTER: "[(Prometheus.yml, Defines, Scrape_configs), (Blackbox.yml, Configures, Blackbox Exporter)]",
}

# entity name -> type, per document, in reply order (off-schema types excluded)
ENTITIES: dict[str, list[tuple[str, str]]] = {
    EXPORTER: [
        ("Blackbox.yml", "Configuration"),
        ("Prometheus.yml", "Configuration"),
        ("Scrape_configs", "Configuration"),
        ("Blackbox Exporter", "Exporter"),
    ],
    DATA_MODEL: [("time series", "Time Series"), ("metric name", "Metric"), ("label", "Label"), ("sample", "Sample")],
    JOBS: [("api-server", "Job"), ("instance 1", "Instance"), ("instance 2", "Instance"), ("job label", "Label")],
    METRIC_TYPES: [("counter", "Counter"), ("gauge", "Gauge"), ("histogram", "Histogram"), ("summary", "Summary")],
    FIRST_STEPS: [("prometheus.yml", "Configuration"), ("demo service", "Target")],
    OVERVIEW: [("time series database", "Time Series"), ("node_exporter", "Exporter"), ("http_requests_total", "Metric")],
}

TRIPLES: dict[str, list[tuple[str, str, str]]] = {
    EXPORTER: [("Prometheus.yml", "Defines", "Scrape_configs"), ("Blackbox.yml", "Configures", "Blackbox Exporter")],
    DATA_MODEL: [
        ("metric name", "Identifies", "time series"),
        ("label", "Distinguishes", "time series"),
        ("sample", "Contains", "label"),
    ],
    JOBS: [
        ("api-server", "Has Instance", "instance 1"),
        ("api-server", "Has Instance", "instance 2"),
        ("job label", "Identifies", "api-server"),
    ],
    METRIC_TYPES: [("histogram", "Similar To", "summary"), ("counter", "Differs From", "gauge")],
    FIRST_STEPS: [("prometheus.yml", "Configures", "demo service")],
    OVERVIEW: [
        ("node_exporter", "Exposes", "http_requests_total"),
        ("http_requests_total", "Stored In", "time series database"),
    ],
}

JUDGE_REPLIES: dict[str, str] = {DATA_MODEL: "[True, True, False]"}
JUDGE_DEFAULT = "[True, True, True]"

GOLD: tuple[GoldTriple, ...] = (
    GoldTriple(subject="Prometheus.yml", predicate="Defines", object="Scrape_configs", doc=EXPORTER),
    GoldTriple(subject="histogram", predicate="similar to", object="summary", doc=METRIC_TYPES),
    GoldTriple(subject="Counter", predicate="is different from", object="Gauge", doc=METRIC_TYPES),
    GoldTriple(subject="Alertmanager", predicate="sends", object="notifications", doc=OVERVIEW),
)

CONFIG_TOML = """\
corpus_path = "corpus"
run_dir = "run"

[embedding]
provider = "hashing"
dimension = 256
"""


def _title(path: str) -> str:
    return DOCUMENTS[path][0] + "\n"


def document_text(path: str) -> str:
    title, body = DOCUMENTS[path]
    return f"{title}\n\n{body}"


def script() -> Script:
    """Scripted replies for every prompt the pipeline and the judge send on this corpus."""
    rules: list[ScriptRule] = []

    def rule(response: str, *match: str) -> None:
        rules.append(ScriptRule(match=match, response=response))

    for path, summary in SUMMARIES.items():
        rule(summary, INITIAL, _title(path))
        rule(summary, CONTEXT, _title(path))
    for path, summary in DIRECTORY_SUMMARIES.items():
        rule(summary, DIRECTORY, f"Directory: {path}\n")
    for path, reply in ORDER_REPLIES.items():
        rule(reply, ORDER, f"Directory: {path}\n")
    for path, reply in ENTITY_TYPE_REPLIES.items():
        rule(reply, ENTITY_TYPES, _title(path))
    rule(json.dumps(DEFINITIONS), DEFINITION)
    for path, reply in ENTITY_REPLIES.items():
        rule(reply, ENTITIES, _title(path))
    for path, reply in RELATION_REPLIES.items():
        rule(reply, RELATIONS, _title(path))
    for path, reply in JUDGE_REPLIES.items():
        rule(reply, JUDGE, _title(path))
    rule(JUDGE_DEFAULT, JUDGE)
    rule("True", EQUIVALENCE, "(Counter, is different from, Gauge)")
    rule("False", EQUIVALENCE)
    return Script(default_response="[]", rules=tuple(rules))


def _leaf_order() -> list[str]:
    return sorted(DOCUMENTS, key=lambda p: p.split("/"))


def expected_summaries() -> list[SummaryRecord]:
    initial = [SummaryRecord(node_path=p, phase=SummaryPhase.INITIAL, text=SUMMARIES[p]) for p in _leaf_order()]
    directories = [
        SummaryRecord(node_path=p, phase=SummaryPhase.DIRECTORY, text=DIRECTORY_SUMMARIES[p])
        for p in ("Best Practices", "Concepts", "Introduction", ROOT_PATH)
    ]
    context = [
        SummaryRecord(
            node_path=p,
            phase=SummaryPhase.CONTEXT_ENHANCED,
            text=SUMMARIES[p],
            context_refs=ACCESS_SEQUENCE[:i],
        )
        for i, p in enumerate(ACCESS_SEQUENCE)
    ]
    return [*initial, *directories, *context]


def expected_order() -> AccessOrder:
    return AccessOrder(sequence=ACCESS_SEQUENCE, per_level_orders=PER_LEVEL_ORDERS)


def expected_schema() -> EntitySchema:
    names = sorted(DEFINITIONS, key=lambda n: (n.casefold(), n))
    provenance = {name: [name] for name in names}
    provenance["Counter"] = ["Counter", "counter"]
    return EntitySchema(entries={n: DEFINITIONS[n] for n in names}, provenance=provenance)


def expected_entities() -> list[ExtractedEntity]:
    return [
        ExtractedEntity(name=name, entity_type=entity_type, source_path=path)
        for path in _leaf_order()
        for name, entity_type in ENTITIES[path]
    ]


def expected_triples() -> list[Triple]:
    triples: list[Triple] = []
    for path in _leaf_order():
        types = {name.casefold(): entity_type for name, entity_type in ENTITIES[path]}
        for s, p, o in TRIPLES[path]:
            triples.append(
                Triple(
                    subject=s,
                    predicate=p,
                    object=o,
                    source_path=path,
                    subject_type=types[s.casefold()],
                    object_type=types[o.casefold()],
                )
            )
    return triples


def expected_report() -> EvalReport:
    per_document: dict[str, DocumentScore] = {}
    for path in _leaf_order():
        n = len(TRIPLES[path])
        true = 2 if path == DATA_MODEL else n
        per_document[path] = DocumentScore(judged=n, true=true)
    n_true = sum(s.true for s in per_document.values())
    n_judged = sum(s.judged for s in per_document.values())
    n_docs = len(DOCUMENTS)
    n_entities = sum(len(v) for v in ENTITIES.values())
    n_triples = sum(len(v) for v in TRIPLES.values())
    precision, recall = 3 / n_triples, 3 / len(GOLD)
    return EvalReport(
        precision=n_true / n_judged,
        recall_number=n_true,
        average_recall_number=n_true / n_docs,
        judged_true=n_true,
        judged_false=n_judged - n_true,
        unparseable=0,
        entity_count=n_entities,
        average_entity_number=n_entities / n_docs,
        per_document=per_document,
        gold_metrics=GoldMetrics(
            precision=precision,
            recall=recall,
            f1=f1(precision, recall),
            matched=3,
            extracted=n_triples,
            gold=len(GOLD),
        ),
    )


def generate_fixture(out_dir: str | Path) -> Path:
    """Write ``corpus/``, ``script.yaml``, ``gold.jsonl``, ``config.toml`` and ``expected/`` under `out_dir`."""
    out = Path(out_dir)
    corpus = out / "corpus"
    for path in DOCUMENTS:
        target = corpus / path
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(document_text(path), encoding="utf-8", newline="\n")

    with open(out / "script.yaml", "w", encoding="utf-8", newline="\n") as f:
        yaml.safe_dump(script().model_dump(mode="json"), f, sort_keys=False, allow_unicode=True, width=1000)
    write_jsonl(out / "gold.jsonl", GOLD)
    (out / "config.toml").write_text(CONFIG_TOML, encoding="utf-8", newline="\n")

    expected = out / "expected"
    expected.mkdir(parents=True, exist_ok=True)
    write_jsonl(expected / "summaries.jsonl", expected_summaries())
    write_json(expected / "order.json", expected_order())
    write_json(expected / "schema.json", expected_schema())
    write_jsonl(expected / "entities.jsonl", expected_entities())
    write_jsonl(expected / "triples.jsonl", expected_triples())
    (expected / "eval_report.json").write_text(report_json(expected_report()), encoding="utf-8", newline="\n")
    return out
