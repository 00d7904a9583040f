import json
from pathlib import Path

import pytest

from procompare.model import model_from_data, parse_model
from procompare.reference import Annotation
from procompare.rules import Weights
from procompare.session import create_session, establish_fact, process_scope, recompute

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"

EQUAL_PROCESS_PAIRS = [
    ("p1-req", "p2-req"),
    ("p1-design", "p2-design"),
    ("p1-dev", "p2-code"),
    ("p1-test", "p2-test"),
    ("p1-elicit", "p2-gather"),
    ("p1-specify", "p2-analyze"),
    ("p1-web", "p2-arch"),
    ("p1-infra", "p2-proto"),
    ("p1-accept", "p2-accept"),
]


def _quick_model(mid, procs, prods=()):
    """Shorthand model builder for rule-level tests.

    procs: {pid: {"name": ..., "subs": [...], "uses": [product ids]}}
    prods: iterable of (product id, product name)
    """
    data = {
        "id": mid,
        "name": mid,
        "products": [{"id": pid, "name": name} for pid, name in prods],
        "processes": [
            {
                "id": pid,
                "name": spec.get("name", pid),
                "subprocesses": spec.get("subs", []),
                "accesses": [{"product": p, "mode": "consume"} for p in spec.get("uses", [])],
            }
            for pid, spec in procs.items()
        ],
    }
    return model_from_data(data)


@pytest.fixture
def quick_model():
    return _quick_model


@pytest.fixture(scope="session")
def pilot_one():
    return parse_model((FIXTURES / "pilot_one.json").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def pilot_two():
    return parse_model((FIXTURES / "pilot_two.json").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def product_fact_records():
    return json.loads((FIXTURES / "product_facts.json").read_text(encoding="utf-8"))


def add_product_facts(session, records):
    for record in records:
        establish_fact(
            session,
            record.get("kind", "product"),
            record["left"],
            record["right"],
            record["verdict"],
            record.get("rationale", ""),
        )


@pytest.fixture
def phase_session(pilot_one, pilot_two, product_fact_records):
    """Phase-scoped session weighted entirely on product structure."""
    session = create_session(
        pilot_one, pilot_two, weights=Weights(1.0, 0.0, 0.0), session_id="phase"
    )
    add_product_facts(session, product_fact_records)
    recompute(session, "phases")
    return session


@pytest.fixture
def process_session(pilot_one, pilot_two, product_fact_records):
    """Process-scoped session with default weights."""
    session = create_session(pilot_one, pilot_two, session_id="process")
    add_product_facts(session, product_fact_records)
    recompute(session, "processes")
    return session


def build_merge_session(pilot_one, pilot_two, product_fact_records, session_id="merge"):
    """Session with the full fact story: nine equal pairs, one rejected
    pair with a shared purpose, and exhaustive rejections for the three
    processes without counterparts."""
    session = create_session(pilot_one, pilot_two, session_id=session_id)
    add_product_facts(session, product_fact_records)
    for left, right in EQUAL_PROCESS_PAIRS:
        establish_fact(session, "process", left, right, "equal")
    establish_fact(
        session, "process", "p1-integ", "p2-integrate", "different", "same goal, different means"
    )
    for right in process_scope(pilot_two):
        if session.facts.verdict("process", "p1-doc", right) is None:
            establish_fact(session, "process", "p1-doc", right, "different")
    for left in process_scope(pilot_one):
        for right in ("p2-plan", "p2-frame"):
            if session.facts.verdict("process", left, right) is None:
                establish_fact(session, "process", left, right, "different")
    recompute(session, "processes")
    return session


@pytest.fixture
def merge_session(pilot_one, pilot_two, product_fact_records):
    return build_merge_session(pilot_one, pilot_two, product_fact_records)


def load_annotations():
    records = json.loads((FIXTURES / "merge_annotations.json").read_text(encoding="utf-8"))
    return [
        Annotation(
            process_id=record["process"],
            source=record.get("source"),
            skipped_but_important=record.get("skipped_but_important", False),
            purpose=record.get("purpose", ""),
            exclude=record.get("exclude", False),
            note=record.get("note", ""),
        )
        for record in records
    ]


@pytest.fixture
def merge_annotations():
    return load_annotations()
