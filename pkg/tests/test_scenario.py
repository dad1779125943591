import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from factories import MINIMAL, dumps, malformed_corpus, minimal, random_scenario
from qcsync.errors import Location, ParseError, ScenarioError, ValidationError
from qcsync.scenario import emit_scenario, load_scenario, parse_scenario


def test_minimal_scenario_gets_defaults():
    s = parse_scenario(dumps(MINIMAL))
    assert s.medium.n_p == Fraction(147, 100)
    assert s.medium.c_vacuum == 299_792_458
    link = s.links[0]
    assert (link.quantum_length, link.classical_length) == (2400 * 10**6, 1600 * 10**6)
    assert link.delays == ()
    assert s.targets == {} and s.jitter == {} and s.pool is None
    assert s.gate_tolerance == 0
    assert len(s.schedule) == 1


def test_units_convert_to_base():
    doc = minimal(
        targets=[{"node": "alice", "lead": {"value": 3, "unit": "ns"}}],
        gate_tolerance={"value": 2, "unit": "us"},
    )
    doc["links"][0]["delays"] = [{"id": "s", "duration": {"value": 7, "unit": "us"}}]
    doc["links"][0]["quantum_length"] = {"value": 5, "unit": "mm"}
    s = parse_scenario(dumps(doc))
    assert s.targets == {"alice": 3000}
    assert s.gate_tolerance == 2 * 10**6
    assert s.links[0].delays[0].duration == 7 * 10**6
    assert s.links[0].quantum_length == 5000


def test_refraction_bound_is_cited_with_location():
    text = dumps(minimal(medium={"n_p": 1.6}))
    with pytest.raises(ValidationError) as info:
        parse_scenario(text)
    (issue,) = info.value.issues
    assert issue.pointer == "/medium/n_p"
    assert "1 < n_p < 3/2" in issue.message
    line = next(i for i, l in enumerate(text.splitlines(), 1) if '"n_p"' in l)
    assert issue.location.line == line
    assert text.splitlines()[line - 1][issue.location.column - 1:].startswith("1.6")


def test_unknown_node_in_schedule_names_the_node():
    doc = minimal()
    doc["schedule"][0]["node"] = "mallory"
    with pytest.raises(ValidationError) as info:
        parse_scenario(dumps(doc))
    (issue,) = info.value.issues
    assert "mallory" in issue.message
    assert issue.pointer == "/schedule/0/node"


def test_unknown_key_points_at_key():
    text = '{\n  "version": "1",\n  "bogus": 1,\n  "medium": {"n_p": "1.4"},\n' \
           '  "links": [{"node": "a", "quantum_length": {"value": 1, "unit": "m"},' \
           ' "classical_length": {"value": 1, "unit": "m"}}],\n  "schedule": []\n}'
    with pytest.raises(ValidationError) as info:
        parse_scenario(text)
    (issue,) = info.value.issues
    assert issue.location == Location(3, 3)
    assert "bogus" in issue.message


def test_all_issues_are_reported():
    doc = minimal(version="9", medium={"n_p": 2})
    doc["links"][0]["quantum_length"]["unit"] = "ft"
    with pytest.raises(ValidationError) as info:
        parse_scenario(dumps(doc))
    pointers = {i.pointer for i in info.value.issues}
    assert {"/version", "/medium/n_p", "/links/0/quantum_length/unit"} <= pointers


def test_syntax_error_location():
    with pytest.raises(ParseError) as info:
        parse_scenario('{\n  "version": "1",\n  oops\n}')
    assert info.value.location == Location(3, 3)


def test_load_scenario_reports_bad_encoding(tmp_path):
    path = tmp_path / "s.json"
    path.write_bytes(b'{\n "x": "\xff"}')
    with pytest.raises(ParseError) as info:
        load_scenario(path)
    assert info.value.location.line == 2


def test_load_scenario_missing_file(tmp_path):
    with pytest.raises(OSError):
        load_scenario(tmp_path / "absent.json")


def test_shared_delay_ids_must_agree():
    doc = minimal()
    doc["links"].append({
        "node": "bob",
        "quantum_length": {"value": 1, "unit": "m"},
        "classical_length": {"value": 1, "unit": "m"},
        "delays": [{"id": "s", "duration": {"value": 2, "unit": "ns"}}],
    })
    doc["links"][0]["delays"] = [{"id": "s", "duration": {"value": 1, "unit": "ns"}}]
    with pytest.raises(ValidationError):
        parse_scenario(dumps(doc))


def test_round_trip_of_emitted_scenario():
    s = parse_scenario(dumps(MINIMAL))
    assert parse_scenario(emit_scenario(s)) == s


def test_emission_is_deterministic():
    s = random_scenario(random.Random(5))
    assert emit_scenario(s) == emit_scenario(s)


@pytest.mark.parametrize("seed", range(25))
def test_random_round_trip(seed):
    s = random_scenario(random.Random(seed))
    assert parse_scenario(emit_scenario(s)) == s


@pytest.mark.parametrize("index, text", list(enumerate(malformed_corpus())))
def test_malformed_corpus_gives_located_errors(index, text):
    with pytest.raises(ScenarioError) as info:
        parse_scenario(text)
    assert info.value.issues
    for issue in info.value.issues:
        assert issue.location.line >= 1 and issue.location.column >= 1


@settings(max_examples=300)
@given(st.text(max_size=200))
def test_arbitrary_text_never_crashes(text):
    try:
        parse_scenario(text)
    except ScenarioError as exc:
        assert exc.issues


json_values = st.recursive(
    st.none() | st.booleans() | st.integers() | st.floats(allow_nan=False) | st.text(max_size=5),
    lambda inner: st.lists(inner, max_size=3) | st.dictionaries(st.text(max_size=5), inner, max_size=3),
    max_leaves=10,
)


@settings(max_examples=300)
@given(st.dictionaries(
    st.sampled_from(["version", "medium", "links", "schedule", "targets", "pool",
                     "jitter", "gate_tolerance", "other"]),
    json_values,
))
def test_structurally_wrong_documents_never_crash(doc):
    merged = dict(MINIMAL)
    merged.update(doc)
    try:
        parse_scenario(json.dumps(merged))
    except ScenarioError as exc:
        assert exc.issues
