import json
import pathlib

import pytest

from fiberlab import __version__
from fiberlab.tolerances import TOLERANCES
from fiberlab.verifysuite import (
    REGISTRY,
    InvalidOverride,
    Report,
    UnknownScenario,
    list_scenarios,
    resolve_parameters,
    run_scenario,
)

CLAIMS = (pathlib.Path(__file__).resolve().parents[1] / "docs" / "claims.md").read_text()
NAMES = ["real-theorem", "complex-theorem", "example-splitting", "example-euler-constant",
         "gurjar-fibers", "restriction-remarks"]


@pytest.fixture(scope="module")
def reports():
    return {name: (run_scenario(name), run_scenario(name)) for name in NAMES}


def test_registry_listing():
    listing = list_scenarios()
    assert [s["name"] for s in listing] == NAMES
    assert all(s["claims"] and s["description"] for s in listing)
    assert json.loads(json.dumps(listing)) == listing
    assert list_scenarios() == listing


def test_every_claim_is_indexed():
    for sc in REGISTRY.values():
        for check in sc.checks:
            assert check.claim in CLAIMS, check.id


@pytest.mark.parametrize("name", NAMES)
def test_scenarios_pass(reports, name):
    rep = reports[name][0]
    bad = {c.id: c.metrics for c in rep.checks if c.status != "pass"}
    assert rep.overall == "pass", bad
    assert rep.exit_code == 0


@pytest.mark.parametrize("name", NAMES)
def test_reports_are_deterministic(reports, name):
    a, b = reports[name]
    assert a.to_json(include_elapsed=False) == b.to_json(include_elapsed=False)


def test_report_schema(reports):
    doc = json.loads(reports["real-theorem"][0].to_json())
    assert set(doc) == {"scenario", "checks", "overall", "version", "parameters", "tolerances"}
    assert doc["version"] == __version__ and doc["tolerances"] == TOLERANCES
    for c in doc["checks"]:
        assert set(c) == {"id", "claim", "status", "metrics", "elapsed"}
        assert c["status"] in ("pass", "fail", "inconclusive")


def test_single_value_override():
    rep = run_scenario("example-splitting", {"t_values": [1]})
    counts = next(c for c in rep.checks if c.id == "splitting-counts")
    assert counts.status == "pass" and counts.metrics["component_counts"] == [2]
    assert rep.parameters["t_values"] == [1.0]


def test_unknown_scenario_and_bad_overrides():
    with pytest.raises(UnknownScenario):
        run_scenario("nope")
    with pytest.raises(InvalidOverride):
        resolve_parameters("real-theorem", {"nope": 1})
    with pytest.raises(InvalidOverride):
        resolve_parameters("real-theorem", {"n_points": "many"})
    with pytest.raises(InvalidOverride):
        resolve_parameters("real-theorem", {"n_points": 0})
    with pytest.raises(InvalidOverride):
        resolve_parameters("example-splitting", {"box": [1, 0, 0, 1]})
    with pytest.raises(InvalidOverride):
        resolve_parameters("real-theorem", {"b": True})


def test_exit_codes_follow_overall_status():
    for overall, code in (("pass", 0), ("fail", 2), ("inconclusive", 3)):
        assert Report("x", [], overall, __version__, {}).exit_code == code


def test_failing_check_fails_the_report():
    # an override that makes the scan box miss the curve's structure yields wrong counts
    rep = run_scenario("example-euler-constant", {"box": [100.0, 101.0, 100.0, 101.0], "resolution": 64})
    assert rep.overall == "fail" and rep.exit_code == 2
