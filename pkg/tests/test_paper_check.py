import json

import pytest

from sipqc.constants import DEFAULT_CONSTANTS
from sipqc.paper_check import ITEMS, format_table, perturbed, run_checks, summary, to_json


@pytest.fixture(scope="module")
def rows():
    return run_checks()


def test_every_item_present_and_passing(rows):
    assert {r.item for r in rows} == set(ITEMS) == set(range(1, 12))
    failed = [r.name for r in rows if not r.passed]
    assert failed == []


def test_each_item_reports_runtime(rows):
    for item in ITEMS:
        assert any(r.item == item and r.name.endswith("runtime (s)") for r in rows)


def test_json_is_serializable(rows):
    data = json.loads(json.dumps(to_json(rows)))
    assert data["summary"] == summary(rows)
    assert data["summary"]["failed"] == 0
    assert {"item", "name", "value", "target", "rule", "passed"} <= set(data["checks"][0])


def test_table_lists_every_row(rows):
    text = format_table(rows)
    lines = text.splitlines()
    assert len(lines) == len(rows) + 3
    assert "FAIL" not in text and lines[-1] == f"{len(rows)}/{len(rows)} checks passed"


def test_perturbed_hyperfine_breaks_dependent_rows():
    bad = run_checks(perturbed(A_hyperfine=0.9), items=[1, 2, 5])
    failed = {r.item for r in bad if not r.passed}
    assert failed == {1, 2, 5}
    # the ESR centre does not depend on A to first order
    assert next(r for r in bad if r.name.startswith("ESR centre")).passed


def test_perturbed_scales_named_fields_only():
    c = perturbed(A_hyperfine=2.0)
    assert c.A_hyperfine == 2 * DEFAULT_CONSTANTS.A_hyperfine
    assert c.g_e == DEFAULT_CONSTANTS.g_e
    assert perturbed() == DEFAULT_CONSTANTS
    with pytest.raises(ValueError, match="unknown"):
        perturbed(nothing=2.0)
