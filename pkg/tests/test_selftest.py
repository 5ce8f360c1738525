import pytest

from lpp_lab import cli, engine
from lpp_lab.identities import (all_pass, check_exit_shift, check_geodesics, check_interchange,
                                check_lindley_dp, closed_form_suite)
from lpp_lab.selftest import run_selftest


def test_selftest_passes_and_is_byte_stable(capsys):
    assert cli.main(["selftest"]) == 0
    first = capsys.readouterr().out
    assert cli.main(["selftest"]) == 0
    assert capsys.readouterr().out == first
    assert "FAIL " not in first and first.rstrip().endswith("checks")


@pytest.mark.parametrize("mutation", [
    {"rightmost": False, "upmost": True},
    {"rightmost": True, "upmost": True},
    {"rightmost": False, "upmost": False},
])
def test_tie_rule_mutation_is_caught(monkeypatch, mutation):
    monkeypatch.setattr(engine, "TIE_RULES", mutation)
    results = check_geodesics(2024, 300)
    bad = [c.name for c in results if not c.ok]
    assert "geodesic-ordering" in bad


def test_mutated_selftest_names_the_invariant(monkeypatch):
    monkeypatch.setattr(engine, "TIE_RULES", {"rightmost": False, "upmost": True})
    ok, _, text = run_selftest(instances=200)
    assert not ok
    assert "geodesic-ordering" in text.splitlines()[-1]


def test_individual_suites():
    for fn in (check_exit_shift, check_lindley_dp, check_interchange):
        assert all(c.ok for c in fn(5, 100))


def test_closed_forms_and_stated_domain_counterexample():
    res = {c.name: c for c in closed_form_suite(3, grid=400, draws=2000)}
    assert all_pass(list(res.values()))
    # the remainder bound does not hold on the whole stated domain
    info = res["taylor-remainder-stated-domain"]
    assert not info.gating and info.failures > 0
