import pytest

from graphvar.config import RunConfig
from graphvar.verify import CHECKS, CheckResult, run_verification


def test_checks_registry_names_sorted_and_callable():
    assert sorted(CHECKS) == list(CHECKS)
    assert len(CHECKS) == 12


def test_single_check_report_shape():
    rep = run_verification(only="weight")
    assert rep.ok
    assert len(rep.checks) == 1
    c = rep.checks[0]
    assert c.name == "weight-classification"
    assert c.status == "pass"
    assert c.statement
    d = rep.to_dict()
    assert d["ok"] is True
    assert d["config"]["vertices"] == 64
    assert d["checks"][0]["runtime_s"] >= 0.0
    canon = rep.canonical_dict()
    assert "runtime_s" not in canon["checks"][0]


def test_unknown_filter_raises():
    with pytest.raises(ValueError, match="matches no check"):
        run_verification(only="zzz")


def test_statistical_check_is_deterministic():
    a = run_verification(only="jump-count")
    b = run_verification(only="jump-count")
    assert a.canonical_dict() == b.canonical_dict()
    assert a.checks[0].ok


def test_seed_changes_the_numbers():
    a = run_verification(RunConfig(seed=0), only="jump-count")
    b = run_verification(RunConfig(seed=123), only="jump-count")
    assert a.checks[0].lhs != b.checks[0].lhs
    assert b.checks[0].ok  # the bound holds at other seeds too


def test_refused_inputs_surface_as_skipped():
    # alpha <= 2 is a legal configuration but the variation ceiling refuses it
    rep = run_verification(RunConfig(alphas=(1.5,)), only="alpha-variation")
    c = rep.checks[0]
    assert c.status == "skipped"
    assert "alpha" in c.details["reason"]
    assert rep.ok  # skipped is not a failure


def test_check_result_ok_semantics():
    base = dict(statement="s", lhs=None, rhs=None, slack=None,
                stderr_budget=None, runtime_s=0.0, details={})
    assert CheckResult(name="x", status="pass", **base).ok
    assert CheckResult(name="x", status="pass-with-slack", **base).ok
    assert not CheckResult(name="x", status="fail", **base).ok
    assert not CheckResult(name="x", status="skipped", **base).ok


def test_adversarial_flag_recorded_and_fails():
    rep = run_verification(only="exchangeability", adversarial=True)
    assert rep.adversarial is True
    assert not rep.ok
    assert rep.checks[0].status == "fail"
