import pytest

from credfield.attacks import (
    Scenario,
    ScenarioId,
    ScenarioReport,
    expected_blocked,
    run_all,
    run_scenario,
)
from credfield.errors import HarnessMisconfigured


BLOCKED_SCENARIOS = [
    ScenarioId.SPOOFED_URL_MITM,
    ScenarioId.OFFLINE_BRUTE_FORCE,
    ScenarioId.FUTURE_CLOCK,
    ScenarioId.KEYLOGGER_OTHER_DEVICE,
    ScenarioId.HARVEST_AND_FORGE,
    ScenarioId.STOLEN_SERVER_STORE,
    ScenarioId.REPLAY_CREDENTIALS,
]


@pytest.mark.parametrize("scenario_id", BLOCKED_SCENARIOS, ids=lambda s: s.value)
def test_scenario_blocked(scenario_id):
    report = run_scenario(Scenario(scenario_id, {"replays": 100}))
    assert report.blocked, report.notes
    assert report.successes_by_adversary == 0
    assert report.attempts > 0


def test_spoofed_url_reports_unknown_password():
    report = run_scenario(Scenario(ScenarioId.SPOOFED_URL_MITM, {"attempts": 3}))
    assert "UnknownPassword" in report.notes


def test_offline_brute_force_identifies_but_cannot_login():
    report = run_scenario(Scenario(ScenarioId.OFFLINE_BRUTE_FORCE, {"dictionary_decoys": 10}))
    assert "identified the password" in report.notes
    assert "StepUpRequired" in report.notes
    assert report.blocked


def test_keylogger_never_silent_accept():
    report = run_scenario(Scenario(ScenarioId.KEYLOGGER_OTHER_DEVICE, {"attempts": 4}))
    assert "StepUpRequired" in report.notes


def test_enrolment_substitution_integrity_off_succeeds():
    report = run_scenario(
        Scenario(ScenarioId.ENROLMENT_SUBSTITUTION, {"transport_integrity": False})
    )
    assert not report.blocked
    assert report.successes_by_adversary > 0
    assert not expected_blocked(report)


def test_enrolment_substitution_integrity_on_blocked():
    report = run_scenario(
        Scenario(ScenarioId.ENROLMENT_SUBSTITUTION, {"transport_integrity": True})
    )
    assert report.blocked
    assert expected_blocked(report)


def test_run_all_covers_every_scenario():
    reports = run_all({ScenarioId.REPLAY_CREDENTIALS: {"replays": 50}})
    seen = [r.id for r in reports]
    for scenario_id in ScenarioId:
        assert scenario_id in seen
    # substitution appears twice: once per channel mode
    assert seen.count(ScenarioId.ENROLMENT_SUBSTITUTION) == 2
    for report in reports:
        assert report.blocked == expected_blocked(report), report.to_json()


def test_report_invariant_enforced():
    with pytest.raises(HarnessMisconfigured):
        ScenarioReport(ScenarioId.REPLAY_CREDENTIALS, 5, 1, True, "inconsistent")


def test_report_json_shape():
    report = run_scenario(Scenario(ScenarioId.REPLAY_CREDENTIALS, {"replays": 5}))
    obj = report.to_json()
    assert set(obj) == {"scenario", "attempts", "successes_by_adversary", "blocked", "notes"}
    assert obj["scenario"] == "ReplayCredentials"
