"""CLI and scenario-orchestration tests (click runner; one real-HTTP run)."""

import json

import pytest
from click.testing import CliRunner

import deskssi.scenarios as scenarios
from deskssi.cli import main
from deskssi.scenarios import ScenarioConfig, run_login_scenario

SEEDED = ["--seed", "11", "--fixed-clock", "1577836800"]


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, *args):
    return runner.invoke(main, list(args), catch_exceptions=False)


class TestInit:
    def test_init_writes_ledger_and_genesis(self, runner, tmp_path):
        ledger = tmp_path / "ledger.jsonl"
        genesis = tmp_path / "genesis.jsonl"
        result = invoke(
            runner,
            *SEEDED,
            "init",
            "--trustees",
            "4",
            "--ledger",
            str(ledger),
            "--genesis",
            str(genesis),
        )
        assert result.exit_code == 0
        assert f"LEDGER {ledger} height 4" in result.output
        assert len(ledger.read_text().splitlines()) == 4
        assert len(genesis.read_text().splitlines()) == 4
        assert result.output.count("TRUSTEE trustee-") == 4

    def test_reinit_without_force_fails(self, runner, tmp_path):
        args = [
            "init",
            "--ledger",
            str(tmp_path / "l.jsonl"),
            "--genesis",
            str(tmp_path / "g.jsonl"),
        ]
        assert invoke(runner, *args).exit_code == 0
        again = invoke(runner, *args)
        assert again.exit_code == 1
        assert "already exists" in again.output

    def test_reinit_with_force_succeeds(self, runner, tmp_path):
        args = [
            "init",
            "--ledger",
            str(tmp_path / "l.jsonl"),
            "--genesis",
            str(tmp_path / "g.jsonl"),
        ]
        assert invoke(runner, *args).exit_code == 0
        assert invoke(runner, *args, "--force").exit_code == 0

    def test_zero_trustees_rejected(self, runner, tmp_path):
        result = invoke(
            runner, "init", "--trustees", "0", "--ledger", str(tmp_path / "l")
        )
        assert result.exit_code == 2


class TestVerifyChain:
    def _init(self, runner, tmp_path):
        ledger = tmp_path / "ledger.jsonl"
        invoke(
            runner,
            "init",
            "--ledger",
            str(ledger),
            "--genesis",
            str(tmp_path / "genesis.jsonl"),
        )
        return ledger

    def test_fresh_ledger_verifies(self, runner, tmp_path):
        ledger = self._init(runner, tmp_path)
        result = invoke(runner, "verify-chain", "--ledger", str(ledger))
        assert result.exit_code == 0
        assert "CHAIN OK" in result.output

    def test_corrupted_ledger_reports_seq_no(self, runner, tmp_path):
        ledger = self._init(runner, tmp_path)
        lines = ledger.read_text().splitlines()
        lines[2] = lines[2].replace('"alias":"trustee-2"', '"alias":"trustee-x"')
        ledger.write_text("\n".join(lines) + "\n")
        result = invoke(runner, "verify-chain", "--ledger", str(ledger))
        assert result.exit_code == 1
        assert "CHAIN BROKEN seq_no=3" in result.output


class TestLoginScenario:
    MILESTONES = [
        "STEP services OK",
        "STEP issuer-connection OK",
        "STEP credential-issued OK",
        "STEP login-started OK",
        "STEP login-connection OK",
        "STEP proof-request OK",
        "STEP consent-approved OK",
        "STEP redirect OK",
        "STEP token-validated OK",
        "STEP userinfo OK",
    ]

    def test_implicit_flow_transcript(self, runner):
        result = invoke(runner, *SEEDED, "scenario", "login")
        assert result.exit_code == 0
        for line in self.MILESTONES:
            assert line in result.output, f"missing {line!r}"
        assert "STEP token-received OK" in result.output
        assert "RESULT login_ok sub=did:desk:" in result.output

    def test_code_flow_hits_token_endpoint(self, runner):
        result = invoke(runner, *SEEDED, "scenario", "login", "--flow", "code")
        assert result.exit_code == 0
        assert "STEP token-endpoint OK" in result.output
        assert "RESULT login_ok" in result.output

    def test_deny_exits_3(self, runner):
        result = invoke(runner, *SEEDED, "scenario", "login", "--deny")
        assert result.exit_code == 3
        assert "STEP consent-denied OK" in result.output
        assert "STEP redirect-denied OK" in result.output
        assert "RESULT access_denied" in result.output

    def test_transcript_deterministic_across_runs(self, runner):
        first = invoke(runner, *SEEDED, "scenario", "login")
        second = invoke(runner, *SEEDED, "scenario", "login")
        assert first.output == second.output
        assert "sub=did:desk:" in first.output

    def test_different_seed_changes_dids(self, runner):
        first = invoke(runner, *SEEDED, "scenario", "login")
        other = invoke(
            runner, "--seed", "12", "--fixed-clock", "1577836800", "scenario", "login"
        )
        assert first.output != other.output

    def test_hold_serves_until_interrupt(self, monkeypatch, capsys):
        # In-process world: the only sleep is the hold loop, which we
        # interrupt as Ctrl-C would.
        def fake_sleep(_seconds):
            raise KeyboardInterrupt

        monkeypatch.setattr(scenarios.time, "sleep", fake_sleep)
        code = run_login_scenario(
            ScenarioConfig(seed=3, fixed_clock=1577836800), hold=True
        )
        out = capsys.readouterr().out
        assert code == 0
        assert "STEP credential-issued OK" in out
        assert "HOLD wallet agent API" in out
        assert "STEP login-started" not in out  # hold stops before login


class TestPkiScenario:
    def test_full_lifecycle(self, runner):
        result = invoke(runner, *SEEDED, "scenario", "pki")
        assert result.exit_code == 0
        assert "STEP verify-initial OK (verify=true)" in result.output
        assert (
            'STEP verify-revoked OK (verify=false, diagnostic="alias key mismatch")'
            in result.output
        )
        assert "STEP verify-reissued OK (verify=true)" in result.output
        assert "RESULT pki_ok" in result.output

    def test_deterministic(self, runner):
        first = invoke(runner, *SEEDED, "scenario", "pki")
        second = invoke(runner, *SEEDED, "scenario", "pki")
        assert first.output == second.output


class TestCapacity:
    def test_bulk_recording_figures(self, runner):
        result = invoke(runner, "capacity", "124500000", "90", "10000")
        assert result.exit_code == 0
        assert "12450" in result.output
        assert "3.46" in result.output
        assert "note:" not in result.output

    def test_renewal_note_when_load_exceeds_estimate(self, runner):
        result = invoke(runner, "capacity", "145000000", "90", "10000")
        assert result.exit_code == 0
        assert "18.65" in result.output
        assert "often-cited estimate of <17 tps" in result.output

    def test_zero_tps_usage_error(self, runner):
        result = invoke(runner, "capacity", "1000", "90", "0")
        assert result.exit_code == 2

    def test_negative_days_usage_error(self, runner):
        result = invoke(runner, "capacity", "1000", "--", "-1", "10")
        assert result.exit_code == 2


class TestBench:
    def test_small_bench_appends_and_verifies(self, runner):
        result = invoke(runner, *SEEDED, "bench", "25")
        assert result.exit_code == 0
        assert "BENCH appended 25 txns" in result.output
        assert "BENCH verify_chain ok" in result.output

    def test_zero_n_usage_error(self, runner):
        result = invoke(runner, "bench", "0")
        assert result.exit_code == 2


class TestConfigFile:
    def test_unknown_key_rejected(self, runner, tmp_path):
        config = tmp_path / "conf.json"
        config.write_text(json.dumps({"bogus": 1}))
        result = invoke(runner, "--config", str(config), "scenario", "pki")
        assert result.exit_code == 2
        assert "unknown config keys" in result.output

    def test_duplicate_ports_rejected(self, runner, tmp_path):
        config = tmp_path / "conf.json"
        config.write_text(json.dumps({"issuer_port": 8100, "holder_port": 8100}))
        result = invoke(runner, "--config", str(config), "scenario", "login")
        assert result.exit_code == 2
        assert "distinct" in result.output

    def test_config_supplies_seed_and_ledger(self, runner, tmp_path):
        ledger = tmp_path / "scenario-ledger.jsonl"
        config = tmp_path / "conf.json"
        config.write_text(
            json.dumps(
                {"seed": 11, "fixed_clock": 1577836800, "ledger_path": str(ledger)}
            )
        )
        result = invoke(runner, "--config", str(config), "scenario", "pki")
        assert result.exit_code == 0
        assert ledger.exists()
        verify = invoke(runner, "verify-chain", "--ledger", str(ledger))
        assert verify.exit_code == 0


class TestRealHttp:
    """One full run over actual localhost sockets (uvicorn)."""

    def test_login_over_http(self, runner, tmp_path):
        config = tmp_path / "conf.json"
        config.write_text(
            json.dumps(
                {
                    "issuer_port": 8150,
                    "holder_port": 8151,
                    "provider_port": 8152,
                    "rp_port": 8153,
                }
            )
        )
        result = invoke(
            runner,
            "--seed",
            "19",
            "--config",
            str(config),
            "scenario",
            "login",
            "--http",
            "--flow",
            "code",
        )
        assert result.exit_code == 0, result.output
        assert "STEP token-endpoint OK" in result.output
        assert "RESULT login_ok" in result.output
