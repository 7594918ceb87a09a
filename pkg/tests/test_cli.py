"""Command-line interface: exit codes, output formats, REPL equivalence."""

import io
import json

import pytest

from mlnrca.cli import main

PRINTER = "src/mlnrca/fixtures/printer.model"
PRINTER_OBS = "src/mlnrca/fixtures/printer.obs"
SVN = "src/mlnrca/fixtures/svn.model"
SVN1 = "src/mlnrca/fixtures/svn-step1.obs"


@pytest.fixture()
def cyclic_model(tmp_path):
    path = tmp_path / "cyclic.model"
    path.write_text("component A\ncomponent B\ndependsSpecific A B\ndependsSpecific B A\n")
    return str(path)


class TestCheck:
    def test_clean_model(self, capsys):
        assert main(["check", PRINTER]) == 0
        out = capsys.readouterr().out
        assert "ok:" in out and "9 components" in out

    def test_cyclic_model(self, capsys, cyclic_model):
        assert main(["check", cyclic_model]) == 1
        assert "cycle" in capsys.readouterr().out

    def test_syntax_errors_exit_1(self, capsys, tmp_path):
        path = tmp_path / "broken.model"
        path.write_text("component A\nnonsense B\n")
        assert main(["check", str(path)]) == 1
        assert "nonsense" in capsys.readouterr().err

    def test_missing_file(self, capsys):
        assert main(["check", "no/such/file.model"]) == 1


class TestDiagnose:
    def test_printer_scenario(self, capsys):
        assert main(["diagnose", PRINTER, PRINTER_OBS]) == 0
        out = capsys.readouterr().out
        assert "cas.uni-ma: SystematicTryingOutOfPasswords" in out

    def test_no_observations_baseline(self, capsys):
        assert main(["diagnose", PRINTER]) == 0
        assert "all components available" in capsys.readouterr().out

    def test_structured_output_is_byte_stable(self, capsys):
        assert main(["diagnose", "--output", "structured", PRINTER, PRINTER_OBS]) == 0
        first = capsys.readouterr().out
        assert main(["diagnose", "--output", "structured", PRINTER, PRINTER_OBS]) == 0
        second = capsys.readouterr().out
        assert first == second
        doc = json.loads(first)
        assert doc["causes"] == [{"component": "cas.uni-ma",
                                  "risk": "SystematicTryingOutOfPasswords"}]

    def test_contradictory_observations_exit_2(self, capsys, tmp_path):
        obs = tmp_path / "bad.obs"
        obs.write_text("observe available ScanService\nobserve unavailable ScanService\n")
        assert main(["diagnose", PRINTER, str(obs)]) == 2
        assert "contradiction" in capsys.readouterr().err

    def test_model_contradiction_exit_2(self, capsys, tmp_path):
        obs = tmp_path / "impossible.obs"
        obs.write_text(
            "observe unavailable Service_Subversion\n"
            "observe available VM_Subversion\n"
            "observe available NetworkInterface_BladeServer\n")
        assert main(["diagnose", SVN, str(obs)]) == 2

    def test_brute_force_verify(self, capsys):
        assert main(["diagnose", "--brute-force-verify", SVN, SVN1]) == 0
        assert "oracle agreement" in capsys.readouterr().out

    def test_k_alternatives(self, capsys):
        assert main(["diagnose", "-k", "2", SVN, SVN1]) == 0
        out = capsys.readouterr().out
        assert "ranked explanations:" in out

    def test_seeded_tie_break_mode(self, capsys):
        assert main(["diagnose", "--seed", "3", SVN, SVN1]) == 0
        assert "VM_Subversion" in capsys.readouterr().out


class TestDump:
    def test_dump_layout(self, capsys):
        assert main(["dump", SVN, SVN1]) == 0
        lines = capsys.readouterr().out.splitlines()
        atoms = [l for l in lines if l.startswith("A")]
        hard = [l for l in lines if l.startswith("H ")]
        soft = [l for l in lines if l.startswith("S")]
        assert atoms and hard and soft
        assert atoms[0].startswith("A0 ")
        assert all(" : " in l for l in hard + soft)
        assert len(atoms) + len(hard) + len(soft) == len(lines)

    def test_dump_is_deterministic(self, capsys):
        main(["dump", PRINTER, PRINTER_OBS])
        first = capsys.readouterr().out
        main(["dump", PRINTER, PRINTER_OBS])
        assert capsys.readouterr().out == first


class TestRepl:
    def _run(self, monkeypatch, capsys, script: str):
        monkeypatch.setattr("sys.stdin", io.StringIO(script))
        assert main(["repl", SVN, "--output", "structured"]) == 0
        return capsys.readouterr().out

    def test_repl_matches_one_shot(self, monkeypatch, capsys):
        out = self._run(monkeypatch, capsys,
                        "observe unavailable Service_Subversion\ndiagnose\nquit\n")
        repl_doc = json.loads(out[out.index("{"):])
        main(["diagnose", "--output", "structured", SVN, SVN1])
        oneshot_doc = json.loads(capsys.readouterr().out)
        assert repl_doc == oneshot_doc

    def test_repl_reset(self, monkeypatch, capsys):
        out = self._run(monkeypatch, capsys,
                        "observe unavailable Service_Subversion\nreset\ndiagnose\nquit\n")
        doc = json.loads(out[out.index("{"):])
        assert doc["causes"] == []

    def test_repl_reports_conflicts_inline(self, monkeypatch, capsys):
        out = self._run(monkeypatch, capsys,
                        "observe available VM_Subversion\n"
                        "observe unavailable VM_Subversion\nquit\n")
        assert "error:" in out
