import io
import json
import re
import shutil
import subprocess

import pytest

from sizedlang.cli import main
from sizedlang.syntax import parse_source

from conftest import CORPUS, NEGATIVE, POSITIVE

FIB = str(CORPUS / "positive" / "fib.ma")
SP_RUN = str(CORPUS / "positive" / "sp_run.ma")


def run_cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


class TestCheck:
    def test_positive_corpus(self):
        code, out, _ = run_cli("check", *map(str, POSITIVE))
        assert code == 0
        assert out.count(": ok") == len(POSITIVE)

    def test_bad_loop(self):
        code, _, err = run_cli("check", str(CORPUS / "negative" / "bad_loop.ma"))
        assert code == 1 and "[E004] measureNotDecreasing" in err

    def test_error_format(self):
        _, _, err = run_cli("check", str(CORPUS / "negative" / "force_own_depth.ma"))
        first, excerpt, caret = err.splitlines()[:3]
        assert re.match(r".*force_own_depth\.ma:\d+:\d+: \[E003\] boundViolation: ", first)
        assert caret.strip() and set(caret.strip()) == {"^"}

    def test_empty_file(self, tmp_path):
        p = tmp_path / "empty.ma"
        p.write_text("")
        assert run_cli("check", str(p))[0] == 0

    def test_parse_error_exit_two(self, tmp_path):
        p = tmp_path / "bad.ma"
        p.write_text("let x = (")
        code, _, err = run_cli("check", str(p))
        assert code == 2 and "[E202]" in err

    def test_missing_file(self, tmp_path):
        code, _, err = run_cli("check", str(tmp_path / "missing.ma"))
        assert code == 2 and "cannot read" in err

    def test_worst_exit_code_wins(self, tmp_path):
        p = tmp_path / "bad.ma"
        p.write_text("let x = (")
        code, _, _ = run_cli("check", FIB, str(NEGATIVE[0]), str(p))
        assert code == 2

    def test_no_prelude(self):
        code, _, err = run_cli("check", "--no-prelude", FIB)
        assert code == 1 and "E101" in err

    def test_json(self):
        code, out, _ = run_cli("check", "--json", FIB, str(CORPUS / "negative" / "bad_loop.ma"))
        data = json.loads(out)
        assert code == 1
        good, bad = data["files"]
        assert good["ok"] and good["errors"] == []
        assert bad["errors"][0]["code"] == "E004" and bad["errors"][0]["line"] > 0

    def test_print_core_reparses(self):
        code, out, _ = run_cli("check", "--print-core", SP_RUN)
        assert code == 0
        text = "\n".join(line for line in out.splitlines() if not line.endswith(": ok"))
        decls = parse_source(text)
        assert {d.name for d in decls} >= {"run", "idSP", "SP"}

    def test_explain_size(self):
        code, out, _ = run_cli("check", "--explain-size", FIB)
        assert code == 0
        assert "[fib] ltMeasure(k, i) = true under j < i, k < j" in out
        assert "by k < j" in out

    def test_explain_size_json(self):
        data = json.loads(run_cli("check", "--json", "--explain-size", FIB)[1])
        assert any("ltMeasure" in line for line in data["files"][0]["size_log"])


class TestRun:
    def test_fib(self):
        code, out, _ = run_cli("run", FIB, "--main", "fibMain", "--depth", "8", "--fuel", "1000000")
        assert code == 0 and out.split() == ["0", "1", "1", "2", "3", "5", "8", "13"]

    def test_default_main(self):
        assert run_cli("run", FIB, "--depth", "3")[1].split() == ["0", "1", "1"]

    def test_depth_zero(self):
        assert run_cli("run", FIB, "--depth", "0")[1].strip() == "<delayed>"

    @pytest.mark.parametrize("flag", [[], ["--keep-sizes"]])
    def test_run_identity_processor(self, flag):
        code, out, _ = run_cli("run", SP_RUN, "--main", "runIdOnNats", "--depth", "5", *flag)
        assert code == 0 and out.split() == ["0", "1", "2", "3", "4"]

    def test_list_result(self):
        out = run_cli("run", str(CORPUS / "positive" / "everyother.ma"))[1]
        assert out.strip() == "cons 1 (cons 3 nil)"

    def test_fuel_exhausted(self):
        code, _, err = run_cli("run", FIB, "--depth", "12", "--fuel", "20")
        assert code == 3 and "SOUNDNESS BUG" in err

    def test_fuel_env(self, monkeypatch):
        monkeypatch.setenv("SIZEDLANG_FUEL", "20")
        assert run_cli("run", FIB, "--depth", "12")[0] == 3

    def test_ill_typed(self):
        assert run_cli("run", str(CORPUS / "negative" / "bad_loop.ma"))[0] == 1

    def test_unknown_main(self):
        code, _, err = run_cli("run", FIB, "--main", "nothing")
        assert code == 2 and "nothing" in err


class TestOracle:
    def test_defaults(self):
        code, out, _ = run_cli("oracle")
        assert code == 0 and "counterexamples: 0" in out

    def test_single_element_universe(self):
        assert run_cli("oracle", "--universe", "1", "--trials", "16")[0] == 0

    def test_no_trials(self):
        code, out, _ = run_cli("oracle", "--trials", "0")
        assert code == 0 and "0 random operators" in out

    def test_bad_universe(self):
        assert run_cli("oracle", "--universe", "0")[0] == 2


class TestEntryPoint:
    def test_usage_error(self):
        assert run_cli("frobnicate")[0] == 2

    @pytest.mark.skipif(shutil.which("sizedlang") is None, reason="console script not installed")
    def test_console_script(self):
        proc = subprocess.run(["sizedlang", "run", FIB, "--depth", "4"], capture_output=True, text=True)
        assert proc.returncode == 0 and proc.stdout.split() == ["0", "1", "1", "2"]

    def test_module_entry(self):
        proc = subprocess.run(["python3", "-m", "sizedlang", "check", FIB], capture_output=True, text=True)
        assert proc.returncode == 0
