import json

import pytest

from littlewood_lab import main
from littlewood_lab.core.errors import EXIT_CONTRACT, EXIT_OK, EXIT_USAGE


def run(*argv):
    return main(list(argv) + ["--quiet"])


class TestUsage:
    def test_no_arguments_prints_help(self, capsys):
        assert main([]) == EXIT_USAGE
        assert "littlewood-lab" in capsys.readouterr().err

    def test_bare_group(self):
        assert main(["littlewood"]) == EXIT_USAGE

    def test_bad_flag_exits_64(self):
        with pytest.raises(SystemExit) as info:
            main(["littlewood", "scan", "--u", "1/3"])
        assert info.value.code == EXIT_USAGE


class TestLittlewood:
    def test_scan_writes_records(self, tmp_path):
        out = tmp_path / "records.csv"
        assert run("littlewood", "scan", "--u", "1/3", "--v", "1/3", "--N", "10", "--out", str(out)) == EXIT_OK
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "n,du,dv,product,is_record"
        assert [line.split(",")[0] for line in lines[1:]] == ["1", "3"]

    def test_scan_is_byte_identical_on_rerun(self, tmp_path):
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (first, second):
            run("littlewood", "scan", "--u", "cbrt(2)", "--v", "cbrt(4)", "--N", "20000", "--out", str(out))
        assert first.read_bytes() == second.read_bytes()

    def test_bad_expression_is_contract_error(self, tmp_path, capsys):
        manifest = tmp_path / "run.json"
        code = run("littlewood", "scan", "--u", "1/0", "--v", "1/3", "--N", "10", "--manifest", str(manifest))
        assert code == EXIT_CONTRACT
        assert "Error:" in capsys.readouterr().err
        assert json.loads(manifest.read_text(encoding="utf-8"))["derived"]["exit_code"] == EXIT_CONTRACT

    def test_one_dim_records_manifest(self, tmp_path):
        manifest = tmp_path / "run.json"
        run("littlewood", "scan", "--u", "sqrt(5)", "--v", "1/2", "--N", "1000", "--one-dim", "--manifest", str(manifest))
        derived = json.loads(manifest.read_text(encoding="utf-8"))["derived"]
        assert derived["exit_code"] == EXIT_OK
        assert "min_one_dim" in derived

    def test_roundtrip(self, tmp_path):
        out = tmp_path / "roundtrip.json"
        code = run("littlewood", "roundtrip", "--pairs", "2", "--extent", "2", "--step", "0.5", "--out", str(out))
        assert code == EXIT_OK
        summary = json.loads(out.read_text(encoding="utf-8"))["summary"]
        assert summary["pairs"] == 2
        assert summary["violations_a"] == summary["violations_b"] == 0


class TestOtherCommands:
    def test_orbit_trace(self, tmp_path):
        out, manifest = tmp_path / "trace.csv", tmp_path / "run.json"
        code = run("orbit", "trace", "--pair", "0.1", "0.2", "--rho", "0.1",
                   "--extent", "1", "--step", "0.5", "--out", str(out), "--manifest", str(manifest))
        assert code == EXIT_OK
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "time_1,time_2,delta,in_K_rho"
        assert len(lines) == 1 + 9
        derived = json.loads(manifest.read_text(encoding="utf-8"))["derived"]
        assert derived["expansion_rate"] == pytest.approx(2.718281828459045)

    def test_orbit_trace_lattice_file(self, tmp_path):
        lattice = tmp_path / "lattice.json"
        lattice.write_text(json.dumps({"k": 2, "columns": [["1/2", "0"], ["0", "2"]]}), encoding="utf-8")
        code = run("orbit", "trace", "--lattice", str(lattice), "--rho", "0.1", "--extent", "1", "--step", "0.5")
        assert code == EXIT_OK

    def test_orbit_trace_bad_lattice_entry(self, tmp_path):
        lattice = tmp_path / "lattice.json"
        lattice.write_text(json.dumps({"k": 2, "columns": [["half", "0"], ["0", "2"]]}), encoding="utf-8")
        code = run("orbit", "trace", "--lattice", str(lattice), "--rho", "0.1", "--extent", "1", "--step", "0.5")
        assert code == EXIT_CONTRACT

    def test_forms_scan_cubic(self, tmp_path):
        out = tmp_path / "forms.json"
        assert run("forms", "scan", "--cubic", "--N", "6", "--out", str(out)) == EXIT_OK
        assert json.loads(out.read_text(encoding="utf-8"))["min"] == pytest.approx(1 / 9)

    def test_forms_budget(self):
        assert run("forms", "scan", "--cubic", "--N", "5000") == EXIT_CONTRACT

    def test_shear_demo(self, tmp_path):
        out = tmp_path / "shear.json"
        assert run("shear", "demo", "--out", str(out)) == EXIT_OK
        data = json.loads(out.read_text(encoding="utf-8"))
        assert data["closed_form_vs_direct"] == 0.0
        assert data["shear_time"]["C"] <= 4.0

    def test_exceptional_scan(self, tmp_path):
        out = tmp_path / "exceptional.json"
        assert run("exceptional", "scan", "--entry-bound", "1", "--out", str(out)) == EXIT_OK
        assert json.loads(out.read_text(encoding="utf-8"))["hits"] == []

    def test_eig_lemma(self, tmp_path):
        out = tmp_path / "eig.json"
        assert run("eig", "lemma", "--trials", "50", "--out", str(out)) == EXIT_OK
        data = json.loads(out.read_text(encoding="utf-8"))
        assert data["passed"] == data["trials"] == 50

    def test_eig_lemma_gap_violation(self):
        assert run("eig", "lemma", "--lam", "1,0.5,0", "--trials", "5") == EXIT_CONTRACT

    def test_dim_estimate(self, tmp_path):
        out = tmp_path / "dim.csv"
        code = run("dim", "estimate", "--interval", "4097", "--eps-max", "0.125", "--count", "8", "--out", str(out))
        assert code == EXIT_OK
        assert out.read_text(encoding="utf-8").splitlines()[0] == "epsilon,count"

    def test_dim_scan_bad(self, tmp_path):
        survivors = tmp_path / "survivors.csv"
        code = run("dim", "scan-bad", "--rho", "0.05", "--T", "2", "--grid", "32", "--survivors", str(survivors))
        assert code == EXIT_OK
        assert survivors.read_text(encoding="utf-8").splitlines()[0] == "u,v"

    def test_entropy_formula(self, tmp_path):
        out = tmp_path / "entropy.json"
        assert run("entropy", "formula", "--haar", "--t", "1,0,-1", "--out", str(out)) == EXIT_OK
        assert json.loads(out.read_text(encoding="utf-8"))["entropy"] == pytest.approx(4.0)

    def test_entropy_formula_rejects_trace(self):
        assert run("entropy", "formula", "--haar", "--t", "1,0,0") == EXIT_CONTRACT

    def test_entropy_estimate(self, tmp_path):
        manifest = tmp_path / "run.json"
        code = run("entropy", "estimate", "--manifest", str(manifest))
        assert code == EXIT_OK
        rate = json.loads(manifest.read_text(encoding="utf-8"))["derived"]["rate"]
        assert rate == pytest.approx(0.6931471805599453, rel=0.15)

    def test_bad_config_key(self, tmp_path):
        config = tmp_path / "lab.yml"
        config.write_text("orbit:\n  speed: 2\n", encoding="utf-8")
        assert run("entropy", "formula", "--haar", "--t", "1,0,-1", "--config", str(config)) == EXIT_CONTRACT
