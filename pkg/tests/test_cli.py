import json
import subprocess
import sys

import pytest

from gmn.cli import main
from gmn.correlations import correlation_tensor
from gmn.qstate import MeasurementBasis, build_named_state, product_state


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


class TestOptimize:
    def test_summary(self, tmp_path, capsys):
        code, out, _ = run(["optimize", "--n", "3", "--seed", "7", "--restarts", "8", "--out", str(tmp_path)], capsys)
        assert code == 0
        assert "S3 = 0.020350" in out
        data = json.loads((tmp_path / "optimize.json").read_text())
        assert data["type"] == "OptimizationResult"
        assert (tmp_path / "optimize_summary.txt").read_text() == out

    def test_two_parties_usage_error(self, tmp_path, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["optimize", "--n", "2", "--out", str(tmp_path)])
        assert exc.value.code == 2
        assert not (tmp_path / "optimize.json").exists()

    def test_byte_identical(self, tmp_path, capsys):
        a, b = tmp_path / "a", tmp_path / "b"
        for d in (a, b):
            run(["optimize", "--n", "3", "--restarts", "1", "--seed", "1", "--out", str(d)], capsys)
        assert (a / "optimize.json").read_bytes() == (b / "optimize.json").read_bytes()

    def test_general(self, tmp_path, capsys):
        code, out, _ = run(["optimize", "--general", "--restarts", "4", "--out", str(tmp_path)], capsys)
        assert code == 0
        assert "kind = general" in out

    def test_csv_format(self, tmp_path, capsys):
        run(["optimize", "--restarts", "2", "--format", "csv", "--out", str(tmp_path)], capsys)
        assert (tmp_path / "optimize.csv").read_text().startswith("key,value\n")


class TestCertify:
    def test_psi_star(self, tmp_path, capsys):
        code, out, _ = run(["certify", "--state", "PSI_STAR_3", "--out", str(tmp_path)], capsys)
        assert code == 0
        assert "genuine: true" in out
        data = json.loads((tmp_path / "certify.json").read_text())
        assert not data["local"]["feasible"] and not data["hybrid"]["feasible"]
        assert data["local"]["gap"] > 1e-7 and data["hybrid"]["gap"] > 1e-7
        assert data["selftest"]["passed"]

    def test_product_zero(self, tmp_path, capsys):
        f = tmp_path / "zero.json"
        f.write_text(json.dumps(product_state([[1, 0]] * 3).to_dict()))
        code, out, _ = run(["certify", "--state", str(f), "--out", str(tmp_path)], capsys)
        assert code == 0
        assert "genuine: false" in out
        assert json.loads((tmp_path / "certify.json").read_text())["local"]["feasible"]

    def test_corrupted_json(self, tmp_path, capsys):
        f = tmp_path / "bad.json"
        f.write_text('{"format": "gmn/v1", "type": ')
        code, _, err = run(["certify", "--state", str(f), "--out", str(tmp_path)], capsys)
        assert code == 2
        assert "malformed JSON" in err and "line 1" in err

    def test_missing_file(self, tmp_path, capsys):
        code, _, err = run(["certify", "--state", str(tmp_path / "nope.json"), "--out", str(tmp_path)], capsys)
        assert code == 2
        assert "cannot read" in err

    def test_input_untouched(self, tmp_path, capsys):
        f = tmp_path / "state.json"
        f.write_text(json.dumps(build_named_state("W3").to_dict()))
        before = f.read_bytes()
        run(["certify", "--state", str(f), "--out", str(tmp_path / "o")], capsys)
        assert f.read_bytes() == before

    def test_bad_angle_count(self, tmp_path, capsys):
        code, _, err = run(["certify", "--angles", "1,2", "--out", str(tmp_path)], capsys)
        assert code == 2


class TestSweep:
    def test_rows(self, tmp_path, capsys):
        code, _, _ = run(["sweep", "--max-eps", "0.12", "--step", "0.01", "--seed", "3", "--restarts", "2",
                          "--out", str(tmp_path)], capsys)
        assert code == 0
        lines = (tmp_path / "sweep.csv").read_text().splitlines()
        assert len(lines) == 14
        assert lines[0] == "epsilon,qubit_max,local_bound,p_eps,eps_pow_1_14"
        assert float(lines[1].split(",")[1]) == pytest.approx(0.020350, abs=1e-6)

    def test_rejects_half(self, tmp_path, capsys):
        code, _, err = run(["sweep", "--max-eps", "0.5", "--out", str(tmp_path)], capsys)
        assert code == 2
        assert "1/3" in err
        assert not (tmp_path / "sweep.csv").exists()

    def test_explicit_grid_json(self, tmp_path, capsys):
        code, _, _ = run(["sweep", "--grid", "0,0.02", "--restarts", "1", "--format", "json", "--out", str(tmp_path)], capsys)
        data = json.loads((tmp_path / "sweep.json").read_text())
        assert [r["epsilon"] for r in data["records"]] == [0.0, 0.02]

    def test_step_mismatch(self, tmp_path, capsys):
        code, _, _ = run(["sweep", "--max-eps", "0.1", "--step", "0.03", "--out", str(tmp_path)], capsys)
        assert code == 2


class TestTables:
    def test_three_party_split(self, tmp_path, capsys):
        code, out, _ = run(["tables", "--split", "1v2", "--out", str(tmp_path)], capsys)
        assert code == 0
        lines = (tmp_path / "tables.csv").read_text().splitlines()
        assert len(lines) == 6
        assert "PSI_STAR_3_delta" in lines[0]

    def test_four_party_split_json(self, tmp_path, capsys):
        run(["tables", "--split", "2v2", "--format", "json", "--out", str(tmp_path)], capsys)
        data = json.loads((tmp_path / "tables.json").read_text())
        assert [r["state"] for r in data["rows"]] == ["GHZ4", "W4", "PSI_STAR_4"]
        assert len(data["comparison"]) == 15

    def test_order_one_rejected(self, tmp_path, capsys):
        code, _, _ = run(["tables", "--order", "1", "--out", str(tmp_path)], capsys)
        assert code == 2


class TestSelftestCommand:
    def test_two_blocks(self, tmp_path, capsys):
        code, out, _ = run(["selftest", "--weights", "0.25,0.75", "--out", str(tmp_path)], capsys)
        assert code == 0
        assert "passed = true" in out
        data = json.loads((tmp_path / "selftest.json").read_text())
        assert data["junk_norm"] == pytest.approx(1.0, abs=1e-10)

    def test_ghz_fails(self, tmp_path, capsys):
        code, out, _ = run(["selftest", "--state", "GHZ3", "--out", str(tmp_path)], capsys)
        assert code == 1

    def test_bad_weights(self, tmp_path, capsys):
        code, _, _ = run(["selftest", "--weights", "0.3,0.3", "--out", str(tmp_path)], capsys)
        assert code == 2


class TestVerify:
    def tensor_file(self, tmp_path, suffix):
        t = correlation_tensor(build_named_state("PSI_STAR_3"), [MeasurementBasis(1.5707963267948966)] * 3)
        f = tmp_path / f"t{suffix}"
        f.write_text(t.to_csv() if suffix == ".csv" else json.dumps(t.to_dict()))
        return f

    @pytest.mark.parametrize("suffix", [".csv", ".json"])
    def test_passes(self, tmp_path, capsys, suffix):
        code, out, _ = run(["verify", "--tensor", str(self.tensor_file(tmp_path, suffix)), "--out", str(tmp_path)], capsys)
        assert code == 0
        assert "passed = true" in out

    def test_unnormalized(self, tmp_path, capsys):
        f = tmp_path / "t.json"
        d = correlation_tensor(build_named_state("W3"), [MeasurementBasis(1.0)] * 3).to_dict()
        d["probabilities"][0] += 0.1
        f.write_text(json.dumps(d))
        code, _, err = run(["verify", "--tensor", str(f), "--out", str(tmp_path)], capsys)
        assert code == 2
        assert "sum to 1" in err


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "gmn.cli", "tables", "--out", str(tmp_path)],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert res.stdout.startswith("GHZ3")
