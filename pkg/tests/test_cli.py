"""End-to-end command-line interface tests: reports, exit codes, determinism."""

import json

import pytest

from supcbi.cli import main

ST2 = {
    "A_m3a_per_sa_per_h": 1.16e-2,
    "B": 2.04e-2,
    "D": 0.7,
    "alpha": 0.456,
    "b_s_per_m3": 1.76e-2,
    "beta": 2.04,
    "eta_per_h": 6.76e-2 / 0.7,
    "xmin_m3s": 0.06,
}


@pytest.fixture
def params_file(tmp_path):
    path = tmp_path / "st2.json"
    path.write_text(json.dumps(ST2))
    return str(path)


@pytest.fixture
def toy_csv(tmp_path):
    rows = ["timestamp,discharge_m3s"]
    rows += [f"2020-01-{1 + h // 24:02d}T{h % 24:02d}:00:00,{1.0 + (h * 7) % 5}"
             for h in range(400)]
    path = tmp_path / "toy.csv"
    path.write_text("\n".join(rows) + "\n")
    return str(path)


class TestStats:
    def test_basic_report(self, tmp_path, toy_csv):
        out = tmp_path / "out"
        rc = main(["stats", "--input", toy_csv, "--max-lag-h", "10",
                   "--out-dir", str(out)])
        assert rc == 0
        report = json.loads((out / "stats.json").read_text())
        assert report["n_gaps"] == 0
        assert report["stats"]["ave_m3s"] > 0
        lines = (out / "acf.csv").read_text().splitlines()
        assert lines[0] == "lag_h,correlation"
        assert len(lines) == 12  # header + lags 0..10

    def test_gap_counted(self, tmp_path):
        csv_path = tmp_path / "gap.csv"
        rows = ["timestamp,discharge_m3s"]
        for h in range(30):
            val = "" if h == 7 else f"{1.0 + h % 3}"
            rows.append(f"2020-01-01T{h % 24:02d}:00:00,{val}")
        csv_path.write_text("\n".join(rows) + "\n")
        out = tmp_path / "out"
        rc = main(["stats", "--input", str(csv_path), "--max-lag-h", "5",
                   "--out-dir", str(out)])
        assert rc == 0
        assert json.loads((out / "stats.json").read_text())["n_gaps"] == 1

    def test_malformed_timestamp_exit_code(self, tmp_path):
        csv_path = tmp_path / "bad.csv"
        csv_path.write_text("timestamp,discharge_m3s\nnope,1.0\nnope,2.0\n")
        assert main(["stats", "--input", str(csv_path), "--out-dir",
                     str(tmp_path)]) == 2


class TestMoments:
    def test_station_2_values(self, tmp_path, params_file):
        out = tmp_path / "out"
        rc = main(["moments", "--params", params_file, "--max-lag-h", "5",
                   "--out-dir", str(out)])
        assert rc == 0
        st = json.loads((out / "moments.json").read_text())["stats"]
        assert st["ave_m3s"] == pytest.approx(2.485, rel=0.005)
        assert st["std_m3s"] == pytest.approx(7.310, rel=0.005)
        assert st["skew"] == pytest.approx(9.790, rel=0.005)
        assert st["kurt_excess"] == pytest.approx(166.3, rel=0.005)

    def test_zero_A(self, tmp_path):
        params = dict(ST2, A_m3a_per_sa_per_h=0.0)
        path = tmp_path / "p.json"
        path.write_text(json.dumps(params))
        out = tmp_path / "out"
        assert main(["moments", "--params", str(path), "--max-lag-h", "2",
                     "--out-dir", str(out)]) == 0
        st = json.loads((out / "moments.json").read_text())["stats"]
        assert st["ave_m3s"] == pytest.approx(0.06)
        assert st["std_m3s"] == 0.0

    def test_inconsistent_B_rejected(self, tmp_path):
        params = dict(ST2, B=2 * ST2["B"])
        path = tmp_path / "p.json"
        path.write_text(json.dumps(params))
        assert main(["moments", "--params", str(path), "--out-dir",
                     str(tmp_path)]) == 1

    def test_bad_D_rejected(self, tmp_path):
        params = dict(ST2, D=0.0)
        path = tmp_path / "p.json"
        path.write_text(json.dumps(params))
        assert main(["moments", "--params", str(path), "--out-dir",
                     str(tmp_path)]) == 1

    def test_missing_file(self, tmp_path):
        assert main(["moments", "--params", str(tmp_path / "none.json"),
                     "--out-dir", str(tmp_path)]) == 2


class TestSimulate:
    def test_requires_seed(self, tmp_path, params_file):
        assert main(["simulate", "--params", params_file, "--years", "0.01",
                     "--out-dir", str(tmp_path)]) == 1

    def test_deterministic_reports(self, tmp_path, params_file):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        args = ["simulate", "--params", params_file, "--dt-h", "0.1",
                "--years", "0.05", "--seed", "5"]
        assert main(args + ["--out-dir", str(out1)]) == 0
        assert main(args + ["--out-dir", str(out2)]) == 0
        r1 = (out1 / "simulate.json").read_bytes()
        r2 = (out2 / "simulate.json").read_bytes()
        # embedded config differs only in out_dir; compare the rest
        d1 = json.loads(r1)
        d2 = json.loads(r2)
        d1["config"].pop("out_dir")
        d2["config"].pop("out_dir")
        assert d1 == d2

    def test_worker_invariance(self, tmp_path, params_file):
        outs = []
        for i, workers in enumerate(("1", "4")):
            out = tmp_path / f"w{i}"
            rc = main(["simulate", "--params", params_file, "--dt-h", "0.1",
                       "--years", "0.05", "--seed", "5", "--replicates", "4",
                       "--workers", workers, "--out-dir", str(out)])
            assert rc == 0
            d = json.loads((out / "simulate.json").read_text())
            outs.append((d["monte_carlo"], d["n_samples"]))
        assert outs[0] == outs[1]

    def test_dump_row_count(self, tmp_path, params_file):
        out = tmp_path / "out"
        rc = main(["simulate", "--params", params_file, "--dt-h", "0.1",
                   "--years", "0.01", "--seed", "1", "--dump-stride", "7",
                   "--out-dir", str(out)])
        assert rc == 0
        d = json.loads((out / "simulate.json").read_text())
        n_steps = round(0.01 * 8760 / 0.1)
        assert d["dump_rows"] == n_steps // 7
        lines = (out / "path_dump.csv").read_text().splitlines()
        assert len(lines) == d["dump_rows"] + 1

    def test_short_run_warns(self, tmp_path, params_file):
        out = tmp_path / "out"
        rc = main(["simulate", "--params", params_file, "--dt-h", "0.1",
                   "--years", "0.001", "--seed", "1", "--out-dir", str(out)])
        assert rc == 0
        d = json.loads((out / "simulate.json").read_text())
        assert d["warnings"]


class TestValidate:
    def test_station_2_passes(self, tmp_path, params_file):
        out = tmp_path / "out"
        assert main(["validate", "--params", params_file,
                     "--out-dir", str(out)]) == 0
        d = json.loads((out / "validate.json").read_text())
        assert all(c["passed"] for c in d["checks"])

    def test_refuses_bad_params(self, tmp_path):
        params = dict(ST2, D=-0.5)
        path = tmp_path / "p.json"
        path.write_text(json.dumps(params))
        assert main(["validate", "--params", str(path),
                     "--out-dir", str(tmp_path)]) == 1


class TestReduce:
    def test_empty_threshold_list(self, tmp_path, params_file):
        out = tmp_path / "out"
        rc = main(["reduce", "--params", params_file, "--thresholds", "",
                   "--seed", "1", "--out-dir", str(out)])
        assert rc == 0
        assert json.loads((out / "reduce.json").read_text())["report"] == []

    def test_nonpositive_threshold(self, tmp_path, params_file):
        assert main(["reduce", "--params", params_file, "--thresholds", "-5",
                     "--seed", "1", "--out-dir", str(tmp_path)]) == 1

    def test_small_run(self, tmp_path, params_file):
        out = tmp_path / "out"
        rc = main(["reduce", "--params", params_file, "--thresholds", "5",
                   "--dt-h", "0.1", "--years", "2", "--seed", "3",
                   "--out-dir", str(out)])
        assert rc == 0
        d = json.loads((out / "reduce.json").read_text())
        entry = d["report"][0]
        assert entry["threshold"] == 5.0
        assert "high" in entry["regimes"]
        lines = (out / "reduce.csv").read_text().splitlines()
        assert lines[0].startswith("threshold,regime,row")


class TestUsage:
    def test_unknown_command(self):
        assert main(["frobnicate"]) == 1

    def test_missing_required_flag(self):
        assert main(["moments"]) == 1
