import json

import pytest

from strathardy import CSV_COLUMNS
from strathardy.cli import main


SMALL = {
    "trials": {"count": 3},
    "quadrature": {"points_per_axis": 8},
    "p": [2.0],
    "seed": 11,
}


def write_config(tmp_path, name="cfg.json", **over):
    cfg = json.loads(json.dumps(SMALL))
    for key, value in over.items():
        if isinstance(value, dict) and isinstance(cfg.get(key), dict):
            cfg[key].update(value)
        else:
            cfg[key] = value
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


class TestExitCodes:
    def test_hardy_passes(self, tmp_path, capsys):
        code, out, _ = run(["hardy", "--config", write_config(tmp_path)], capsys)
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0] == ",".join(CSV_COLUMNS)
        assert len(lines) == 1 + 3  # one row per trial

    def test_unknown_config_key_is_code_3(self, tmp_path, capsys):
        path = write_config(tmp_path, quadrture={"points_per_axis": 8})
        code, out, err = run(["hardy", "--config", path], capsys)
        assert code == 3
        assert "configuration error" in err and "quadrture" in err
        assert out == ""

    def test_bad_group_is_code_3(self, tmp_path, capsys):
        path = write_config(tmp_path, group="free:2")
        code, _, err = run(["hardy", "--config", path], capsys)
        assert code == 3 and "unknown group name" in err

    def test_malformed_json_is_code_3(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        code, _, err = run(["hardy", "--config", str(path)], capsys)
        assert code == 3 and "not valid JSON" in err

    def test_missing_file_is_code_3(self, capsys):
        code, _, err = run(["hardy", "--config", "/nonexistent/cfg.json"], capsys)
        assert code == 3 and "cannot read" in err

    def test_violated_contract_is_code_2(self, tmp_path, capsys):
        # sweeping eps upward reverses the required monotone decrease; the
        # default resolution keeps the error bars small enough to see it
        path = write_config(
            tmp_path,
            eps=[0.05, 0.5],
            cutoff_radius=1.0,
            quadrature={"points_per_axis": 16},
        )
        code, out, _ = run(["sharpness", "--config", path], capsys)
        assert code == 2
        assert out  # the report is still written for inspection


class TestCommands:
    def test_identities_rows(self, tmp_path, capsys):
        path = write_config(tmp_path, identity_points=50, identity_indices=[1])
        code, out, _ = run(["identities", "--config", path], capsys)
        assert code == 0
        rows = out.strip().split("\n")[1:]
        ids = [r.split(",")[0] for r in rows]
        assert len(ids) == 7
        assert all(i.startswith("identity:") for i in ids)

    def test_general_hardy(self, tmp_path, capsys):
        path = write_config(tmp_path, trials={"count": 2}, beta=[-0.5, -0.2])
        code, out, _ = run(["general-hardy", "--config", path], capsys)
        assert code == 0
        assert len(out.strip().split("\n")) == 1 + 4

    def test_remainder_rejects_small_p(self, tmp_path, capsys):
        path = write_config(tmp_path, p=[1.5])
        code, _, err = run(["remainder", "--config", path], capsys)
        assert code == 3 and "p >= 2" in err

    def test_sobolev(self, tmp_path, capsys):
        path = write_config(tmp_path, trials={"count": 2})
        code, out, _ = run(["sobolev", "--config", path], capsys)
        assert code == 0
        row = out.strip().split("\n")[1].split(",")
        assert float(row[2]) > 0

    def test_bft_fuzz(self, tmp_path, capsys):
        path = write_config(tmp_path, samples=20_000)
        code, out, _ = run(["bft-fuzz", "--config", path], capsys)
        assert code == 0
        row = out.strip().split("\n")[1].split(",")
        assert row[0] == "bft" and float(row[2]) == 0.0

    def test_sharpness_defaults_to_first_axis(self, tmp_path, capsys):
        path = write_config(tmp_path, eps=[0.4, 0.1])
        code, out, _ = run(["sharpness", "--config", path, "--format", "json"], capsys)
        assert code == 0
        doc = json.loads(out)
        assert doc["config"]["halfspace"] == {"preset": "x1-axis", "d": 0.0}
        labels = [r["extras"]["label"] for r in doc["rows"]]
        assert labels == ["verification", "verification"]

    def test_sharpness_honors_explicit_halfspace(self, tmp_path, capsys):
        path = write_config(
            tmp_path, eps=[0.3], halfspace={"preset": "t-axis", "d": 0.0}
        )
        code, out, _ = run(["sharpness", "--config", path, "--format", "json"], capsys)
        assert code == 0
        doc = json.loads(out)
        assert doc["config"]["halfspace"]["preset"] == "t-axis"
        assert doc["rows"][0]["extras"]["label"] == "probe"

    def test_luan_young_forces_t_axis(self, tmp_path, capsys):
        path = write_config(
            tmp_path, trials={"count": 2}, halfspace={"preset": "x1-axis", "d": 0.0}
        )
        code, out, _ = run(["luan-young", "--config", path, "--format", "json"], capsys)
        assert code == 0
        doc = json.loads(out)
        assert doc["config"]["halfspace"]["preset"] == "t-axis"
        assert all(r["nu"] == [0.0, 0.0, 1.0] for r in doc["rows"])


class TestOutput:
    def test_out_file_and_determinism(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["hardy", "--config", cfg, "--out", str(a)]) == 0
        assert main(["hardy", "--config", cfg, "--out", str(b)]) == 0
        capsys.readouterr()
        assert a.read_bytes() == b.read_bytes()

    def test_json_mirrors_csv(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        code, csv_text, _ = run(["hardy", "--config", cfg], capsys)
        code2, json_text, _ = run(["hardy", "--config", cfg, "--format", "json"], capsys)
        assert code == code2 == 0
        doc = json.loads(json_text)
        csv_rows = [line.split(",") for line in csv_text.strip().split("\n")[1:]]
        assert len(doc["rows"]) == len(csv_rows)
        for jrow, crow in zip(doc["rows"], csv_rows):
            assert jrow["inequality_id"] == crow[0]
            assert jrow["quotient_or_margin"] == float(crow[2])
            assert jrow["evaluations"] == int(crow[7])
            assert jrow["config_digest"] == crow[9]
        assert doc["config"]["command"] == "hardy"

    def test_seed_override_changes_rows(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        _, out1, _ = run(["hardy", "--config", cfg, "--seed", "1"], capsys)
        _, out2, _ = run(["hardy", "--config", cfg, "--seed", "2"], capsys)
        assert out1 != out2
        seed_col = out1.strip().split("\n")[1].split(",")[8]
        assert seed_col == "1"

    def test_digest_depends_on_command(self, tmp_path, capsys):
        cfg = write_config(tmp_path, trials={"count": 2})
        _, hardy_out, _ = run(["hardy", "--config", cfg], capsys)
        _, sobolev_out, _ = run(["sobolev", "--config", cfg], capsys)
        d1 = hardy_out.strip().split("\n")[1].split(",")[9]
        d2 = sobolev_out.strip().split("\n")[1].split(",")[9]
        assert d1 != d2
