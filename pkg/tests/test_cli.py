"""End-to-end tests of the command-line front end (in-process)."""
import csv
import io
import json

import pytest

from hardcore_entropy import cli


def run(argv):
    return cli.main(argv)


def read_bundle(path, drop_out=True):
    with open(path, encoding="utf-8") as fh:
        bundle = json.load(fh)
    bundle.pop("timing_seconds", None)
    if drop_out:
        bundle["config"].pop("out", None)
    return bundle


# ----------------------------------------------------------------- bound

def test_bound_closed_single_lattice(tmp_path, capsys):
    out = tmp_path / "report.json"
    assert run(["bound", "--scheme", "closed", "--lattice", "square",
                "--starts", "8", "--out", str(out)]) == 0
    table = capsys.readouterr().out
    assert "square" in table and "0.3924" in table
    bundle = read_bundle(out)
    assert bundle["schema_version"] == 1
    assert bundle["command"] == "bound"
    (rep,) = bundle["reports"]
    assert rep["value_nats"] == pytest.approx(0.392421, abs=5e-4)
    assert rep["densities"] == pytest.approx((0.1702, 0.2370), abs=5e-3)


def test_bound_all_lattices_five_rows(capsys):
    assert run(["bound", "--scheme", "closed", "--lattice", "all",
                "--starts", "6"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 6  # header + five lattices
    for name in ("square", "honeycomb", "triangular", "kagome",
                 "square_moore"):
        assert any(line.startswith(name) for line in lines)


def test_bound_block_scheme(tmp_path, capsys):
    out = tmp_path / "block.json"
    assert run(["bound", "--scheme", "block", "--n", "2", "--starts", "8",
                "--out", str(out)]) == 0
    (rep,) = read_bundle(out)["reports"]
    assert rep["n"] == 2
    assert rep["value_nats"] == pytest.approx(0.39877, abs=2e-4)
    assert rep["optimizer"]["converged"] is True


def test_bound_block_n4_requires_long(capsys):
    assert run(["bound", "--scheme", "block", "--n", "4"]) == 2
    assert "--long" in capsys.readouterr().err


def test_bound_scheme_lattice_mismatch(capsys):
    assert run(["bound", "--scheme", "equalized", "--lattice",
                "triangular"]) == 2
    assert run(["bound", "--scheme", "three-hex", "--lattice",
                "square"]) == 2


def test_bound_equalized_densities_agree(tmp_path, capsys):
    out = tmp_path / "eq.json"
    assert run(["bound", "--scheme", "equalized", "--lattice", "square",
                "--starts", "8", "--out", str(out)]) == 0
    (rep,) = read_bundle(out)["reports"]
    d = rep["densities"]
    assert d[0] == pytest.approx(d[1], abs=1e-9)
    assert rep["value_nats"] == pytest.approx(0.3921, abs=5e-4)


# ---------------------------------------------------------------- reduce

def test_reduce_census_output(capsys):
    assert run(["reduce", "--n", "3"]) == 0
    text = capsys.readouterr().out
    assert "512 masks" in text
    assert "102 (101 free)" in text
    assert "47 (46 free)" in text


def test_reduce_cache_round_trip(tmp_path, capsys):
    cache = tmp_path / "cache"
    cold = tmp_path / "cold.json"
    warm = tmp_path / "warm.json"
    assert run(["reduce", "--n", "2", "--cache-dir", str(cache),
                "--out", str(cold)]) == 0
    files = sorted(p.name for p in cache.iterdir())
    assert files == ["blocks_n2_d4_v1.npz", "blocks_n2_weak_v1.npz"]
    assert run(["reduce", "--n", "2", "--cache-dir", str(cache),
                "--out", str(warm)]) == 0
    assert read_bundle(cold) == read_bundle(warm)


def test_reduce_corrupt_cache_rebuilds(tmp_path, capsys):
    cache = tmp_path / "cache"
    assert run(["reduce", "--n", "2", "--cache-dir", str(cache)]) == 0
    victim = cache / "blocks_n2_weak_v1.npz"
    victim.write_bytes(b"not a cache file")
    with pytest.warns(UserWarning, match="rebuilding"):
        assert run(["reduce", "--n", "2", "--cache-dir", str(cache)]) == 0
    assert "6 (5 free)" in capsys.readouterr().out


def test_cache_dir_from_environment(tmp_path, monkeypatch, capsys):
    cache = tmp_path / "envcache"
    monkeypatch.setenv("HC_CACHE_DIR", str(cache))
    assert run(["reduce", "--n", "1"]) == 0
    assert (cache / "blocks_n1_weak_v1.npz").exists()


def test_warm_cache_transparent_for_bound(tmp_path, capsys):
    cache = tmp_path / "cache"
    cold = tmp_path / "cold.json"
    warm = tmp_path / "warm.json"
    args = ["bound", "--scheme", "block", "--n", "2", "--starts", "8",
            "--cache-dir", str(cache)]
    assert run(args + ["--out", str(cold)]) == 0
    assert run(args + ["--out", str(warm)]) == 0
    assert read_bundle(cold)["reports"] == read_bundle(warm)["reports"]


# ---------------------------------------------------------------- verify

def test_verify_default_green(tmp_path, capsys):
    out = tmp_path / "verify.json"
    assert run(["verify", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "[FAIL]" not in text
    assert "density_interval_nonempty" in text
    assert "(0.21367, 0.25806)" in text
    bundle = read_bundle(out)
    assert all(rep["passed"] for rep in bundle["reports"])


def test_verify_href_can_empty_the_interval(capsys):
    # a reference entropy of 0.55 nats pushes the density lower limit
    # above 8/31, so the interval check must fail honestly
    assert run(["verify", "--href", "0.55"]) == 1
    text = capsys.readouterr().out
    assert "[FAIL] density_interval_nonempty" in text


def test_verify_href_out_of_range_is_config_error(capsys):
    assert run(["verify", "--href", "0.8"]) == 2
    assert run(["verify", "--href", "-0.1"]) == 2


# --------------------------------------------------------------- profile

def test_profile_three_generators(tmp_path, capsys):
    out = tmp_path / "profile.csv"
    assert run(["profile", "--n", "3", "--generators", "1,2,3",
                "--starts", "6", "--out", str(out)]) == 0
    with open(out, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 30  # 3 curves, k = 0..9
    for g in ("1", "2", "3"):
        curve = [float(r["probability"]) for r in rows
                 if r["generator"] == g]
        assert len(curve) == 10
        assert sum(curve) == pytest.approx(1.0, abs=1e-9)
    err = capsys.readouterr().err
    assert "variance order: 1 < 2 < 3" in err
    assert "between k=3 and k=4" in err


def test_profile_generator_larger_than_window(capsys):
    assert run(["profile", "--n", "2", "--generators", "3"]) == 2


def test_profile_bad_generator_list(capsys):
    assert run(["profile", "--n", "3", "--generators", "a,b"]) == 2


# ---------------------------------------------------------------- sample

def test_sample_square(tmp_path, capsys):
    out = tmp_path / "sample.json"
    assert run(["sample", "--lattice", "square", "--params", "0.1702",
                "--dims", "64x64", "--seed", "11", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "hard-core constraint satisfied" in text
    bundle = read_bundle(out)
    assert bundle["hard_core_valid"] is True
    metrics = {(r["stage"], r["metric"]) for r in bundle["reports"]}
    assert metrics == {("circle", "unforced"), ("circle", "density"),
                       ("dot", "unforced"), ("dot", "density")}


def test_sample_requires_params(capsys):
    assert run(["sample", "--lattice", "square"]) == 2
    assert "--params" in capsys.readouterr().err


def test_sample_rejects_bad_dims(capsys):
    assert run(["sample", "--lattice", "square", "--params", "0.2",
                "--dims", "64"]) == 2
    assert run(["sample", "--lattice", "triangular", "--params",
                "0.1,0.2", "--dims", "64x64"]) == 2  # needs %3 == 0


def test_sample_deterministic_per_seed(tmp_path):
    a, b, c = (tmp_path / name for name in ("a.json", "b.json", "c.json"))
    args = ["sample", "--lattice", "kagome", "--params", "0.19,0.30",
            "--dims", "32x32"]
    assert run(args + ["--seed", "5", "--out", str(a)]) == 0
    assert run(args + ["--seed", "5", "--out", str(b)]) == 0
    assert run(args + ["--seed", "6", "--out", str(c)]) == 0
    assert read_bundle(a) == read_bundle(b)
    assert read_bundle(a)["reports"] != read_bundle(c)["reports"]


# ----------------------------------------------------------------- strip

def test_strip_table(tmp_path):
    out = tmp_path / "strip.csv"
    assert run(["strip", "--max-width", "4", "--boundary", "both",
                "--out", str(out)]) == 0
    with open(out, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 8
    w2 = [r for r in rows if r["width"] == "2" and r["boundary"] == "free"]
    assert float(w2[0]["entropy"]) == pytest.approx(0.4406867935, abs=1e-9)


def test_strip_single_width(capsys):
    assert run(["strip", "--width", "12", "--boundary", "periodic"]) == 0
    out = capsys.readouterr().out.strip().splitlines()
    assert out[0] == "width,boundary,entropy"
    assert out[1].startswith("12,periodic,0.40749")


def test_strip_width_out_of_range(capsys):
    assert run(["strip", "--width", "15"]) == 2


# ----------------------------------------------------- config file merge

def test_config_file_sections_and_flag_priority(tmp_path, capsys):
    ini = tmp_path / "run.ini"
    ini.write_text("[common]\nseed = 3\nstarts = 7\n"
                   "[bound]\nscheme = equalized\nlattice = square\n",
                   encoding="utf-8")
    out = tmp_path / "r.json"
    assert run(["bound", "--config", str(ini), "--out", str(out)]) == 0
    cfg = read_bundle(out)["config"]
    assert cfg["seed"] == 3
    assert cfg["starts"] == 7
    assert cfg["scheme"] == "equalized"
    # explicit flags win over the file
    out2 = tmp_path / "r2.json"
    assert run(["bound", "--config", str(ini), "--seed", "9",
                "--out", str(out2)]) == 0
    assert read_bundle(out2)["config"]["seed"] == 9


def test_config_file_unknown_key_rejected(tmp_path, capsys):
    ini = tmp_path / "bad.ini"
    ini.write_text("[common]\nsede = 3\n", encoding="utf-8")
    assert run(["bound", "--config", str(ini)]) == 2
    assert "sede" in capsys.readouterr().err


def test_config_file_unknown_section_rejected(tmp_path, capsys):
    ini = tmp_path / "bad.ini"
    ini.write_text("[bonud]\nseed = 3\n", encoding="utf-8")
    assert run(["bound", "--config", str(ini)]) == 2


def test_config_file_missing(tmp_path, capsys):
    assert run(["bound", "--config", str(tmp_path / "absent.ini")]) == 2


def test_config_file_other_command_section_ignored(tmp_path, capsys):
    ini = tmp_path / "run.ini"
    ini.write_text("[strip]\nmax-width = 3\n[sample]\ndims = 32x32\n",
                   encoding="utf-8")
    assert run(["strip", "--config", str(ini)]) == 0
    rows = capsys.readouterr().out.strip().splitlines()
    assert len(rows) == 4  # header + widths 1..3


# ------------------------------------------------------------ exit codes

def test_unknown_flag_exits_two(capsys):
    assert run(["bound", "--no-such-flag"]) == 2


def test_help_exits_zero(capsys):
    assert run(["--help"]) == 0


def test_bound_json_deterministic(tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    args = ["bound", "--scheme", "closed", "--lattice", "honeycomb",
            "--starts", "8"]
    assert run(args + ["--out", str(a)]) == 0
    assert run(args + ["--out", str(b)]) == 0
    assert read_bundle(a) == read_bundle(b)
