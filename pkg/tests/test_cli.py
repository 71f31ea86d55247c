import json

import pytest

from grouplattice.cli import EXIT_CAP, EXIT_FAILED, EXIT_INPUT, EXIT_OK, InputError, RunConfig, main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def structured(capsys, *argv):
    code, out, _ = run_cli(capsys, *argv, "--format", "structured")
    assert code == EXIT_OK
    return json.loads(out)


@pytest.fixture
def poset_files(tmp_path):
    chain = tmp_path / "chain.poset"
    chain.write_text("e a\ne b\ne c\nr a b\nr b c\n")
    empty = tmp_path / "empty.poset"
    empty.write_text("")
    point = tmp_path / "point.poset"
    point.write_text("e p\n")
    broken = tmp_path / "broken.poset"
    broken.write_text("e a\nr a z\n")
    return {"chain": chain, "empty": empty, "point": point, "broken": broken}


def test_homology_a5(capsys):
    code, out, _ = run_cli(capsys, "homology", "--catalog", "A5", "--lattice", "L")
    assert code == EXIT_OK
    assert "H~[1] = Z^60" in out and "-60 (faces) / -60 (ranks)" in out and "mu(0,1) = -60" in out


def test_homology_psl27(capsys):
    rep = structured(capsys, "homology", "--catalog", "PSL27")
    assert {m: g["rank"] for m, g in rep["homology"].items()} == {"1": 48, "2": 48}


def test_homology_chain_file(capsys, poset_files):
    code, out, _ = run_cli(capsys, "homology", "--poset-file", str(poset_files["chain"]))
    assert code == EXIT_OK and "H~[*] = 0" in out


def test_decreasing_files(capsys, poset_files):
    assert structured(capsys, "decreasing", "--poset-file", str(poset_files["point"]))["decreasing"] is True
    assert structured(capsys, "decreasing", "--poset-file", str(poset_files["empty"]))["decreasing"] is False


def test_decreasing_a5(capsys):
    rep = structured(capsys, "decreasing", "--catalog", "A5")
    assert (rep["decreasing"], rep["s"], rep["hdim"], rep["dim"]) == (False, 1, 1, 2)
    assert rep["hdim_bound_ok"]


def test_bounds_z6(capsys):
    rep = structured(capsys, "bounds", "--catalog", "Z6", "--lattice", "L")
    assert all(r["upper"] == 0 for r in rep["rows"] if r["m"] >= 2)


def test_bounds_psl27_cosets(capsys):
    code, out, _ = run_cli(capsys, "bounds", "--catalog", "PSL27", "--lattice", "C", "--simply-connected")
    assert code == EXIT_OK
    rows = {line.split()[0]: line.split() for line in out.splitlines() if line.strip()[:1].isdigit()}
    assert rows["2"][4] == "14616" and rows["3"][4] == "11760"
    assert "H[4] = 0" in out


def test_bounds_s4_dominate_actual(capsys):
    rep = structured(capsys, "bounds", "--catalog", "S4", "--actual")
    for r in rep["rows"]:
        assert r["lower"] <= r["actual"] <= r["upper"]
        assert r["refined_lower"] <= r["actual"] <= r["refined_upper"]


def test_psl27_command(capsys):
    code, out, _ = run_cli(capsys, "psl27")
    assert code == EXIT_OK and out.rstrip().endswith("48 circles + 48 spheres verified")
    code, out, _ = run_cli(capsys, "psl27", "--skip-reduction")
    assert code == EXIT_OK and "48 circles + 48 spheres verified" in out


def test_psl27_wrong_class(capsys):
    code, out, _ = run_cli(capsys, "psl27", "--remove-class", "D8")
    assert code == EXIT_FAILED and "verification FAILED" in out


def test_reduce_and_lcs(capsys):
    code, out, _ = run_cli(capsys, "reduce", "--catalog", "PSL27", "--remove-class", "F21")
    assert code == EXIT_OK and "wedge homology equal: True" in out
    rep = structured(capsys, "lcs-check", "--catalog", "S3")
    assert rep["ok"] and rep["relative"] == {"1": {"rank": 18, "torsion": []}}


def test_default_reduction_only_for_reduce(capsys):
    assert structured(capsys, "homology", "--catalog", "A5")["size"] == 57
    code, out, _ = run_cli(capsys, "reduce", "--catalog", "A5")
    assert code == EXIT_OK and "57 -> 46" in out


@pytest.mark.parametrize("argv", [
    ["homology", "--catalog", "Q9"],
    ["homology", "--catalog", "S3", "--poset-file", "x.poset"],
    ["homology"],
    ["homology", "--catalog", "S3", "--max-order", "0"],
    ["bounds", "--catalog", "S3", "--fact", "one=2"],
])
def test_input_errors(capsys, argv):
    try:
        code = main(argv)
    except SystemExit as e:  # argparse rejects malformed flags itself
        code = e.code
    assert code == EXIT_INPUT
    assert capsys.readouterr().err


def test_bad_poset_file(capsys, poset_files):
    code, _, err = run_cli(capsys, "homology", "--poset-file", str(poset_files["broken"]))
    assert code == EXIT_INPUT and "error" in err


def test_caps(capsys):
    assert run_cli(capsys, "homology", "--catalog", "A5", "--max-order", "10")[0] == EXIT_CAP
    assert run_cli(capsys, "homology", "--catalog", "PSL27", "--lattice", "C")[0] == EXIT_CAP
    assert run_cli(capsys, "homology", "--catalog", "S4", "--lattice", "C", "--max-poset", "50")[0] == EXIT_CAP


def test_run_config_validation():
    with pytest.raises(InputError):
        RunConfig(command="homology", catalog="S3", max_order=0)
    with pytest.raises(InputError):
        RunConfig(command="homology", catalog="S3", group_file="g.txt")


def test_output_deterministic_and_cache_transparent(capsys, tmp_path):
    argv = ["bounds", "--catalog", "S4", "--lattice", "C", "--format", "structured"]
    plain = run_cli(capsys, *argv)[1]
    assert run_cli(capsys, *argv)[1] == plain
    cache = ["--cache-dir", str(tmp_path / "cache")]
    first = run_cli(capsys, *argv, *cache)[1]
    second = run_cli(capsys, *argv, *cache)[1]
    assert first == second == plain
    index = (tmp_path / "cache" / "index.txt").read_text()
    assert index.split()[1] == "S4"


def test_cache_hit_for_homology(capsys, tmp_path):
    cache = ["--cache-dir", str(tmp_path)]
    cold = run_cli(capsys, "homology", "--catalog", "A4", "--lattice", "S", *cache)[1]
    warm = run_cli(capsys, "homology", "--catalog", "A4", "--lattice", "S", *cache)[1]
    assert cold == warm
