import csv
import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rldfisher import fileio, models
from rldfisher.cli import main, parse_grid, parse_weight, UsageError
from rldfisher.families import ChannelFamilyPoint, StateFamilyPoint
from rldfisher.gadc import GadcParams, gadc_family
from rldfisher.modelspec import ModelSpec, SpecError, parse_model_spec

unit = st.floats(0.001, 0.999, allow_nan=False)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


# model specs


def test_parse_examples():
    s = parse_model_spec("builtin:gadc:gamma=0.5,N=0.2")
    assert (s.kind, s.name, s.params) == ("builtin", "gadc", {"gamma": 0.5, "N": 0.2})
    fam = s.build()
    assert isinstance(fam, ChannelFamilyPoint) and fam.theta == (0.5, 0.2)
    b = parse_model_spec("builtin:bernoulli:theta=0.3").build()
    assert isinstance(b, StateFamilyPoint) and np.allclose(b.rho, np.diag([0.3, 0.7]))


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("builtin:gadc:gamma=1.5,N=0.2", "open interval"),
        ("builtin:gadc:gamma=0.5", "missing parameter"),
        ("builtin:gadc:gamma=0.5,N=0.2,x=1", "unexpected parameter"),
        ("builtin:gadc:gamma=abc,N=0.2", "malformed number"),
        ("builtin:gadc:gamma=0.5,gamma=0.4,N=0.2", "duplicate"),
        ("builtin:nope:x=1", "unknown builtin"),
        ("weird:gadc:gamma=0.5", "unknown kind"),
        ("builtin:gadc", "kind:name"),
        ("builtin:diagonal:t1=0.6,t2=0.5", "sum"),
        ("builtin:diagonal:t1=0.1,t3=0.2", "without gaps"),
        ("file:choi-file:", "path"),
        ("builtin:bernoulli:theta=0.3,h=-1", "positive"),
    ],
)
def test_parse_errors(text, fragment):
    with pytest.raises(SpecError, match=fragment) as info:
        parse_model_spec(text)
    assert info.value.position is not None
    assert "position" in str(info.value)


@given(unit, unit, st.one_of(st.none(), st.floats(1e-8, 1e-3)))
def test_gadc_round_trip(g, n, h):
    spec = ModelSpec("builtin", "gadc", {"gamma": g, "N": n}, None, h)
    assert parse_model_spec(spec.render()) == spec


@given(st.lists(st.floats(0.001, 0.2), min_size=1, max_size=4))
def test_diagonal_round_trip(ts):
    spec = ModelSpec("builtin", "diagonal", {f"t{i + 1}": t for i, t in enumerate(ts)})
    assert parse_model_spec(spec.render()) == spec


def test_file_round_trip():
    spec = parse_model_spec("file:kraus-file:path=/tmp/ch.json")
    assert spec.path == "/tmp/ch.json"
    assert parse_model_spec(spec.render()) == spec


def test_diagonal_builtin_matches_trinomial():
    fam = parse_model_spec("builtin:diagonal:t1=0.2,t2=0.3").build()
    ref = models.trinomial_family(0.2, 0.3)
    assert np.allclose(fam.rho, ref.rho)
    for a, b in zip(fam.derivs, ref.derivs):
        assert np.allclose(a, b)


def test_finite_difference_builtin():
    fam = parse_model_spec("builtin:gadc:gamma=0.5,N=0.2,h=1e-5").build()
    exact = gadc_family(GadcParams(0.5, 0.2))
    for a, b in zip(fam.derivs, exact.derivs):
        assert np.max(np.abs(a - b)) <= 1e-8


# files


def test_matrix_round_trip(tmp_path, rng):
    m = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    fileio.write_matrix(tmp_path / "m.json", m)
    assert np.array_equal(fileio.read_matrix(tmp_path / "m.json"), m)


def test_family_round_trip(tmp_path, rng):
    fam = models.random_channel_family(rng, 2, 2, 2)
    fileio.write_family(tmp_path / "f.json", fam)
    back = fileio.read_family(tmp_path / "f.json")
    assert isinstance(back, ChannelFamilyPoint)
    assert np.array_equal(back.choi, fam.choi)
    state = models.random_state_family(rng, 3, 1)
    fileio.write_family(tmp_path / "s.json", state)
    assert isinstance(fileio.read_family(tmp_path / "s.json"), StateFamilyPoint)


def test_malformed_files(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(fileio.FormatError, match="line 1"):
        fileio.read_matrix(bad)
    bad.write_text(json.dumps({"dim": 3, "rows": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]}))
    with pytest.raises(fileio.FormatError, match="dim=3"):
        fileio.read_matrix(bad)
    bad.write_text(json.dumps({"rows": [[1, 0], [0, 1]]}))
    with pytest.raises(fileio.FormatError, match="pair"):
        fileio.read_matrix(bad)
    with pytest.raises(OSError, match="cannot read"):
        fileio.read_matrix(tmp_path / "missing.json")


# argument helpers


def test_parse_weight_and_grid(tmp_path):
    assert np.allclose(parse_weight("1,1;1,3", 2), [[1, 1], [1, 3]])
    assert np.allclose(parse_weight(None, 2), np.eye(2) / 2)
    fileio.write_matrix(tmp_path / "w.json", np.eye(2))
    assert np.allclose(parse_weight(str(tmp_path / "w.json"), 2, 0.5), np.eye(2) / 2)
    with pytest.raises(UsageError):
        parse_weight("1,1;1,3", 3)
    with pytest.raises(UsageError):
        parse_weight("a,b", 1)
    with pytest.raises(ValueError):
        parse_weight("1,2;2,1", 2)
    assert parse_grid("") == []
    assert parse_grid("0.1,0.2") == [0.1, 0.2]
    assert parse_grid("0:1:5") == [0.0, 0.25, 0.5, 0.75, 1.0]
    with pytest.raises(UsageError):
        parse_grid("0:1")


# commands


def test_value_gadc(capsys):
    code, out, _ = run(capsys, "value", "--model", "builtin:gadc:gamma=0.5,N=0.2", "--weight", "0.25,0.25;0.25,0.75")
    assert code == 0
    (row,) = rows(out)
    assert row["verdict"] == "ShotNoiseLimited"
    assert float(row["rld_value"]) == pytest.approx(4.625)
    assert float(row["crb_bound"]) == pytest.approx(1 / 4.625)


def test_value_json_with_sld_and_sdp(capsys):
    code, out, _ = run(
        capsys, "value", "--model", "builtin:gadc:gamma=0.5,N=0.2", "--sld", "--sdp", "--format", "json"
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["sdp_deviation"] <= 1e-5
    assert 0 < doc["sld_value"] <= doc["rld_value"]


def test_value_constant_family(tmp_path, capsys):
    path = tmp_path / "const.json"
    fileio.write_family(path, models.identity_channel_family())
    code, out, _ = run(capsys, "value", "--model", f"file:choi-file:path={path}")
    assert code == 0
    (row,) = rows(out)
    assert float(row["rld_value"]) == 0.0
    assert math.isinf(float(row["crb_bound"]))


def test_value_unitary_exit_two(tmp_path, capsys):
    path = tmp_path / "u.json"
    phi = 0.3
    u = np.diag([np.exp(-0.5j * phi), np.exp(0.5j * phi)])
    du = np.diag([-0.5j * np.exp(-0.5j * phi), 0.5j * np.exp(0.5j * phi)])
    fileio.write_kraus_family(path, [u], [[du]], (phi,))
    code, out, _ = run(capsys, "value", "--model", f"file:kraus-file:path={path}")
    assert code == 2
    (row,) = rows(out)
    assert row["verdict"] == "Inconclusive"
    assert float(row["crb_bound"]) == 0.0


def exit_code(argv):
    try:
        return main(argv)
    except SystemExit as exc:
        return exc.code


@pytest.mark.parametrize(
    "argv",
    [
        ["value", "--model", "builtin:gadc:gamma=1.5,N=0.2"],
        ["value", "--model", "builtin:gadc:gamma=0.5,N=0.2", "--n-uses", "0"],
        ["value", "--model", "file:choi-file:path=/nonexistent.json"],
        ["value", "--model", "builtin:bernoulli:theta=0.3", "--format", "svg"],
        ["sweep", "--model", "builtin:bernoulli:theta=0.3"],
        ["sweep", "--model", "builtin:gadc:gamma=0.5,N=0.2", "--sweep", "x"],
        ["verify", "--suite", "nope"],
        ["verify", "--suite", "chain-rule", "--count", "-1"],
        [],
    ],
)
def test_usage_errors_exit_one(capsys, argv):
    assert exit_code(argv) == 1
    _, err = capsys.readouterr()
    assert "error" in err


def test_sweep_rows_and_plot(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    code, _, _ = run(
        capsys, "sweep", "--model", "builtin:gadc:gamma=0.5,N=0.2", "--grid", "0.05:0.95:19",
        "--out", str(out), "--probe-grid", "21", "--format", "svg",
    )
    assert code == 0
    data = rows(out.read_text())
    assert len(data) == 19 and all(r["status"] == "ok" for r in data)
    assert (tmp_path / "sweep.svg").read_text().lstrip().startswith("<?xml")


def test_sweep_empty_grid_header_only(capsys):
    code, out, _ = run(capsys, "sweep", "--model", "builtin:gadc:gamma=0.5,N=0.2", "--grid", "")
    assert code == 0
    assert out.strip().split("\n") == ["gamma,n_noise,log10_rld_value,log10_sld_value,p_star,rld_value,sld_value,status"]


def test_sweep_pole_is_flagged(capsys):
    code, out, err = run(
        capsys, "sweep", "--model", "builtin:gadc:gamma=0.5,N=0.2", "--grid", "0.0,0.5", "--probe-grid", "11"
    )
    assert code == 0
    data = rows(out)
    assert data[0]["status"].startswith("error") and data[1]["status"] == "ok"
    assert "flagged" in err


def test_sweep_noise_axis(capsys):
    code, out, _ = run(
        capsys, "sweep", "--model", "builtin:gadc:gamma=0.5,N=0.2", "--sweep", "N", "--grid", "0.1,0.3",
        "--probe-grid", "11",
    )
    assert code == 0
    assert [float(r["n_noise"]) for r in rows(out)] == [0.1, 0.3]
    assert all(float(r["gamma"]) == 0.5 for r in rows(out))


def test_sweep_csv_byte_stable(capsys, monkeypatch):
    argv = ["sweep", "--model", "builtin:gadc:gamma=0.5,N=0.2", "--grid", "0.2:0.8:4", "--probe-grid", "21"]
    monkeypatch.setenv("QFI_THREADS", "1")
    _, a, _ = run(capsys, *argv)
    monkeypatch.setenv("QFI_THREADS", "4")
    _, b, _ = run(capsys, *argv)
    assert a == b
    value = float(rows(a)[0]["rld_value"])
    assert repr(value) in a or "%.17g" % value in a


def test_bad_thread_env(capsys, monkeypatch):
    monkeypatch.setenv("QFI_THREADS", "many")
    code, _, err = run(capsys, "sweep", "--model", "builtin:gadc:gamma=0.5,N=0.2", "--grid", "0.5")
    assert code == 1 and "QFI_THREADS" in err


def test_verify_passes(tmp_path, capsys):
    report = tmp_path / "r.csv"
    code, out, _ = run(capsys, "verify", "--suite", "chain-rule", "--seed", "42", "--count", "20", "--out", str(report))
    assert code == 0
    (row,) = rows(out)
    assert row["passed"] == "True" and float(row["min_slack"]) >= -1e-8
    assert len(report.read_text().strip().split("\n")) == 21


def test_verify_count_zero_is_vacuous(capsys):
    code, out, err = run(capsys, "verify", "--suite", "rld-vs-sld", "--count", "0")
    assert code == 0
    assert "vacuous" in err


def test_verify_failure_exit_three(capsys, monkeypatch):
    from rldfisher import suites
    from rldfisher.suites import InstanceResult

    monkeypatch.setitem(
        suites.SUITES, "chain-rule", (lambda rng, i: InstanceResult(i, -1.0, False), "slack", "min")
    )
    code, _, _ = run(capsys, "verify", "--suite", "chain-rule", "--count", "2")
    assert code == 3


def test_dump_sdp(tmp_path, capsys):
    path = tmp_path / "p.json"
    code, _, _ = run(capsys, "value", "--model", "builtin:bernoulli:theta=0.3", "--dump-sdp", str(path))
    assert code == 0
    assert json.loads(path.read_text())["sense"] == "min"
