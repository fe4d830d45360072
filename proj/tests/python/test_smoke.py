import json
import math

import pytest

import dnstat


def test_version():
    assert dnstat.__version__ == "0.1.0"


def test_dn_mean_of_identity_and_constant():
    s = dnstat.Schedule.cesaro()
    w = dnstat.Weights.ones()
    assert dnstat.dn_mean(lambda n: float(n), s, w, 4) == pytest.approx(2.5)
    assert dnstat.dn_mean(lambda n: 7.0, s, w, 30) == pytest.approx(7.0, abs=1e-12)
    assert dnstat.Schedule.parse("0,6").window(3) == (1, 18)


def test_example_models():
    e1 = dnstat.Model.parse("example1")
    assert dnstat.exceedance_prob(e1, 16, 0.5) == pytest.approx(0.25, abs=1e-12)
    assert dnstat.abs_moment(e1, 100, 1.0) == pytest.approx(10.0, abs=1e-12)
    e2 = dnstat.Model.parse("example2")
    assert [dnstat.cdf(e2, t) for t in (-0.5, 0.5, 1.5)] == [0.0, 0.5, 1.0]


def test_detectors_on_example_one():
    model = dnstat.Model.parse("example1")
    s = dnstat.Schedule.example1()
    w = dnstat.Weights.example1()
    dnp = dnstat.st_dnp(model, s, w, horizon=2000)
    assert dnp["verdict"] == "Converges"
    assert dnp["tail_max"] <= 0.02
    assert dnstat.st_dnm(model, s, w, horizon=2000)["verdict"] == "Diverges"


def test_mkz_accepts_names_and_callables():
    assert dnstat.mkz_apply("y", 50, 0.3) == pytest.approx(0.3, abs=1e-8)
    assert dnstat.mkz_apply(lambda y: 1.0, 20, 0.7) == pytest.approx(1.0, abs=1e-10)
    assert dnstat.mkz_apply(math.cos, 1, 1.0) == pytest.approx(math.cos(1.0))
    with pytest.raises(dnstat.DomainError):
        dnstat.mkz_apply("y", 5, 1.5)


def test_korovkin_nullset_small():
    r = dnstat.korovkin("nullset", ["y^3"], horizon=200, grid_points=17)
    assert r["conditions_converge"] and r["conclusions_converge"]
    assert [c["function"] for c in r["conditions"]] == ["1", "y", "y^2"]


def test_errors_map_to_python_exceptions():
    with pytest.raises(dnstat.ConfigError):
        dnstat.Schedule.parse("2,1,3")
    with pytest.raises(dnstat.Error):
        dnstat.Model.parse("no-such-model")


def test_run_cli_json():
    code, out, err = dnstat.run_cli(["mean", "--seq", "identity", "--horizon", "4", "--format", "json"])
    assert code == 0, err
    doc = json.loads(out)
    assert doc["results"]["rows"][3]["t_m"] == pytest.approx(2.5)
    assert dnstat.run_cli(["mean"])[0] == 2
