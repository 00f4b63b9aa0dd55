"""End-to-end runs of every subcommand against temporary inputs."""

import json

import numpy as np
import pandas as pd
import pytest
import yaml

from povkit import DgpConfig, MpiSampleProfile, generate_mpi_sample, generate_panel
from povkit.cli import main
from povkit.config import (dgp_from_config, keys_from_config,
                           olg_params_from_config, scheme_from_config)
from povkit.errors import ConfigError


@pytest.fixture(scope="module")
def mpi_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "survey.csv"
    panel = generate_mpi_sample(MpiSampleProfile(n_households=250, seed=3))
    panel.frame.to_csv(path, index=False)
    return path


@pytest.fixture(scope="module")
def panel_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "panel.csv"
    panel = generate_panel(DgpConfig(n_households=300, seed=5, waves=3,
                                     cluster_sd=0.3))
    frame = panel.frame.copy()
    frame["treat"] = (frame["participation"] >= 2).astype(int)
    frame.to_csv(path, index=False)
    return path


def write_cfg(tmp_path, doc, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(doc))
    return path


def run(sub, cfg_path, out, *extra):
    return main([sub, "--config", str(cfg_path), "--out", str(out), *extra])


def test_mpi_artifacts_and_column_order(tmp_path, mpi_csv):
    cfg = write_cfg(tmp_path, {"input": str(mpi_csv), "scheme": "baseline",
                               "group": "area"})
    out = tmp_path / "out"
    assert run("mpi", cfg, out) == 0
    table = pd.read_csv(out / "mpi.csv")
    cols = list(table.columns)
    assert cols[:4] == ["k", "H", "A", "M0"]
    n_ind = (len(cols) - 4) // 2
    assert all(c.startswith("q_") for c in cols[4:4 + n_ind])
    assert all(c.startswith("C_") for c in cols[4 + n_ind:])
    assert table.loc[0, "k"] == 0.33
    assert table.loc[0, "M0"] == pytest.approx(
        table.loc[0, "H"] * table.loc[0, "A"], abs=1e-12)

    groups = pd.read_csv(out / "mpi_groups.csv")
    assert list(groups.columns)[-2:] == ["group", "share"]
    assert set(groups["group"]) == {"rural", "urban"}
    assert groups["share"].sum() == pytest.approx(1.0, abs=1e-12)

    summary = json.loads((out / "mpi_summary.json").read_text())
    assert summary["total"]["M0"] == pytest.approx(table.loc[0, "M0"], abs=1e-12)
    manifest = json.loads((out / "mpi_manifest.json").read_text())
    assert manifest["subcommand"] == "mpi"
    assert manifest["config"]["scheme"] == "baseline"


def test_mpi_cutoff_and_scheme_overrides(tmp_path, mpi_csv):
    cfg = write_cfg(tmp_path, {"input": str(mpi_csv), "k": 0.2})
    out1 = tmp_path / "o1"
    assert run("mpi", cfg, out1) == 0
    assert pd.read_csv(out1 / "mpi.csv").loc[0, "k"] == 0.2

    out2 = tmp_path / "o2"
    assert run("mpi", cfg, out2, "--k", "0.4") == 0
    assert pd.read_csv(out2 / "mpi.csv").loc[0, "k"] == 0.4

    out3 = tmp_path / "o3"
    assert run("mpi", cfg, out3, "--scheme", "with_income") == 0
    assert "q_income_pc" in pd.read_csv(out3 / "mpi.csv").columns


def test_curve_artifacts(tmp_path, mpi_csv):
    cfg = write_cfg(tmp_path, {"input": str(mpi_csv)})
    out = tmp_path / "out"
    assert run("curve", cfg, out) == 0
    curve = pd.read_csv(out / "curve.csv")
    assert list(curve.columns) == ["k", "H"]
    assert len(curve) == 20
    assert (np.diff(curve["H"]) <= 1e-12).all()
    m0 = pd.read_csv(out / "curve_m0.csv")
    assert list(m0.columns) == ["k", "M0"]
    assert len(m0) == 20


def test_entropy_artifacts(tmp_path, mpi_csv):
    cfg = write_cfg(tmp_path, {"input": str(mpi_csv)})
    out = tmp_path / "out"
    assert run("entropy", cfg, out) == 0
    scores = pd.read_csv(out / "scores.csv")
    for col in ("HScore", "SScore", "PHScore", "FScore", "NScore", "PSScore",
                "ZScore"):
        assert col in scores.columns
    assert scores["ZScore"].between(0, 6).all()
    weights = pd.read_csv(out / "weights.csv")
    assert {"capital", "indicator", "entropy", "divergence", "weight",
            "degenerate"} <= set(weights.columns)
    sums = weights.groupby("capital")["weight"].sum()
    assert np.allclose(sums, 1.0)
    summary = json.loads((out / "entropy_summary.json").read_text())
    assert "ZScore" in summary["score_means"]


def test_olg_artifacts(tmp_path):
    cfg = write_cfg(tmp_path, {"olg": {
        "params": {"wage": 100, "tax_rate": 0.2, "time_preference": 0.05,
                   "interest_rate": 0.03, "pillar1_contrib": 5,
                   "pillar1_return": 0.05, "subsidy_rate": 0.01,
                   "pooled_benefit": 2},
        "sweep": {"parameter": "pillar1_return",
                  "values": [0.0, 0.03, 0.06, 0.09]},
    }})
    out = tmp_path / "out"
    assert run("olg", cfg, out) == 0
    row = pd.read_csv(out / "olg.csv").iloc[0]
    assert row["e1_with_tpps"] == pytest.approx(42.0448, abs=2e-4)
    assert row["uplift"] == pytest.approx(2.15 / 82.4, abs=1e-12)
    sweep = pd.read_csv(out / "olg_sweep.csv")
    assert len(sweep) == 4
    summary = json.loads((out / "olg_summary.json").read_text())
    assert summary["sweep"]["uplift_trend"] == "increasing"


def test_fit_artifacts(tmp_path, panel_csv):
    cfg = write_cfg(tmp_path, {
        "input": str(panel_csv),
        "keys": {"cluster": "household"},
        "models": [{"name": "twfe", "response": "poor",
                    "regressors": ["participation", "x1", "x2"],
                    "fixed_effects": ["province", "wave"],
                    "family": "logit", "marginal_effects": True}],
    })
    out = tmp_path / "out"
    assert run("fit", cfg, out) == 0
    table = pd.read_csv(out / "fit_twfe.csv")
    assert list(table.columns) == ["name", "estimate", "se", "z", "p"]
    assert "participation" in set(table["name"])
    summary = json.loads((out / "fit_summary.json").read_text())
    assert summary["twfe"]["family"] == "logit"
    assert summary["twfe"]["n_clusters"] == 300
    assert "participation" in summary["twfe"]["marginal_effects"]


def test_iv_artifacts(tmp_path, panel_csv):
    cfg = write_cfg(tmp_path, {
        "input": str(panel_csv),
        "keys": {"district": "district", "cluster": "household"},
        "iv": {
            "bartik": {"participation": ["participation"]},
            "first": {"response": "participation", "regressors": ["x1", "x2"]},
            "second": {"response": "poor",
                       "regressors": ["participation", "x1", "x2"]},
        },
    })
    out = tmp_path / "out"
    assert run("iv", cfg, out) == 0
    first = pd.read_csv(out / "first_stage.csv")
    assert "bartik_participation" in set(first["name"])
    second = pd.read_csv(out / "second_stage.csv")
    assert "participation" in set(second["name"])
    summary = json.loads((out / "iv_summary.json").read_text())
    assert summary["first_family"] == "linear"
    assert summary["instrument"] == ["bartik_participation"]
    assert summary["loglik"] >= summary["start_loglik"] - 1e-7
    assert -1.0 < summary["rho"] < 1.0


def test_psm_artifacts(tmp_path, panel_csv):
    cfg = write_cfg(tmp_path, {
        "input": str(panel_csv),
        "psm": {"treatment": "treat", "covariates": ["x1", "x2"]},
    })
    out = tmp_path / "out"
    assert run("psm", cfg, out) == 0
    matches = pd.read_csv(out / "matches.csv")
    assert {"treated_row", "control_row", "distance", "score_treated",
            "score_control"} == set(matches.columns)
    assert matches["control_row"].is_unique
    balance = pd.read_csv(out / "balance.csv")
    assert list(balance["covariate"]) == ["x1", "x2"]
    summary = json.loads((out / "psm_summary.json").read_text())
    assert summary["n_matched"] == len(matches)


def test_chow_artifacts_deterministic(tmp_path, mpi_csv):
    cfg = write_cfg(tmp_path, {
        "input": str(mpi_csv),
        "seed": 11,
        "chow": {
            "group": "area",
            "model": {"response": "income_pc", "regressors": ["durables_value"],
                      "family": "linear"},
            "permutation": {"replications": 100},
        },
    })
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert run("chow", cfg, out1) == 0
    assert run("chow", cfg, out2) == 0
    t1 = pd.read_csv(out1 / "chow.csv")
    assert list(t1.columns) == ["regressor", "estimate", "se", "z", "p"]
    s1 = json.loads((out1 / "chow_summary.json").read_text())
    s2 = json.loads((out2 / "chow_summary.json").read_text())
    assert s1["permutation"]["p_value"] == s2["permutation"]["p_value"]
    assert s1["permutation"]["p_value"] >= 1.0 / 101.0


def test_synth_artifacts_and_seed_override(tmp_path):
    cfg = write_cfg(tmp_path, {"seed": 4, "synth": {
        "kind": "panel", "n_households": 80, "waves": 2}})
    out1, out2, out3 = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    assert run("synth", cfg, out1) == 0
    assert run("synth", cfg, out2) == 0
    assert ((out1 / "synthetic_panel.csv").read_bytes()
            == (out2 / "synthetic_panel.csv").read_bytes())
    assert run("synth", cfg, out3, "--seed", "5") == 0
    assert ((out1 / "synthetic_panel.csv").read_bytes()
            != (out3 / "synthetic_panel.csv").read_bytes())
    truth = json.loads((out1 / "synthetic_truth.json").read_text())
    assert truth["seed"] == 4

    mpi_cfg = write_cfg(tmp_path, {"seed": 7, "synth": {
        "kind": "mpi", "n_households": 60}}, name="mpi.yaml")
    out4 = tmp_path / "d"
    assert run("synth", mpi_cfg, out4) == 0
    frame = pd.read_csv(out4 / "synthetic_panel.csv")
    assert "years_schooling" in frame.columns


def test_report_chains_everything(tmp_path, mpi_csv):
    cfg = write_cfg(tmp_path, {
        "input": str(mpi_csv),
        "group": "area",
        "models": [{"name": "poverty", "response": "mpi_poor",
                    "regressors": ["ZScore"], "family": "logit"}],
    })
    out = tmp_path / "out"
    assert run("report", cfg, out) == 0
    enriched = pd.read_csv(out / "enriched_panel.csv")
    for col in ("mpi_score", "mpi_poor", "ZScore"):
        assert col in enriched.columns
    assert enriched["mpi_poor"].isin([0.0, 1.0]).all()
    assert (out / "mpi.csv").exists() and (out / "weights.csv").exists()
    assert (out / "fit_poverty.csv").exists()
    summary = json.loads((out / "report_summary.json").read_text())
    assert "mpi" in summary and "models" in summary


def test_rerun_is_byte_identical(tmp_path, mpi_csv):
    cfg = write_cfg(tmp_path, {"input": str(mpi_csv), "group": "area"})
    out = tmp_path / "out"
    assert run("report", cfg, out) == 0
    snapshot = {p.name: p.read_bytes() for p in out.iterdir()}
    assert run("report", cfg, out) == 0
    again = {p.name: p.read_bytes() for p in out.iterdir()}
    assert snapshot == again
    assert len(snapshot) >= 4


def test_cli_error_reporting(tmp_path, mpi_csv, capsys):
    missing = write_cfg(tmp_path, {"input": str(tmp_path / "absent.csv")})
    assert main(["mpi", "--config", str(missing),
                 "--out", str(tmp_path / "o1")]) == 1
    assert capsys.readouterr().err.startswith("povkit mpi: error:")

    no_cfg = tmp_path / "nope.yaml"
    assert main(["mpi", "--config", str(no_cfg),
                 "--out", str(tmp_path / "o2")]) == 1
    assert "error" in capsys.readouterr().err

    bad_scheme = write_cfg(tmp_path, {"input": str(mpi_csv),
                                      "scheme": "nonsense"}, name="s.yaml")
    assert main(["mpi", "--config", str(bad_scheme),
                 "--out", str(tmp_path / "o3")]) == 1
    err = capsys.readouterr().err
    assert err.startswith("povkit mpi: error:") and "nonsense" in err


def test_cli_bad_olg_param(tmp_path, capsys):
    cfg = write_cfg(tmp_path, {"olg": {"params": {"wage": 100, "tax_rate": 0.1,
                                                  "time_preference": 0.05,
                                                  "interest_rate": 0.03,
                                                  "mystery": 1}}})
    assert main(["olg", "--config", str(cfg),
                 "--out", str(tmp_path / "o")]) == 1
    assert "mystery" in capsys.readouterr().err


def test_scheme_from_config_custom_fractions():
    cfg = {
        "scheme": "custom",
        "custom_scheme": {
            "k": 0.25,
            "indicators": [
                {"id": "a", "dimension": "one", "weight": "1/3",
                 "cutoff": 5.0},
                {"id": "b", "dimension": "one", "weight": "1/3",
                 "orientation": "deprived_if_flag_set"},
                {"id": "c", "dimension": "two", "weight": "1/3",
                 "cutoff": 2.0},
            ],
        },
    }
    scheme = scheme_from_config(cfg)
    assert scheme.poverty_cutoff_k == 0.25
    from fractions import Fraction
    assert [s.weight for s in scheme.indicators] == [Fraction(1, 3)] * 3
    assert sum(s.weight for s in scheme.indicators) == 1
    taken = scheme_from_config(cfg, k_override=0.5)
    assert taken.poverty_cutoff_k == 0.5

    bad = {"scheme": "custom", "custom_scheme": {"indicators": [
        {"id": "a", "dimension": "d", "weight": "not a number", "cutoff": 1}]}}
    with pytest.raises(ConfigError, match="fraction string"):
        scheme_from_config(bad)


def test_keys_and_dgp_from_config():
    keys = keys_from_config({})
    assert keys["entity"] == "household" and keys["time"] == "wave"
    keys = keys_from_config({"keys": {"entity": "firm", "cluster": "region"}})
    assert keys["entity"] == "firm" and keys["cluster"] == "region"

    dgp = dgp_from_config({"n_households": 40, "rho": 0.2}, seed=9)
    assert dgp.seed == 9 and dgp.rho == 0.2
    with pytest.raises(ConfigError, match="unknown generator"):
        dgp_from_config({"n_households": 40, "bogus": 1}, seed=0)
    with pytest.raises(ConfigError, match="unknown pension"):
        olg_params_from_config({"wage": 1, "tax_rate": 0.1,
                                "time_preference": 0.0, "interest_rate": 0.0,
                                "extra": 2})
