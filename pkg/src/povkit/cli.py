"""Command line driver.

Every subcommand reads a YAML config, writes delimited tables plus a
structured summary into the output directory, and leaves a manifest
that records everything needed to replay the run. Identical config and
seed produce byte-identical artifacts: nothing time- or host-dependent
is ever written. Input files are never modified.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np
import pandas as pd

from . import __version__
from .config import (dgp_from_config, grouping_from_config, keys_from_config,
                     load_config, model_from_config, mpi_profile_from_config,
                     olg_params_from_config, scheme_from_config)
from .endogeneity import BartikConfig, build_bartik_iv, fit_recursive_joint
from .errors import ConfigError, PovkitError
from .estimators import average_marginal_effects, fit
from .livelihoods import capital_scores
from .mpi import (POVERTY_CUTOFF_PRESETS, compute_mpi, deprivation_scores,
                  evaluate_deprivations, incidence_curve, subgroup_decompose)
from .olg import (comparative_statics, expenditure_uplift, solve_no_tpps,
                  solve_with_tpps, sweep_trend)
from .panel import PanelDataset, atomic_write_text, read_panel
from .robustness import chow_test, permutation_test, propensity_match
from .synth import generate_mpi_sample, generate_panel


def _write_table(frame: pd.DataFrame, path: Path) -> None:
    atomic_write_text(path, frame.to_csv(index=False))


def _json_scalar(obj):
    if hasattr(obj, "item"):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _write_json(obj, path: Path) -> None:
    text = json.dumps(obj, sort_keys=True, indent=2, default=_json_scalar)
    atomic_write_text(path, text + "\n")


def _manifest(out: Path, sub: str, cfg: dict, args) -> None:
    doc = {
        "subcommand": sub,
        "config_path": str(args.config),
        "config": cfg,
        "seed": _seed_of(cfg, args),
        "overrides": {"seed": args.seed, "k": args.k, "scheme": args.scheme,
                      "out": args.out},
        "version": __version__,
    }
    _write_json(doc, out / f"{sub}_manifest.json")


def _seed_of(cfg: dict, args) -> int:
    return args.seed if args.seed is not None else int(cfg.get("seed", 0))


def _context(args):
    cfg = load_config(args.config)
    out = Path(args.out) if args.out else Path(cfg.get("out", "povkit_out"))
    out.mkdir(parents=True, exist_ok=True)
    return cfg, out, _seed_of(cfg, args)


def _read_input(cfg: dict) -> PanelDataset:
    if "input" not in cfg:
        raise ConfigError("config needs an 'input' path to a panel file")
    keys = keys_from_config(cfg)
    return read_panel(cfg["input"], **keys)


def _mpi_pieces(cfg: dict, args, panel: PanelDataset):
    scheme = scheme_from_config(cfg, scheme_override=args.scheme,
                                k_override=args.k)
    matrix = evaluate_deprivations(panel, scheme,
                                   missing=cfg.get("missing", "drop"),
                                   group_column=cfg.get("group"))
    return scheme, matrix


def _result_payload(res) -> dict:
    return {
        "k": res.k_used, "H": res.h, "A": res.a, "M0": res.m0,
        "q": res.q, "n": res.n,
        "censored_headcounts": {i: int(c) for i, c in
                                zip(res.indicator_ids, res.censored_headcounts)},
        "contributions": (None if res.contributions is None else
                          {i: float(c) for i, c in
                           zip(res.indicator_ids, res.contributions)}),
        "dimension_contributions": res.dimension_contributions,
    }


def cmd_mpi(args) -> int:
    cfg, out, _ = _context(args)
    panel = _read_input(cfg)
    scheme, matrix = _mpi_pieces(cfg, args, panel)
    res = compute_mpi(matrix, scheme)
    _write_table(pd.DataFrame([res.as_row()]), out / "mpi.csv")
    summary = {"total": _result_payload(res), "n_dropped": matrix.n_dropped,
               "ingest": panel.ingest_report}
    if cfg.get("group"):
        decomp = subgroup_decompose(matrix, scheme)
        rows = []
        for label, gres in decomp.groups.items():
            row = gres.as_row()
            row["group"] = label
            row["share"] = decomp.shares[label]
            rows.append(row)
        _write_table(pd.DataFrame(rows), out / "mpi_groups.csv")
        summary["groups"] = {str(l): _result_payload(g)
                             for l, g in decomp.groups.items()}
        summary["shares"] = {str(l): s for l, s in decomp.shares.items()}
    _write_json(summary, out / "mpi_summary.json")
    _manifest(out, "mpi", cfg, args)
    return 0


def _k_grid(cfg: dict):
    block = cfg.get("k_grid")
    if block is None:
        return [round(0.05 * i, 10) for i in range(1, 21)]
    if isinstance(block, dict):
        start = float(block.get("start", 0.05))
        stop = float(block.get("stop", 1.0))
        step = float(block.get("step", 0.05))
        n = int(round((stop - start) / step)) + 1
        return [round(start + i * step, 10) for i in range(n)]
    return [float(k) for k in block]


def cmd_curve(args) -> int:
    cfg, out, _ = _context(args)
    panel = _read_input(cfg)
    scheme, matrix = _mpi_pieces(cfg, args, panel)
    points = incidence_curve(matrix, scheme, _k_grid(cfg))
    _write_table(pd.DataFrame([(k, h) for k, h, _ in points],
                              columns=["k", "H"]), out / "curve.csv")
    _write_table(pd.DataFrame([(k, m) for k, _, m in points],
                              columns=["k", "M0"]), out / "curve_m0.csv")
    _manifest(out, "curve", cfg, args)
    return 0


def _weights_table(scores) -> pd.DataFrame:
    rows = []
    if scores.per_wave:
        for wave, caps in scores.weights.items():
            for cap, ew in caps.items():
                for i, col in enumerate(ew.columns):
                    rows.append({"wave": wave, "capital": cap, "indicator": col,
                                 "entropy": ew.entropy[i],
                                 "divergence": ew.divergence[i],
                                 "weight": ew.weights[i],
                                 "degenerate": bool(ew.degenerate[i])})
    else:
        for cap, ew in scores.weights.items():
            for i, col in enumerate(ew.columns):
                rows.append({"capital": cap, "indicator": col,
                             "entropy": ew.entropy[i],
                             "divergence": ew.divergence[i],
                             "weight": ew.weights[i],
                             "degenerate": bool(ew.degenerate[i])})
    return pd.DataFrame(rows)


def cmd_entropy(args) -> int:
    cfg, out, _ = _context(args)
    panel = _read_input(cfg)
    grouping = grouping_from_config(cfg)
    per_wave = bool(cfg.get("entropy", {}).get("per_wave", False))
    scores = capital_scores(panel, grouping, per_wave=per_wave)
    enriched = pd.concat([panel.frame, scores.scores], axis=1)
    _write_table(enriched, out / "scores.csv")
    _write_table(_weights_table(scores), out / "weights.csv")
    summary = {"score_means": {c: float(scores.scores[c].mean())
                               for c in scores.scores.columns},
               "per_wave": per_wave}
    _write_json(summary, out / "entropy_summary.json")
    _manifest(out, "entropy", cfg, args)
    return 0


def cmd_olg(args) -> int:
    cfg, out, _ = _context(args)
    block = cfg.get("olg")
    if not isinstance(block, dict):
        raise ConfigError("config needs an 'olg' mapping")
    params = olg_params_from_config(block.get("params", {}))
    base = solve_no_tpps(params)
    row = {"wage": params.wage, "tax_rate": params.tax_rate,
           "time_preference": params.time_preference,
           "interest_rate": params.interest_rate,
           "e1_no_tpps": base.expenditure_young,
           "e2_no_tpps": base.expenditure_old,
           "savings_no_tpps": base.savings}
    summary = {"no_tpps": {"e1": base.expenditure_young,
                           "e2": base.expenditure_old,
                           "savings": base.savings,
                           "utility": base.utility}}
    if params.contributions > 0:
        sol = solve_with_tpps(params)
        uplift = expenditure_uplift(params)
        row.update({"e1_with_tpps": sol.expenditure_young,
                    "e2_with_tpps": sol.expenditure_old,
                    "savings_with_tpps": sol.savings,
                    "uplift": uplift})
        summary["with_tpps"] = {"e1": sol.expenditure_young,
                                "e2": sol.expenditure_old,
                                "savings": sol.savings,
                                "utility": sol.utility}
        summary["uplift"] = uplift
    else:
        summary["with_tpps"] = None
    _write_table(pd.DataFrame([row]), out / "olg.csv")
    sweep = block.get("sweep")
    if isinstance(sweep, dict):
        table = comparative_statics(params, sweep["parameter"], sweep["values"])
        _write_table(table, out / "olg_sweep.csv")
        summary["sweep"] = {"parameter": sweep["parameter"],
                            "uplift_trend": sweep_trend(table, "uplift"),
                            "e1_trend": sweep_trend(table, "e1")}
    _write_json(summary, out / "olg_summary.json")
    _manifest(out, "olg", cfg, args)
    return 0


def _fit_models(frame, cfg: dict, out: Path, default_cluster) -> dict:
    models = cfg.get("models")
    if not models:
        raise ConfigError("config needs a 'models' list")
    summary = {}
    for i, block in enumerate(models):
        name = block.get("name", f"model{i}")
        spec = model_from_config(block, default_cluster=default_cluster)
        result = fit(frame, spec)
        _write_table(result.table(), out / f"fit_{name}.csv")
        entry = {"family": result.family, "n_obs": result.n_obs,
                 "n_clusters": result.n_clusters, "n_dropped": result.n_dropped,
                 "loglik": result.loglik, "rss": result.rss,
                 "iterations": result.iterations}
        if block.get("marginal_effects") and result.family in ("logit", "probit"):
            entry["marginal_effects"] = average_marginal_effects(result, frame)
        summary[name] = entry
    return summary


def cmd_fit(args) -> int:
    cfg, out, _ = _context(args)
    panel = _read_input(cfg)
    keys = keys_from_config(cfg)
    summary = _fit_models(panel.frame, cfg, out, keys.get("cluster"))
    _write_json(summary, out / "fit_summary.json")
    _manifest(out, "fit", cfg, args)
    return 0


def cmd_iv(args) -> int:
    cfg, out, _ = _context(args)
    panel = _read_input(cfg)
    keys = keys_from_config(cfg)
    block = cfg.get("iv")
    if not isinstance(block, dict):
        raise ConfigError("config needs an 'iv' mapping")
    bartik_block = block.get("bartik", {})
    district = bartik_block.get("district") or keys.get("district")
    if district is None:
        raise ConfigError("the instrument needs a district key "
                          "(keys.district or iv.bartik.district)")
    participation = bartik_block.get("participation")
    if not participation:
        raise ConfigError("iv.bartik.participation must list at least one column")
    bconf = BartikConfig(district=district, time=keys["time"],
                         participation=tuple(participation))
    iv_frame = build_bartik_iv(panel, bconf)
    work = pd.concat([panel.frame, iv_frame], axis=1)

    first_block = dict(block.get("first") or {})
    first_block.setdefault("family", "linear")
    second_block = dict(block.get("second") or {})
    second_block.setdefault("family", "probit")
    first = model_from_config(first_block, default_cluster=keys.get("cluster"))
    second = model_from_config(second_block, default_cluster=keys.get("cluster"))
    instrument = block.get("instrument") or list(iv_frame.columns)
    joint = fit_recursive_joint(work, first, second, instrument)

    _write_table(joint.first_table(), out / "first_stage.csv")
    _write_table(joint.second_table(), out / "second_stage.csv")
    summary = {"atanhrho": joint.atanhrho, "atanhrho_se": joint.atanhrho_se,
               "atanhrho_z": joint.atanhrho_z, "atanhrho_p": joint.atanhrho_p,
               "rho": joint.rho, "sigma": joint.sigma,
               "loglik": joint.loglik, "start_loglik": joint.start_loglik,
               "iterations": joint.iterations, "n_obs": joint.n_obs,
               "n_dropped": joint.n_dropped,
               "first_family": joint.first_family,
               "instrument": list(instrument) if not isinstance(instrument, str)
               else [instrument]}
    _write_json(summary, out / "iv_summary.json")
    _manifest(out, "iv", cfg, args)
    return 0


def cmd_psm(args) -> int:
    cfg, out, _ = _context(args)
    panel = _read_input(cfg)
    block = cfg.get("psm")
    if not isinstance(block, dict):
        raise ConfigError("config needs a 'psm' mapping")
    res = propensity_match(panel, block["treatment"],
                           tuple(block["covariates"]),
                           caliper=block.get("caliper"))
    matches = pd.DataFrame(
        [{"treated_row": t, "control_row": c, "distance": d,
          "score_treated": res.scores[t], "score_control": res.scores[c]}
         for t, c, d in res.pairs])
    _write_table(matches, out / "matches.csv")
    _write_table(res.balance, out / "balance.csv")
    _write_json({"n_treated": res.n_treated, "n_control": res.n_control,
                 "n_matched": res.n_matched, "caliper": res.caliper,
                 "max_smd_before": float(res.balance["smd_before"].abs().max()),
                 "max_smd_after": float(res.balance["smd_after"].abs().max())},
                out / "psm_summary.json")
    _manifest(out, "psm", cfg, args)
    return 0


def cmd_chow(args) -> int:
    cfg, out, seed = _context(args)
    panel = _read_input(cfg)
    keys = keys_from_config(cfg)
    block = cfg.get("chow")
    if not isinstance(block, dict):
        raise ConfigError("config needs a 'chow' mapping")
    spec = model_from_config(block["model"], default_cluster=keys.get("cluster"))
    res = chow_test(panel, spec, block["group"])
    _write_table(res.table, out / "chow.csv")
    summary = {"group": res.group, "group_high": str(res.group_high),
               "gaps": {r["regressor"]: {"estimate": r["estimate"],
                                         "se": r["se"], "p": r["p"]}
                        for r in res.table.to_dict("records")}}
    perm = block.get("permutation")
    if isinstance(perm, dict):
        pres = permutation_test(panel, spec, block["group"],
                                regressor=perm.get("regressor"),
                                replications=int(perm.get("replications", 199)),
                                seed=seed)
        summary["permutation"] = {"regressor": pres.regressor,
                                  "p_value": pres.p_value,
                                  "observed": pres.observed,
                                  "replications": pres.replications}
    _write_json(summary, out / "chow_summary.json")
    _manifest(out, "chow", cfg, args)
    return 0


def cmd_synth(args) -> int:
    cfg, out, seed = _context(args)
    block = dict(cfg.get("synth", {}))
    kind = block.pop("kind", "panel")
    if kind == "panel":
        panel = generate_panel(dgp_from_config(block, seed))
    elif kind == "mpi":
        panel = generate_mpi_sample(mpi_profile_from_config(block, seed))
    else:
        raise ConfigError(f"unknown synth kind {kind!r}; use 'panel' or 'mpi'")
    _write_table(panel.frame, out / "synthetic_panel.csv")
    _write_json(panel.meta, out / "synthetic_truth.json")
    _manifest(out, "synth", cfg, args)
    return 0


def cmd_report(args) -> int:
    """Chain the measurement stack: deprivations, scores, then models."""
    cfg, out, _ = _context(args)
    panel = _read_input(cfg)
    keys = keys_from_config(cfg)
    scheme, matrix = _mpi_pieces(cfg, args, panel)
    res = compute_mpi(matrix, scheme)
    _write_table(pd.DataFrame([res.as_row()]), out / "mpi.csv")

    d_scores = deprivation_scores(matrix, scheme)
    enriched = panel.frame.copy()
    enriched["mpi_score"] = np.nan
    enriched["mpi_poor"] = np.nan
    positions = matrix.rows if matrix.rows is not None else np.arange(len(enriched))
    enriched.iloc[positions, enriched.columns.get_loc("mpi_score")] = d_scores
    enriched.iloc[positions, enriched.columns.get_loc("mpi_poor")] = (
        d_scores >= res.k_used).astype(float)

    grouping = grouping_from_config(cfg)
    scores = capital_scores(panel, grouping,
                            per_wave=bool(cfg.get("entropy", {}).get("per_wave",
                                                                     False)))
    enriched = pd.concat([enriched, scores.scores], axis=1)
    _write_table(enriched, out / "enriched_panel.csv")
    _write_table(_weights_table(scores), out / "weights.csv")

    summary = {"mpi": _result_payload(res),
               "score_means": {c: float(scores.scores[c].mean())
                               for c in scores.scores.columns}}
    if cfg.get("models"):
        summary["models"] = _fit_models(enriched, cfg, out, keys.get("cluster"))
    _write_json(summary, out / "report_summary.json")
    _manifest(out, "report", cfg, args)
    return 0


_HANDLERS = {
    "mpi": cmd_mpi, "curve": cmd_curve, "entropy": cmd_entropy,
    "olg": cmd_olg, "fit": cmd_fit, "iv": cmd_iv, "psm": cmd_psm,
    "chow": cmd_chow, "synth": cmd_synth, "report": cmd_report,
}

_HELP = {
    "mpi": "deprivation measures at one cutoff, with optional group decomposition",
    "curve": "incidence and adjusted headcount across a cutoff grid",
    "entropy": "entropy-weighted capital scores appended to the panel",
    "olg": "two-period pension model solutions and sweeps",
    "fit": "fixed-effects binary-response or linear models",
    "iv": "shift-share instrument plus the recursive joint MLE",
    "psm": "propensity score matching with balance diagnostics",
    "chow": "group interaction (structural break) tests",
    "synth": "synthetic panel generators",
    "report": "chain mpi, entropy scoring, and model fits",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="povkit",
        description="Poverty measurement and panel estimation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, handler in _HANDLERS.items():
        p = sub.add_parser(name, help=_HELP[name])
        p.add_argument("--config", required=True, help="YAML config document")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--k", type=float, default=None,
                       help="poverty cutoff override; common presets: "
                            f"{POVERTY_CUTOFF_PRESETS}")
        p.add_argument("--scheme", default=None,
                       help="indicator scheme name override")
        p.set_defaults(handler=handler)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except PovkitError as exc:
        print(f"povkit {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
