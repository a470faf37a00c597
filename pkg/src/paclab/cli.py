"""Command-line entry point: design, rates, simulate, audit, tail.

Exit codes: 0 success, 2 configuration or usage error, 3 infeasible design.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .channels import analytic_channel, ebn0_to_esn0, random_dmc
from .cutoff import gallager_e0, mgf_bound_audit, polarized_cutoff_rates
from .precoder import DEFAULT_POLY, CodeSpec
from .profiler import InfeasibleDesign, design_pac_code
from .sim import (
    SEED_ENV,
    WORKERS_ENV,
    ExperimentConfig,
    ccdf_bound_overlay,
    empirical_ccdf,
    fit_pareto_tail,
    run_sweep,
)

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE = 0, 2, 3


class ConfigError(Exception):
    pass


def _load_config(path: str | None, required: bool) -> dict:
    if path is None:
        if required:
            raise ConfigError("--config is required for this command")
        return {}
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return doc


def _resolve_spec(value, base: Path) -> CodeSpec:
    if isinstance(value, str):
        p = Path(value)
        if not p.is_absolute():
            p = base / p
        if not p.is_file():
            raise ConfigError(f"spec file not found: {value}")
        value = json.loads(p.read_text())
    return CodeSpec.from_json_dict(value)


def _overrides(args, doc: dict) -> dict:
    doc = dict(doc)
    seed = args.seed if args.seed is not None else os.environ.get(SEED_ENV)
    workers = args.workers if args.workers is not None else os.environ.get(WORKERS_ENV)
    if seed is not None:
        doc["seed"] = int(seed)
    if workers is not None:
        doc["workers"] = int(workers)
    if args.delta is not None:
        doc["delta"] = args.delta
    if args.max_visits is not None:
        doc["max_visits"] = args.max_visits
    return doc


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def cmd_design(args) -> int:
    doc = _overrides(args, _load_config(args.config, required=True))
    try:
        design = design_pac_code(
            N=int(doc["n"]),
            K_target=int(doc["k"]),
            rm_K=int(doc["rm_k"]),
            k_steps=int(doc["k_steps"]),
            target_ebn0_db=float(doc["ebn0_db"]),
            poly=tuple(doc.get("poly", DEFAULT_POLY)),
            trials=int(doc.get("trials", 1_000_000)),
            bit_trials=int(doc.get("bit_trials", 100_000)),
            seed=int(doc.get("seed", 1)),
            variant=doc.get("variant", "last"),
        )
    except KeyError as exc:
        raise ConfigError(f"missing config key {exc}") from exc
    except InfeasibleDesign as exc:
        print(f"infeasible design: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    _emit(design.spec.to_json(), args.out)
    if args.out:
        Path(args.out).with_suffix(".design.json").write_text(design.to_json())
    print(f"K after constraint {design.k_after_constraint}, final K {design.spec.K}", file=sys.stderr)
    return EXIT_OK


def cmd_rates(args) -> int:
    doc = _overrides(args, _load_config(args.config, required=True))
    try:
        n = int(doc["n"]).bit_length() - 1
        rate = float(doc.get("rate", 0.5))
        es_n0 = float(doc["es_n0"]) if "es_n0" in doc else ebn0_to_esn0(float(doc["ebn0_db"]), rate)
        rates = polarized_cutoff_rates(
            n, int(doc["k_steps"]), es_n0, int(doc.get("trials", 1_000_000)), int(doc.get("seed", 1))
        )
    except KeyError as exc:
        raise ConfigError(f"missing config key {exc}") from exc
    _emit(json.dumps(rates.to_json_dict(), indent=1), args.out)
    return EXIT_OK


def _experiment(args, doc: dict) -> ExperimentConfig:
    base = Path(args.config).resolve().parent
    if "spec" not in doc:
        raise ConfigError("config needs a 'spec' (CodeSpec object or path)")
    spec = _resolve_spec(doc["spec"], base)
    return ExperimentConfig.from_json_dict(doc, spec=spec)


def cmd_simulate(args) -> int:
    doc = _overrides(args, _load_config(args.config, required=True))
    cfg = _experiment(args, doc)
    summary = run_sweep(cfg)
    if args.out:
        summary.write(args.out)
    else:
        sys.stdout.write(summary.to_csv())
    return EXIT_OK


def cmd_tail(args) -> int:
    doc = _overrides(args, _load_config(args.config, required=True))
    l_min = float(doc.pop("l_min", 10))
    eps = float(doc.pop("eps", 0.5))
    beta = float(doc.pop("beta", 1.5))
    frames = int(doc.pop("frames", 100_000))
    ebn0 = doc.pop("ebn0_db", None)
    if ebn0 is not None:
        doc["ebn0_grid"] = [float(ebn0)]
    doc.setdefault("min_errors", frames + 1)
    doc["max_frames"] = frames
    cfg = _experiment(args, doc)
    if cfg.decoder != "fano":
        raise ConfigError("tail analysis needs the fano decoder")
    summary = run_sweep(cfg)
    report = []
    for point in summary.points:
        hist = point.stats.bit_count_hist
        fit = fit_pareto_tail(hist, l_min, seed=cfg.seed)
        overlay = ccdf_bound_overlay(hist, eps, beta)
        report.append(
            {
                "ebn0_db": point.ebn0_db,
                "frames": point.frames,
                "anv": point.anv,
                "fit": {"status": fit.status, "beta": fit.beta, "ci": fit.ci, "n_tail": fit.n_tail, "l_min": l_min},
                "bound": {"eps": eps, "beta": beta, "violations": sum(r["violated"] for r in overlay)},
            }
        )
    lines = ["ebn0_db,L,ccdf,bound"]
    for point in summary.points:
        for row in ccdf_bound_overlay(point.stats.bit_count_hist, eps, beta):
            lines.append(f"{point.ebn0_db!r},{row['L']!r},{row['ccdf']!r},{row['bound']!r}")
    _emit("\n".join(lines) + "\n", args.out)
    text = json.dumps(report, indent=1)
    if args.out:
        Path(args.out).with_suffix(".fit.json").write_text(text)
    print(text, file=sys.stderr)
    return EXIT_OK


def cmd_audit(args) -> int:
    doc = _overrides(args, _load_config(args.config, required=False))
    rng = np.random.default_rng(int(doc.get("seed", 0)))
    channels = [("BSC(0.1)", analytic_channel("BSC", 0.1))]
    channels += [(f"dmc{i}", random_dmc(rng)) for i in range(int(doc.get("channels", 50)))]
    kwargs = {k: tuple(doc[k]) for k in ("r_grid", "r0_grid") if k in doc}
    rows = []
    for name, ch in channels:
        bias = gallager_e0(ch, 1.0)
        audit = mgf_bound_audit(ch, bias, **kwargs)
        margins = audit.margins
        rows.append(
            {
                "channel": name,
                "bias": bias,
                "min_margin": {k: float(m.min()) for k, m in margins.items()},
                "violations_at_r": {
                    "lemma1": audit.r0_grid[margins["lemma1"] < -1e-12].tolist(),
                    "lemma2": audit.r_grid[margins["lemma2"] < -1e-12].tolist(),
                    "lemma3": audit.r_grid[margins["lemma3"] < -1e-12].tolist(),
                },
                "lemma3_premise_fails_at_r": audit.r_grid[~audit.lemma3_premise].tolist(),
                "slope_error": abs(audit.slope_at_zero - audit.slope_expected),
            }
        )
    _emit(json.dumps(rows, indent=1), args.out)
    n_bad = sum(any(v for v in r["violations_at_r"].values()) for r in rows)
    print(f"{len(rows)} channels audited, {n_bad} with at least one bound violation", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument("--out", help="output path (CSV or JSON); stdout when omitted")
    common.add_argument("--seed", type=int, help=f"base seed (env {SEED_ENV})")
    common.add_argument("--workers", type=int, help=f"worker processes (env {WORKERS_ENV})")
    common.add_argument("--delta", type=float, help="Fano threshold spacing")
    common.add_argument("--max-visits", type=int, help="Fano forward-move budget per frame")
    parser = argparse.ArgumentParser(prog="paclab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func, text in [
        ("design", cmd_design, "rate-profile design"),
        ("rates", cmd_rates, "polarized cutoff-rate table"),
        ("simulate", cmd_simulate, "FER/BER/ANV sweep"),
        ("audit", cmd_audit, "exact MGF bound audits"),
        ("tail", cmd_tail, "computation CCDF and Pareto tail fit"),
    ]:
        p = sub.add_parser(name, parents=[common], help=text)
        p.set_defaults(func=func)
    return parser


def cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ConfigError, ValueError, TypeError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main() -> None:
    sys.exit(cli())


if __name__ == "__main__":
    main()
