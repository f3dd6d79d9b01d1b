"""Command-line entry point: ``bdml {fit,simulate,validate,split-demo,gel-debug}``."""

import argparse
import logging
import math
from pathlib import Path
import sys
import time

import numpy as np

from . import __version__
from .bench import run_benchmark
from .config import resolve, thread_cap
from .dml import dml_estimate
from .errors import BdmlError, ConfigError, DataError
from .gel import DivergenceSpec, check_feasibility, solve_weights
from .io import load_borough_csv, write_csv, write_json, write_text
from .learners import Family
from .pipeline import Method, crossfit_scores
from .posterior import McmcConfig, PriorSpec, run_chain
from .simulate import binary_scenario, continuous_scenario, split_demo_scenario
from .validity import PipelineSettings, histogram_rows, run_sbc, run_split_demo

log = logging.getLogger("bdml")

FOOTER = (
    "Note: the published application table was computed on the authors' borough "
    "dataset, which is not distributed; its values are not reproducible from this "
    "input and the numbers above are not expected to match it."
)

HIST_HEADER = ["bin_left", "bin_right", "count"]


def _split_list(text):
    return [t.strip() for t in str(text).split(",") if t.strip()]


def _divergences(text):
    try:
        return [DivergenceSpec.parse(t) for t in _split_list(text)]
    except ValueError as exc:
        raise ConfigError(f"bad --lambda value: {exc}") from None


def _family(text):
    try:
        return Family.parse(text)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _mcmc(cfg, seed):
    return McmcConfig(draws=cfg["draws"], burn_in=cfg["burn_in"], seed=seed)


def _prior(cfg):
    return PriorSpec(cfg["prior_mean"], cfg["prior_var"])


def _outdir(cfg):
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _fmt(x, digits=2):
    return f"{x:.{digits}f}"


# fit ------------------------------------------------------------------------


def _learner_pairs(cfg):
    if cfg["learner_pi"] or cfg["learner_g"]:
        base = _split_list(cfg["learner"])
        pi = _family(cfg["learner_pi"] or base[0])
        g = _family(cfg["learner_g"] or cfg["learner_pi"] or base[0])
        return [(pi, g)]
    return [(_family(t), _family(t)) for t in _split_list(cfg["learner"])]


def _pair_label(pi, g):
    return pi.label if pi is g else f"{pi.label} / {g.label}"


def cmd_fit(cfg):
    table = load_borough_csv(cfg["data"])
    obs = table.observations()
    divs = _divergences(cfg["lambda"])
    pairs = _learner_pairs(cfg)
    prior = _prior(cfg)
    seed = cfg["seed"]
    rows = []
    cells = {}
    for pi, g in pairs:
        log.info("cross-fitting %s", _pair_label(pi, g))
        sc = crossfit_scores(obs, pi, k=cfg["folds"], seed=seed, family_g=g)
        dml = dml_estimate(sc)
        for div in divs:
            draws = run_chain(sc, div, prior, _mcmc(cfg, seed))
            lo, hi = draws.equal_tailed_95
            cells[(div.name, _pair_label(pi, g))] = (draws.mean, lo, hi)
            rows.append([
                div.name, div.lam, pi.value, g.value, draws.mean, lo, hi, draws.sd,
                draws.acceptance_rate, dml.beta_hat, dml.se, dml.ci95[0], dml.ci95[1],
            ])
    out = _outdir(cfg)
    header = ["divergence", "lambda", "learner_pi", "learner_g", "posterior_mean", "ci_lo",
              "ci_hi", "posterior_sd", "acceptance_rate", "dml_beta", "dml_se", "dml_lo",
              "dml_hi"]
    write_csv(out / "results.csv", header, rows)
    write_json(out / "report.json", {
        "command": "fit",
        "config": cfg,
        "n": obs.n,
        "p": obs.p,
        "results": [dict(zip(header, r)) for r in rows],
        "note": FOOTER,
    })
    text = _fit_text(cfg, obs, divs, pairs, cells, rows)
    write_text(out / "report.txt", text)
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _fit_text(cfg, obs, divs, pairs, cells, rows):
    cols = [_pair_label(pi, g) for pi, g in pairs]
    width = max(18, *(len(c) + 2 for c in cols))
    lines = [
        "Posterior mean of the treatment effect with 95% equal-tailed credible interval",
        f"data: {cfg['data']} (n={obs.n}, p={obs.p})",
        f"prior: N({cfg['prior_mean']:g}, {cfg['prior_var']:g}); folds: {cfg['folds']}; "
        f"draws: {cfg['draws']}; burn-in: {cfg['burn_in']}; seed: {cfg['seed']}",
        "",
        " " * 6 + "".join(c.rjust(width) for c in cols),
    ]
    for div in divs:
        means, ints = [], []
        for c in cols:
            m, lo, hi = cells[(div.name, c)]
            means.append(_fmt(m).rjust(width))
            ints.append(f"({_fmt(lo)}, {_fmt(hi)})".rjust(width))
        lines.append(div.name.ljust(6) + "".join(means))
        lines.append(" " * 6 + "".join(ints))
    lines.append("")
    lines.append("Frequentist DML comparator (95% Wald interval) and acceptance rates:")
    for r in rows:
        lines.append(
            f"  {r[0]:<5} {_pair_label(Family(r[2]), Family(r[3])):<28} "
            f"DML {r[9]:.4f} ({r[11]:.4f}, {r[12]:.4f})  acceptance {r[8]:.3f}"
        )
    lines.append("")
    lines.append(FOOTER)
    return "\n".join(lines) + "\n"


# simulate -------------------------------------------------------------------


def _scenario(cfg):
    name = cfg["scenario"].strip().lower().replace("-", "").replace("_", "")
    kw = {"n": cfg["n"], "p": cfg["p"]} if "p" in cfg else {"n": cfg["n"]}
    kw = {k: v for k, v in kw.items() if v}
    if name in ("continuous", "continuousexposure"):
        sc = continuous_scenario(**kw)
    elif name in ("binary", "binaryexposure"):
        sc = binary_scenario(**kw)
    elif name in ("splitdemo", "split"):
        sc = split_demo_scenario(**kw)
    else:
        raise ConfigError(f"unknown scenario {cfg['scenario']!r}")
    changes = {}
    if cfg.get("rho") is not None:
        changes["rho"] = cfg["rho"]
    if cfg.get("beta_true") is not None:
        changes["beta_true"] = cfg["beta_true"]
    if "treatment_noise" in cfg:
        changes["treatment_noise"] = cfg["treatment_noise"]
    return sc.with_(**changes) if changes else sc


def cmd_simulate(cfg):
    scenario = _scenario(cfg)
    try:
        methods = [Method.parse(m) for m in _split_list(cfg["methods"])]
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    rows = run_benchmark(
        scenario, methods, cfg["replicates"], cfg["seed"], prior=_prior(cfg),
        mcmc=_mcmc(cfg, cfg["seed"]), k=cfg["folds"], workers=thread_cap(),
    )
    out = _outdir(cfg)
    header = ["method", "bias", "rmse", "coverage", "replicates", "runtime_seconds"]
    table = [
        [r.method, r.bias, r.rmse, r.coverage, r.replicates,
         r.runtime_seconds if cfg["timing"] else math.nan]
        for r in rows
    ]
    write_csv(out / "metrics.csv", header, table)
    write_json(out / "report.json", {
        "command": "simulate",
        "config": cfg,
        "scenario": {"kind": scenario.kind.value, "n": scenario.n, "p": scenario.p,
                     "rho": scenario.rho, "beta_true": scenario.beta_true},
        "rows": [dict(zip(header[:-1], t[:-1]), failures=r.failures)
                 for t, r in zip(table, rows)],
    })
    for t in table:
        print(f"{t[0]:<28} bias {t[1]: .4f}  rmse {t[2]:.4f}  coverage {t[3]:.1f}")


# validate -------------------------------------------------------------------


def cmd_validate(cfg):
    scenario = _scenario(cfg)
    settings = PipelineSettings(
        k=cfg["folds"], split=cfg["split"], nuisance=cfg["nuisance"], learner=cfg["learner"],
        mcmc=McmcConfig(cfg["draws"], cfg["burn_in"]), variance_shrink=cfg["variance_shrink"],
    )
    if settings.nuisance not in ("contaminated", "oracle", "learners", "zero"):
        raise ConfigError(f"unknown nuisance mode {settings.nuisance!r}")
    prior = _prior(cfg)
    out = _outdir(cfg)
    reports = []
    for div in _divergences(cfg["lambda"]):
        rep = run_sbc(cfg["replicates"], prior, scenario, div, settings, cfg["seed"],
                      workers=thread_cap())
        reports.append(rep)
        write_csv(out / f"h_values_{rep.divergence}.csv", ["h"], [[h] for h in rep.h_values])
        write_csv(out / f"h_histogram_{rep.divergence}.csv", HIST_HEADER,
                  histogram_rows(rep.h_values, cfg["bins"], (0.0, 1.0)))
        print(f"{rep.divergence:<5} m={rep.m}  KS D={rep.ks_statistic:.4f}  "
              f"p={rep.ks_p_value:.4f}  failures={rep.failures}")
    write_json(out / "validity.json", {
        "command": "validate",
        "config": cfg,
        "results": [
            {"divergence": r.divergence, "m": r.m, "ks_statistic": r.ks_statistic,
             "ks_p_value": r.ks_p_value, "failures": r.failures}
            for r in reports
        ],
    })


# split-demo -----------------------------------------------------------------


def cmd_split_demo(cfg):
    divs = _divergences(cfg["lambda"])
    rep = run_split_demo(
        cfg["replicates"], cfg["n"], cfg["seed"], divergences=divs, prior=_prior(cfg),
        mcmc=McmcConfig(cfg["draws"], cfg["burn_in"]), k=cfg["folds"],
        contamination=cfg["contamination"], workers=thread_cap(),
    )
    out = _outdir(cfg)
    rows = []
    for method in rep.methods:
        for r, (f, s) in enumerate(zip(rep.standardized_full[method],
                                       rep.standardized_split[method])):
            rows.append([method, r, f, s])
    write_csv(out / "standardized.csv", ["method", "replicate", "full", "split"], rows)
    summary = []
    for method in rep.methods:
        for arm, values in (("full", rep.standardized_full[method]),
                            ("split", rep.standardized_split[method])):
            write_csv(out / f"hist_{method}_{arm}.csv", HIST_HEADER,
                      histogram_rows(values, cfg["bins"], (-5.0, 5.0)))
        summary.append({"method": method, "mean_full": rep.mean_full(method),
                        "mean_split": rep.mean_split(method)})
        print(f"{method:<5} mean_full {rep.mean_full(method): .4f}  "
              f"mean_split {rep.mean_split(method): .4f}")
    write_json(out / "split_demo.json", {
        "command": "split-demo",
        "config": cfg,
        "beta_true": rep.beta_true,
        "summary": summary,
    })


# gel-debug ------------------------------------------------------------------


def _read_psi(cfg):
    if cfg["psi"]:
        try:
            return np.array([float(t) for t in _split_list(cfg["psi"])])
        except ValueError as exc:
            raise DataError(f"--psi: {exc}") from None
    if cfg["data"]:
        values = []
        with open(cfg["data"], encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                text = line.strip().split(",")[0].strip()
                if not text:
                    continue
                try:
                    values.append(float(text))
                except ValueError:
                    if line_no == 1:
                        continue  # header
                    raise DataError(f"{cfg['data']}, row {line_no}: {text!r} is not a number") from None
        return np.array(values)
    raise ConfigError("gel-debug needs --psi or --data")


def cmd_gel_debug(cfg):
    psi = _read_psi(cfg)
    if psi.size == 0:
        raise DataError("no score values given")
    feas = check_feasibility(psi)
    print(f"n={psi.size}  min={psi.min():.12g}  max={psi.max():.12g}  feasible={feas.feasible}")
    for div in _divergences(cfg["lambda"]):
        sol = solve_weights(psi, div)
        w = " ".join(f"{v:.6f}" for v in sol.weights)
        print(f"{div.name} (lambda={div.lam:g})")
        print(f"  weights: {w}")
        print(f"  multipliers: s={sol.s:.12g} t={sol.t:.12g}")
        print(f"  residuals: |sum(p)-1|={sol.residuals[0]:.3e} |sum(p*psi)|={sol.residuals[1]:.3e}")
        print(f"  log profile: {sol.log_profile:.12g}  iterations: {sol.iterations}")


COMMANDS = {
    "fit": cmd_fit,
    "simulate": cmd_simulate,
    "validate": cmd_validate,
    "split-demo": cmd_split_demo,
    "gel-debug": cmd_gel_debug,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bdml", description="Bayesian double machine learning with generalized empirical likelihood."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *names):
        p.add_argument("--config", help="INI config file")
        opts = {
            "seed": ("--seed", int, "master seed"),
            "out": ("--out", str, "output directory"),
            "lambda": ("--lambda", str, "divergence(s): EL, ETEL, HD or numbers, comma separated"),
            "learner": ("--learner", str, "learner family list for both nuisances"),
            "learner_pi": ("--learner-pi", str, "learner for E[D|X]"),
            "learner_g": ("--learner-g", str, "learner for E[Y|X]"),
            "folds": ("--folds", int, "cross-fitting folds"),
            "draws": ("--draws", int, "MCMC draws kept"),
            "burn_in": ("--burn-in", int, "MCMC burn-in"),
            "prior_mean": ("--prior-mean", float, "prior mean"),
            "prior_var": ("--prior-var", float, "prior variance"),
            "replicates": ("--replicates", int, "Monte Carlo replicates"),
            "data": ("--data", str, "input CSV"),
            "scenario": ("--scenario", str, "binary, continuous or splitdemo"),
            "n": ("--n", int, "sample size"),
            "p": ("--p", int, "confounder count"),
            "methods": ("--methods", str, "e.g. 'EL(Lasso),DML(Lasso)'"),
            "nuisance": ("--nuisance", str, "contaminated, oracle, learners or zero"),
            "variance_shrink": ("--variance-shrink", float, "scale chain variance (negative control)"),
            "treatment_noise": ("--treatment-noise", float, "treatment noise SD"),
            "psi": ("--psi", str, "comma-separated score values"),
            "bins": ("--bins", int, "histogram bins"),
        }
        for name in names:
            flag, typ, help_ = opts[name]
            p.add_argument(flag, dest=name, type=typ, default=None, help=help_)

    p = sub.add_parser("fit", help="analyse a borough table")
    common(p, "seed", "out", "data", "lambda", "learner", "learner_pi", "learner_g", "folds",
           "draws", "burn_in", "prior_mean", "prior_var")

    p = sub.add_parser("simulate", help="bias / RMSE / coverage benchmark")
    common(p, "seed", "out", "scenario", "n", "p", "methods", "replicates", "folds", "draws",
           "burn_in", "prior_mean", "prior_var")
    p.add_argument("--timing", action="store_const", const="true", default=None,
                   help="fill runtime_seconds (makes output machine-dependent)")

    p = sub.add_parser("validate", help="simulation-based calibration")
    common(p, "seed", "out", "scenario", "n", "lambda", "replicates", "nuisance", "learner",
           "folds", "draws", "burn_in", "prior_mean", "prior_var", "variance_shrink",
           "treatment_noise", "bins")

    p = sub.add_parser("split-demo", help="full-sample versus split-sample bias")
    common(p, "seed", "out", "n", "lambda", "replicates", "folds", "draws", "burn_in",
           "prior_mean", "prior_var", "bins")
    p.add_argument("--no-contamination", dest="contamination", action="store_const",
                   const="false", default=None)

    p = sub.add_parser("gel-debug", help="solve the weight problem for given scores")
    common(p, "psi", "data", "lambda")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    overrides = {k: v for k, v in vars(args).items()
                 if k not in ("command", "config", "verbose")}
    try:
        cfg = resolve(args.command, args.config, overrides)
        thread_cap()
        t0 = time.perf_counter()
        COMMANDS[args.command](cfg)
        log.info("%s finished in %.1f s", args.command, time.perf_counter() - t0)
    except BdmlError as exc:
        print(f"bdml {args.command}: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, OSError) as exc:
        print(f"bdml {args.command}: error: {exc}", file=sys.stderr)
        return 3 if isinstance(exc, ValueError) else 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
