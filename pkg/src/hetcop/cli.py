"""Command-line pipeline: simulate, pit, fit, metrics, backtest, replicate.

Exit codes: 0 ok, 2 validation error, 3 estimation failure, 4 replication failure.
"""

import argparse
import csv
import json
import os
import sys
import time

import numpy as np

from . import SCHEMA, bicop, datagen, dvine, forecast, inference, margins, studies, volcop

EXIT_OK, EXIT_VALIDATION, EXIT_ESTIMATION, EXIT_REPLICATION = 0, 2, 3, 4


class ValidationError(Exception):
    pass


class ReplicationError(Exception):
    def __init__(self, stage, cause):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage


# ---------------------------------------------------------------------------
# file formats


def write_csv(path, columns, header):
    """RFC-4180 CSV, header row, full float precision."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([_fmt(v) for v in row])


def write_rows(path, rows):
    if not rows:
        raise ValidationError(f"nothing to write to {path}")
    header = list(rows[0])
    write_csv(path, [[r[h] for r in rows] for h in header], header)


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def read_data(path):
    """T x m float matrix from a headed CSV; returns (data, header)."""
    if not os.path.exists(path):
        raise ValidationError(f"data file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise ValidationError(f"{path}: need a header and at least one row")
    header = rows[0]
    try:
        data = np.array([[float(x) for x in r] for r in rows[1:] if r], dtype=float)
    except ValueError as e:
        raise ValidationError(f"{path}: non-numeric entry ({e})") from None
    if data.shape[1] != len(header):
        raise ValidationError(f"{path}: rows do not match the header width")
    return data, header


def write_json(path, kind, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"schema": SCHEMA, "kind": kind, **payload}, fh, indent=2, default=_json_default)
        fh.write("\n")


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    if hasattr(o, "to_dict"):
        return o.to_dict()
    raise TypeError(f"not serializable: {type(o).__name__}")


def read_json(path, kind):
    if not os.path.exists(path):
        raise ValidationError(f"file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        d = json.load(fh)
    if d.get("schema") != SCHEMA:
        raise ValidationError(f"{path}: expected schema {SCHEMA!r}, got {d.get('schema')!r}")
    if d.get("kind") != kind:
        raise ValidationError(f"{path}: expected a {kind} file, got {d.get('kind')!r}")
    return d


def load_model(path):
    return dvine.DVineSpec.from_dict(read_json(path, "model")["model"])


def load_margins(path):
    return [margins.margin_from_dict(m) for m in read_json(path, "margins")["margins"]]


def save_margins(path, ms):
    write_json(path, "margins", {"margins": [m.to_dict() for m in ms]})


def save_model(path, spec):
    write_json(path, "model", {"model": spec.to_dict()})


# ---------------------------------------------------------------------------
# config handling


def _resolved(args):
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "config")}


def echo_config(args, path):
    write_json(path, "config", {"command": args.command, "config": _resolved(args)})


def need_seed(args):
    if args.seed is None:
        env = os.environ.get("HETCOP_SEED")
        if env is None:
            raise ValidationError("a seed is required: pass --seed or set HETCOP_SEED")
        try:
            args.seed = int(env)
        except ValueError:
            raise ValidationError(f"HETCOP_SEED must be an integer, got {env!r}") from None
    return args.seed


def _floats(s):
    try:
        return [float(x) for x in str(s).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {s!r}") from None


def _ints(s):
    try:
        return [int(x) for x in str(s).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}") from None


def _mkdir(path):
    os.makedirs(path, exist_ok=True)
    return path


# ---------------------------------------------------------------------------
# commands


def cmd_simulate(args):
    seed = need_seed(args)
    dgp = args.dgp
    try:
        if dgp in ("arch", "arch1", "arch3"):
            alphas = args.alphas if args.alphas is not None else [args.alpha1 if args.alpha1 is not None else 0.5]
            if dgp == "arch1" and len(alphas) != 1:
                raise ValidationError("arch1 takes a single --alpha1")
            if dgp == "arch3" and len(alphas) != 3:
                raise ValidationError("arch3 needs --alphas a1,a2,a3")
            y = datagen.simulate_arch(args.alpha0, alphas, args.T, seed=seed)
        elif dgp == "garch":
            y = datagen.simulate_garch(args.alpha0, args.alpha1 if args.alpha1 is not None else 0.05,
                                       args.beta1, args.T, seed=seed)
        elif dgp == "sv":
            y = datagen.simulate_sv(args.h_bar, args.phi1, args.sigma2, args.T, seed=seed)
        else:
            if not (args.model and args.margins):
                raise ValidationError("--dgp copula needs --model and --margins")
            spec = load_model(args.model)
            ms = load_margins(args.margins)
            if len(ms) != spec.m:
                raise ValidationError("number of margins does not match the model dimension")
            y = datagen.simulate_copula_model(spec, ms if spec.m > 1 else ms[0], args.T, seed=seed)
    except (datagen.DgpParameterError, dvine.VineSpecError, bicop.CopulaError) as e:
        raise ValidationError(str(e)) from None
    Y = y.reshape(len(y), -1)
    write_csv(args.out, Y.T, [f"y{i + 1}" for i in range(Y.shape[1])])
    echo_config(args, args.out + ".config.json")


def cmd_pit(args):
    Y, header = read_data(args.data)
    ms = [margins.fit_margin(Y[:, j]) for j in range(Y.shape[1])]
    U = np.column_stack([margins.pit(ms[j], Y[:, j]) for j in range(Y.shape[1])])
    write_csv(args.out, U.T, header)
    save_margins(args.margins_out or args.out + ".margins.json", ms)
    echo_config(args, args.out + ".config.json")


def _template(m, p, families):
    cells = dvine.DVineSpec.cells(m, p)
    if len(families) == 1:
        families = families * len(cells)
    if len(families) != len(cells):
        raise ValidationError(f"--family needs 1 or {len(cells)} entries for m={m}, p={p}")
    return dvine.DVineSpec(m, p, {c: studies.default_copula(f) for c, f in zip(cells, families)})


def cmd_fit(args):
    seed = need_seed(args)
    Y, header = read_data(args.data)
    m = Y.shape[1]
    out = _mkdir(args.out_dir)
    echo_config(args, os.path.join(out, "config.json"))
    try:
        spec0 = _template(m, args.p, args.family.split(","))
    except ValueError as e:
        raise ValidationError(str(e)) from None
    if args.margin == "uniform":
        if np.any((Y <= 0) | (Y >= 1)):
            raise ValidationError("--margin uniform needs data strictly inside (0, 1)")
        ms = [margins.ParametricMargin("uniform") for _ in range(m)]
    else:
        ms = [margins.fit_margin(Y[:, j]) for j in range(m)]
    U = np.column_stack([margins.pit(ms[j], Y[:, j]) for j in range(m)])
    u = U[:, 0] if m == 1 else U
    save_margins(os.path.join(out, "margins.json"), ms)
    if args.method == "mle":
        rep = inference.fit_mle(spec0, u, starts=args.starts, seed=seed, se=not args.no_se, threads=args.threads)
        spec = rep.spec
    else:
        cfg = inference.McmcConfig(iterations=args.iterations, burn_in=args.burn_in, seed=seed, thin=args.thin)
        start = None
        if args.mle_start:
            start = inference.fit_mle(spec0, u, starts=args.starts, seed=seed, se=False, threads=args.threads).spec
        rep = inference.fit_mcmc(spec0, u, cfg, start=start, threads=args.threads)
        spec = rep.spec
        rep.extra["posterior_mode"] = rep.extra.pop("best_spec").to_dict()
        chain = rep.extra.pop("chain")
        write_csv(os.path.join(out, "chain.csv"), [*chain["theta"].T, chain["loglik"]], [*rep.names, "loglik"])
    save_model(os.path.join(out, "model.json"), spec)
    report = rep.to_dict()
    if m == 1:
        cop = spec.pairs[(1, 1, 1)]
        report["rho_v1"] = volcop.rho_v_lag1(cop, ms[0])
        report["rho_y1"] = cop.spearman_rho()
    write_json(os.path.join(out, "report.json"), "fit_report", {"report": report})


def cmd_metrics(args):
    seed = need_seed(args)
    spec = load_model(args.model)
    ms = load_margins(args.margins)
    if len(ms) != spec.m:
        raise ValidationError("number of margins does not match the model dimension")
    out = _mkdir(args.out_dir)
    echo_config(args, os.path.join(out, "config.json"))
    lags = args.lags
    if min(lags) < 1:
        raise ValidationError("--lags must be positive")
    paths = volcop.simulate_paths(spec, max(lags) + 1, args.n, seed=seed, threads=args.threads)
    report = {"lags": lags, "n_sim": args.n}
    if spec.m == 1:
        mg = ms[0]
        cop = spec.pairs[(1, 1, 1)]
        report["quadrature"] = {"rho_v1": volcop.rho_v_lag1(cop, mg), "rho_y1": cop.spearman_rho()}
        sim = {}
        for k in lags:
            rv, rv_se = volcop.rho_simulated(spec, mg, k=k, paths=paths, kind="v")
            ry, ry_se = volcop.rho_simulated(spec, mg, k=k, paths=paths, kind="y")
            sim[str(k)] = {"rho_v": rv, "rho_v_se": rv_se, "rho_y": ry, "rho_y_se": ry_se}
        report["simulated"] = sim
        lam = volcop.model_lambda_simulated(spec, lags, args.alphas, paths=paths)
        for k in lags:
            r = lam[k]
            write_csv(os.path.join(out, f"lambda_lag{k}.csv"),
                      [r["alpha"], r["low"], r["up"], r["lu"], r["ul"]],
                      ["alpha", "lambda_low", "lambda_up", "lambda_lu", "lambda_ul"])
    else:
        mats = volcop.dependence_matrices(spec, ms, lags=(0, *lags), paths=paths)
        for k, d in mats.items():
            for name, M in d.items():
                write_csv(os.path.join(out, f"{name}_lag{k}.csv"), M.T, [f"s{j + 1}" for j in range(spec.m)])
        report["matrices"] = {str(k): d for k, d in mats.items()}
    write_json(os.path.join(out, "dependence.json"), "dependence_report", {"report": report})


def cmd_backtest(args):
    spec = load_model(args.model)
    ms = load_margins(args.margins)
    Y, _ = read_data(args.data)
    if Y.shape[1] != spec.m or len(ms) != spec.m:
        raise ValidationError("data, margins and model dimensions disagree")
    alphas = args.alphas
    if spec.m == 1:
        rows = forecast.backtest_table(forecast.rolling_backtest(spec, ms[0], Y[:, 0], alphas))
    else:
        seed = need_seed(args)
        w_first = np.eye(spec.m)[0]
        first = forecast.portfolio_backtest(spec, ms, Y, alphas, weights=w_first, n=args.draws,
                                            seed=seed, days=args.days)
        port = forecast.portfolio_backtest(spec, ms, Y, alphas, n=args.draws, seed=seed + 1, days=args.days)
        rows = [{"block": "series1", **r} for r in forecast.backtest_table(first)]
        rows += [{"block": "portfolio", **r} for r in forecast.backtest_table(port)]
    write_rows(args.out, rows)
    echo_config(args, args.out + ".config.json")


def cmd_replicate(args):
    if args.study not in studies.STUDIES:
        raise ValidationError(f"unknown study {args.study!r}; choose from {sorted(studies.STUDIES)}")
    out = _mkdir(args.out_dir)
    echo_config(args, os.path.join(out, "config.json"))
    t0 = time.time()
    kw = {}
    if args.T is not None:
        kw["T"] = args.T
    if args.seed is not None:
        kw["seed"] = args.seed
    if args.study == "simstudy" and args.reps is not None:
        kw["reps"] = args.reps
    try:
        res = studies.STUDIES[args.study](**kw)
    except Exception as e:  # any failing stage is a replication failure
        raise ReplicationError(args.study, f"{type(e).__name__}: {e}") from e
    try:
        if args.study == "arch3":
            for case in sorted({r["case"] for r in res["rows"]}):
                for k in (1, 2, 3):
                    sel = [r for r in res["rows"] if r["case"] == case and r["lag"] == k]
                    write_rows(os.path.join(out, f"lambda_case{case}_lag{k}.csv"), sel)
        else:
            flat = [{kk: (json.dumps(v) if isinstance(v, dict) else v) for kk, v in r.items()} for r in res["rows"]]
            write_rows(os.path.join(out, "results.csv"), flat)
        summary = {"study": args.study, "seconds": time.time() - t0, "checks": res["checks"],
                   "all_passed": all(c["passed"] for c in res["checks"])}
        write_json(os.path.join(out, "summary.json"), "replication_summary",
                   {"summary": summary, **{k: v for k, v in res.items() if k not in ("rows", "checks")}})
        with open(os.path.join(out, "summary.txt"), "w", encoding="utf-8") as fh:
            for c in res["checks"]:
                fh.write(f"{'PASS' if c['passed'] else 'FAIL'}  {c['name']}: {c['value']:.4f} "
                         f"(target {c['target']}, tol {c['tol']})\n")
    except OSError as e:
        raise ReplicationError("write-report", e) from e
    for c in res["checks"]:
        print(f"{'PASS' if c['passed'] else 'FAIL'}  {c['name']}")


# ---------------------------------------------------------------------------
# parser


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of option defaults; flags override it")
    common.add_argument("--seed", type=int, default=None, help="RNG seed (fallback: HETCOP_SEED)")
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p = argparse.ArgumentParser(prog="hetcop", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    _add = sub.add_parser

    def add_parser(name, **kw):
        return _add(name, parents=[common], **kw)

    sub.add_parser = add_parser

    s = sub.add_parser("simulate", help="simulate a benchmark or copula series to CSV")
    s.add_argument("--dgp", required=True, choices=["arch", "arch1", "arch3", "garch", "sv", "copula"])
    s.add_argument("--T", type=int, required=True)
    s.add_argument("--alpha0", type=float, default=0.01)
    s.add_argument("--alpha1", type=float)
    s.add_argument("--alphas", type=_floats, help="ARCH lag coefficients, comma separated")
    s.add_argument("--beta1", type=float, default=0.9)
    s.add_argument("--h-bar", type=float, default=0.8)
    s.add_argument("--phi1", type=float, default=0.5)
    s.add_argument("--sigma2", type=float, default=2.5)
    s.add_argument("--model")
    s.add_argument("--margins")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("pit", help="fit margins and write copula data")
    s.add_argument("--data", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--margins-out")
    s.set_defaults(func=cmd_pit)

    s = sub.add_parser("fit", help="fit margins and a D-vine copula")
    s.add_argument("--data", required=True)
    s.add_argument("--out-dir", required=True)
    s.add_argument("--family", default="A", help="A (mixture of t) or B (mixture of convex Gumbel), per cell")
    s.add_argument("--p", type=int, default=1)
    s.add_argument("--method", choices=["mle", "mcmc"], default="mle")
    s.add_argument("--starts", type=int, default=5)
    s.add_argument("--no-se", action="store_true")
    s.add_argument("--margin", choices=("kde", "uniform"), default="kde",
                   help="kde: adaptive KDE margins; uniform: data are already PITs on (0, 1)")
    s.add_argument("--iterations", type=int, default=20000)
    s.add_argument("--burn-in", type=int, default=5000)
    s.add_argument("--thin", type=int, default=10)
    s.add_argument("--mle-start", action="store_true", help="start the chain at the MLE")
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("metrics", help="dependence metrics of a fitted model")
    s.add_argument("--model", required=True)
    s.add_argument("--margins", required=True)
    s.add_argument("--out-dir", required=True)
    s.add_argument("--lags", type=_ints, default=[1, 2, 3, 4, 5])
    s.add_argument("--alphas", type=_floats, default=list(studies.LAMBDA_ALPHAS))
    s.add_argument("--n", type=int, default=200_000)
    s.set_defaults(func=cmd_metrics)

    s = sub.add_parser("backtest", help="one-step-ahead VaR backtest table")
    s.add_argument("--model", required=True)
    s.add_argument("--margins", required=True)
    s.add_argument("--data", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--alphas", type=_floats, default=list(forecast.ALPHAS))
    s.add_argument("--draws", type=int, default=forecast.PORTFOLIO_DRAWS)
    s.add_argument("--days", type=int, help="portfolio: only the last N days")
    s.set_defaults(func=cmd_backtest)

    s = sub.add_parser("replicate", help="run a seeded replication study")
    s.add_argument("study")
    s.add_argument("--out-dir", required=True)
    s.add_argument("--T", type=int)
    s.add_argument("--reps", type=int)
    s.set_defaults(func=cmd_replicate)
    return p


def _apply_config(parser, argv):
    # a --config file supplies defaults for the chosen subcommand
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    if not os.path.exists(known.config):
        raise ValidationError(f"config file not found: {known.config}")
    with open(known.config, encoding="utf-8") as fh:
        cfg = json.load(fh)
    cfg = cfg.get("config", cfg)
    for sp in parser._subparsers._group_actions[0].choices.values():
        dests = {a.dest for a in sp._actions}
        sp.set_defaults(**{k: v for k, v in cfg.items() if k in dests})
        for a in sp._actions:
            if a.dest in cfg:
                a.required = False


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        if args.threads < 1:
            raise ValidationError("--threads must be >= 1")
        args.func(args)
    except ValidationError as e:
        print(f"hetcop: error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except (inference.FitError, inference.McmcDiagnosticsError, bicop.NumericalError) as e:
        print(f"hetcop: estimation failed: {e}", file=sys.stderr)
        return EXIT_ESTIMATION
    except ReplicationError as e:
        print(f"hetcop: replication failed: {e}", file=sys.stderr)
        return EXIT_REPLICATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
