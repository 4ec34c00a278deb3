"""Command-line harness: config-driven experiments, CSV tables, SVG plots.

Configs are TOML with strict key checking (unknown keys are errors).  Each
experiment writes one CSV whose columns are documented in a leading comment
line; numbers use the shortest round-trip representation, so identical
configs produce byte-identical artifacts.  The process exits 0 only when
every emitted bound verdict is satisfied.

Subcommands::

    langevin-lab run <config.toml>
    langevin-lab verify --suite <kl|renyi-lsi|renyi-pi|all>
    langevin-lab plan --alpha A --L L --n N --delta D --h0 H0

The only environment override is ``LANGEVIN_LAB_OUTDIR`` (output directory).
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import bounds as bnd
from . import functionals as fn
from . import gaussian_dynamics as gd
from . import grid1d
from ._svg import write_line_chart
from .sampler import ChainConfig, run_chains
from .targets import GaussianTargetSpec, MixtureTargetSpec, make_gaussian_target, make_mixture_target

__all__ = ["main", "console_main", "run_config", "builtin_suite", "ConfigError"]

KINDS = (
    "verify-kl",
    "verify-renyi-lsi",
    "verify-renyi-pi",
    "gaussian-track",
    "grid-evolve",
    "sample",
    "plan",
    "bounds-table",
)


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# strict config parsing
# ---------------------------------------------------------------------------

_TARGET_KEYS = {"kind", "mean", "precision", "components"}
_PARAM_KEYS = {
    "eps",
    "steps",
    "q",
    "init_mean",
    "init_cov",
    "init_sigma",
    "chains",
    "seed",
    "record",
    "bin_edges",
    "engine",
    "lo",
    "hi",
    "m",
    "dt",
    "snapshots",
    "alpha",
    "L",
    "n",
    "delta",
    "h0",
    "theorem",
    "k",
    "H0",
    "unsafe_allow_unstable",
}
_EXPERIMENT_KEYS = {"kind", "name", "svg", "log_y", "target", "params", "tolerances"}
_TOL_KEYS = {"slack"}
_OUTPUT_KEYS = {"dir", "parallel"}
_TOP_KEYS = {"output", "experiment"}


def _reject_unknown(table: dict, allowed: set, where: str):
    unknown = sorted(set(table) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) {unknown} in {where}")


def load_config(path: str) -> dict:
    with open(path, "rb") as fh:
        try:
            cfg = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:  # message carries line/column
            raise ConfigError(f"config parse error in {path}: {exc}") from exc
    _reject_unknown(cfg, _TOP_KEYS, "top level")
    out = cfg.get("output", {})
    _reject_unknown(out, _OUTPUT_KEYS, "[output]")
    experiments = cfg.get("experiment", [])
    if not isinstance(experiments, list):
        raise ConfigError("[[experiment]] must be an array of tables")
    for i, exp in enumerate(experiments):
        where = f"[[experiment]] #{i + 1}"
        _reject_unknown(exp, _EXPERIMENT_KEYS, where)
        if exp.get("kind") not in KINDS:
            raise ConfigError(f"{where}: kind must be one of {KINDS}, got {exp.get('kind')!r}")
        if not exp.get("name"):
            raise ConfigError(f"{where}: every experiment needs a name")
        _reject_unknown(exp.get("target", {}), _TARGET_KEYS, f"{where}.target")
        _reject_unknown(exp.get("params", {}), _PARAM_KEYS, f"{where}.params")
        tols = exp.get("tolerances", {})
        _reject_unknown(tols, _TOL_KEYS, f"{where}.tolerances")
        for key, value in tols.items():
            if not value > 0.0:
                raise ConfigError(f"{where}.tolerances.{key} must be positive")
    return cfg


def _build_target(tcfg: dict, where: str):
    kind = tcfg.get("kind")
    if kind == "gaussian":
        try:
            spec = GaussianTargetSpec(
                mean=np.asarray(tcfg["mean"], float),
                precision=np.asarray(tcfg["precision"], float),
            )
        except KeyError as exc:
            raise ConfigError(f"{where}: gaussian target needs {exc}") from exc
        return make_gaussian_target(spec), spec
    if kind == "mixture":
        comps = tcfg.get("components")
        if not comps:
            raise ConfigError(f"{where}: mixture target needs components")
        spec = MixtureTargetSpec(
            components=tuple(
                (c["weight"], np.asarray(c["mean"], float), np.asarray(c["cov"], float))
                for c in comps
            )
        )
        return make_mixture_target(spec), spec
    raise ConfigError(f"{where}: target kind must be 'gaussian' or 'mixture', got {kind!r}")


# ---------------------------------------------------------------------------
# CSV / SVG emission
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path, comment: str, columns, rows):
    with open(path, "w") as fh:
        fh.write(f"# {comment}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


class ExperimentResult:
    def __init__(self, name, csv_path, satisfied_flags, svg_path=None):
        self.name = name
        self.csv_path = csv_path
        self.satisfied_flags = satisfied_flags
        self.svg_path = svg_path

    @property
    def ok(self) -> bool:
        return all(self.satisfied_flags)

    @property
    def violations(self) -> int:
        return sum(1 for s in self.satisfied_flags if not s)


# ---------------------------------------------------------------------------
# experiment handlers
# ---------------------------------------------------------------------------


def _init_law(params, spec, where) -> gd.GaussianMeasure:
    mean = np.asarray(params.get("init_mean", spec.mean), float)
    cov = np.asarray(params.get("init_cov", spec.covariance), float)
    try:
        return gd.GaussianMeasure(mean, cov)
    except ValueError as exc:
        raise ConfigError(f"{where}: bad init law: {exc}") from exc


def _run_verify_kl(exp, outdir):
    where = exp["name"]
    params = exp.get("params", {})
    target, spec = _build_target(exp.get("target", {}), where)
    if not isinstance(spec, GaussianTargetSpec):
        raise ConfigError(f"{where}: verify-kl tracks exact laws; target must be gaussian")
    eps = float(params["eps"])
    steps = int(params["steps"])
    slack = float(exp.get("tolerances", {}).get("slack", 1e-12))
    unstable_ok = bool(params.get("unsafe_allow_unstable", False))
    alpha, L, n = spec.strong_convexity, spec.smoothness, spec.dimension
    law = _init_law(params, spec, where)
    nu = gd.GaussianMeasure(spec.mean, spec.covariance)
    h0 = fn.kl_gaussian(law, nu)
    bias_exact = (
        fn.kl_gaussian(gd.ula_stationary_gaussian(spec, eps), nu)
        if eps < 2.0 / L
        else math.inf
    )
    rows = []
    flags = []
    ks, obs_series, bound_series = [], [], []
    import warnings as _warnings

    for k in range(steps + 1):
        h = fn.kl_gaussian(law, nu)
        rep = bnd.kl_ula_bound(
            alpha, L, n, eps, k, h0, observed=h, tol=slack, check_window=not unstable_ok
        )
        rows.append((k, h, rep.bound_value, bias_exact, rep.satisfied))
        flags.append(rep.satisfied)
        ks.append(k)
        obs_series.append(h)
        bound_series.append(rep.bound_value)
        if k < steps:
            with _warnings.catch_warnings():
                if unstable_ok:
                    _warnings.simplefilter("ignore", gd.UnstableStepWarning)
                law = gd.ula_step_gaussian(law, spec, eps)
    csv_path = os.path.join(outdir, f"{exp['name']}.csv")
    _write_csv(
        csv_path,
        "k: step index; observed_kl: exact KL(rho_k | nu); bound: ULA KL bound; "
        "bias_exact: exact Gaussian bias KL(nu_eps | nu) (inf if divergent); "
        "satisfied: observed_kl <= bound + slack",
        ("k", "observed_kl", "bound", "bias_exact", "satisfied"),
        rows,
    )
    svg_path = None
    if exp.get("svg", False):
        svg_path = os.path.join(outdir, f"{exp['name']}.svg")
        write_line_chart(
            svg_path,
            ks,
            {"observed": obs_series, "bound": bound_series},
            title=exp["name"],
            xlabel="step k",
            ylabel="KL divergence",
            log_y=bool(exp.get("log_y", False)),
        )
    return ExperimentResult(exp["name"], csv_path, flags, svg_path)


def _run_verify_renyi(exp, outdir, kind):
    where = exp["name"]
    params = exp.get("params", {})
    target, spec = _build_target(exp.get("target", {}), where)
    if not isinstance(spec, GaussianTargetSpec):
        raise ConfigError(f"{where}: exact Renyi tracking needs a gaussian target")
    eps = float(params["eps"])
    steps = int(params["steps"])
    qs = params.get("q", [2.0])
    qs = [float(q) for q in (qs if isinstance(qs, list) else [qs])]
    slack = float(exp.get("tolerances", {}).get("slack", 1e-10))
    L = spec.smoothness
    nu_eps = gd.ula_stationary_gaussian(spec, eps)
    beta = 1.0 / float(np.linalg.eigvalsh(nu_eps.cov)[-1])
    law0 = _init_law(params, spec, where)
    laws = gd.ula_track(law0, spec, eps, steps)
    rows, flags = [], []
    ks = list(range(steps + 1))
    series = {}
    variant = "LSI" if kind == "verify-renyi-lsi" else "PI"
    for q in qs:
        r0 = fn.renyi_gaussian(law0, nu_eps, q)
        if math.isinf(r0):
            raise ConfigError(
                f"{where}: R_q(rho_0 | nu_eps) is infinite for q={q}; narrow the init law"
            )
        obs_list = []
        for k, law in enumerate(laws):
            obs = fn.renyi_gaussian(law, nu_eps, q)
            rep = bnd.biased_limit_renyi_rate(
                beta, L, q, eps, k, r0, kind=variant, observed=obs, tol=slack
            )
            rows.append((q, k, obs, rep.bound_value, rep.satisfied))
            flags.append(rep.satisfied)
            obs_list.append(obs)
        series[f"observed q={q:g}"] = obs_list
        series[f"bound q={q:g}"] = [
            bnd.biased_limit_renyi_rate(beta, L, q, eps, k, r0, kind=variant).bound_value
            for k in ks
        ]
    csv_path = os.path.join(outdir, f"{exp['name']}.csv")
    _write_csv(
        csv_path,
        "q: Renyi order; k: step index; observed: exact R_q(rho_k | nu_eps); "
        f"bound: {variant} biased-limit rate; satisfied: observed <= bound + slack",
        ("q", "k", "observed", "bound", "satisfied"),
        rows,
    )
    svg_path = None
    if exp.get("svg", False):
        svg_path = os.path.join(outdir, f"{exp['name']}.svg")
        write_line_chart(
            svg_path,
            ks,
            series,
            title=exp["name"],
            xlabel="step k",
            ylabel="Renyi divergence",
            log_y=bool(exp.get("log_y", False)),
        )
    return ExperimentResult(exp["name"], csv_path, flags, svg_path)


def _run_gaussian_track(exp, outdir):
    where = exp["name"]
    params = exp.get("params", {})
    target, spec = _build_target(exp.get("target", {}), where)
    if not isinstance(spec, GaussianTargetSpec):
        raise ConfigError(f"{where}: gaussian-track needs a gaussian target")
    eps = float(params["eps"])
    steps = int(params["steps"])
    law = _init_law(params, spec, where)
    n = spec.dimension
    columns = ["k"] + [f"mean_{i}" for i in range(n)] + [
        f"cov_{i}_{j}" for i in range(n) for j in range(n)
    ]
    rows = []
    for k in range(steps + 1):
        rows.append((k, *law.mean.tolist(), *law.cov.reshape(-1).tolist()))
        if k < steps:
            law = gd.ula_step_gaussian(law, spec, eps)
    csv_path = os.path.join(outdir, f"{exp['name']}.csv")
    _write_csv(
        csv_path,
        "k: step index; mean_i: exact ULA law mean; cov_i_j: exact ULA law covariance",
        columns,
        rows,
    )
    return ExperimentResult(exp["name"], csv_path, [])


def _run_grid_evolve(exp, outdir):
    where = exp["name"]
    params = exp.get("params", {})
    target, _spec = _build_target(exp.get("target", {}), where)
    if target.dimension != 1:
        raise ConfigError(f"{where}: grid-evolve is 1D only")
    lo, hi, m = float(params["lo"]), float(params["hi"]), int(params["m"])
    init_mean = float(np.atleast_1d(params.get("init_mean", [0.0]))[0])
    init_sigma = float(params.get("init_sigma", 1.0))
    rho = grid1d.discretize(
        lambda x: np.exp(-0.5 * (x - init_mean) ** 2 / init_sigma**2)
        / math.sqrt(2.0 * math.pi * init_sigma**2),
        lo,
        hi,
        m,
    )
    engine = params.get("engine", "fokker-planck")
    snapshots = params.get("snapshots")
    if not snapshots:
        raise ConfigError(f"{where}: grid-evolve needs snapshots")
    xs = rho.xs
    columns = ["x"]
    data = [xs]
    if engine == "fokker-planck":
        dt = float(params.get("dt", grid1d.fokker_planck_max_dt(rho, target)))
        t = 0.0
        for t_snap in [float(s) for s in snapshots]:
            nsteps = int(round((t_snap - t) / dt))
            if nsteps > 0:
                rho = grid1d.fokker_planck_evolve(rho, target, dt, nsteps)
                t += nsteps * dt
            columns.append(f"rho_t{t_snap:g}")
            data.append(rho.values)
    elif engine == "ula":
        eps = float(params["eps"])
        k = 0
        for k_snap in [int(s) for s in snapshots]:
            for _ in range(k_snap - k):
                rho = grid1d.ula_density_step(rho, target, eps)
            k = k_snap
            columns.append(f"rho_k{k_snap}")
            data.append(rho.values)
    else:
        raise ConfigError(f"{where}: engine must be 'fokker-planck' or 'ula'")
    rows = list(zip(*[list(map(float, col)) for col in data]))
    csv_path = os.path.join(outdir, f"{exp['name']}.csv")
    _write_csv(
        csv_path,
        f"x: grid abscissa; rho_*: density snapshots from the {engine} engine",
        columns,
        rows,
    )
    svg_path = None
    if exp.get("svg", False):
        svg_path = os.path.join(outdir, f"{exp['name']}.svg")
        write_line_chart(
            svg_path,
            xs,
            {c: d for c, d in zip(columns[1:], data[1:])},
            title=exp["name"],
            xlabel="x",
            ylabel="density",
        )
    return ExperimentResult(exp["name"], csv_path, [], svg_path)


def _run_sample(exp, outdir):
    where = exp["name"]
    params = exp.get("params", {})
    target, spec = _build_target(exp.get("target", {}), where)
    n = target.dimension
    init_mean = np.asarray(params.get("init_mean", np.zeros(n)), float)
    cfg = ChainConfig(
        eps=float(params["eps"]),
        steps=int(params["steps"]),
        chains=int(params.get("chains", 1000)),
        seed=int(params.get("seed", 0)),
        init_mean=init_mean,
        init_sigma=float(params.get("init_sigma", 1.0)),
        bin_edges=np.asarray(params["bin_edges"], float) if "bin_edges" in params else None,
    )
    record = params.get("record", [cfg.steps])
    summary = run_chains(target, cfg, record)
    columns = (
        ["step"]
        + [f"mean_{i}" for i in range(n)]
        + [f"cov_{i}_{j}" for i in range(n) for j in range(n)]
    )
    if summary.hists is not None:
        columns += [f"hist_{i}" for i in range(len(summary.bin_edges) - 1)]
    rows = []
    for idx, step in enumerate(summary.steps):
        row = [step] + summary.means[idx].tolist() + summary.covs[idx].reshape(-1).tolist()
        if summary.hists is not None:
            row += [int(c) for c in summary.hists[idx]]
        rows.append(tuple(row))
    csv_path = os.path.join(outdir, f"{exp['name']}.csv")
    _write_csv(
        csv_path,
        "step: recorded step; mean_i / cov_i_j: empirical moments; hist_i: bin counts",
        columns,
        rows,
    )
    return ExperimentResult(exp["name"], csv_path, [])


def _run_plan(exp, outdir):
    params = exp.get("params", {})
    plan = bnd.plan_kl(
        float(params["alpha"]),
        float(params["L"]),
        float(params["n"]),
        float(params["delta"]),
        float(params["h0"]),
    )
    csv_path = os.path.join(outdir, f"{exp['name']}.csv")
    _write_csv(
        csv_path,
        "eps: planned step size; k: planned iterations; delta: target accuracy; regime",
        ("eps", "k", "delta", "regime"),
        [(plan.eps, plan.k, plan.delta, plan.regime)],
    )
    return ExperimentResult(exp["name"], csv_path, [])


def _run_bounds_table(exp, outdir):
    where = exp["name"]
    params = exp.get("params", {})
    theorem = params.get("theorem", "kl-ula")
    if theorem != "kl-ula":
        raise ConfigError(f"{where}: bounds-table currently tabulates theorem='kl-ula'")

    def _aslist(key, default):
        v = params.get(key, default)
        return [float(x) for x in (v if isinstance(v, list) else [v])]

    alphas = _aslist("alpha", [1.0])
    Ls = _aslist("L", [1.0])
    ns = _aslist("n", [1.0])
    epss = _aslist("eps", [0.1])
    ks = [int(k) for k in params.get("k", [100])] if isinstance(params.get("k", [100]), list) else [int(params.get("k", 100))]
    h0s = _aslist("H0", [1.0])
    rows = []
    for alpha in alphas:
        for L in Ls:
            for n in ns:
                for eps in epss:
                    for k in ks:
                        for h0 in h0s:
                            rep = bnd.kl_ula_bound(alpha, L, n, eps, k, h0)
                            rows.append(
                                (rep.theorem_id, alpha, L, n, eps, k, h0, rep.bound_value)
                            )
    csv_path = os.path.join(outdir, f"{exp['name']}.csv")
    _write_csv(
        csv_path,
        "theorem_id; inputs alpha, L, n, eps, k, H0; bound: evaluated RHS",
        ("theorem_id", "alpha", "L", "n", "eps", "k", "H0", "bound"),
        rows,
    )
    return ExperimentResult(exp["name"], csv_path, [])


_HANDLERS = {
    "verify-kl": _run_verify_kl,
    "verify-renyi-lsi": lambda exp, outdir: _run_verify_renyi(exp, outdir, "verify-renyi-lsi"),
    "verify-renyi-pi": lambda exp, outdir: _run_verify_renyi(exp, outdir, "verify-renyi-pi"),
    "gaussian-track": _run_gaussian_track,
    "grid-evolve": _run_grid_evolve,
    "sample": _run_sample,
    "plan": _run_plan,
    "bounds-table": _run_bounds_table,
}


def run_config(cfg: dict, stdout=sys.stdout) -> int:
    out = cfg.get("output", {})
    outdir = os.environ.get("LANGEVIN_LAB_OUTDIR") or out.get("dir", "langevin-lab-out")
    os.makedirs(outdir, exist_ok=True)
    experiments = cfg.get("experiment", [])
    if not experiments:
        return 0

    def _run_one(exp):
        return _HANDLERS[exp["kind"]](exp, outdir)

    if out.get("parallel", False):
        with ThreadPoolExecutor() as pool:
            results = list(pool.map(_run_one, experiments))
    else:
        results = [_run_one(exp) for exp in experiments]

    failures = 0
    for res in results:
        status = "ok" if res.ok else f"{res.violations} bound violation(s)"
        print(f"{res.name}: {res.csv_path} [{status}]", file=stdout)
        if not res.ok:
            failures += 1
    if failures:
        print(f"{failures} experiment(s) with violated bounds", file=stdout)
        return 1
    return 0


# ---------------------------------------------------------------------------
# built-in verification suites
# ---------------------------------------------------------------------------


def builtin_suite(name: str) -> dict:
    gaussian_1d = {"kind": "gaussian", "mean": [0.0], "precision": [[1.0]]}
    suites = {
        "kl": [
            {
                "kind": "verify-kl",
                "name": "suite_kl",
                "svg": True,
                "target": gaussian_1d,
                "params": {
                    "eps": 0.25,
                    "steps": 200,
                    "init_mean": [1.0],
                    "init_cov": [[2.0]],
                },
            }
        ],
        "renyi-lsi": [
            {
                "kind": "verify-renyi-lsi",
                "name": "suite_renyi_lsi",
                "svg": True,
                "target": gaussian_1d,
                "params": {
                    "eps": 0.1,
                    "steps": 300,
                    "q": [2.0, 4.0],
                    "init_mean": [0.5],
                    "init_cov": [[0.5]],
                },
            }
        ],
        "renyi-pi": [
            {
                "kind": "verify-renyi-pi",
                "name": "suite_renyi_pi",
                "svg": True,
                "target": gaussian_1d,
                "params": {
                    "eps": 0.1,
                    "steps": 400,
                    "q": [2.0, 4.0],
                    "init_mean": [2.0],
                    "init_cov": [[0.5]],
                },
            }
        ],
    }
    if name == "all":
        experiments = [e for group in suites.values() for e in group]
    elif name in suites:
        experiments = suites[name]
    else:
        raise ConfigError(f"unknown suite {name!r}; choose from {sorted(suites) + ['all']}")
    return {"experiment": experiments}


# ---------------------------------------------------------------------------
# entry points
# ---------------------------------------------------------------------------


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="langevin-lab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the experiments in a TOML config")
    p_run.add_argument("config")

    p_verify = sub.add_parser("verify", help="run a built-in verification suite")
    p_verify.add_argument("--suite", required=True)

    p_plan = sub.add_parser("plan", help="step-size/iteration planner for the KL bound")
    p_plan.add_argument("--alpha", type=float, required=True)
    p_plan.add_argument("--L", type=float, required=True)
    p_plan.add_argument("--n", type=float, required=True)
    p_plan.add_argument("--delta", type=float, required=True)
    p_plan.add_argument("--h0", type=float, required=True)

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return run_config(load_config(args.config))
        if args.command == "verify":
            return run_config(builtin_suite(args.suite))
        if args.command == "plan":
            plan = bnd.plan_kl(args.alpha, args.L, args.n, args.delta, args.h0)
            print(f"eps={plan.eps!r} k={plan.k}")
            return 0
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def console_main():  # pragma: no cover
    sys.exit(main())
