"""Batch command-line entry point.

Loads a TOML or JSON config describing one command, runs the mapped library
operation, and writes delimited tables, JSON manifests, and (by default)
rendered figures into the output directory.

Exit status: 0 when every asserted contract in the run held, 1 when a
contract failed (the manifest points at the failing table), 2 on config,
schema, or input-file errors.

Determinism: same config, seed, and worker count reproduce every CSV/JSON
output byte for byte; the manifest's wall-time field is the one exception.
Worker count is accepted and recorded but the current implementation runs
every section serially, which satisfies the determinism contract trivially.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, chaining, figures, fixtures, holder, metric, modulus
from . import pam as pam_mod
from . import stochastic as st
from .errors import ChainboundError, ParseError, UsageError
from .reporting import ManifestBuilder, write_csv, write_json

_REQUIRED = object()

COMMANDS = {}


def command(name):
    def wrap(fn):
        COMMANDS[name] = fn
        return fn
    return wrap


def _get(cfg: dict, key: str, types, default=_REQUIRED, where: str = "config"):
    if key not in cfg:
        if default is _REQUIRED:
            raise UsageError(f"{where}: missing required key {key!r}")
        return default
    val = cfg[key]
    if types is float and isinstance(val, int) and not isinstance(val, bool):
        val = float(val)
    if types is not None and not isinstance(val, types):
        raise UsageError(
            f"{where}: key {key!r} has type {type(val).__name__}, "
            f"expected {getattr(types, '__name__', types)}"
        )
    return val


def load_config(path: Path) -> dict:
    """TOML or JSON, auto-detected by suffix then content."""
    text = path.read_bytes()
    if path.suffix.lower() == ".json":
        return json.loads(text)
    try:
        import tomllib  # py >= 3.11
    except ModuleNotFoundError:
        import tomli as tomllib
    if path.suffix.lower() == ".toml":
        return tomllib.loads(text.decode("utf-8"))
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return tomllib.loads(text.decode("utf-8"))


def _resolve_space(cfg: dict) -> tuple[metric.MetricSpace, metric.DimensionInfo]:
    named = fixtures.standard_fixtures()
    if "fixture" in cfg:
        name = _get(cfg, "fixture", str)
        if name not in named:
            raise UsageError(
                f"unknown fixture {name!r}; choose from {sorted(named)}"
            )
        space, dims = named[name]
    elif "cloud" in cfg:
        space = metric.load_point_cloud(_get(cfg, "cloud", str))
        dims = metric.euclidean_dims(space.coords.shape[1])
    elif "distance_matrix" in cfg:
        space = metric.load_distance_matrix(_get(cfg, "distance_matrix", str))
        dims = None
    else:
        raise UsageError("config needs one of: fixture, cloud, distance_matrix")
    spec = cfg.get("dims", "euclidean")
    if isinstance(spec, dict):
        dims = metric.DimensionInfo(
            d=float(spec["d"]), c=float(spec["c"]), n2=int(spec["n2"]),
            source="config",
        )
    elif spec == "fit":
        dims = metric.fit_dimension(space)
    elif spec != "euclidean" or dims is None:
        if dims is None:
            raise UsageError("explicit-table spaces need dims = {d, c, n2} or 'fit'")
    return space, dims


def _resolve_fields(space, cfg: dict, default_count=1, where="fields"):
    spec = cfg.get(where, {"kind": "brownian", "seed": 0})
    if isinstance(spec, dict) and "count" in spec:
        return fixtures.field_catalog(space, int(spec["count"]),
                                      seed=int(spec.get("seed", 0)))
    makers = {
        "lipschitz": fixtures.lipschitz_field,
        "sqrt": fixtures.sqrt_field,
        "brownian": fixtures.brownian_field,
    }
    kind = spec.get("kind", "brownian")
    if kind not in makers:
        raise UsageError(f"unknown field kind {kind!r}")
    return [makers[kind](space, seed=int(spec.get("seed", 0)))
            for _ in range(default_count)]


def _weights_from(cfg: dict, key="weights"):
    specs = cfg.get(key, [{"kind": "power", "alpha": 0.5}])
    if isinstance(specs, dict):
        specs = [specs]
    return [modulus.parse_modulus(s) for s in specs]


# -- commands ----------------------------------------------------------------


@command("net-build")
def run_net_build(cfg, out, manifest, render):
    space, dims = _resolve_space(cfg)
    levels = cfg.get("levels")
    net = chaining.build_net(space, dims, None if levels is None else int(levels))
    report = chaining.verify_net(net)
    chaining.save_net(manifest.add(out / "net.json"), net)
    write_csv(manifest.add(out / "net_invariants.csv"),
              ["invariant", "passed", "detail"],
              [{"invariant": n, "passed": ok, "detail": d}
               for n, ok, d in report.entries])
    if render:
        figures.net_figure(net, manifest.add(out / "net.png"))
    return report.all_passed


@command("seminorm")
def run_seminorm(cfg, out, manifest, render):
    space, dims = _resolve_space(cfg)
    field = _resolve_fields(space, cfg, where="field")[0]
    rows = []
    for w in _weights_from(cfg):
        res = holder.seminorm_exact(field, w)
        try:
            c_w, d_w = modulus.certified_constants(w)
            consts = holder.embedding_constants(c_w, d_w, dims)
        except ChainboundError:
            consts = (math.nan, math.nan)
        rows.append({
            "weight": res.weight, "value": res.value,
            "witness_i": res.witness[0], "witness_j": res.witness[1],
            "c_lower": consts[0], "c_upper": consts[1],
        })
    write_csv(manifest.add(out / "seminorm.csv"), list(rows[0]), rows)
    write_json(manifest.add(out / "seminorm.json"), rows)
    return None


@command("sandwich")
def run_sandwich(cfg, out, manifest, render):
    space, dims = _resolve_space(cfg)
    cache = cfg.get("net_cache")
    if cache:
        net = chaining.load_net(cache, space)
        dims = net.dims
    else:
        net = chaining.build_net(space, dims)
    report = chaining.verify_net(net)
    ok = report.all_passed
    rows = []
    fields = _resolve_fields(space, cfg, default_count=3)
    for w in _weights_from(cfg):
        c_w, d_w = modulus.certified_constants(w)
        c_lo, c_hi = holder.embedding_constants(c_w, d_w, dims)
        for i, f in enumerate(fields):
            exact = holder.seminorm_exact(f, w).value
            embedded = holder.seminorm_embedded(f, net, w).value
            lower_ok = exact <= c_lo * embedded
            upper_ok = embedded <= c_hi * exact
            ok = ok and lower_ok and upper_ok
            rows.append({
                "field": i, "weight": w.describe(), "exact": exact,
                "embedded": embedded, "c_lower": c_lo, "c_upper": c_hi,
                "lower_ok": lower_ok, "upper_ok": upper_ok,
            })
    write_csv(manifest.add(out / "sandwich.csv"), list(rows[0]), rows)
    write_csv(manifest.add(out / "net_invariants.csv"),
              ["invariant", "passed", "detail"],
              [{"invariant": n, "passed": okk, "detail": d}
               for n, okk, d in report.entries])
    if render:
        figures.sandwich_figure(rows, manifest.add(out / "sandwich.png"))
    return ok


@command("blowup")
def run_blowup(cfg, out, manifest, render):
    space, _ = _resolve_space(cfg)
    alpha_star = _get(cfg, "alpha_star", float, 0.5)
    gamma = _get(cfg, "gamma", float, 1.0)
    beta = _get(cfg, "beta", float, 0.4)
    grid = _get(cfg, "alpha_grid", int, 200)
    tol = _get(cfg, "grid_tol", float, 0.05)
    rows, ok = [], True
    for i, f in enumerate(_resolve_fields(space, cfg, default_count=3)):
        lhs, mid, rhs = holder.log_blowup_equivalence(f, alpha_star, gamma,
                                                      beta, grid)
        passed = lhs <= mid * (1.0 + tol) and mid <= rhs
        ok = ok and passed
        rows.append({"field": i, "lhs": lhs, "middle": mid, "rhs": rhs,
                     "grid_tol": tol, "passed": passed})
    write_csv(manifest.add(out / "blowup.csv"), list(rows[0]), rows)
    if render:
        figures.blowup_figure(rows, manifest.add(out / "blowup.png"))
    return ok


@command("sup-integrals")
def run_sup_integrals(cfg, out, manifest, render):
    n_list = _get(cfg, "n_list", list, [16, 64, 256])
    p = _get(cfg, "p", float, 2.0)
    T = _get(cfg, "T", float, 1.0)
    R = _get(cfg, "replicates", int, 500)
    seed = manifest.seed
    sigma_kind = cfg.get("sigma", "ones")
    results = []
    for n in n_list:
        if sigma_kind == "ones":
            sig = np.ones(int(n))
        elif sigma_kind == "invsqrtlog":
            sig = (1.0 + np.log(np.arange(1, int(n) + 1))) ** -0.5
        else:
            raise UsageError(f"unknown sigma scheme {sigma_kind!r}")
        results.append(st.experiment_sup_integrals(
            int(n), sig, p, T, R,
            seed, steps_per_unit=_get(cfg, "steps_per_unit", int, 256)))
    rows = [r.row() for r in results]
    write_csv(manifest.add(out / "sup_integrals.csv"), list(rows[0]), rows)
    summary = {"slope_loglog": st.fit_log_slope(
        [math.log(r.n) for r in results], [r.lhs.lp_value for r in results])
        if len(results) >= 2 else None}
    write_json(manifest.add(out / "sup_integrals_summary.json"), summary)
    if render:
        figures.bound_figure(
            [r.n for r in results], [r.lhs.lp_value for r in results],
            [r.lhs.stderr for r in results], [r.rhs for r in results],
            "number of paths n", manifest.add(out / "sup_integrals.png"))
    return all(r.passed for r in results)


@command("ou-longterm")
def run_ou(cfg, out, manifest, render):
    rows_obj = st.experiment_ou_longterm(
        a=_get(cfg, "a", float, 1.0),
        T_list=_get(cfg, "T_list", list, [4, 16, 64]),
        p=_get(cfg, "p", float, 2.0),
        replicates=_get(cfg, "replicates", int, 500),
        seed=manifest.seed,
    )
    rows = [r.row() for r in rows_obj]
    write_csv(manifest.add(out / "ou_longterm.csv"), list(rows[0]), rows)
    if len(rows_obj) >= 3:
        r2 = st.r_squared([math.log(r.T) for r in rows_obj],
                          [r.estimate.lp_value ** 2 for r in rows_obj])
    else:
        r2 = None
    write_json(manifest.add(out / "ou_longterm_summary.json"),
               {"r_squared_sq_vs_logT": r2})
    if render:
        figures.bound_figure(
            [r.T for r in rows_obj], [r.estimate.lp_value for r in rows_obj],
            [r.estimate.stderr for r in rows_obj], [r.bound for r in rows_obj],
            "horizon T", manifest.add(out / "ou_longterm.png"))
    return all(r.passed for r in rows_obj)


@command("martingale-sup")
def run_martingale(cfg, out, manifest, render):
    rows = []
    for n in _get(cfg, "n_list", list, [16, 256]):
        res = st.experiment_martingale_sup(
            n=int(n),
            steps=_get(cfg, "steps", int, 1024),
            scheme=_get(cfg, "scheme", str, "rademacher_walks"),
            p=_get(cfg, "p", float, 2.0),
            replicates=_get(cfg, "replicates", int, 500),
            seed=manifest.seed,
        )
        rows.append(res.row())
    write_csv(manifest.add(out / "martingale_sup.csv"), list(rows[0]), rows)
    return all(r["passed"] for r in rows)


@command("good-lambda")
def run_good_lambda(cfg, out, manifest, render):
    all_rows, ok = [], True
    for delta in _get(cfg, "delta_list", list, [0.1, 0.3]):
        rows = st.experiment_good_lambda(
            beta=_get(cfg, "beta", float, 2.0),
            delta=float(delta),
            replicates=_get(cfg, "replicates", int, 10_000),
            seed=manifest.seed,
            T=_get(cfg, "T", float, 1.0),
            steps=_get(cfg, "steps", int, 1024),
        )
        for r in rows:
            row = {"delta": delta, **r.row()}
            ok = ok and r.passed
            all_rows.append(row)
    write_csv(manifest.add(out / "good_lambda.csv"), list(all_rows[0]), all_rows)
    if render:
        figures.good_lambda_figure(all_rows, manifest.add(out / "good_lambda.png"))
    return ok


@command("levy")
def run_levy(cfg, out, manifest, render):
    res = st.experiment_levy_modulus(
        n_steps=_get(cfg, "n_steps", int, 2 ** 16),
        h_list=[float(h) for h in _get(cfg, "h_list", list, [2.0 ** -12])],
        replicates=_get(cfg, "replicates", int, 20),
        seed=manifest.seed,
    )
    write_csv(manifest.add(out / "levy_window.csv"), list(res.h_rows[0]),
              res.h_rows)
    write_csv(manifest.add(out / "levy_weighted.csv"), list(res.p_rows[0]),
              res.p_rows)
    write_json(manifest.add(out / "levy_summary.json"), {
        "fitted_c": res.fitted_c,
        "c_fixed_variation": res.c_variation,
        "c_adapted_variation": res.c_adapted_variation,
    })
    if render:
        figures.levy_figure(res.h_rows, res.p_rows,
                            manifest.add(out / "levy.png"))
    return None


@command("kc")
def run_kc(cfg, out, manifest, render):
    rows = []
    for beta in _get(cfg, "beta_list", list, [0.25, 0.35]):
        res = st.experiment_kc_bound(
            alpha=_get(cfg, "alpha", float, 0.5),
            beta=float(beta),
            p=_get(cfg, "p", float, 8.0),
            grid_points=_get(cfg, "grid_points", int, 1025),
            replicates=_get(cfg, "replicates", int, 200),
            seed=manifest.seed,
        )
        rows.append(res.row())
    write_csv(manifest.add(out / "kc_bound.csv"), list(rows[0]), rows)
    return all(r["passed"] for r in rows)


def _pam_params(cfg, seed) -> pam_mod.PAMParams:
    return pam_mod.PAMParams(
        eta=_get(cfg, "eta", float, 1.0),
        T=_get(cfg, "T", float, 0.1),
        Mx=_get(cfg, "Mx", int, 64),
        Nt=_get(cfg, "Nt", int, 4096),
        u0=cfg.get("u0", "sin"),
        p=_get(cfg, "p", float, 6.0),
        seed=seed,
        replicates=_get(cfg, "replicates", int, 50),
        store_stride=cfg.get("store_stride"),
    )


@command("pam-solve")
def run_pam_solve(cfg, out, manifest, render):
    params = _pam_params(cfg, manifest.seed)
    ens = pam_mod.pam_solve(params)
    raw = manifest.add(out / "pam_fields.bin")
    ens.fields.astype("<f8").tofile(raw)
    write_json(manifest.add(out / "pam_ensemble.json"), {
        "format": "chainbound-ensemble v1",
        "dtype": "<f8", "order": "C",
        "shape": list(ens.fields.shape),
        "axes": ["replicate", "stored_time", "position"],
        "times": ens.times.tolist(),
        "xs": ens.xs.tolist(),
        "eta": params.eta, "T": params.T, "Mx": params.Mx, "Nt": params.Nt,
        "modes": params.modes, "seed": params.seed,
    })
    mean = ens.mean_field()
    rows = [{"t": float(t), **{f"x{j}": mean[i, j] for j in range(mean.shape[1])}}
            for i, t in enumerate(ens.times)]
    write_csv(manifest.add(out / "pam_mean_field.csv"), list(rows[0]), rows)
    passed = None
    if params.eta == 0.0:
        exact = pam_mod.heat_solution(params, ens.times, ens.xs)
        passed = bool(np.abs(ens.fields - exact[None]).max() <= 1e-12)
    if render:
        figures.pam_figure(ens, manifest.add(out / "pam_fields.png"))
    return passed


@command("pam-modulus")
def run_pam_modulus(cfg, out, manifest, render):
    params = _pam_params(cfg, manifest.seed)
    ens = pam_mod.pam_solve(params)
    stat = pam_mod.pam_modulus_statistic(ens, params.p)
    rows = [{
        "Mx": params.Mx, "Nt": params.Nt, "p": params.p,
        "statistic": stat.lp_value, "stderr": stat.stderr,
        "p_in_existence_range": params.p > 4.0,
    }]
    passed = None
    if cfg.get("refine", False):
        fine = pam_mod.PAMParams(
            eta=params.eta, T=params.T, Mx=2 * params.Mx, Nt=4 * params.Nt,
            u0=params.u0, p=params.p, seed=params.seed,
            replicates=params.replicates,
            store_stride=None if params.store_stride is None
            else 2 * params.store_stride,
        )
        ens2 = pam_mod.pam_solve(fine)
        stat2 = pam_mod.pam_modulus_statistic(ens2, params.p)
        ratio = stat2.lp_value / stat.lp_value
        rows.append({
            "Mx": fine.Mx, "Nt": fine.Nt, "p": fine.p,
            "statistic": stat2.lp_value, "stderr": stat2.stderr,
            "p_in_existence_range": fine.p > 4.0,
        })
        passed = bool(0.5 <= ratio <= 2.0)
    write_csv(manifest.add(out / "pam_modulus.csv"), list(rows[0]), rows)
    if render:
        figures.pam_figure(ens, manifest.add(out / "pam_fields.png"))
    return passed


@command("green-constant")
def run_green(cfg, out, manifest, render):
    T = _get(cfg, "T", float, 1.0)
    modes = _get(cfg, "modes", int, 64)
    grid_n = _get(cfg, "grid_n", int, 6)
    ppd = _get(cfg, "panels_per_decade", int, 8)
    rows = []
    for panels in (ppd, 2 * ppd):
        c_fit = pam_mod.green_regularity_constant(
            T=T, modes=modes, grid_n=grid_n, panels_per_decade=panels,
            check_convergence=False,
        )
        rows.append({"panels_per_decade": panels, "c_fit": c_fit})
    rel = abs(rows[1]["c_fit"] - rows[0]["c_fit"]) / rows[1]["c_fit"]
    rows = [{**r, "rel_change_on_doubling": rel} for r in rows]
    write_csv(manifest.add(out / "green_constant.csv"), list(rows[0]), rows)
    if render:
        figures.green_figure(rows, manifest.add(out / "green_constant.png"))
    return bool(rel <= 0.05)


# -- entry point -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chainbound",
        description="chaining-net and stochastic-integral experiment harness",
    )
    parser.add_argument("--config", required=True, help="TOML or JSON config")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    parser.add_argument("--workers", type=int, default=os.cpu_count(),
                        help="worker-count knob (results are identical "
                             "for any value)")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--no-figures", action="store_true",
                        help="skip figure rendering")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg_path = Path(args.config)
        if not cfg_path.exists():
            raise UsageError(f"config file {cfg_path} does not exist")
        try:
            cfg = load_config(cfg_path)
        except Exception as exc:
            raise UsageError(f"could not parse config: {exc}") from exc
        if not isinstance(cfg, dict):
            raise UsageError("config must be a table/object")
        cmd = _get(cfg, "command", str)
        if cmd not in COMMANDS:
            raise UsageError(
                f"unknown command {cmd!r}; choose from {sorted(COMMANDS)}"
            )
        seed = args.seed if args.seed is not None else cfg.get("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise UsageError("seed must be an integer")
        out = Path(args.out if args.out is not None else cfg.get("output", "out"))
        render = not args.no_figures and cfg.get("figures", True)
        if args.workers is not None and args.workers < 1:
            raise UsageError("workers must be >= 1")
    except (UsageError, ParseError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2

    out.mkdir(parents=True, exist_ok=True)
    manifest = ManifestBuilder(command=cmd, config=cfg, seed=seed,
                               version=__version__)
    try:
        passed = COMMANDS[cmd](cfg, out, manifest, render)
    except (UsageError, ParseError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except ChainboundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    manifest.passed = passed
    manifest.write(out / "manifest.json")
    if passed is False:
        print("contract failure: see tables in", out, file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
