"""
Command-line driver: gen | fit | sample | eval | bench

Settings come from an optional TOML file (--config) whose keys mirror RunConfig;
explicit flags override the file. Every output embeds the resolved config hash
and seed. Exit codes: 0 ok, 2 configuration or format error, 3 numeric failure.
"""
import argparse
import json
import logging
import sys
import time
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np
import pandas as pd

from app.basis.families import FourierBasis
from app.errors import EXIT_OK, ConfigError, exit_code_for
from app.estimator.density_ops import conditional_sample
from app.estimator.estimator import estimate_density
from app.estimator.model import SampleSet
from app.estimator.preprocess import fit_general
from app.generators.gaussian_mixture import gm_grid_truth, gm_sample
from app.generators.ginzburg_landau import HarmonicPotential, gl1d_grid_truth
from app.generators.langevin import langevin_run
from app.metrics.metrics import marginal_histogram, record_metric, rel_l2, second_moment_error
from app.models.config_models import (
    GeneralFitConfig, GlKind, GlSpec, GmSpec, GridSpec, MeanFieldKind, RunConfig,
)
from app.pipeline.experiments import bench_slopes, bench_sweep, gl1d_basis_sweep, gm_error_curve, write_table
from app.storage.formats import load_model, read_manifest, read_samples, save_model, write_samples
from app.utils.logger import MetricsWriter, configure_logging, get_structured_logger, init_structured_logger
from app.utils.tracing import with_run

logger = logging.getLogger(__name__)

LANGEVIN_FLAGS = {"step": "step", "burn_in": "burn_in", "thinning": "thinning", "chains": "n_chains",
                  "metropolis": "metropolis"}


def _ints(text: str) -> List[int]:
    return [int(v) for v in text.replace(",", " ").split()]


def load_toml(path: Optional[str]) -> Dict[str, Any]:
    if not path:
        return {}
    try:
        with open(path, "rb") as f:
            data = tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"cannot parse {path}: {e}") from e
    return data.get("run", data)


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """TOML values overlaid by the flags that were given explicitly"""
    values = load_toml(getattr(args, "config", None))
    langevin = dict(values.pop("langevin", {}) or {})
    given = vars(args)
    for key in RunConfig.model_fields:
        if key != "langevin" and key in given:
            values[key] = given[key]
    for flag, field in LANGEVIN_FLAGS.items():
        if flag in given:
            langevin[field] = given[flag]
    if "seed" in values:
        langevin.setdefault("seed", values["seed"])
    values["langevin"] = langevin
    return RunConfig(**{k: v for k, v in values.items() if k in RunConfig.model_fields})


def _manifest(kind: str, run_cfg: RunConfig, /, **extra: Any) -> Dict[str, Any]:
    manifest = {"kind": kind, "config": run_cfg.model_dump(mode="json"),
                "config_hash": run_cfg.config_hash(), "seed": run_cfg.seed}
    manifest.update(extra)
    return manifest


def _gl_spec(cfg: RunConfig) -> GlSpec:
    kind = GlKind(cfg.model)
    size = cfg.d if kind == GlKind.GL1D else cfg.m
    if size is None:
        raise ConfigError(f"{kind.value} needs --{'d' if kind == GlKind.GL1D else 'm'}")
    spec = GlSpec.gl1d(size) if kind == GlKind.GL1D else GlSpec.gl2d(size)
    updates = {}
    if cfg.half_width is not None:
        updates["half_width"] = cfg.half_width
    if cfg.mesh is not None:
        updates["mesh"] = cfg.mesh
    return spec.model_copy(update=updates) if updates else spec


def cmd_gen(args: argparse.Namespace, cfg: RunConfig) -> Dict[str, Any]:
    """Draw a synthetic sample set and write it with its manifest"""
    if cfg.n is None or cfg.n < 1:
        raise ConfigError("gen needs --n >= 1")
    model = (cfg.model or "").lower()
    if model == "gm":
        if cfg.d is None:
            raise ConfigError("gm needs --d")
        overrides = {k: v for k, v in (("half_width", cfg.half_width), ("mesh", cfg.mesh)) if v is not None}
        spec = GmSpec(d=cfg.d, **overrides)
        samples = gm_sample(spec, cfg.n, cfg.seed)
        box = {"half_width": spec.half_width, "mesh": spec.mesh}
        extra = {"model": "gm", "spec": spec.model_dump(mode="json"), "box": box}
    elif model in (GlKind.GL1D.value, GlKind.GL2D.value, "harmonic"):
        if model == "harmonic":
            if cfg.d is None:
                raise ConfigError("harmonic needs --d")
            target = HarmonicPotential(cfg.d)
            spec_dump = target.describe()
        else:
            gl = _gl_spec(cfg)
            target = gl
            spec_dump = gl.model_dump(mode="json")
        samples, report = langevin_run(target, cfg.langevin, cfg.n)
        grid = samples.box[0]
        extra = {"model": model, "spec": spec_dump, "cfg": cfg.langevin.model_dump(mode="json"),
                 "box": {"half_width": 0.5 * grid.width, "mesh": grid.mesh},
                 "diagnostics": report.model_dump()}
    else:
        raise ConfigError(f"unknown model {cfg.model!r}; expected gm, gl1d, gl2d or harmonic")

    write_samples(args.out, samples, _manifest("samples", cfg, **extra))
    return {"out": str(args.out), "N": samples.N, "d": samples.d}


def _fit_grid(cfg: RunConfig, manifest: Dict[str, Any], X: np.ndarray) -> GridSpec:
    box = manifest.get("box", {})
    half_width = cfg.half_width if cfg.half_width is not None else box.get("half_width")
    mesh = cfg.mesh if cfg.mesh is not None else box.get("mesh")
    if half_width is None or mesh is None:
        raise ConfigError("no box in the sample manifest; pass --half-width and --mesh")
    grid = GridSpec.symmetric(half_width, mesh)
    if np.abs(X).max() > half_width:
        raise ConfigError(f"samples leave the box [-{half_width}, {half_width}]")
    return grid


def cmd_fit(args: argparse.Namespace, cfg: RunConfig) -> Dict[str, Any]:
    """Fit a density model to a sample file"""
    X = read_samples(args.data)
    manifest = read_manifest(args.data)
    spec = cfg.compress_spec()
    if cfg.pca_dim is not None or cfg.mean_field == MeanFieldKind.KDE:
        fit_cfg = GeneralFitConfig(
            pca_dim=cfg.pca_dim, nbasis=cfg.nbasis, alpha=cfg.alpha, lam=cfg.lam,
            compress=spec, mean_field=cfg.mean_field,
            **({"mesh": cfg.mesh} if cfg.mesh is not None else {}),
        )
        model = fit_general(SampleSet(X), fit_cfg)
    else:
        grid = _fit_grid(cfg, manifest, X)
        bases = [FourierBasis(cfg.nbasis, 0.5 * grid.width)] * X.shape[1]
        model = estimate_density(SampleSet(X, grid), bases, cfg.alpha, spec, cfg.lam,
                                 grids=[grid] * X.shape[1])
    save_model(args.out, model, cfg.config_hash(), cfg.seed,
               extra={"data": str(args.data), "data_manifest": manifest.get("config_hash")})
    return {"out": str(args.out), "d": model.d, "ranks": model.coeff.ranks}


def cmd_sample(args: argparse.Namespace, cfg: RunConfig) -> Dict[str, Any]:
    """Conditional sampling from a fitted model"""
    model = load_model(args.model_file)
    count = cfg.count or cfg.n
    if count is None:
        raise ConfigError("sample needs --count")
    samples, diagnostics = conditional_sample(model, count, cfg.seed)
    run_id = getattr(args, "run_id", None)
    get_structured_logger().log_sample(run_id, diagnostics.count, diagnostics.clipped_mass_mean,
                                       diagnostics.aborted)
    extra = {"model_file": str(args.model_file), "diagnostics": diagnostics.model_dump()}
    if model.pca is None:
        extra["box"] = {"half_width": 0.5 * model.grids[0].width, "mesh": model.grids[0].mesh}
    write_samples(args.out, samples, _manifest("samples", cfg, **extra))
    return {"out": str(args.out), "N": samples.N, "clipped_mass_mean": diagnostics.clipped_mass_mean}


def _truth(name: str, model) -> Any:
    name = name.lower()
    if name == "gm":
        grid = model.grids[0]
        return gm_grid_truth(GmSpec(d=model.d, half_width=0.5 * grid.width, mesh=grid.mesh), model.grids)
    if name == GlKind.GL1D.value:
        return gl1d_grid_truth(GlSpec.gl1d(model.d))
    if Path(name).exists():
        return load_model(name)
    raise ConfigError(f"unknown truth {name!r}; expected gm, gl1d or a model file")


def cmd_eval(args: argparse.Namespace, cfg: RunConfig) -> Dict[str, Any]:
    """Compute one metric or a data series and write it as JSON line / CSV"""
    writer = MetricsWriter(args.metrics_file) if args.metrics_file else MetricsWriter()
    if args.series:
        sizes = _ints(args.sizes) if args.sizes else None
        if args.series == "gm-error":
            if cfg.d is None:
                raise ConfigError("gm-error needs --d")
            table = gm_error_curve(cfg.d, sizes or [2 ** k for k in range(7, 13)],
                                   seeds=tuple(range(cfg.seed, cfg.seed + args.repeats)),
                                   nbasis=cfg.nbasis, rank=cfg.rank, algo=cfg.algo,
                                   alpha=cfg.alpha, lam=cfg.lam, sketch_size=cfg.rtilde)
        elif args.series == "gl1d-sweep":
            if cfg.d is None or cfg.n is None:
                raise ConfigError("gl1d-sweep needs --d and --n")
            table = gl1d_basis_sweep(cfg.d, sizes or [7, 11, 15], cfg.n, cfg.seed, cfg.langevin,
                                     cfg.algo, cfg.rank, cfg.alpha)
        else:
            raise ConfigError(f"unknown series {args.series!r}")
        out = write_table(table, args.out or f"{args.series}.csv")
        return {"out": str(out), "rows": len(table)}

    metric = (args.metric or "").lower().replace("_", "-")
    if metric == "rel-l2":
        model = load_model(args.model_file)
        if not args.truth:
            raise ConfigError("rel-l2 needs --truth")
        value = rel_l2(model, _truth(args.truth, model))
    elif metric == "second-moment":
        if not (args.data and args.reference):
            raise ConfigError("second-moment needs --data and --reference")
        value = second_moment_error(read_samples(args.data), read_samples(args.reference))
    elif metric == "marginal":
        model = load_model(args.model_file)
        reference = read_samples(args.reference) if args.reference else None
        series = marginal_histogram(model, model.d, args.coordinate, reference)
        out = write_table(_series_frame(series), args.out or "marginal.csv")
        return {"out": str(out)}
    else:
        raise ConfigError(f"unknown metric {args.metric!r}; expected rel-l2, second-moment or marginal")

    record = record_metric(metric, value, cfg.config_hash(), writer, seed=cfg.seed)
    return record.model_dump()


def _series_frame(series: Dict[str, np.ndarray]) -> pd.DataFrame:
    return pd.DataFrame({k: np.asarray(v) for k, v in series.items()})


def cmd_bench(args: argparse.Namespace, cfg: RunConfig) -> Dict[str, Any]:
    """Timing sweep over N or d; writes a CSV and reports log-log slopes"""
    if not args.values:
        raise ConfigError("bench needs --values")
    algos = [a for a in args.algos.replace(",", " ").split()] if args.algos else [cfg.algo]
    table = bench_sweep(args.param, _ints(args.values), algos, d=cfg.d or 5, N=cfg.n or 10_000,
                        nbasis=cfg.nbasis, rank=cfg.rank, repeats=args.repeats, seed=cfg.seed)
    out = write_table(table, args.out or f"bench_{args.param}.csv")
    slopes = bench_slopes(table) if len(set(table["param"])) > 1 else {}
    return {"out": str(out), "slopes": slopes}


COMMANDS: Dict[str, Callable[[argparse.Namespace, RunConfig], Dict[str, Any]]] = {
    "gen": cmd_gen,
    "fit": cmd_fit,
    "sample": cmd_sample,
    "eval": cmd_eval,
    "bench": cmd_bench,
}


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    """Flags that override RunConfig keys; absent flags leave the TOML/default value"""
    S = argparse.SUPPRESS
    p.add_argument("--config", help="TOML file with RunConfig keys")
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--model", default=S, help="gm | gl1d | gl2d | harmonic")
    p.add_argument("--d", type=int, default=S)
    p.add_argument("--m", type=int, default=S)
    p.add_argument("--n", type=int, default=S, help="sample count")
    p.add_argument("--count", type=int, default=S)
    p.add_argument("--algo", default=S)
    p.add_argument("--rank", type=int, default=S)
    p.add_argument("--nbasis", type=int, default=S)
    p.add_argument("--alpha", type=float, default=S)
    p.add_argument("--lam", type=float, default=S)
    p.add_argument("--rtilde", type=int, default=S)
    p.add_argument("--cluster-order", dest="cluster_order", type=int, default=S)
    p.add_argument("--sketch-law", dest="sketch_law", default=S)
    p.add_argument("--pca-dim", dest="pca_dim", type=int, default=S)
    p.add_argument("--mean-field", dest="mean_field", default=S)
    p.add_argument("--half-width", dest="half_width", type=float, default=S)
    p.add_argument("--mesh", type=float, default=S)
    p.add_argument("--step", type=float, default=S)
    p.add_argument("--burn-in", dest="burn_in", type=int, default=S)
    p.add_argument("--thinning", type=int, default=S)
    p.add_argument("--chains", type=int, default=S)
    p.add_argument("--metropolis", action="store_true", default=S,
                   help="Metropolis-adjusted Langevin moves")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tde", description="Tensor-train density estimation")
    parser.add_argument("--log-file", help="structured event log path")
    parser.add_argument("--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="draw synthetic samples")
    _add_run_flags(gen)
    gen.add_argument("--out", required=True)

    fit = sub.add_parser("fit", help="fit a density model")
    _add_run_flags(fit)
    fit.add_argument("--data", required=True)
    fit.add_argument("--out", required=True)

    sample = sub.add_parser("sample", help="sample a fitted model")
    _add_run_flags(sample)
    sample.add_argument("--model-file", dest="model_file", required=True)
    sample.add_argument("--out", required=True)

    ev = sub.add_parser("eval", help="compute metrics or data series")
    _add_run_flags(ev)
    ev.add_argument("--metric", help="rel-l2 | second-moment | marginal")
    ev.add_argument("--series", choices=["gm-error", "gl1d-sweep"])
    ev.add_argument("--sizes", help="N values (gm-error) or basis sizes (gl1d-sweep)")
    ev.add_argument("--repeats", type=int, default=3)
    ev.add_argument("--model-file", dest="model_file")
    ev.add_argument("--truth")
    ev.add_argument("--data")
    ev.add_argument("--reference")
    ev.add_argument("--coordinate", type=int, default=0)
    ev.add_argument("--metrics-file", dest="metrics_file")
    ev.add_argument("--out")

    bench = sub.add_parser("bench", help="timing sweep")
    _add_run_flags(bench)
    bench.add_argument("--param", choices=["N", "d"], default="N")
    bench.add_argument("--values")
    bench.add_argument("--algos")
    bench.add_argument("--repeats", type=int, default=1)
    bench.add_argument("--out")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(logging.DEBUG if args.verbose else logging.INFO)
    if args.log_file:
        init_structured_logger(args.log_file)
    events = get_structured_logger()

    run_id = None
    start = time.perf_counter()
    try:
        cfg = resolve_config(args)
        with with_run(command=args.command, config_hash=cfg.config_hash(), seed=cfg.seed) as run_id:
            args.run_id = run_id
            events.log_run_start(run_id, args.command, cfg.config_hash(), cfg.seed)
            result = COMMANDS[args.command](args, cfg)
            events.log_run_end(run_id, True, (time.perf_counter() - start) * 1000)
        print(json.dumps(result, default=str))
        return EXIT_OK
    except Exception as e:
        code = exit_code_for(e)
        logger.debug("command failed", exc_info=True)
        events.log_error(run_id, e, {"command": args.command})
        events.log_run_end(run_id, False, (time.perf_counter() - start) * 1000, str(e))
        print(f"error: {e}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
