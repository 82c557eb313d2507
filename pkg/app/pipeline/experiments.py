"""
Experiment drivers: error curves, basis sweeps, sampler fidelity and timing sweeps.

Each driver returns a pandas DataFrame (or a plain dict of results) that the CLI
writes as CSV; nothing here renders plots.
"""
import logging
import time
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

import config
from app.basis.families import FourierBasis
from app.errors import ConfigError
from app.estimator.density_ops import conditional_sample
from app.estimator.estimator import estimate_density, fit
from app.estimator.model import DensityModel, SampleSet
from app.estimator.preprocess import fit_general
from app.generators.gaussian_mixture import gm_grid_truth, gm_sample
from app.generators.ginzburg_landau import gl1d_grid_truth
from app.generators.langevin import langevin_run
from app.metrics.metrics import rel_l2, second_moment_error
from app.tensor.tt_core import tt_from_rank1_terms, tt_inner
from app.models.config_models import (
    BenchRecord, CompressAlgo, CompressSpec, GeneralFitConfig, GlSpec, GmSpec, GridSpec,
    LangevinConfig, MeanFieldKind,
)

logger = logging.getLogger(__name__)


def loglog_slope(x: Sequence[float], y: Sequence[float]) -> float:
    """Least-squares slope of log y against log x"""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2 or x.size != y.size:
        raise ConfigError("a slope needs at least two matching (x, y) points")
    if (x <= 0).any() or (y <= 0).any():
        raise ConfigError("log-log slope needs positive values")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def fit_fourier_model(samples: SampleSet, grid: GridSpec, nbasis: int, alpha: float,
                      spec: CompressSpec, lam: float = 0.0) -> DensityModel:
    """Estimator with the same Fourier family on every coordinate of a symmetric box"""
    half_width = 0.5 * grid.width
    bases = [FourierBasis(nbasis, half_width)] * samples.d
    return estimate_density(samples, bases, alpha, spec, lam, grids=[grid] * samples.d)


def gm_error_curve(d: int, Ns: Iterable[int], seeds: Sequence[int] = (0, 1, 2),
                   nbasis: int = 17, rank: int = 3, algo: Union[str, CompressAlgo] = CompressAlgo.SVD_KN,
                   alpha: Optional[float] = None, lam: float = 0.0,
                   sketch_size: Optional[int] = None) -> pd.DataFrame:
    """Relative L2 error of the fitted mixture against its exact grid values, per (N, seed)"""
    gm = GmSpec(d=d)
    alpha = config.get_default_alpha() if alpha is None else alpha
    truth = gm_grid_truth(gm)
    rows = []
    for N in Ns:
        for seed in seeds:
            spec = CompressSpec(algo=algo, ranks=rank, sketch_size=sketch_size, seed=seed)
            t0 = time.perf_counter()
            model = fit_fourier_model(gm_sample(gm, N, seed), gm.grid(), nbasis, alpha, spec, lam)
            elapsed = time.perf_counter() - t0
            err = rel_l2(model, truth)
            logger.info(f"gm d={d} N={N} seed={seed} algo={spec.algo.value} rel_l2={err:.4f}")
            rows.append({"d": d, "N": N, "seed": seed, "algo": spec.algo.value,
                         "rel_l2": err, "fit_seconds": elapsed})
    return pd.DataFrame(rows)


def gl1d_basis_sweep(d: int, ns: Iterable[int], N: int, seed: int = 0,
                     langevin: Optional[LangevinConfig] = None,
                     algo: Union[str, CompressAlgo] = CompressAlgo.SVD_KN, rank: int = 4,
                     alpha: Optional[float] = None, samples: Optional[SampleSet] = None,
                     spec: Optional[GlSpec] = None) -> pd.DataFrame:
    """Relative L2 error against the transfer-matrix truth for several basis sizes.

    Without explicit settings the chain data comes from Metropolis-adjusted Langevin
    (1000 chains, a snapshot every 100 steps).
    """
    gl = spec or GlSpec.gl1d(d)
    alpha = config.get_default_alpha() if alpha is None else alpha
    if samples is None:
        cfg = langevin or LangevinConfig(seed=seed, metropolis=True, n_chains=1000, thinning=100)
        samples, _ = langevin_run(gl, cfg, N)
    truth = gl1d_grid_truth(gl)
    compress_spec = CompressSpec(algo=algo, ranks=rank, seed=seed)
    rows = []
    for n in ns:
        model = fit_fourier_model(samples, gl.grid(), n, alpha, compress_spec)
        err = rel_l2(model, truth)
        logger.info(f"gl1d d={gl.dim} n={n} N={samples.N} rel_l2={err:.4f}")
        rows.append({"d": gl.dim, "n": n, "N": samples.N, "algo": compress_spec.algo.value,
                     "rel_l2": err})
    return pd.DataFrame(rows)


def _truncated_normal(rng: np.random.Generator, center: float, width: float, size: int) -> np.ndarray:
    """Normal draws conditioned on [-1, 1]"""
    out = rng.normal(center, width, size)
    outside = np.abs(out) > 1.0
    while outside.any():
        out[outside] = rng.normal(center, width, int(outside.sum()))
        outside = np.abs(out) > 1.0
    return out


def _moment_vector(basis: FourierBasis, center: float, width: float) -> np.ndarray:
    """E[phi_l(x)] of the truncated normal, by fine midpoint quadrature"""
    grid = GridSpec.symmetric(1.0, 1e-3)
    x = grid.nodes()
    p = np.exp(-0.5 * ((x - center) / width) ** 2)
    p /= p.sum() * grid.mesh
    return basis.evaluate(x).T @ p * grid.mesh


def coefficient_error_curve(kind: str, Ns: Iterable[int], seeds: Sequence[int] = (0, 1, 2),
                            d: int = 6, nbasis: int = 4, alpha: float = 0.1,
                            algo: Union[str, CompressAlgo] = CompressAlgo.SVD_FAST,
                            rank: Optional[int] = None, center: float = 0.3,
                            width: float = 0.3) -> pd.DataFrame:
    """Error of the compressed coefficient tensor against a known one, per (N, seed).

    kind "product": every coordinate is an independent truncated normal, so the
    weighted coefficient tensor is rank 1 (compressed at rank 1 by default).
    kind "additive": one uniformly chosen coordinate follows the truncated normal
    and the rest are uniform, so only the constant and 1-cluster coefficients are
    nonzero and the tensor has TT rank 2 (compressed at rank 2 by default).
    """
    if kind not in ("product", "additive"):
        raise ConfigError(f"coefficient curves cover 'product' or 'additive' data, got {kind!r}")
    basis = FourierBasis(nbasis, 1.0)
    moments = _moment_vector(basis, center, width)
    e1 = np.eye(nbasis)[0]
    if kind == "product":
        weighted = np.concatenate([[1.0], alpha * moments[1:]])
        truth = tt_from_rank1_terms([1.0], [weighted[None, :]] * d)
    else:
        bump = np.concatenate([[0.0], alpha * moments[1:] / d])
        truth = tt_from_rank1_terms(
            np.ones(d + 1),
            [np.vstack([e1] + [bump if k == j else e1 for k in range(d)]) for j in range(d)],
        )
    truth_sq = tt_inner(truth, truth)
    rank = rank or (1 if kind == "product" else 2)

    rows = []
    for N in Ns:
        for seed in seeds:
            rng = np.random.default_rng(seed)
            if kind == "product":
                X = _truncated_normal(rng, center, width, N * d).reshape(N, d)
            else:
                X = rng.uniform(-1.0, 1.0, size=(N, d))
                active = rng.integers(0, d, size=N)
                X[np.arange(N), active] = _truncated_normal(rng, center, width, N)
            spec = CompressSpec(algo=algo, ranks=rank, seed=seed)
            c = fit(SampleSet(X), [basis] * d, alpha, spec)
            diff_sq = tt_inner(c, c) - 2 * tt_inner(c, truth) + truth_sq
            err = float(np.sqrt(max(diff_sq, 0.0) / truth_sq))
            logger.info(f"{kind} d={d} N={N} seed={seed} algo={spec.algo.value} error={err:.5f}")
            rows.append({"kind": kind, "d": d, "N": N, "seed": seed, "algo": spec.algo.value,
                         "coeff_error": err})
    return pd.DataFrame(rows)


def sampler_fidelity(model: DensityModel, reference: SampleSet, count: Optional[int] = None,
                     seed: int = 0) -> Dict[str, float]:
    """Second-moment error of conditional samples against a reference set"""
    drawn, diagnostics = conditional_sample(model, count or reference.N, seed)
    return {
        "second_moment_error": second_moment_error(drawn, reference),
        "clipped_mass_mean": diagnostics.clipped_mass_mean,
        "aborted": float(diagnostics.aborted),
        "count": float(diagnostics.count),
    }


def gm_sampler_fidelity(d: int, N: int, count: Optional[int] = None, seed: int = 0,
                        nbasis: int = 17, rank: int = 3,
                        algo: Union[str, CompressAlgo] = CompressAlgo.SVD_KN) -> Dict[str, float]:
    """Fit the mixture, sample the fit, compare with a fresh draw of the mixture"""
    gm = GmSpec(d=d)
    spec = CompressSpec(algo=algo, ranks=rank, seed=seed)
    model = fit_fourier_model(gm_sample(gm, N, seed), gm.grid(), nbasis,
                              config.get_default_alpha(), spec)
    reference = gm_sample(gm, count or N, seed + 1)
    return sampler_fidelity(model, reference, count, seed)


def gl2d_sampler_fidelity(m: int, N: int, pca_dim: int, seed: int = 0,
                          langevin: Optional[LangevinConfig] = None,
                          nbasis: int = 21, rank: int = 10, alpha: float = 1e-3) -> Dict[str, float]:
    """PCA + KDE pipeline on a 2D lattice: fit on one Langevin half, compare with the other"""
    gl = GlSpec.gl2d(m)
    cfg = langevin or LangevinConfig(seed=seed)
    data, _ = langevin_run(gl, cfg, 2 * N)
    train, reference = SampleSet(data.data[:N]), SampleSet(data.data[N:])
    fit_cfg = GeneralFitConfig(
        pca_dim=pca_dim, nbasis=nbasis, alpha=alpha,
        compress=CompressSpec(algo=CompressAlgo.SVD_KN, ranks=rank, seed=seed),
        mean_field=MeanFieldKind.KDE, mesh=gl.mesh,
    )
    model = fit_general(train, fit_cfg)
    return sampler_fidelity(model, reference, N, seed)


def bench_sweep(param_name: str, values: Iterable[int],
                algos: Sequence[Union[str, CompressAlgo]] = (CompressAlgo.SVD_KN,),
                d: int = 5, N: int = 10_000, nbasis: int = 17, rank: int = 3,
                repeats: int = 1, seed: int = 0) -> pd.DataFrame:
    """Wall time of fit (features + compression) while N or d varies"""
    if param_name not in ("N", "d"):
        raise ConfigError(f"bench sweeps N or d, got {param_name!r}")
    records: List[BenchRecord] = []
    for value in values:
        dim, count = (d, int(value)) if param_name == "N" else (int(value), N)
        gm = GmSpec(d=dim)
        samples = gm_sample(gm, count, seed)
        bases = [FourierBasis(nbasis, gm.half_width)] * dim
        for algo in algos:
            spec = CompressSpec(algo=algo, ranks=rank, seed=seed)
            for repeat in range(repeats):
                t0 = time.perf_counter()
                fit(samples, bases, config.get_default_alpha(), spec)
                elapsed = time.perf_counter() - t0
                records.append(BenchRecord(param_name=param_name, param=int(value),
                                           wall_seconds=elapsed, algo=spec.algo.value,
                                           repeat=repeat))
                logger.info(f"bench {param_name}={value} algo={spec.algo.value} {elapsed:.3f}s")
    return pd.DataFrame([r.model_dump() for r in records])


def bench_slopes(table: pd.DataFrame) -> Dict[str, float]:
    """Log-log slope of the median wall time per algorithm"""
    slopes = {}
    for algo, group in table.groupby("algo"):
        medians = group.groupby("param")["wall_seconds"].median()
        slopes[algo] = loglog_slope(medians.index.values, medians.values)
    return slopes


def write_table(table: pd.DataFrame, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(path, index=False)
    return path
