"""
Error metrics between densities and between sample sets
"""
import logging
from typing import Optional, Tuple, Union

import numpy as np

from app.errors import ConfigError, NumericError, ShapeError
from app.estimator.density_ops import grid_tt, marginal, tabulated_cores
from app.estimator.model import DensityModel, SampleSet
from app.tensor.tt_core import TensorTrain, tt_inner
from app.utils.logger import MetricsWriter, get_structured_logger
from app.utils.tracing import get_current_run_id

logger = logging.getLogger(__name__)


def _weighted_grid_tt(q: Union[DensityModel, TensorTrain]) -> TensorTrain:
    """Grid values times sqrt(mesh); a TensorTrain is taken as already weighted"""
    if isinstance(q, DensityModel):
        return grid_tt(q, sqrt_weights=True)
    return q


def rel_l2(p: DensityModel, q: Union[DensityModel, TensorTrain]) -> float:
    """||p - q||_L2 / ||q||_L2 by midpoint quadrature on the grid of p"""
    P = _weighted_grid_tt(p)
    Q = _weighted_grid_tt(q)
    if P.mode_sizes != Q.mode_sizes:
        raise ShapeError(f"grids differ: {P.mode_sizes} vs {Q.mode_sizes}")
    qq = tt_inner(Q, Q)
    if not qq > 0:
        raise NumericError("reference density has zero L2 norm")
    pp = tt_inner(P, P)
    pq = tt_inner(P, Q)
    return float(np.sqrt(max(pp - 2.0 * pq + qq, 0.0) / qq))


def _gram(X: Union[SampleSet, np.ndarray]) -> np.ndarray:
    X = X.data if isinstance(X, SampleSet) else np.atleast_2d(np.asarray(X, dtype=float))
    return X.T @ X / X.shape[0]


def second_moment_error(X: Union[SampleSet, np.ndarray], X_ref: Union[SampleSet, np.ndarray]) -> float:
    """||G - G_ref||_F / ||G_ref||_F with G = X^T X / N for each set's own N"""
    G = _gram(X)
    G_ref = _gram(X_ref)
    if G.shape != G_ref.shape:
        raise ShapeError(f"sample dimensions differ: {G.shape[0]} vs {G_ref.shape[0]}")
    scale = np.linalg.norm(G_ref)
    if not scale > 0:
        raise NumericError("reference samples have a zero second-moment matrix")
    return float(np.linalg.norm(G - G_ref) / scale)


def marginal_density_1d(m: DensityModel, j: int) -> Tuple[np.ndarray, np.ndarray]:
    """(nodes, density) of coordinate j of the model on its grid"""
    if not 0 <= j < m.d:
        raise ConfigError(f"coordinate {j} outside [0, {m.d})")
    if m.pca is not None:
        raise ConfigError("1D marginals are only defined in model coordinates; drop the PCA map first")
    cores = tabulated_cores(m)
    message = np.ones(1)
    for k in range(j):
        message = message @ np.einsum("agb,g->ab", cores[k], m.grids[k].weights())
    tail = np.ones(1)
    for k in range(m.d - 1, j, -1):
        tail = np.einsum("agb,g->ab", cores[k], m.grids[k].weights()) @ tail
    values = np.einsum("a,agb,b->g", message, cores[j], tail) / m.norm_const
    return m.grids[j].nodes(), values


def marginal_histogram(m: DensityModel, k: int, j: int,
                       samples: Optional[Union[SampleSet, np.ndarray]] = None) -> dict:
    """Density of coordinate j under the order-k marginal, plus a sample histogram on the same cells"""
    reduced = marginal(m, k)
    if m.pca is not None:
        reduced = reduced.with_updates(pca=None)
    nodes, density = marginal_density_1d(reduced, j)
    series = {"x": nodes, "model": density}
    if samples is not None:
        X = samples.data if isinstance(samples, SampleSet) else np.atleast_2d(samples)
        g = m.grids[j]
        edges = g.lo + np.arange(g.points + 1) * g.mesh
        counts, _ = np.histogram(X[:, j], bins=edges)
        series["samples"] = counts / (max(X.shape[0], 1) * g.mesh)
    return series


def record_metric(metric: str, value: float, config_hash: str,
                  writer: Optional[MetricsWriter] = None, **extra):
    """Append one JSON metric line and mirror it as a structured event"""
    writer = writer or MetricsWriter()
    record = writer.write(metric, value, config_hash, **extra)
    run_id = get_current_run_id()
    if run_id is not None:
        get_structured_logger().log_performance_metric(run_id, metric, float(value), "ratio",
                                                       {"config_hash": config_hash, **extra})
    logger.info(f"{metric} = {value:.6g}")
    return record
