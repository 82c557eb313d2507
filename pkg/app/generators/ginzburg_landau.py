"""
Ginzburg-Landau lattice potentials (1D chain and 2D square lattice) and a
harmonic reference potential, each with an analytic gradient.
"""
from typing import Union

import numpy as np

from app.errors import ConfigError, NumericError, ShapeError
from app.models.config_models import GlKind, GlSpec, GridSpec
from app.tensor.tt_core import TensorTrain, tt_contract


def _batch(x: np.ndarray, d: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    batch = np.atleast_2d(x)
    if batch.shape[-1] != d:
        raise ShapeError(f"points have {batch.shape[-1]} coordinates, potential expects {d}")
    return batch


def _unbatch(values: np.ndarray, like: np.ndarray) -> Union[float, np.ndarray]:
    return float(values[0]) if np.ndim(like) == 1 else values


def _pad_chain(x: np.ndarray) -> np.ndarray:
    """x_0 = x_{d+1} = 0"""
    return np.pad(x, ((0, 0), (1, 1)))


def _pad_lattice(x: np.ndarray, m: int) -> np.ndarray:
    """Rows 0 and m+1 fixed at +1, columns 0 and m+1 at -1"""
    P = np.zeros((x.shape[0], m + 2, m + 2))
    P[:, 1:-1, 1:-1] = x.reshape(-1, m, m)
    P[:, 0, :] = 1.0
    P[:, -1, :] = 1.0
    P[:, 1:-1, 0] = -1.0
    P[:, 1:-1, -1] = -1.0
    return P


def _well(x: np.ndarray, lam: float) -> np.ndarray:
    return ((1.0 - x ** 2) ** 2).sum(axis=-1) / (4.0 * lam)


def gl_potential(spec: GlSpec, x: np.ndarray) -> Union[float, np.ndarray]:
    """V(x) for one point (d,) or a batch (B, d); 2D lattices are flattened row-major"""
    X = _batch(x, spec.dim)
    lam, h = spec.lam, spec.h
    if spec.kind == GlKind.GL1D:
        P = _pad_chain(X)
        bonds = (np.diff(P, axis=1) ** 2).sum(axis=1)
    else:
        m = spec.size
        P = _pad_lattice(X, m)
        vertical = P[:, 1:, 1:-1] - P[:, :-1, 1:-1]
        horizontal = P[:, 1:-1, 1:] - P[:, 1:-1, :-1]
        bonds = (vertical ** 2).sum(axis=(1, 2)) + (horizontal ** 2).sum(axis=(1, 2))
    V = 0.5 * lam * bonds / h ** 2 + _well(X, lam)
    return _unbatch(V, x)


def gl_gradient(spec: GlSpec, x: np.ndarray) -> np.ndarray:
    """Analytic gradient of gl_potential, same shape as x"""
    X = _batch(x, spec.dim)
    lam, h = spec.lam, spec.h
    if spec.kind == GlKind.GL1D:
        P = _pad_chain(X)
        laplace = 2.0 * P[:, 1:-1] - P[:, :-2] - P[:, 2:]
    else:
        m = spec.size
        P = _pad_lattice(X, m)
        laplace = (4.0 * P[:, 1:-1, 1:-1] - P[:, :-2, 1:-1] - P[:, 2:, 1:-1]
                   - P[:, 1:-1, :-2] - P[:, 1:-1, 2:]).reshape(X.shape[0], -1)
    G = lam * laplace / h ** 2 - X * (1.0 - X ** 2) / lam
    return G[0] if np.ndim(x) == 1 else G


class GinzburgLandau:
    """Boltzmann target exp(-beta V) of a Ginzburg-Landau lattice"""

    def __init__(self, spec: GlSpec):
        self.spec = spec

    @property
    def dim(self) -> int:
        return self.spec.dim

    @property
    def beta(self) -> float:
        return self.spec.beta

    def box(self) -> GridSpec:
        return self.spec.grid()

    def energy(self, x: np.ndarray) -> Union[float, np.ndarray]:
        return gl_potential(self.spec, x)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return gl_gradient(self.spec, x)

    def describe(self) -> dict:
        return {"kind": self.spec.kind.value, **self.spec.model_dump(mode="json")}


class HarmonicPotential:
    """V(x) = |x|^2 / 2, whose Boltzmann law is N(0, I / beta)"""

    def __init__(self, d: int, beta: float = 1.0, half_width: float = 8.0, mesh: float = 0.05):
        if d < 1 or beta <= 0:
            raise ShapeError(f"harmonic potential needs d >= 1 and beta > 0, got d={d}, beta={beta}")
        self.d = int(d)
        self._beta = float(beta)
        self._box = GridSpec.symmetric(half_width, mesh)

    @property
    def dim(self) -> int:
        return self.d

    @property
    def beta(self) -> float:
        return self._beta

    def box(self) -> GridSpec:
        return self._box

    def energy(self, x: np.ndarray) -> Union[float, np.ndarray]:
        X = _batch(x, self.d)
        return _unbatch(0.5 * (X ** 2).sum(axis=1), x)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        _batch(x, self.d)
        return np.asarray(x, dtype=float).copy()

    def describe(self) -> dict:
        return {"kind": "harmonic", "d": self.d, "beta": self._beta}


def gl1d_grid_truth(spec: GlSpec, sqrt_weights: bool = True) -> TensorTrain:
    """Normalized exp(-beta V) on the grid nodes as a transfer-matrix tensor train.

    The chain couples only neighbours, so core j carries the previous site's node
    as its left index; ranks equal the number of grid points.
    """
    if spec.kind != GlKind.GL1D:
        raise ConfigError("grid ground truth is only available for the 1D chain")
    g = spec.grid()
    x = g.nodes()
    beta, lam, h = spec.beta, spec.lam, spec.h
    coupling = 0.5 * lam / h ** 2
    site = np.exp(-beta * (1.0 - x ** 2) ** 2 / (4.0 * lam))
    edge = np.exp(-beta * coupling * x ** 2)
    bond = np.exp(-beta * coupling * (x[None, :] - x[:, None]) ** 2)

    G = g.points
    d = spec.dim
    eye = np.eye(G)
    if d == 1:
        cores = [(edge ** 2 * site)[None, :, None]]
    else:
        cores = [(eye * (edge * site))[None, :, :]]
        inner = (bond * site[None, :])[:, :, None] * eye[None, :, :]
        cores += [inner] * (d - 2)
        cores.append((bond * (site * edge)[None, :])[:, :, None])
    T = TensorTrain(cores)

    Z = tt_contract(T, [g.weights()] * d)
    if not Z > 0:
        raise NumericError("Boltzmann weights underflow on the grid")
    scale = 1.0 / Z
    if sqrt_weights:
        scale *= np.sqrt(g.mesh) ** d
    return T.scaled(scale)
