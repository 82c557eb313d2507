"""
Univariate basis families, reference measures and alpha-weighted feature blocks.

Every family is normalized so that its first function is the constant 1 and the
family is orthonormal with respect to its own reference (mean-field) density.
"""
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, List, Optional

import numpy as np
from numpy.polynomial import legendre

from app.errors import ConfigError, DomainError, FormatError, NumericError, ShapeError
from app.models.config_models import GridSpec
from app.utils.encoding import decode_array, encode_array

logger = logging.getLogger(__name__)

MEAN_FIELD = "mean_field"
LEBESGUE = "lebesgue"


class MeanField:
    """Separable reference density on one coordinate: uniform or tabulated on a grid"""

    def __init__(self, lo: float, hi: float, grid: Optional[GridSpec] = None,
                 values: Optional[np.ndarray] = None):
        self.lo = float(lo)
        self.hi = float(hi)
        self.grid = grid
        self.values = None if values is None else np.asarray(values, dtype=float)
        if self.values is not None:
            if grid is None or self.values.shape != (grid.points,):
                raise ShapeError("tabulated mean-field needs one value per grid node")
            if (self.values < 0).any():
                raise NumericError("mean-field density must be nonnegative")

    @classmethod
    def uniform(cls, lo: float, hi: float) -> "MeanField":
        return cls(lo, hi)

    @classmethod
    def tabulated(cls, grid: GridSpec, values: np.ndarray) -> "MeanField":
        return cls(grid.lo, grid.hi, grid, values)

    @property
    def is_uniform(self) -> bool:
        return self.values is None

    def density(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.is_uniform:
            return np.full(x.shape, 1.0 / (self.hi - self.lo))
        return np.interp(x, self.grid.nodes(), self.values)

    def to_metadata(self) -> Dict[str, Any]:
        if self.is_uniform:
            return {"kind": "uniform", "lo": self.lo, "hi": self.hi}
        return {
            "kind": "tabulated",
            "grid": self.grid.model_dump(),
            "values": encode_array(self.values),
        }

    @classmethod
    def from_metadata(cls, meta: Dict[str, Any]) -> "MeanField":
        kind = meta.get("kind")
        if kind == "uniform":
            return cls.uniform(meta["lo"], meta["hi"])
        if kind == "tabulated":
            return cls.tabulated(GridSpec(**meta["grid"]), decode_array(meta["values"]))
        raise FormatError(f"unknown mean-field kind: {kind}")


class BasisFamily(ABC):
    """n univariate functions on [lo, hi], first one constant"""

    kind: str = ""

    def __init__(self, n: int, lo: float, hi: float):
        if n < 1:
            raise ConfigError(f"basis size must be >= 1, got {n}")
        self.n = int(n)
        self.lo = float(lo)
        self.hi = float(hi)

    @abstractmethod
    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """Values phi_l(x) as an array of shape (len(x), n)"""

    @abstractmethod
    def mean_field(self) -> MeanField:
        """Reference density the family is orthonormal against"""

    @abstractmethod
    def native_grid(self) -> GridSpec:
        """Quadrature grid resolving every function of the family"""

    @abstractmethod
    def to_metadata(self) -> Dict[str, Any]:
        ...

    def exact_integrals(self, measure: str) -> Optional[np.ndarray]:
        """Closed-form integral vector when one is known"""
        if measure == MEAN_FIELD:
            e1 = np.zeros(self.n)
            e1[0] = 1.0
            return e1
        return None

    def min_points_per_period(self, grid: GridSpec) -> float:
        return np.inf

    def out_of_domain(self, x: np.ndarray) -> int:
        x = np.asarray(x, dtype=float)
        tol = 1e-12 * max(1.0, abs(self.lo), abs(self.hi))
        return int(np.count_nonzero((x < self.lo - tol) | (x > self.hi + tol)))

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={self.n}, lo={self.lo}, hi={self.hi})"


def fourier_eval(l: int, x, L: float):
    """Lebesgue-orthonormal Fourier function l (1-based) on [-L, L]"""
    if l < 1:
        raise ConfigError(f"Fourier index must be >= 1, got {l}")
    x = np.asarray(x, dtype=float)
    if l == 1:
        out = np.full(x.shape, 1.0 / np.sqrt(2 * L))
    elif l % 2 == 0:
        out = np.cos(l * np.pi * x / (2 * L)) / np.sqrt(L)
    else:
        out = np.sin((l - 1) * np.pi * x / (2 * L)) / np.sqrt(L)
    return float(out) if out.ndim == 0 else out


class FourierBasis(BasisFamily):
    """Fourier family on [-L, L] rescaled by sqrt(2L) so that phi_1 = 1"""

    kind = "fourier"

    def __init__(self, n: int, half_width: float):
        if half_width <= 0:
            raise ConfigError(f"Fourier half-width must be positive, got {half_width}")
        super().__init__(n, -half_width, half_width)
        self.half_width = float(half_width)

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(-1)
        L = self.half_width
        out = np.empty((x.size, self.n))
        out[:, 0] = 1.0
        for l in range(2, self.n + 1):
            freq = l if l % 2 == 0 else l - 1
            wave = np.cos if l % 2 == 0 else np.sin
            out[:, l - 1] = np.sqrt(2.0) * wave(freq * np.pi * x / (2 * L))
        return out

    def mean_field(self) -> MeanField:
        return MeanField.uniform(self.lo, self.hi)

    def native_grid(self) -> GridSpec:
        points = max(64, 8 * self.n)
        return GridSpec(lo=self.lo, hi=self.hi, mesh=2 * self.half_width / points)

    @property
    def lebesgue_scale(self) -> float:
        return 1.0 / np.sqrt(2 * self.half_width)

    def exact_integrals(self, measure: str) -> Optional[np.ndarray]:
        e1 = np.zeros(self.n)
        e1[0] = 1.0 if measure == MEAN_FIELD else 2 * self.half_width
        return e1

    def min_points_per_period(self, grid: GridSpec) -> float:
        if self.n < 2:
            return np.inf
        top = self.n if self.n % 2 == 0 else self.n - 1
        period = 4 * self.half_width / top
        return period / grid.mesh

    def to_metadata(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "n": self.n,
            "L": self.half_width,
            "normalization": "uniform_mean_field",
            "lebesgue_scale": self.lebesgue_scale,
        }


class LegendreBasis(BasisFamily):
    """sqrt(2l-1) P_{l-1}(2t-1) with t the position in [lo, hi]"""

    kind = "legendre"

    def __init__(self, n: int, lo: float = 0.0, hi: float = 1.0):
        if not hi > lo:
            raise ConfigError(f"Legendre interval needs hi > lo, got [{lo}, {hi}]")
        super().__init__(n, lo, hi)

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(-1)
        s = 2.0 * (x - self.lo) / (self.hi - self.lo) - 1.0
        scale = np.sqrt(2.0 * np.arange(self.n) + 1.0)
        return legendre.legvander(s, self.n - 1) * scale

    def mean_field(self) -> MeanField:
        return MeanField.uniform(self.lo, self.hi)

    def native_grid(self) -> GridSpec:
        points = max(1024, 64 * self.n * self.n)
        return GridSpec(lo=self.lo, hi=self.hi, mesh=(self.hi - self.lo) / points)

    def exact_integrals(self, measure: str) -> Optional[np.ndarray]:
        e1 = np.zeros(self.n)
        e1[0] = 1.0 if measure == MEAN_FIELD else self.hi - self.lo
        return e1

    def to_metadata(self) -> Dict[str, Any]:
        return {"kind": self.kind, "n": self.n, "lo": self.lo, "hi": self.hi}


class TabulatedBasis(BasisFamily):
    """Functions given by their values at grid nodes, linearly interpolated in between"""

    kind = "tabulated"

    def __init__(self, grid: GridSpec, values: np.ndarray, weight: np.ndarray):
        values = np.atleast_2d(np.asarray(values, dtype=float))
        weight = np.asarray(weight, dtype=float)
        if values.shape[1] != grid.points or weight.shape != (grid.points,):
            raise ShapeError(
                f"tabulated basis needs {grid.points} values per function, got {values.shape}"
            )
        super().__init__(values.shape[0], grid.lo, grid.hi)
        self.grid = grid
        self.values = values
        self.weight = weight

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(-1)
        nodes = self.grid.nodes()
        return np.stack([np.interp(x, nodes, row) for row in self.values], axis=1)

    def mean_field(self) -> MeanField:
        return MeanField.tabulated(self.grid, self.weight)

    def native_grid(self) -> GridSpec:
        return self.grid

    def exact_integrals(self, measure: str) -> Optional[np.ndarray]:
        return None

    def to_metadata(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "n": self.n,
            "grid": self.grid.model_dump(),
            "values": encode_array(self.values),
            "weight": encode_array(self.weight),
        }


def basis_from_metadata(meta: Dict[str, Any]) -> BasisFamily:
    """Rebuild a basis family from its metadata dictionary"""
    kind = meta.get("kind")
    if kind == FourierBasis.kind:
        return FourierBasis(int(meta["n"]), float(meta["L"]))
    if kind == LegendreBasis.kind:
        return LegendreBasis(int(meta["n"]), float(meta["lo"]), float(meta["hi"]))
    if kind == TabulatedBasis.kind:
        return TabulatedBasis(
            GridSpec(**meta["grid"]), decode_array(meta["values"]), decode_array(meta["weight"])
        )
    raise FormatError(f"unknown basis kind: {kind}")


def gram_check(b: BasisFamily, quad: GridSpec) -> np.ndarray:
    """Gram matrix of the family against its reference density by midpoint quadrature"""
    ppp = b.min_points_per_period(quad)
    if ppp < 4:
        logger.warning(f"quadrature mesh {quad.mesh} gives {ppp:.2f} points per shortest period")
    x = quad.nodes()
    w = quad.weights() * b.mean_field().density(x)
    phi = b.evaluate(x)
    gram = phi.T @ (w[:, None] * phi)
    return 0.5 * (gram + gram.T)


def integral_vector(b: BasisFamily, measure: str = MEAN_FIELD,
                    grid: Optional[GridSpec] = None) -> np.ndarray:
    """m(l) = integral of phi_l against the requested measure on the domain"""
    if measure not in (MEAN_FIELD, LEBESGUE):
        raise ConfigError(f"unknown measure: {measure}")
    if grid is None:
        exact = b.exact_integrals(measure)
        if exact is not None:
            return exact
        grid = b.native_grid()
    x = grid.nodes()
    w = grid.weights()
    if measure == MEAN_FIELD:
        w = w * b.mean_field().density(x)
    return b.evaluate(x).T @ w


@dataclass
class FeatureBlock:
    """Rows [1, alpha phi_2(x_i), ..., alpha phi_n(x_i)] for one coordinate"""
    matrix: np.ndarray
    dim_index: int
    alpha: float

    @property
    def N(self) -> int:
        return self.matrix.shape[0]

    @property
    def n(self) -> int:
        return self.matrix.shape[1]


def check_alpha(alpha: float) -> float:
    if not 0 < alpha <= 1:
        raise ConfigError(f"alpha must lie in (0, 1], got {alpha}")
    return float(alpha)


def feature_block(samples_j: np.ndarray, b: BasisFamily, alpha: float,
                  dim_index: int = 0) -> FeatureBlock:
    """Alpha-weighted evaluations of the family at one coordinate of the samples"""
    alpha = check_alpha(alpha)
    x = np.asarray(samples_j, dtype=float).reshape(-1)
    if not np.isfinite(x).all():
        raise NumericError(f"non-finite samples in dimension {dim_index}")
    offenders = b.out_of_domain(x)
    if offenders:
        raise DomainError(
            f"{offenders} samples outside [{b.lo}, {b.hi}] in dimension {dim_index}",
            offenders=offenders,
        )
    matrix = b.evaluate(x)
    matrix[:, 0] = 1.0
    matrix[:, 1:] *= alpha
    return FeatureBlock(matrix=matrix, dim_index=dim_index, alpha=alpha)


def feature_blocks(data: np.ndarray, bases: List[BasisFamily], alpha: float) -> List[FeatureBlock]:
    data = np.atleast_2d(np.asarray(data, dtype=float))
    if data.shape[1] != len(bases):
        raise ShapeError(f"{data.shape[1]} columns for {len(bases)} bases")
    return [feature_block(data[:, j], b, alpha, j) for j, b in enumerate(bases)]


def orthonormalize_wrt(mu: np.ndarray, grid: GridSpec, n: int) -> TabulatedBasis:
    """Polynomials orthonormalized against a tabulated weight by modified Gram-Schmidt.

    Args:
        mu: nonnegative density values at the grid nodes, unit mass on the grid
        grid: grid carrying the weight
        n: number of functions

    Returns:
        TabulatedBasis whose first function is 1 and whose Gram matrix against mu is I
    """
    mu = np.asarray(mu, dtype=float)
    if mu.shape != (grid.points,):
        raise ShapeError(f"weight needs {grid.points} grid values, got {mu.shape}")
    if (mu < 0).any() or not np.isfinite(mu).all():
        raise NumericError("orthogonalization weight must be finite and nonnegative")
    mass = float(mu.sum() * grid.mesh)
    if mass <= 0:
        raise NumericError("orthogonalization weight has zero mass")
    if abs(mass - 1.0) > 1e-6:
        logger.warning(f"orthogonalization weight has mass {mass:.6g}, renormalizing")
        mu = mu / mass
    support = int(np.count_nonzero(mu > 0))
    if support < n:
        raise NumericError(f"weight supported on {support} grid cells cannot carry {n} functions")

    w = mu * grid.mesh
    s = 2.0 * (grid.nodes() - grid.lo) / grid.width - 1.0
    candidates = legendre.legvander(s, n - 1).T

    basis = np.zeros((n, grid.points))
    for k in range(n):
        v = candidates[k].copy()
        start = np.sqrt(v @ (w * v))
        for _ in range(2):
            for m in range(k):
                v -= (v @ (w * basis[m])) * basis[m]
        norm = np.sqrt(v @ (w * v))
        if norm <= 1e-10 * start:
            raise NumericError(f"weight too degenerate for {n} orthonormal functions")
        basis[k] = v / norm
    return TabulatedBasis(grid, basis, mu)
