"""
Configuration and value models (pydantic)
"""
import hashlib
import json
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

import config


class CompressAlgo(str, Enum):
    """TT-compress algorithm enumeration"""
    NAIVE = "naive"
    SVD_FAST = "svd_fast"
    SVD_KN = "svd_kn"
    SVD_C = "svd_c"
    SVD_C_HIER = "svd_c_hier"
    RSVD_T = "rsvd_t"


# Short names accepted on the command line
ALGO_ALIASES = {
    "tt_svd": "naive",
    "fast": "svd_fast",
    "kn": "svd_kn",
    "c": "svd_c",
    "cluster": "svd_c",
    "hier": "svd_c_hier",
    "rsvd": "rsvd_t",
    "rsvd-t": "rsvd_t",
}

SKETCHING_ALGOS = (CompressAlgo.SVD_KN, CompressAlgo.SVD_C_HIER, CompressAlgo.RSVD_T)


def resolve_algo(value: Any) -> Any:
    """Map CLI short names onto CompressAlgo values"""
    if isinstance(value, str):
        key = value.strip().lower().replace("-", "_")
        return ALGO_ALIASES.get(key, key)
    return value


class SketchLaw(str, Enum):
    """Entry law of random sketch cores"""
    GAUSSIAN = "gaussian"
    UNIFORM = "uniform"


class MeanFieldKind(str, Enum):
    """Reference measure used by the general pipeline"""
    KDE = "kde"
    UNIFORM = "uniform"


class PcaMethod(str, Enum):
    """Covariance eigendecomposition mode"""
    EXACT = "exact"
    STREAMING = "streaming"


class GlKind(str, Enum):
    """Ginzburg-Landau lattice kind"""
    GL1D = "gl1d"
    GL2D = "gl2d"


class GridSpec(BaseModel):
    """Uniform cell grid on [lo, hi]; quadrature nodes are the cell midpoints"""
    model_config = ConfigDict(frozen=True)

    lo: float
    hi: float
    mesh: float

    @model_validator(mode="after")
    def check_spacing(self):
        if not self.hi > self.lo:
            raise ValueError(f"grid needs hi > lo, got [{self.lo}, {self.hi}]")
        if not self.mesh > 0:
            raise ValueError(f"grid mesh must be positive, got {self.mesh}")
        cells = (self.hi - self.lo) / self.mesh
        if abs(cells - round(cells)) > 1e-6 * max(1.0, cells):
            raise ValueError(f"mesh {self.mesh} does not divide [{self.lo}, {self.hi}]")
        return self

    @classmethod
    def symmetric(cls, half_width: float, mesh: float) -> "GridSpec":
        return cls(lo=-half_width, hi=half_width, mesh=mesh)

    @property
    def points(self) -> int:
        return int(round((self.hi - self.lo) / self.mesh))

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def nodes(self) -> np.ndarray:
        return self.lo + (np.arange(self.points) + 0.5) * self.mesh

    def weights(self) -> np.ndarray:
        return np.full(self.points, self.mesh)

    def contains(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return (x >= self.lo) & (x <= self.hi)

    def cell_index(self, x: np.ndarray) -> np.ndarray:
        idx = np.floor((np.asarray(x, dtype=float) - self.lo) / self.mesh).astype(int)
        return np.clip(idx, 0, self.points - 1)


class CompressSpec(BaseModel):
    """Parameters of a TT-compress run"""
    algo: CompressAlgo = CompressAlgo.SVD_KN
    ranks: Union[int, List[int]] = Field(default_factory=lambda: config.DEFAULT_RANK)
    sketch_size: Optional[int] = None
    cluster_order: int = 1
    seed: int = 0
    pinv_rel_tol: float = Field(default_factory=lambda: config.PINV_REL_TOL)
    sketch_law: SketchLaw = SketchLaw.GAUSSIAN

    @field_validator("algo", mode="before")
    @classmethod
    def resolve_alias(cls, value: Any) -> Any:
        return resolve_algo(value)

    @model_validator(mode="after")
    def check_sizes(self):
        ranks = [self.ranks] if isinstance(self.ranks, int) else list(self.ranks)
        if any(r < 1 for r in ranks):
            raise ValueError(f"ranks must be >= 1, got {ranks}")
        if self.cluster_order < 0:
            raise ValueError("cluster_order must be >= 0")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")
        if self.pinv_rel_tol <= 0:
            raise ValueError("pinv_rel_tol must be positive")
        if self.sketch_size is None:
            self.sketch_size = config.get_sketch_size(self.algo.value)
        if self.sketch_size is not None and self.sketch_size < 1:
            raise ValueError("sketch_size must be >= 1")
        if self.algo in SKETCHING_ALGOS and self.sketch_size < max(ranks):
            raise ValueError(
                f"sketch_size {self.sketch_size} is thinner than the largest rank {max(ranks)}"
            )
        return self

    def ranks_for(self, d: int) -> List[int]:
        """Expand the rank setting to the d-1 interior cuts"""
        if isinstance(self.ranks, int):
            return [self.ranks] * (d - 1)
        if len(self.ranks) != d - 1:
            raise ValueError(f"expected {d - 1} ranks for d={d}, got {len(self.ranks)}")
        return list(self.ranks)


class GmSpec(BaseModel):
    """Gaussian mixture: outer mixture over widths of inner two-mean mixtures"""
    d: int = Field(ge=1)
    outer_weights: Tuple[float, ...] = (1 / 6, 1 / 3, 1 / 2)
    sigmas: Tuple[float, ...] = (0.18, 0.20, 0.22)
    inner_weights: Tuple[float, ...] = (2 / 3, 1 / 3)
    means: Tuple[float, ...] = (-0.5, 0.5)
    half_width: float = Field(default_factory=lambda: config.GM_HALF_WIDTH)
    mesh: float = Field(default_factory=lambda: config.GM_MESH)

    @model_validator(mode="after")
    def check_weights(self):
        if len(self.outer_weights) != len(self.sigmas):
            raise ValueError("one outer weight per sigma is required")
        if len(self.inner_weights) != len(self.means):
            raise ValueError("one inner weight per mean is required")
        for name, w in (("outer", self.outer_weights), ("inner", self.inner_weights)):
            if abs(sum(w) - 1.0) > 1e-12 or min(w) < 0:
                raise ValueError(f"{name} weights must be a probability vector")
        if min(self.sigmas) <= 0:
            raise ValueError("sigmas must be positive")
        return self

    def grid(self) -> GridSpec:
        return GridSpec.symmetric(self.half_width, self.mesh)

    def components(self) -> List[Tuple[float, float, float]]:
        """(weight, mean, sigma) for every separable component"""
        return [
            (wo * wi, mu, sigma)
            for wo, sigma in zip(self.outer_weights, self.sigmas)
            for wi, mu in zip(self.inner_weights, self.means)
        ]


class GlSpec(BaseModel):
    """Ginzburg-Landau Boltzmann target"""
    kind: GlKind
    size: int = Field(ge=1, description="d for gl1d, lattice side m for gl2d")
    lam: float
    beta: float
    half_width: float
    mesh: float = Field(default_factory=lambda: config.GL_MESH)

    @model_validator(mode="after")
    def check_positive(self):
        if self.lam <= 0 or self.beta <= 0:
            raise ValueError("lambda and beta must be positive")
        return self

    @classmethod
    def gl1d(cls, d: int, lam: float = 0.03, beta: float = 1 / 8, half_width: float = 2.5) -> "GlSpec":
        return cls(kind=GlKind.GL1D, size=d, lam=lam, beta=beta, half_width=half_width)

    @classmethod
    def gl2d(cls, m: int, lam: float = 0.1, beta: float = 1.0, half_width: float = 2.0) -> "GlSpec":
        return cls(kind=GlKind.GL2D, size=m, lam=lam, beta=beta, half_width=half_width)

    @property
    def dim(self) -> int:
        return self.size if self.kind == GlKind.GL1D else self.size ** 2

    @property
    def h(self) -> float:
        return 1.0 / (1 + self.size)

    def grid(self) -> GridSpec:
        return GridSpec.symmetric(self.half_width, self.mesh)


class LangevinConfig(BaseModel):
    """Euler-Maruyama settings; step None means default step / beta"""
    step: Optional[float] = None
    burn_in: int = Field(default_factory=lambda: config.LANGEVIN_BURN_IN, ge=0)
    thinning: int = Field(default_factory=lambda: config.LANGEVIN_THINNING, ge=1)
    n_chains: int = Field(default_factory=lambda: config.LANGEVIN_CHAINS, ge=1)
    seed: int = 0
    metropolis: bool = Field(default_factory=lambda: config.LANGEVIN_METROPOLIS)
    max_norm: float = 1e6

    @field_validator("step")
    @classmethod
    def check_step(cls, value: Optional[float]) -> Optional[float]:
        if value is not None and value <= 0:
            raise ValueError("Langevin step must be positive")
        return value

    def step_for(self, beta: float) -> float:
        return self.step if self.step is not None else config.LANGEVIN_STEP / beta


class GeneralFitConfig(BaseModel):
    """Settings of the PCA + KDE + orthogonalization pipeline"""
    pca_dim: Optional[int] = None
    nbasis: int = Field(default_factory=lambda: config.DEFAULT_NBASIS, ge=1)
    alpha: float = Field(default_factory=lambda: config.DEFAULT_ALPHA)
    lam: float = Field(default_factory=lambda: config.DEFAULT_LAMBDA, ge=0)
    compress: CompressSpec = Field(default_factory=CompressSpec)
    mean_field: MeanFieldKind = MeanFieldKind.KDE
    rotate: bool = True
    center: bool = True
    pca_method: PcaMethod = PcaMethod.EXACT
    mesh: float = Field(default_factory=lambda: config.GL_MESH)
    margin: float = Field(default=0.05, ge=0)
    kde_bandwidth: Optional[float] = None
    uniform_half_width: Optional[float] = None

    @field_validator("alpha")
    @classmethod
    def check_alpha(cls, value: float) -> float:
        if not 0 < value <= 1:
            raise ValueError(f"alpha must lie in (0, 1], got {value}")
        return value


class SamplerDiagnostics(BaseModel):
    """Conditional sampler report"""
    count: int
    requested: int
    clipped_mass_total: float = 0.0
    aborted: int = 0

    @property
    def clipped_mass_mean(self) -> float:
        return self.clipped_mass_total / max(self.requested, 1)


class LangevinReport(BaseModel):
    """Langevin run summary written into sample manifests"""
    step: float
    n_chains: int
    steps_run: int
    burn_in: int
    thinning: int
    kept: int
    rejected_outside: int = 0
    moment_drift: float = 0.0
    metropolis: bool = False
    moves_accepted: Optional[float] = None

    @property
    def acceptance(self) -> float:
        seen = self.kept + self.rejected_outside
        return self.kept / seen if seen else 0.0


class MetricRecord(BaseModel):
    """One metrics JSON line"""
    metric: str
    value: float
    config_hash: str
    extra: Dict[str, Any] = Field(default_factory=dict)


class BenchRecord(BaseModel):
    """One timing row of a scaling sweep"""
    param_name: str
    param: int
    wall_seconds: float
    algo: str
    repeat: int = 0


class RunConfig(BaseModel):
    """Resolved CLI configuration (TOML file + flag overrides)"""
    model: Optional[str] = None
    d: Optional[int] = None
    m: Optional[int] = None
    n: Optional[int] = None
    seed: int = 0
    algo: CompressAlgo = CompressAlgo.SVD_KN
    rank: int = Field(default_factory=lambda: config.DEFAULT_RANK)
    nbasis: int = Field(default_factory=lambda: config.DEFAULT_NBASIS)
    alpha: float = Field(default_factory=lambda: config.DEFAULT_ALPHA)
    lam: float = Field(default_factory=lambda: config.DEFAULT_LAMBDA)
    rtilde: Optional[int] = None
    cluster_order: int = 1
    sketch_law: SketchLaw = SketchLaw.GAUSSIAN
    pca_dim: Optional[int] = None
    mean_field: MeanFieldKind = MeanFieldKind.UNIFORM
    half_width: Optional[float] = None
    mesh: Optional[float] = None
    count: Optional[int] = None
    langevin: LangevinConfig = Field(default_factory=LangevinConfig)

    @field_validator("algo", mode="before")
    @classmethod
    def resolve_alias(cls, value: Any) -> Any:
        return resolve_algo(value)

    def compress_spec(self) -> CompressSpec:
        return CompressSpec(
            algo=self.algo,
            ranks=self.rank,
            sketch_size=self.rtilde,
            cluster_order=self.cluster_order,
            seed=self.seed,
            sketch_law=self.sketch_law,
        )

    def config_hash(self) -> str:
        """Stable short hash of the resolved configuration"""
        payload = json.dumps(self.model_dump(mode="json"), sort_keys=True)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]
