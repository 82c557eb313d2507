"""
Value types of the estimator: sample sets and fitted density models
"""
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Any, Dict, List, Optional, Sequence, Union

import numpy as np

from app.basis.families import BasisFamily, MeanField
from app.errors import ConfigError, DomainError, NumericError, ShapeError
from app.models.config_models import GridSpec
from app.tensor.tt_core import TensorTrain

if TYPE_CHECKING:
    from app.estimator.preprocess import PcaModel


def _box_list(box: Union[GridSpec, Sequence[GridSpec], None], d: int) -> Optional[List[GridSpec]]:
    if box is None:
        return None
    if isinstance(box, GridSpec):
        return [box] * d
    box = list(box)
    if len(box) != d:
        raise ShapeError(f"{len(box)} box intervals for {d} dimensions")
    return box


class SampleSet:
    """N x d observations, optionally tied to a domain box checked at ingestion"""

    def __init__(self, data: np.ndarray, box: Union[GridSpec, Sequence[GridSpec], None] = None):
        data = np.asarray(data, dtype=float)
        if data.ndim == 1:
            data = data[:, None]
        if data.ndim != 2:
            raise ShapeError(f"samples must form an N x d matrix, got shape {data.shape}")
        if data.shape[0] < 1:
            raise ConfigError("a sample set needs at least one observation")
        if not np.isfinite(data).all():
            raise NumericError("samples contain NaN or Inf")
        self.data = data
        self.box = _box_list(box, data.shape[1])
        if self.box is not None:
            offenders = self.count_outside(self.box)
            if offenders:
                raise DomainError(f"{offenders} samples lie outside the domain box", offenders=offenders)

    def count_outside(self, box: Sequence[GridSpec]) -> int:
        inside = np.ones(self.N, dtype=bool)
        for j, g in enumerate(box):
            inside &= g.contains(self.data[:, j])
        return int(np.count_nonzero(~inside))

    @property
    def N(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]

    def __len__(self) -> int:
        return self.N

    def __repr__(self) -> str:
        return f"SampleSet(N={self.N}, d={self.d})"


@dataclass
class DensityModel:
    """p(x) = Z^-1 prod_j mu_j(z_j) * TT-chain of sum_l G_j(:, l, :) phi_l(z_j), z = Q^T (x - c)"""
    coeff: TensorTrain
    bases: List[BasisFamily]
    mean_fields: List[MeanField]
    grids: List[GridSpec]
    alpha: float
    lam: float = 0.0
    pca: Optional["PcaModel"] = None
    norm_const: float = 1.0
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        d = self.coeff.d
        if not (len(self.bases) == len(self.mean_fields) == len(self.grids) == d):
            raise ShapeError("one basis, mean field and grid per dimension is required")
        for j, (b, n) in enumerate(zip(self.bases, self.coeff.mode_sizes)):
            if b.n != n:
                raise ShapeError(f"basis {j} has {b.n} functions, core has mode size {n}")
        if self.pca is not None and self.pca.Q.shape[1] != d:
            raise ShapeError(f"PCA map has {self.pca.Q.shape[1]} components for d={d}")

    @property
    def d(self) -> int:
        return self.coeff.d

    @property
    def input_dim(self) -> int:
        return self.d if self.pca is None else self.pca.Q.shape[0]

    def with_updates(self, **changes) -> "DensityModel":
        return replace(self, **changes)

    def to_reduced(self, x: np.ndarray) -> np.ndarray:
        """Map input points to model coordinates"""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.input_dim:
            raise ShapeError(f"points have {x.shape[1]} coordinates, model expects {self.input_dim}")
        if self.pca is None:
            return x
        return self.pca.transform(x)

    def from_reduced(self, z: np.ndarray) -> np.ndarray:
        if self.pca is None:
            return z
        return self.pca.inverse_transform(z)

    def check_domain(self, z: np.ndarray) -> None:
        offenders = 0
        for j, b in enumerate(self.bases):
            offenders += b.out_of_domain(z[:, j])
        if offenders:
            raise DomainError(f"{offenders} coordinates outside the model domain", offenders=offenders)

    def univariate_factors(self, j: int, x: np.ndarray) -> np.ndarray:
        """mu_j(x) phi_l(x), shape (len(x), n_j)"""
        x = np.asarray(x, dtype=float).reshape(-1)
        return self.bases[j].evaluate(x) * self.mean_fields[j].density(x)[:, None]
