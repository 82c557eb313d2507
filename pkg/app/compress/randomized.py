"""
TT-rSVD-t: the unfolding is sketched on the right by a random tensor train
H_{j+1}..H_d contracted against each sample's feature rows.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from app.compress.common import (
    BlockLike, CoreCallback, SuffixRecursion, block_matrices, core_from_matrix, sweep,
    validate_ranks,
)
from app.errors import ConfigError
from app.models.config_models import SketchLaw
from app.tensor.tt_core import DEFAULT_CONVENTION, SvdConvention, TensorTrain

logger = logging.getLogger(__name__)


@dataclass
class RandomTTSketch:
    """Cores H_1 (1, n, r), H_2..H_{d-1} (r, n, r), H_d (r, n, 1) with i.i.d. entries"""
    cores: List[np.ndarray]
    law: SketchLaw

    @classmethod
    def draw(cls, mode_sizes: Sequence[int], width: int, seed: int,
             law: SketchLaw = SketchLaw.GAUSSIAN) -> "RandomTTSketch":
        law = SketchLaw(law)
        rng = np.random.default_rng(seed)
        d = len(mode_sizes)
        cores = []
        for j, n in enumerate(mode_sizes):
            shape = (1 if j == 0 else width, n, 1 if j == d - 1 else width)
            if law == SketchLaw.GAUSSIAN:
                cores.append(rng.standard_normal(shape))
            else:
                cores.append(rng.uniform(-1.0, 1.0, size=shape))
        return cls(cores=cores, law=law)

    @property
    def width(self) -> int:
        return self.cores[-1].shape[0]


def sketch_rows(mats: Sequence[np.ndarray], sketch: RandomTTSketch) -> SuffixRecursion:
    """E_j^(i) = [sum_m H_{j+1}(:, m, :) Phi_{j+1}^(i)(m)] E_{j+1}^(i), E_{d-1} = H_d Phi_d^(i)"""
    N = mats[0].shape[0]

    def step(j: int, E: np.ndarray) -> np.ndarray:
        H = sketch.cores[j + 1]
        phi = mats[j + 1]
        X = (phi[:, :, None] * E[:, None, :]).reshape(N, -1)
        return X @ H.reshape(H.shape[0], -1).T

    return SuffixRecursion(len(mats), lambda: np.ones((N, 1)), step)


def tt_rsvd_t(blocks: Sequence[BlockLike], ranks: Sequence[int], sketch_size: int = 30,
              seed: int = 0, law: SketchLaw = SketchLaw.GAUSSIAN,
              conv: SvdConvention = DEFAULT_CONVENTION,
              on_core: Optional[CoreCallback] = None) -> TensorTrain:
    """Randomized TT-SVD with a tensor-train sketch"""
    mats = block_matrices(blocks)
    d = len(mats)
    N = mats[0].shape[0]
    if d == 1:
        return sweep(mats, ranks, None)
    ranks = validate_ranks(ranks, [m.shape[1] for m in mats])
    if sketch_size < max(ranks):
        raise ConfigError(f"sketch size {sketch_size} is thinner than the largest rank {max(ranks)}")

    sketch = RandomTTSketch.draw([m.shape[1] for m in mats], sketch_size, seed, law)
    rows = sketch_rows(mats, sketch)

    def left_basis(j: int, D: np.ndarray, rank: int) -> np.ndarray:
        return core_from_matrix(D.T @ rows[j] / N, rank, j, conv, on_core)

    return sweep(mats, ranks, left_basis)
