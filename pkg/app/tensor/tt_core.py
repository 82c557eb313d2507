"""
Tensor-train container, dense oracles and the shared SVD/eigen conventions.

Multi-indices are grouped row-major (first index slowest) everywhere.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

import config
from app.errors import MemoryCapError, NumericError, RankError, ShapeError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SvdConvention:
    """Deterministic conventions for truncated SVD and symmetric eigenproblems.

    Args:
        rel_singular_floor: singular values below this fraction of the largest are reported as zero
        rank_floor: directions whose singular value is below this fraction of the largest are
            dropped by compressors (numerical rank)
        tie_tol: relative gap under which two eigenvalues count as equal
    """
    rel_singular_floor: float = 1e-12
    rank_floor: float = 1e-6
    tie_tol: float = 1e-12
    sign_rule: str = "largest-magnitude entry of each singular/eigen vector is positive"


DEFAULT_CONVENTION = SvdConvention()


@dataclass
class DenseTensor:
    """Full tensor stored as a flat row-major array"""
    mode_sizes: Tuple[int, ...]
    entries: np.ndarray

    def __post_init__(self):
        self.mode_sizes = tuple(int(n) for n in self.mode_sizes)
        self.entries = np.ascontiguousarray(self.entries, dtype=float).reshape(-1)
        if self.entries.size != int(np.prod(self.mode_sizes, dtype=np.int64)):
            raise ShapeError(
                f"{self.entries.size} entries do not fill mode sizes {self.mode_sizes}"
            )

    @classmethod
    def from_array(cls, array: np.ndarray) -> "DenseTensor":
        array = np.asarray(array, dtype=float)
        return cls(array.shape, array.reshape(-1))

    @property
    def d(self) -> int:
        return len(self.mode_sizes)

    def as_array(self) -> np.ndarray:
        return self.entries.reshape(self.mode_sizes)

    def __getitem__(self, index: Sequence[int]) -> float:
        return float(self.as_array()[tuple(index)])


class TensorTrain:
    """Chain of three-index cores G_j with shape (r_{j-1}, n_j, r_j), r_0 = r_d = 1"""

    def __init__(self, cores: Sequence[np.ndarray], check_finite: bool = True):
        if len(cores) == 0:
            raise ShapeError("a tensor train needs at least one core")
        self.cores: List[np.ndarray] = [np.asarray(c, dtype=float) for c in cores]
        for j, core in enumerate(self.cores):
            if core.ndim != 3:
                raise ShapeError(f"core {j} has {core.ndim} indices, expected 3")
        if self.cores[0].shape[0] != 1 or self.cores[-1].shape[2] != 1:
            raise ShapeError("boundary ranks of a tensor train must be 1")
        for j in range(1, len(self.cores)):
            if self.cores[j - 1].shape[2] != self.cores[j].shape[0]:
                raise ShapeError(
                    f"rank mismatch between core {j - 1} {self.cores[j - 1].shape} "
                    f"and core {j} {self.cores[j].shape}"
                )
        if check_finite and not all(np.isfinite(c).all() for c in self.cores):
            raise NumericError("tensor train cores contain NaN or Inf")

    @property
    def d(self) -> int:
        return len(self.cores)

    @property
    def ranks(self) -> List[int]:
        return [1] + [c.shape[2] for c in self.cores]

    @property
    def mode_sizes(self) -> List[int]:
        return [c.shape[1] for c in self.cores]

    def copy(self) -> "TensorTrain":
        return TensorTrain([c.copy() for c in self.cores])

    def scaled(self, factor: float) -> "TensorTrain":
        """Tensor train of factor * T (scales the first core)"""
        cores = [c.copy() for c in self.cores]
        cores[0] *= factor
        return TensorTrain(cores)

    def scale_modes(self, weights: Sequence[np.ndarray]) -> "TensorTrain":
        """Multiply mode index l of core j by weights[j][l]"""
        return TensorTrain([c * np.asarray(w, dtype=float)[None, :, None]
                            for c, w in zip(self.cores, weights)])

    def __repr__(self) -> str:
        return f"TensorTrain(d={self.d}, mode_sizes={self.mode_sizes}, ranks={self.ranks})"


def check_memory(entries: int, what: str, cap: Optional[int] = None) -> None:
    """Raise MemoryCapError when a dense oracle would exceed the entry cap"""
    cap = config.get_memory_cap() if cap is None else cap
    if entries > cap:
        raise MemoryCapError(f"{what} needs {entries} entries, cap is {cap}")


def unfold(A: DenseTensor, j: int) -> np.ndarray:
    """j-th unfolding: rows group indices 1..j, columns group j+1..d"""
    if not 0 <= j <= A.d:
        raise ShapeError(f"unfolding index {j} outside [0, {A.d}]")
    rows = int(np.prod(A.mode_sizes[:j], dtype=np.int64))
    return A.entries.reshape(rows, -1)


def refold(M: np.ndarray, mode_sizes: Sequence[int], j: int) -> DenseTensor:
    """Inverse of unfold"""
    mode_sizes = tuple(int(n) for n in mode_sizes)
    if not 0 <= j <= len(mode_sizes):
        raise ShapeError(f"unfolding index {j} outside [0, {len(mode_sizes)}]")
    expected = (int(np.prod(mode_sizes[:j], dtype=np.int64)),
                int(np.prod(mode_sizes[j:], dtype=np.int64)))
    if tuple(np.shape(M)) != expected:
        raise ShapeError(f"matrix of shape {np.shape(M)} is not unfolding {j} of {mode_sizes}")
    return DenseTensor(mode_sizes, np.asarray(M).reshape(-1))


def _chain(cores: Sequence[np.ndarray]) -> np.ndarray:
    result = cores[0].reshape(-1, cores[0].shape[2])
    for core in cores[1:]:
        r, n, r_next = core.shape
        result = (result @ core.reshape(r, n * r_next)).reshape(-1, r_next)
    return result


def tt_to_dense(T: TensorTrain, cap: Optional[int] = None) -> DenseTensor:
    """Full tensor of a tensor train (oracle scale only)"""
    check_memory(int(np.prod(T.mode_sizes, dtype=np.int64)), "tt_to_dense", cap)
    return DenseTensor(T.mode_sizes, _chain(T.cores).reshape(-1))


def left_stack(T: TensorTrain, k: int, cap: Optional[int] = None) -> np.ndarray:
    """Interface matrix of the first k cores, shape (n_1...n_k, r_k)"""
    if not 1 <= k <= T.d - 1:
        raise ShapeError(f"left_stack index {k} outside [1, {T.d - 1}]")
    check_memory(int(np.prod(T.mode_sizes[:k], dtype=np.int64)) * T.ranks[k], "left_stack", cap)
    return _chain(T.cores[:k])


def tt_inner(A: TensorTrain, B: TensorTrain) -> float:
    """Sum over all multi-indices of A(i) B(i) by left-to-right contraction"""
    if A.mode_sizes != B.mode_sizes:
        raise ShapeError(f"mode sizes differ: {A.mode_sizes} vs {B.mode_sizes}")
    message = np.ones((1, 1))
    for GA, GB in zip(A.cores, B.cores):
        message = np.einsum("ab,anc,bnd->cd", message, GA, GB, optimize=True)
    return float(message[0, 0])


def tt_norm(T: TensorTrain) -> float:
    return float(np.sqrt(max(tt_inner(T, T), 0.0)))


def tt_contract(T: TensorTrain, vectors: Sequence[np.ndarray]) -> float:
    """Contract every core with one vector per mode"""
    if len(vectors) != T.d:
        raise ShapeError(f"expected {T.d} vectors, got {len(vectors)}")
    message = np.ones(1)
    for core, v in zip(T.cores, vectors):
        v = np.asarray(v, dtype=float)
        if v.shape != (core.shape[1],):
            raise ShapeError(f"vector of shape {v.shape} does not match mode size {core.shape[1]}")
        message = message @ np.einsum("anb,n->ab", core, v)
    return float(message[0])


def tt_from_rank1_terms(weights: Sequence[float], vectors: Sequence[np.ndarray]) -> TensorTrain:
    """Exact tensor train of sum_t weights[t] * vectors[0][t] x ... x vectors[d-1][t]

    Args:
        weights: R term weights
        vectors: one (R, n_j) array per dimension

    Returns:
        TensorTrain with block-diagonal interior cores of rank R
    """
    weights = np.asarray(weights, dtype=float)
    R = weights.size
    vectors = [np.atleast_2d(np.asarray(v, dtype=float)) for v in vectors]
    if any(v.shape[0] != R for v in vectors):
        raise ShapeError("every dimension needs one vector per term")
    d = len(vectors)
    if d == 1:
        return TensorTrain([(weights @ vectors[0])[None, :, None]])

    cores = []
    first = (weights[:, None] * vectors[0]).T
    cores.append(first[None, :, :])
    for v in vectors[1:-1]:
        core = np.zeros((R, v.shape[1], R))
        idx = np.arange(R)
        core[idx, :, idx] = v
        cores.append(core)
    cores.append(vectors[-1][:, :, None])
    return TensorTrain(cores)


def full_ranks(mode_sizes: Sequence[int]) -> List[int]:
    """Largest meaningful ranks r_j = min(n_1...n_j, n_{j+1}...n_d)"""
    sizes = [int(n) for n in mode_sizes]
    ranks = []
    for j in range(1, len(sizes)):
        left = int(np.prod(sizes[:j], dtype=np.int64))
        right = int(np.prod(sizes[j:], dtype=np.int64))
        ranks.append(min(left, right))
    return ranks


def _pivot_rows(U: np.ndarray) -> np.ndarray:
    # first entry within rounding of the largest magnitude, per column
    mags = np.abs(U)
    near_max = mags >= (1.0 - 1e-8) * mags.max(axis=0, keepdims=True)
    return np.argmax(near_max, axis=0)


def sign_fix(U: np.ndarray, V: Optional[np.ndarray] = None) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """Flip columns of U so their largest-magnitude entry is positive; V columns follow"""
    if U.size == 0:
        return U, V
    pivots = _pivot_rows(U)
    signs = np.where(U[pivots, np.arange(U.shape[1])] < 0, -1.0, 1.0)
    U = U * signs
    if V is not None:
        V = V * signs
    return U, V


def numerical_rank(values: np.ndarray, conv: SvdConvention = DEFAULT_CONVENTION) -> int:
    """Count of singular values above conv.rank_floor relative to the largest (at least 1)"""
    values = np.asarray(values, dtype=float)
    if values.size == 0 or values[0] <= 0:
        return 1
    return max(1, int(np.count_nonzero(values > conv.rank_floor * values[0])))


def truncated_svd(M: np.ndarray, rank: int,
                  conv: SvdConvention = DEFAULT_CONVENTION) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Top-rank SVD factors (U, S, V) with M ~ U diag(S) V^T under the sign convention"""
    M = np.asarray(M, dtype=float)
    if not np.isfinite(M).all():
        raise NumericError("truncated_svd input contains NaN or Inf")
    if rank < 1 or rank > min(M.shape):
        raise RankError(f"rank {rank} not in [1, {min(M.shape)}] for a {M.shape} matrix")
    try:
        U, S, Vt = linalg.svd(M, full_matrices=False)
    except linalg.LinAlgError:
        logger.warning("gesdd did not converge, retrying with gesvd")
        U, S, Vt = linalg.svd(M, full_matrices=False, lapack_driver="gesvd")
    U, V = sign_fix(U[:, :rank], Vt[:rank].T)
    S = S[:rank].copy()
    if S.size and S[0] > 0:
        S[S < conv.rel_singular_floor * S[0]] = 0.0
    return U, S, V


def symmetric_eig(A: np.ndarray, rank: Optional[int] = None,
                  conv: SvdConvention = DEFAULT_CONVENTION) -> Tuple[np.ndarray, np.ndarray]:
    """Leading eigenpairs of (A + A^T)/2, descending, sign-fixed, ties in lexicographic order"""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ShapeError(f"symmetric_eig needs a square matrix, got {A.shape}")
    if not np.isfinite(A).all():
        raise NumericError("symmetric_eig input contains NaN or Inf")
    rank = A.shape[0] if rank is None else rank
    if rank < 1 or rank > A.shape[0]:
        raise RankError(f"rank {rank} not in [1, {A.shape[0]}]")

    w, V = linalg.eigh(0.5 * (A + A.T))
    w, V = w[::-1], V[:, ::-1]
    V, _ = sign_fix(V)

    scale = max(abs(w[0]), abs(w[-1]), np.finfo(float).tiny)
    order = np.arange(w.size)
    start = 0
    while start < w.size:
        stop = start + 1
        while stop < w.size and w[start] - w[stop] <= conv.tie_tol * scale:
            stop += 1
        if stop - start > 1:
            block = V[:, start:stop]
            order[start:stop] = start + np.lexsort(-block[::-1])
        start = stop
    w, V = w[order], V[:, order]
    return w[:rank], V[:, :rank]
