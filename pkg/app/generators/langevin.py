"""
Overdamped Langevin sampling of Boltzmann targets exp(-beta V).

Euler-Maruyama on dX = -beta grad V dt + sqrt(2) dW, run as independent
chains that each own a random stream spawned from the configured seed.
With `metropolis` set, every step is a proposal accepted or rejected
against exp(-beta V) restricted to the box, so samples carry no step bias.
"""
import logging
from typing import List, Optional, Protocol, Tuple, Union

import numpy as np

from app.errors import ConfigError, NumericError
from app.estimator.model import SampleSet
from app.generators.ginzburg_landau import GinzburgLandau
from app.models.config_models import GlSpec, GridSpec, LangevinConfig, LangevinReport
from app.utils.tracing import add_run_metadata

logger = logging.getLogger(__name__)

# Steps of noise drawn per chain at once
NOISE_BLOCK = 256


class BoltzmannTarget(Protocol):
    dim: int
    beta: float

    def box(self) -> GridSpec: ...

    def energy(self, x: np.ndarray) -> Union[float, np.ndarray]: ...

    def gradient(self, x: np.ndarray) -> np.ndarray: ...


class LangevinChains:
    """A batch of Langevin chains advanced in lockstep"""

    def __init__(self, target: BoltzmannTarget, cfg: LangevinConfig):
        self.target = target
        self.cfg = cfg
        self.dt = cfg.step_for(target.beta)
        self.steps_run = 0
        self.proposed = 0
        self.accepted = 0
        self._energy: Optional[np.ndarray] = None
        self._grad: Optional[np.ndarray] = None
        streams = np.random.SeedSequence(cfg.seed).spawn(cfg.n_chains)
        self.rngs = [np.random.default_rng(s) for s in streams]
        box = target.box()
        self._box = box
        # chains start in the middle half of the box
        self.x = np.stack([
            box.lo + box.width * (0.25 + 0.5 * rng.random(target.dim)) for rng in self.rngs
        ])

    def _noise(self, steps: int) -> Tuple[np.ndarray, Optional[np.ndarray]]:
        normals, uniforms = [], []
        for rng in self.rngs:
            normals.append(rng.standard_normal((steps, self.target.dim)))
            if self.cfg.metropolis:
                uniforms.append(rng.random(steps))
        noise = np.stack(normals, axis=1)
        return noise, (np.stack(uniforms, axis=1) if self.cfg.metropolis else None)

    def _check(self) -> None:
        size = np.abs(self.x).max()
        if not np.isfinite(size) or size > self.cfg.max_norm:
            raise NumericError(
                f"Langevin chains diverged after {self.steps_run} steps (max |x| = {size:.3g}); "
                f"retry with a step smaller than {self.dt:.3g}"
            )

    def _log_transition(self, to: np.ndarray, start: np.ndarray, grad_start: np.ndarray) -> np.ndarray:
        """log q(to | start) of the Euler-Maruyama proposal, up to a constant"""
        mean = start - self.target.beta * self.dt * grad_start
        return -((to - mean) ** 2).sum(axis=1) / (4.0 * self.dt)

    def _metropolis_step(self, noise: np.ndarray, u: np.ndarray) -> None:
        """Euler-Maruyama proposal under a Metropolis-Hastings test; moves out of the box are rejected"""
        beta = self.target.beta
        if self._energy is None:
            self._energy = np.atleast_1d(self.target.energy(self.x))
            self._grad = self.target.gradient(self.x)
        proposal = self.x - beta * self.dt * self._grad + np.sqrt(2.0 * self.dt) * noise
        with np.errstate(over="ignore", invalid="ignore"):
            energy = np.atleast_1d(self.target.energy(proposal))
            grad = self.target.gradient(proposal)
            log_ratio = (-beta * (energy - self._energy)
                         + self._log_transition(self.x, proposal, grad)
                         - self._log_transition(proposal, self.x, self._grad))
        accept = np.log(np.maximum(u, 1e-300)) < log_ratio
        accept &= self._box.contains(proposal).all(axis=1)
        self.x = np.where(accept[:, None], proposal, self.x)
        self._energy = np.where(accept, energy, self._energy)
        self._grad = np.where(accept[:, None], grad, self._grad)
        self.proposed += accept.size
        self.accepted += int(accept.sum())

    def advance(self, steps: int) -> np.ndarray:
        """Run every chain forward by steps updates"""
        drift = self.target.beta * self.dt
        diffusion = np.sqrt(2.0 * self.dt)
        done = 0
        while done < steps:
            block = min(NOISE_BLOCK, steps - done)
            noise, uniforms = self._noise(block)
            for t in range(block):
                if uniforms is None:
                    self.x = self.x - drift * self.target.gradient(self.x) + diffusion * noise[t]
                else:
                    self._metropolis_step(noise[t], uniforms[t])
                self.steps_run += 1
                self._check()
            done += block
        return self.x

    @property
    def move_acceptance(self) -> Optional[float]:
        return self.accepted / self.proposed if self.proposed else None

    def thermalize(self, steps: int) -> None:
        self.advance(steps)

    def collect(self, N: int) -> Tuple[np.ndarray, int]:
        """N in-box states taken every `thinning` steps, chain order within each snapshot"""
        box = self.target.box()
        kept: List[np.ndarray] = []
        total, rejected = 0, 0
        while total < N:
            x = self.advance(self.cfg.thinning)
            inside = box.contains(x).all(axis=1)
            rejected += int(np.count_nonzero(~inside))
            kept.append(x[inside].copy())
            total += int(inside.sum())
        return np.vstack(kept)[:N], rejected


def moment_drift(X: np.ndarray) -> float:
    """Relative change of the second-moment matrix between the two halves of a run"""
    half = X.shape[0] // 2
    if half < 1:
        return 0.0
    first = X[:half].T @ X[:half] / half
    second = X[half:].T @ X[half:] / (X.shape[0] - half)
    scale = np.linalg.norm(second)
    return float(np.linalg.norm(first - second) / scale) if scale > 0 else 0.0


def langevin_run(target: Union[BoltzmannTarget, GlSpec], cfg: LangevinConfig,
                 N: int) -> Tuple[SampleSet, LangevinReport]:
    """Burn in, then collect N thinned in-box samples and a mixing report"""
    if N < 1:
        raise ConfigError(f"sample count must be >= 1, got {N}")
    if isinstance(target, GlSpec):
        target = GinzburgLandau(target)

    chains = LangevinChains(target, cfg)
    chains.thermalize(cfg.burn_in)
    X, rejected = chains.collect(N)
    report = LangevinReport(
        step=chains.dt, n_chains=cfg.n_chains, steps_run=chains.steps_run,
        burn_in=cfg.burn_in, thinning=cfg.thinning, kept=X.shape[0],
        rejected_outside=rejected, moment_drift=moment_drift(X),
        metropolis=cfg.metropolis, moves_accepted=chains.move_acceptance,
    )
    logger.info(f"Langevin d={target.dim} chains={cfg.n_chains} steps={chains.steps_run} "
                f"acceptance={report.acceptance:.4f} drift={report.moment_drift:.4f}"
                + (f" moves_accepted={report.moves_accepted:.3f}" if cfg.metropolis else ""))
    if report.moment_drift > 0.1:
        logger.warning(f"second moments moved by {report.moment_drift:.3f} across the run; "
                       f"consider a longer burn-in")
    add_run_metadata("langevin_steps", chains.steps_run)
    return SampleSet(X, target.box()), report


def langevin_sample(target: Union[BoltzmannTarget, GlSpec], cfg: LangevinConfig, N: int) -> SampleSet:
    samples, _ = langevin_run(target, cfg, N)
    return samples
