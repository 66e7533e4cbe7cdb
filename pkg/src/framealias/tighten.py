"""Driving filterbanks toward Parseval frames.

Two procedures are provided:

* :func:`sgd_tighten`, gradient descent on one of the differentiable
  objectives. The default ``"scaled"`` step rule multiplies the gradient by
  ``lr * (B/A - 1)^exponent``. The ``"polyak"`` rule uses the step
  ``beta * f / ||g||^2`` (the optimal value of every objective is zero) capped
  at ``trust_radius * ||w|| / ||g||``. On these non-smooth objectives the
  scaled rule settles into a chatter regime around ``B/A - 1 ~ 1e-2``; the
  Polyak rule converges to round-off.
* :func:`fir_tighten`, alternating the canonical tightening map ``S^{-1/2}``
  with truncation to the kernel support.

There is no data batching, so "sgd" is plain gradient descent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Filterbank, frame_operator_apply, reverse
from .errors import InvalidArgumentError, InvalidStateError
from .objectives import ObjectiveKind, evaluate
from .stability import RANK_TOL, frame_spectrum
from .walnut import frame_operator_matrix

STEP_RULES = ("scaled", "polyak")


@dataclass(frozen=True)
class OptimizerConfig:
    objective: ObjectiveKind | str = ObjectiveKind.LS
    learning_rate: float = 1e-3
    iterations: int = 250
    adaptive: bool = True
    seed: int = 0
    exponent: float = 0.1
    step_rule: str = "scaled"
    polyak_factor: float = 1.3
    trust_radius: float = 0.1
    # weight of |mean G_0 - 1| for LG and LGhat; pins the tight value to one
    parseval_weight: float = 1.0
    norm: str = "2"
    # objective values at or below this are optimal up to rounding; no step is taken
    value_tol: float = 1e-12

    def __post_init__(self):
        object.__setattr__(self, "objective", ObjectiveKind.parse(self.objective))
        if not self.objective.differentiable:
            raise InvalidArgumentError(f"{self.objective.value} is not differentiable")
        if not self.learning_rate > 0:
            raise InvalidArgumentError("learning_rate must be positive")
        if int(self.iterations) < 1:
            raise InvalidArgumentError("iterations must be at least 1")
        if self.step_rule not in STEP_RULES:
            raise InvalidArgumentError(f"step_rule must be one of {STEP_RULES}")
        if not 0 < self.polyak_factor < 2:
            raise InvalidArgumentError("polyak_factor must lie in (0, 2)")
        if not self.trust_radius > 0:
            raise InvalidArgumentError("trust_radius must be positive")

    def objective_kwargs(self) -> dict:
        if self.objective is ObjectiveKind.LS:
            return {}
        kw = {"parseval_weight": self.parseval_weight}
        if self.objective is ObjectiveKind.LG:
            kw["norm"] = self.norm
        return kw


@dataclass
class Trajectory:
    """Per-iteration records; entry 0 is the initialization."""

    condition: list = field(default_factory=list)
    recon_error: list = field(default_factory=list)
    objective: list = field(default_factory=list)
    fallback: list = field(default_factory=list)
    status: str = "completed"

    def __len__(self):
        return len(self.condition)

    def append(self, condition, recon, objective, fallback=False):
        self.condition.append(float(condition))
        self.recon_error.append(float(recon))
        self.objective.append(float(objective))
        self.fallback.append(bool(fallback))

    def to_rows(self):
        """Rows ``(iter, condition, recon_error, objective)`` for CSV export."""
        for i, row in enumerate(zip(self.condition, self.recon_error, self.objective)):
            yield (i, *row)


def probe_vector(length: int, seed: int) -> np.ndarray:
    """Unit-norm complex Gaussian vector used to measure reconstruction error."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(length) + 1j * rng.standard_normal(length)
    return x / np.linalg.norm(x)


def _condition(fb: Filterbank) -> float:
    lam = frame_spectrum(fb)
    if lam[0] <= RANK_TOL * max(lam[-1], 0.0):
        return float("inf")
    return float(lam[-1] / lam[0])


def _recon(fb: Filterbank, x: np.ndarray) -> float:
    return float(np.linalg.norm(frame_operator_apply(fb, x) - x))


def sgd_tighten(fb: Filterbank, cfg: OptimizerConfig) -> tuple[Filterbank, Trajectory]:
    """Gradient descent on ``cfg.objective``; returns the final filterbank and the trajectory.

    With the scaled rule and ``cfg.adaptive``, an iteration at which the
    current filterbank is not a frame uses the unscaled step and is flagged
    in ``Trajectory.fallback``. Iterates whose objective value is at most
    ``cfg.value_tol`` are left in place.
    """
    x = probe_vector(fb.signal_length, cfg.seed)
    kw = cfg.objective_kwargs()
    traj = Trajectory()
    ev = evaluate(cfg.objective, fb, **kw)
    cond = _condition(fb)
    traj.append(cond, _recon(fb, x), ev.value)
    for _ in range(int(cfg.iterations)):
        g = ev.gradient
        fallback = False
        if ev.value <= cfg.value_tol:
            eta = 0.0
        elif cfg.step_rule == "polyak":
            gn = float(np.linalg.norm(g))
            eta = 0.0 if gn == 0 else min(cfg.polyak_factor * ev.value / gn**2,
                                          cfg.trust_radius * float(np.linalg.norm(fb.kernels)) / gn)
        else:
            eta = cfg.learning_rate
            if cfg.adaptive:
                if np.isfinite(cond):
                    eta *= max(cond - 1.0, 0.0) ** cfg.exponent
                else:
                    fallback = True
        fb = fb.with_kernels(fb.kernels - eta * g)
        ev = evaluate(cfg.objective, fb, **kw)
        cond = _condition(fb)
        traj.append(cond, _recon(fb, x), ev.value, fallback)
    return fb, traj


def inv_sqrt_psd(S, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Pseudo-inverse square root of a Hermitian PSD matrix.

    Eigenvalues below ``rank_tol * lambda_max`` are treated as zero.
    """
    S = np.asarray(S, dtype=np.complex128)
    S = 0.5 * (S + S.conj().T)
    lam, U = np.linalg.eigh(S)
    top = max(float(lam[-1]), 0.0)
    keep = lam > rank_tol * top
    inv = np.zeros_like(lam)
    inv[keep] = lam[keep] ** -0.5
    return (U * inv) @ U.conj().T


def fir_tighten_step(fb: Filterbank) -> Filterbank:
    """Apply the canonical tightening ``S^{-1/2}`` to every filter and truncate to ``L_K``.

    The frame vectors are ``conj(T_{dm} R w_j)``, so mapping them by
    ``S^{-1/2}`` sends a filter ``w`` to ``R conj(S^{-1/2} conj(R w))``.
    """
    S = frame_operator_matrix(fb)
    lam = np.linalg.eigvalsh(0.5 * (S + S.conj().T))
    if lam[0] <= RANK_TOL * max(lam[-1], 0.0):
        raise InvalidStateError("FIR-tightening needs a frame (optimal lower bound is zero)")
    T = inv_sqrt_psd(S)
    v = np.conj(reverse(fb.filters))      # frame vectors, one per row
    w = reverse(np.conj(v @ T.T))         # rows of S^{-1/2} v, mapped back to filters
    return fb.with_kernels(w[:, : fb.kernel_size])


def fir_tighten(fb: Filterbank, max_steps: int = 20, target_condition: float = 1.01,
                seed: int = 0) -> tuple[Filterbank, Trajectory]:
    """Iterate :func:`fir_tighten_step` until ``B/A <= target_condition``.

    Stops with status ``"diverged"`` after three consecutive increases of the
    condition number and ``"not_frame"`` when a step is impossible; in both
    cases the best iterate seen is returned.
    """
    x = probe_vector(fb.signal_length, seed)
    traj = Trajectory()
    cond = _condition(fb)
    traj.append(cond, _recon(fb, x), cond - 1.0)
    best, best_cond = fb, cond
    if cond <= target_condition:
        traj.status = "reached"
        return fb, traj
    rises = 0
    traj.status = "max_steps"
    for _ in range(int(max_steps)):
        try:
            fb = fir_tighten_step(fb)
        except InvalidStateError:
            traj.status = "not_frame"
            break
        new = _condition(fb)
        traj.append(new, _recon(fb, x), new - 1.0)
        rises = rises + 1 if new > cond else 0
        cond = new
        if cond < best_cond:
            best, best_cond = fb, cond
        if cond <= target_condition:
            traj.status = "reached"
            break
        if rises >= 3:
            traj.status = "diverged"
            break
    return best, traj
