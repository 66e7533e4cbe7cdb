"""Frame-bound estimates, optimal bounds, tightness characterizations and perturbation bounds."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

import numpy as np

from .core import Filterbank
from .errors import GuaranteeVoidError
from .walnut import AliasingSpectrum, aliasing_terms, frame_operator_matrix

DEFAULT_TIGHT_TOL = 1e-7
# eigenvalues below RANK_TOL * lambda_max count as zero
RANK_TOL = 1e-10


class BoundKind(str, Enum):
    WALNUT = "walnut_estimate"
    KERNEL_AWARE = "kernel_aware_estimate"
    OPTIMAL = "optimal"


class FrameStatus(str, Enum):
    FRAME = "frame"
    NOT_FRAME = "not_frame"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class FrameBounds:
    """Frame bounds ``(A, B)``.

    For estimates, ``conclusive`` is False when the raw lower estimate was not
    positive; ``lower`` is then clipped to zero and says nothing about whether
    the filterbank is a frame.
    """

    lower: float
    upper: float
    kind: BoundKind
    conclusive: bool = True
    raw_lower: float | None = None

    @property
    def condition_number(self) -> float:
        return self.upper / self.lower if self.lower > 0 else float("inf")

    def contains(self, other: "FrameBounds", slack: float = 0.0) -> bool:
        return self.lower <= other.lower + slack and other.upper <= self.upper + slack

    def to_dict(self) -> dict:
        return {"lower": self.lower, "upper": self.upper, "kind": self.kind.value,
                "conclusive": self.conclusive}


def _estimate(A, B, kind):
    A, B = float(A), float(B)
    # a lower estimate within rounding of zero proves nothing
    ok = bool(A > RANK_TOL * max(B, 0.0))
    return FrameBounds(A if ok else 0.0, B, kind, conclusive=ok, raw_lower=A)


def bounds_walnut(alias: AliasingSpectrum) -> FrameBounds:
    """Diagonal-dominance bounds ``min/max_k (G_0[k] -/+ sum_{n>=1} |G_n[k]|)``."""
    G0 = alias.response
    off = np.abs(alias.terms[1:]).sum(axis=0) if alias.stride > 1 else np.zeros_like(G0)
    return _estimate((G0 - off).min(), (G0 + off).max(), BoundKind.WALNUT)


def kernel_aware_quantities(fb: Filterbank) -> tuple[float, float]:
    """``(mean G_0, sum_n ||G_hat_n||_1 / sqrt(L))`` at the minimal admissible length.

    The 1-norms are taken over the ``1/L``-normalized DFT, i.e. the Fourier
    coefficients of the trigonometric polynomials sampled by ``G_n``; this is
    the normalization for which the mean and the sup-norm bound share a scale.
    """
    alias = aliasing_terms(fb.at_minimal_length())
    c = alias.coefficients
    return alias.mean_response, float(np.abs(c).sum())


def bounds_kernel_aware(fb: Filterbank) -> FrameBounds:
    """Length-independent bounds, valid for every admissible length ``L' >= d ceil((2L_K-1)/d)``."""
    mean, l1 = kernel_aware_quantities(fb)
    return _estimate(2 * mean - l1, l1, BoundKind.KERNEL_AWARE)


def frame_spectrum(fb: Filterbank) -> np.ndarray:
    """Eigenvalues of the dense frame operator, ascending (LAPACK ``heevd``)."""
    return np.linalg.eigvalsh(frame_operator_matrix(fb))


def optimal_bounds(fb: Filterbank) -> FrameBounds:
    lam = frame_spectrum(fb)
    A = float(lam[0])
    if A <= RANK_TOL * max(lam[-1], 0.0):
        A = max(A, 0.0)
    return FrameBounds(A, float(lam[-1]), BoundKind.OPTIMAL,
                       conclusive=bool(A > RANK_TOL * lam[-1]), raw_lower=float(lam[0]))


def frame_status(fb: Filterbank, dense: bool = True) -> FrameStatus:
    """Tri-state verdict: frame, not a frame (by eigenvalues) or inconclusive."""
    if dense:
        return FrameStatus.FRAME if optimal_bounds(fb).conclusive else FrameStatus.NOT_FRAME
    if bounds_walnut(aliasing_terms(fb)).conclusive or bounds_kernel_aware(fb).conclusive:
        return FrameStatus.FRAME
    return FrameStatus.INCONCLUSIVE


@dataclass(frozen=True)
class TightnessReport:
    """Residuals of the three equivalent tightness conditions.

    ``residuals`` are the raw quantities; ``relative_residuals`` divide the
    scale-carrying parts by ``tight_value`` and are what ``tolerance`` is
    compared against.
    """

    is_frame: bool
    is_tight: bool
    tight_value: float
    condition_number: float
    residuals: dict = field(default_factory=dict)
    relative_residuals: dict = field(default_factory=dict)
    tolerance: float = DEFAULT_TIGHT_TOL

    def verdicts(self) -> dict:
        """Per-condition tight/non-tight verdicts."""
        return {k: bool(v <= self.tolerance) for k, v in self.relative_residuals.items()}

    def to_dict(self) -> dict:
        return {"is_frame": self.is_frame, "is_tight": self.is_tight,
                "tight_value": self.tight_value, "condition_number": self.condition_number,
                "residuals": dict(self.residuals),
                "relative_residuals": dict(self.relative_residuals),
                "tolerance": self.tolerance}


def residual_operator(fb: Filterbank, lam: np.ndarray | None = None) -> float:
    """``||S - mean(G_0) I||`` in the spectral norm."""
    if lam is None:
        lam = frame_spectrum(fb)
    c = aliasing_terms(fb).mean_response
    return float(np.abs(lam - c).max())


def residual_response(alias: AliasingSpectrum) -> float:
    """``max G_0 / min G_0 + sum_{n>=1} ||G_n||_inf - 1``; ``inf`` if ``min G_0 <= 0``."""
    G0 = alias.response
    if G0.min() <= 0:
        return float("inf")
    return float(G0.max() / G0.min() - 1 + alias.aliasing_sup()[1:].sum())


def residual_fourier(alias: AliasingSpectrum) -> float:
    """``|sum_n ||G_hat_n||_1 / sqrt(L) - mean G_0|``."""
    return float(abs(np.abs(alias.coefficients).sum() - alias.mean_response))


def tightness_report(fb: Filterbank, tol: float = DEFAULT_TIGHT_TOL) -> TightnessReport:
    """Evaluate the three equivalent tightness conditions at the filterbank's length.

    ``tol`` is relative to the candidate tight value ``mean(G_0)``.
    """
    alias = aliasing_terms(fb)
    lam = frame_spectrum(fb)
    c = alias.mean_response
    res = {
        "operator": residual_operator(fb, lam),
        "response": residual_response(alias),
        "fourier": residual_fourier(alias),
    }
    scale = max(c, 1e-300)
    G0 = alias.response
    rel = {
        "operator": res["operator"] / scale,
        # the ratio part is already scale-free
        "response": (float("inf") if G0.min() <= 0 else
                     float(G0.max() / G0.min() - 1 + alias.aliasing_sup()[1:].sum() / scale)),
        "fourier": res["fourier"] / scale,
    }
    is_frame = bool(lam[0] > RANK_TOL * lam[-1])
    cond = float(lam[-1] / lam[0]) if is_frame else float("inf")
    is_tight = is_frame and all(v <= tol for v in rel.values())
    return TightnessReport(is_frame, is_tight, c, cond, res, rel, tol)


class DeviationBounds(NamedTuple):
    identity: float  # bound on ||S - I||
    mean: float      # length-independent bound on ||S - mean(G_0) I||


def deviation_bounds(fb: Filterbank) -> DeviationBounds:
    alias = aliasing_terms(fb)
    ident = float(np.abs(alias.response - 1).max() + alias.aliasing_sup()[1:].sum())
    mean, l1 = kernel_aware_quantities(fb)
    return DeviationBounds(ident, abs(mean - l1))


def walnut_mean_deviation(alias: AliasingSpectrum) -> float:
    """``max(|B - mean|, |A - mean|)`` with the unclipped diagonal-dominance bounds."""
    b = bounds_walnut(alias)
    c = alias.mean_response
    return max(abs(b.upper - c), abs(b.raw_lower - c))


@dataclass(frozen=True)
class PerturbationSpec:
    """Filterbank bounds ``(A, B)``, optimal upper bound ``R`` of the update, step ``gamma``."""

    base_bounds: FrameBounds
    update_upper: float
    step: float

    @classmethod
    def from_filterbanks(cls, fb: Filterbank, update: Filterbank, step: float):
        return cls(optimal_bounds(fb), optimal_bounds(update).upper, step)


def perturbed_bounds(spec: PerturbationSpec) -> FrameBounds:
    """Bounds of ``w_j - gamma u_j``: ``((sqrt A - gamma sqrt R)^2, (sqrt B + gamma sqrt R)^2)``.

    Requires ``gamma sqrt(R) < sqrt(A)``; the analysis operator of the update
    has norm ``sqrt(R)``, so this is the condition under which the lower
    bound stays positive.
    """
    A, B = spec.base_bounds.lower, spec.base_bounds.upper
    R, g = spec.update_upper, spec.step
    if g < 0 or R < 0:
        raise GuaranteeVoidError("step and update bound must be nonnegative",
                                 lower=A, update_upper=R, step=g)
    shift = g * np.sqrt(R)
    if not shift < np.sqrt(A):
        raise GuaranteeVoidError(
            f"gamma*sqrt(R) = {shift:.6g} is not below sqrt(A) = {np.sqrt(A):.6g}",
            lower=A, update_upper=R, step=g)
    return FrameBounds(float((np.sqrt(A) - shift) ** 2), float((np.sqrt(B) + shift) ** 2),
                       spec.base_bounds.kind)
