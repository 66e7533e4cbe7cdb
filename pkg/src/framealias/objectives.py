"""Parseval-promoting objectives and their kernel gradients.

Gradients of a real objective ``f`` with respect to complex kernels are
returned as ``df/dRe(w) + i df/dIm(w)``, so ``w - lr * grad`` is a descent
step. The aliasing objectives are differentiated by hand through the FFTs;
the operator-norm objective uses the eigenvector subgradient of the spectral
norm. Ties in max/min are broken by the lowest index and ``|z|`` at zero
contributes a zero subgradient.

All objectives are evaluated at the minimal admissible length
``d * ceil((2 L_K - 1) / d)`` unless another length is requested.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .core import Filterbank, analysis, analysis_matrix, upsample
from .errors import DegenerateResponseError, InvalidArgumentError, UndefinedObjectiveError
from .stability import RANK_TOL, frame_spectrum
from .walnut import aliasing_from_responses

# coefficients below this fraction of the largest one count as exact zeros
ZERO_TOL = 1e-13


class ObjectiveKind(str, Enum):
    LS = "LS"
    LG = "LG"
    LGHAT = "LGhat"
    LKAPPA = "Lkappa"
    LTHETA = "Ltheta"

    @property
    def differentiable(self) -> bool:
        return self in (ObjectiveKind.LS, ObjectiveKind.LG, ObjectiveKind.LGHAT)

    @classmethod
    def parse(cls, tag) -> "ObjectiveKind":
        if isinstance(tag, cls):
            return tag
        for k in cls:
            if k.value.lower() == str(tag).lower():
                return k
        raise InvalidArgumentError(f"unknown objective {tag!r}")


@dataclass(frozen=True, eq=False)
class ObjectiveEvaluation:
    value: float
    gradient: np.ndarray | None = None


def _at(fb: Filterbank, length):
    return fb.at_minimal_length() if length is None else fb.at_length(length)


def _kernel_gradient(fbL: Filterbank, gW: np.ndarray) -> np.ndarray:
    """Pull a response-domain gradient back through the zero-padded FFT."""
    L = fbL.signal_length
    return (L * np.fft.ifft(gW, axis=-1))[:, : fbL.kernel_size]


def _response_gradient(W: np.ndarray, gG: np.ndarray, d: int) -> np.ndarray:
    """Gradient w.r.t. responses from the gradient w.r.t. ``G_n = d^-1 sum conj(W) T_n W``."""
    L = W.shape[-1]
    s = L // d
    gW = np.zeros_like(W)
    for n in range(d):
        g = gG[n]
        gW += np.conj(g) * np.roll(W, n * s, axis=-1)
        gW += np.roll(g, -n * s) * np.roll(W, -n * s, axis=-1)
    return gW / d


def _unit(z, scale):
    """``z / |z|`` with zero where ``|z|`` is negligible."""
    a = np.abs(z)
    out = np.zeros_like(z)
    nz = a > ZERO_TOL * max(scale, 1e-300)
    out[nz] = z[nz] / a[nz]
    return out


def eval_LS(fb: Filterbank, grad: bool = True, length: int | None = None) -> ObjectiveEvaluation:
    """``||S - I||`` with ``S`` built densely from the analysis matrix."""
    fbL = _at(fb, length)
    Th = analysis_matrix(fbL)
    S = Th.conj().T @ Th
    lam, U = np.linalg.eigh(S)
    dev = lam - 1.0
    i = int(np.argmax(np.abs(dev)))
    value = float(abs(dev[i]))
    if not grad:
        return ObjectiveEvaluation(value)
    u = U[:, i]
    y = analysis(fbL, u)
    # d/dconj(w_j) of u^H S u is ((T_j u) upsampled) * conj(R u)
    Y = np.fft.fft(upsample(y, fbL.stride), axis=-1)
    g = 2 * np.sign(dev[i]) * np.fft.ifft(Y * np.conj(np.fft.fft(u)), axis=-1)
    return ObjectiveEvaluation(value, g[:, : fbL.kernel_size])


def eval_LG(fb: Filterbank, grad: bool = True, length: int | None = None,
            norm: str = "2", parseval_weight: float = 0.0) -> ObjectiveEvaluation:
    """``max G_0 / min G_0 - 1 + sum_{n>=1} ||G_n||``.

    ``norm`` selects the vector norm on the aliasing terms (``"2"``, ``"inf"``
    or ``"1"``). A positive ``parseval_weight`` adds ``weight * |mean G_0 - 1|``,
    which pins the tight value to one.
    """
    fbL = _at(fb, length)
    d, L = fbL.stride, fbL.signal_length
    W = fbL.responses
    G = aliasing_from_responses(W, d)
    G0 = G[0].real
    kmax, kmin = int(np.argmax(G0)), int(np.argmin(G0))
    gmax, gmin = G0[kmax], G0[kmin]
    if gmin <= 0:
        raise DegenerateResponseError(f"min G_0 = {gmin:.3g} <= 0")
    scale = float(np.abs(G).max())
    value = gmax / gmin - 1.0
    gG = np.zeros_like(G)
    for n in range(1, d):
        Gn = G[n]
        if norm == "2":
            nv = float(np.linalg.norm(Gn))
            gG[n] = Gn / nv if nv > ZERO_TOL * scale else 0.0
        elif norm == "inf":
            k = int(np.argmax(np.abs(Gn)))
            nv = float(abs(Gn[k]))
            gG[n, k] = Gn[k] / nv if nv > ZERO_TOL * scale else 0.0
        elif norm == "1":
            nv = float(np.abs(Gn).sum())
            gG[n] = _unit(Gn, scale)
        else:
            raise InvalidArgumentError(f"unknown norm {norm!r}")
        value += nv
    gG[0, kmax] += 1.0 / gmin
    gG[0, kmin] -= gmax / gmin**2
    if parseval_weight:
        mean = float(G0.mean())
        value += parseval_weight * abs(mean - 1.0)
        gG[0] += parseval_weight * np.sign(mean - 1.0) / L
    if not grad:
        return ObjectiveEvaluation(float(value))
    return ObjectiveEvaluation(float(value), _kernel_gradient(fbL, _response_gradient(W, gG, d)))


def eval_LGhat(fb: Filterbank, grad: bool = True, length: int | None = None,
               parseval_weight: float = 0.0) -> ObjectiveEvaluation:
    """``|mean G_0 - sum_n ||G_hat_n||_1 / sqrt(L)|`` (Fourier coefficients of the aliasing terms)."""
    fbL = _at(fb, length)
    d, L = fbL.stride, fbL.signal_length
    W = fbL.responses
    G = aliasing_from_responses(W, d)
    G[0] = G[0].real
    c = np.fft.fft(G, axis=-1) / L
    c00 = float(c[0, 0].real)
    total = float(np.abs(c).sum())
    value = abs(c00 - total)
    s = np.sign(c00 - total)
    gc = -s * _unit(c, float(np.abs(c).max()))
    gc[0, 0] += s
    if parseval_weight:
        value += parseval_weight * abs(c00 - 1.0)
        gc[0, 0] += parseval_weight * np.sign(c00 - 1.0)
    if not grad:
        return ObjectiveEvaluation(float(value))
    # c = fft(G) / L, so the pull-back to G is ifft
    gG = np.fft.ifft(gc, axis=-1)
    return ObjectiveEvaluation(float(value), _kernel_gradient(fbL, _response_gradient(W, gG, d)))


def eval_Lkappa(fb: Filterbank, length: int | None = None) -> ObjectiveEvaluation:
    """``B/A - 1`` with optimal bounds (evaluation only)."""
    lam = frame_spectrum(_at(fb, length))
    if lam[0] <= RANK_TOL * lam[-1]:
        raise UndefinedObjectiveError("B/A is undefined: the filterbank is not a frame")
    return ObjectiveEvaluation(float(lam[-1] / lam[0] - 1.0))


def eval_Ltheta(fb: Filterbank, length: int | None = None) -> ObjectiveEvaluation:
    """``(||Theta||_2^2 - ||Theta||_F^2 / L) / 2`` (evaluation only)."""
    fbL = _at(fb, length)
    lam = frame_spectrum(fbL)
    return ObjectiveEvaluation(float(0.5 * (lam[-1] - lam.sum() / fbL.signal_length)))


def evaluate(kind, fb: Filterbank, grad: bool = True, **kw) -> ObjectiveEvaluation:
    kind = ObjectiveKind.parse(kind)
    if kind is ObjectiveKind.LS:
        return eval_LS(fb, grad=grad, **kw)
    if kind is ObjectiveKind.LG:
        return eval_LG(fb, grad=grad, **kw)
    if kind is ObjectiveKind.LGHAT:
        return eval_LGhat(fb, grad=grad, **kw)
    if grad:
        raise InvalidArgumentError(f"{kind.value} is evaluation-only")
    if kind is ObjectiveKind.LKAPPA:
        return eval_Lkappa(fb, **kw)
    return eval_Ltheta(fb, **kw)


def finite_difference_gradient(f: Callable[[np.ndarray], float], kernels: np.ndarray,
                               epsilon: float = 1e-6) -> np.ndarray:
    """Central differences on the real and imaginary part of every kernel entry."""
    kernels = np.asarray(kernels, dtype=np.complex128)
    g = np.zeros_like(kernels)
    for idx in np.ndindex(kernels.shape):
        for unit in (1.0, 1j):
            kp = kernels.copy()
            km = kernels.copy()
            kp[idx] += unit * epsilon
            km[idx] -= unit * epsilon
            g[idx] += unit * (f(kp) - f(km)) / (2 * epsilon)
    return g


def gradient_check(fb: Filterbank, kind, epsilon: float = 1e-6, **kw) -> float:
    """Max relative error between analytic and central finite-difference gradients."""
    kind = ObjectiveKind.parse(kind)
    if not kind.differentiable:
        raise InvalidArgumentError(f"{kind.value} has no gradient")
    g = evaluate(kind, fb, **kw).gradient
    fd = finite_difference_gradient(
        lambda k: evaluate(kind, fb.with_kernels(k), grad=False, **kw).value, fb.kernels, epsilon)
    return float(np.abs(g - fd).max() / max(np.abs(fd).max(), 1e-300))


def has_ties(fb: Filterbank, kind, rel_gap: float = 1e-4, length: int | None = None) -> bool:
    """True when the active max/min index of a non-smooth term is not locally unique."""
    kind = ObjectiveKind.parse(kind)
    fbL = _at(fb, length)
    if kind is ObjectiveKind.LS:
        lam = frame_spectrum(fbL)
        dev = np.sort(np.abs(lam - 1.0))
        return len(dev) > 1 and dev[-1] - dev[-2] <= rel_gap * max(dev[-1], 1e-300)
    if kind is ObjectiveKind.LG:
        G0 = aliasing_from_responses(fbL.responses, fbL.stride)[0].real
        top = np.sort(G0)
        span = max(top[-1] - top[0], 1e-300)
        return bool(top[-1] - top[-2] <= rel_gap * span or top[1] - top[0] <= rel_gap * span)
    return False
