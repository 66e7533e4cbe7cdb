"""Reductions of generalized layers to a single-channel uniform filterbank.

* multi-channel layers, by interlacing the input channels;
* the Gram dual, for multi-channel layers with more inputs than outputs;
* channel-specific strides, by splitting channels into shifted copies;
* dilated convolutions, by upsampling the kernels;
* hybrid filterbanks built on ideal band-pass filters, which are painless.

Reductions whose filters are no longer short kernels return filterbanks with
``relaxed_support=True``; their ``kernel_size`` is the width of the stored
support.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .core import Filterbank, analysis
from .errors import InapplicableReductionError, InvalidArgumentError
from .stability import DEFAULT_TIGHT_TOL, optimal_bounds, tightness_report
from .walnut import aliasing_terms


# multi-channel ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MultiChannelFilterbank:
    """Kernels ``w[i, j]`` from input channel ``i`` to output channel ``j``."""

    kernels: np.ndarray  # C x M x L_K
    stride: int
    signal_length: int

    def __post_init__(self):
        k = np.array(self.kernels, dtype=np.complex128)
        if k.ndim != 3 or 0 in k.shape:
            raise InvalidArgumentError(f"kernels must be a non-empty C x M x L_K array, got {k.shape}")
        d, L = int(self.stride), int(self.signal_length)
        if d < 1 or L % d or L < k.shape[2]:
            raise InvalidArgumentError(f"invalid stride {d} / length {L} for kernel size {k.shape[2]}")
        k.setflags(write=False)
        object.__setattr__(self, "kernels", k)
        object.__setattr__(self, "stride", d)
        object.__setattr__(self, "signal_length", L)

    @property
    def channels(self) -> int:
        return self.kernels.shape[0]

    @property
    def num_filters(self) -> int:
        return self.kernels.shape[1]

    def channel(self, i: int) -> Filterbank:
        return Filterbank(self.kernels[i], self.stride, self.signal_length)

    def analysis(self, x) -> np.ndarray:
        """``y_j = sum_i (x_i * w_ij) downsampled``; ``x`` has shape ``(..., C, L)``."""
        x = np.asarray(x, dtype=np.complex128)
        return sum(analysis(self.channel(i), x[..., i, :]) for i in range(self.channels))

    def analysis_matrix(self) -> np.ndarray:
        """Explicit ``(M L/d) x (C L)`` matrix acting on channel-stacked inputs."""
        C, L = self.channels, self.signal_length
        basis = np.eye(C * L).reshape(C * L, C, L)
        y = self.analysis(basis)
        return y.reshape(C * L, -1).T


def interlace_signal(x) -> np.ndarray:
    """``x_tilde[(n C - i) mod C L] = x[i, n]`` for ``x`` of shape ``(..., C, L)``.

    This is the unitary that pairs with the interlaced kernels: convolving
    ``w_tilde[n C + i]`` against it sums ``x_i * w_ij`` over the channels.
    """
    x = np.asarray(x)
    C, L = x.shape[-2:]
    out = np.empty(x.shape[:-2] + (C * L,), dtype=x.dtype)
    idx = (C * np.arange(L)[None, :] - np.arange(C)[:, None]) % (C * L)
    out[..., idx] = x
    return out


def interlace_multichannel(mc: MultiChannelFilterbank) -> Filterbank:
    """Single-channel filterbank ``w_j[n C + i] = w_ij[n]`` with stride ``C d`` and length ``C L``.

    Its frame operator is unitarily equivalent to the multi-channel one.
    """
    C = mc.channels
    # (C, M, L_K) -> (M, L_K, C) -> (M, C L_K)
    k = np.transpose(mc.kernels, (1, 2, 0)).reshape(mc.num_filters, -1)
    return Filterbank(k, C * mc.stride, C * mc.signal_length)


def gram_dual(mc: MultiChannelFilterbank) -> Filterbank:
    """Filterbank whose frame operator is unitarily equivalent to ``Theta Theta*``.

    Needs ``C > M/d``, where the multi-channel analysis operator has a
    nontrivial kernel. The dual has ``C d`` filters of length ``N = M L/d``
    and stride ``M``:
    ``v_t[(-M s - k) mod N] = conj(w_k[(C d s - t) mod C L])`` with ``w`` the
    interlaced filters.
    """
    C, M, d, L = mc.channels, mc.num_filters, mc.stride, mc.signal_length
    if C * d <= M:
        raise InapplicableReductionError(
            f"Gram dual needs C > M/d (C={C}, M={M}, d={d}); use interlace_multichannel")
    w = interlace_multichannel(mc).filters  # M x C L
    N = M * L // d
    s = np.arange(L // d)[:, None, None]
    k = np.arange(M)[None, :, None]
    t = np.arange(C * d)[None, None, :]
    v = np.zeros((C * d, N), dtype=np.complex128)
    vals = np.conj(w[k, (C * d * s - t) % (C * L)])
    v[np.broadcast_to(t, vals.shape), (-M * s - k) % N] = vals
    return Filterbank(v, M, N, relaxed_support=True)


# channel-specific strides ----------------------------------------------------

@dataclass(frozen=True, eq=False)
class NonUniformFilterbank:
    kernels: np.ndarray  # M x L_K
    strides: tuple
    signal_length: int

    def __post_init__(self):
        k = np.atleast_2d(np.array(self.kernels, dtype=np.complex128))
        strides = tuple(int(s) for s in self.strides)
        L = int(self.signal_length)
        if len(strides) != k.shape[0]:
            raise InvalidArgumentError(f"{len(strides)} strides for {k.shape[0]} filters")
        if min(strides) < 1 or L < k.shape[1]:
            raise InvalidArgumentError("strides must be positive and L >= L_K")
        if L % reduce(math.lcm, strides):
            raise InvalidArgumentError(f"lcm of strides {strides} does not divide L={L}")
        k.setflags(write=False)
        object.__setattr__(self, "kernels", k)
        object.__setattr__(self, "strides", strides)
        object.__setattr__(self, "signal_length", L)

    @property
    def common_stride(self) -> int:
        return reduce(math.lcm, self.strides)

    def analysis(self, x) -> list:
        """Per-channel coefficient arrays (lengths differ across channels)."""
        return [analysis(Filterbank(self.kernels[j], dj, self.signal_length), x)[..., 0, :]
                for j, dj in enumerate(self.strides)]

    def analysis_matrix(self) -> np.ndarray:
        L = self.signal_length
        return np.concatenate(self.analysis(np.eye(L)), axis=-1).T


def uniformize_nonuniform(nfb: NonUniformFilterbank) -> Filterbank:
    """Replace channel ``j`` by ``D_j = lcm / d_j`` copies ``T_{n d_j} w_j`` at stride ``lcm``."""
    D, L, LK = nfb.common_stride, nfb.signal_length, nfb.kernels.shape[1]
    filters = []
    for w, dj in zip(nfb.kernels, nfb.strides):
        full = np.zeros(L, dtype=np.complex128)
        full[:LK] = w
        filters += [np.roll(full, n * dj) for n in range(D // dj)]
    width = min(L, max(LK + (D // dj - 1) * dj for dj in nfb.strides))
    relaxed = any(dj != D for dj in nfb.strides)
    return Filterbank(np.array(filters)[:, :width], D, L, relaxed_support=relaxed)


# dilation --------------------------------------------------------------------

def dilated_convolve(x, w, a: int) -> np.ndarray:
    """``(x *_a w)[n] = sum_l w[l] x[n - a l mod L]``, evaluated from the defining sum."""
    x = np.asarray(x, dtype=np.complex128)
    w = np.asarray(w, dtype=np.complex128)
    L = x.shape[-1]
    n = np.arange(L)
    out = np.zeros(x.shape, dtype=np.complex128)
    for ell, tap in enumerate(w):
        out += tap * x[..., (n - a * ell) % L]
    return out


def dilate(fb: Filterbank, a: int) -> Filterbank:
    """Kernels upsampled by ``a`` (taps at multiples of ``a``), kernel size ``a L_K``."""
    a = int(a)
    if a < 1 or a * fb.kernel_size > fb.signal_length:
        raise InvalidArgumentError(
            f"dilation {a} needs 1 <= a <= L/L_K = {fb.signal_length / fb.kernel_size:g}")
    k = np.zeros((fb.num_filters, a * fb.kernel_size), dtype=np.complex128)
    k[:, ::a] = fb.kernels
    return Filterbank(k, fb.stride, fb.signal_length, fb.relaxed_support)


# band-pass hybrids -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BandpassBank:
    responses: np.ndarray  # M x L, 0/1
    hop: int
    stride: int

    @property
    def num_filters(self) -> int:
        return self.responses.shape[0]

    @property
    def signal_length(self) -> int:
        return self.responses.shape[1]

    @property
    def filters(self) -> np.ndarray:
        """Time-domain band-pass filters, ``fft(psi_j) = responses[j]``."""
        return np.fft.ifft(self.responses, axis=-1)


def ideal_bandpass(M: int, d: int, L: int, a: int) -> BandpassBank:
    """Indicators of ``[a j, a j + L/d - 1]`` (mod ``L``) for ``j < M``."""
    if M < 1 or d < 1 or L % d:
        raise InvalidArgumentError(f"invalid geometry M={M}, d={d}, L={L}")
    if not 1 <= a <= L // d:
        raise InvalidArgumentError(f"hop a={a} must lie in [1, L/d={L // d}]")
    if M * a > L:
        raise InvalidArgumentError(f"M * a = {M * a} exceeds L = {L}")
    r = np.zeros((M, L))
    width = L // d
    for j in range(M):
        r[j, (a * j + np.arange(width)) % L] = 1.0
    r.setflags(write=False)
    return BandpassBank(r, a, d)


def hybrid(bank: BandpassBank, fb: Filterbank) -> Filterbank:
    """Full-length filters ``psi_j * w_j``."""
    if (bank.num_filters, bank.signal_length, bank.stride) != \
            (fb.num_filters, fb.signal_length, fb.stride):
        raise InvalidArgumentError("band-pass bank and filterbank disagree on M, L or d")
    filters = np.fft.ifft(bank.responses * fb.responses, axis=-1)
    return Filterbank(filters, fb.stride, fb.signal_length, relaxed_support=True)


@dataclass(frozen=True)
class PainlessReport:
    is_painless: bool
    frame: bool
    tight: bool

    def to_dict(self) -> dict:
        return {"is_painless": self.is_painless, "frame": self.frame, "tight": self.tight}


def painless_report(fb: Filterbank, tol: float = 1e-12,
                    tight_tol: float = DEFAULT_TIGHT_TOL) -> PainlessReport:
    """Whether ``S_hat`` is diagonal, and the resulting frame/tight verdicts.

    Painless means ``||G_n||_inf <= tol ||G_0||_inf`` for all ``n >= 1``. Then
    the filterbank is a frame iff ``min G_0 > 0`` and tight iff ``G_0`` is
    constant (relative spread at most ``tight_tol``). Otherwise the verdicts
    come from the dense eigenvalues.
    """
    alias = aliasing_terms(fb)
    G0 = alias.response
    scale = float(np.abs(G0).max())
    sup = alias.aliasing_sup()[1:]
    painless = bool(sup.size == 0 or sup.max() <= tol * scale)
    if painless:
        frame = bool(G0.min() > tol * scale)
        tight = frame and bool(G0.max() - G0.min() <= tight_tol * G0.max())
        return PainlessReport(True, frame, tight)
    frame = optimal_bounds(fb).conclusive
    tight = frame and tightness_report(fb, tight_tol).is_tight
    return PainlessReport(False, frame, tight)
