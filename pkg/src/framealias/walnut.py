"""Aliasing terms, the banded spectral frame operator, and its dense oracle.

Verified index mapping (against ``F S F*`` built from basis vectors)::

    G_n[k]                  = d^{-1} sum_j conj(w_hat_j[k]) * w_hat_j[k - n L/d]
    S_hat[k, k - n L/d]     = G_n[k]
    (S_hat x_hat)[k]        = sum_n G_n[k] * x_hat[k - n L/d]

``w_hat`` is the non-unitary FFT of the zero-padded filter. Compared with the
``w_hat * conj(T w_hat)`` ordering this is the complex conjugate; magnitudes,
``G_0`` and the 1-norms of the Fourier coefficients are identical, only the
placement of conjugate bands changes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DENSE_LIMIT, Filterbank, frame_operator_apply
from .errors import ResourceLimitError


@dataclass(frozen=True, eq=False)
class AliasingSpectrum:
    terms: np.ndarray          # (d, L) complex, G_0 .. G_{d-1}
    fourier_terms: np.ndarray  # (d, L) unitary DFT of each term
    stride: int
    length: int

    @property
    def response(self) -> np.ndarray:
        """``G_0`` as a real vector."""
        return self.terms[0].real

    @property
    def mean_response(self) -> float:
        """Average of ``G_0``, equal to ``G_hat_0[0] / sqrt(L)``."""
        return float(self.fourier_terms[0, 0].real / np.sqrt(self.length))

    @property
    def coefficients(self) -> np.ndarray:
        """Fourier coefficients ``G_hat_n / sqrt(L)`` (the ``1/L``-normalized DFT)."""
        return self.fourier_terms / np.sqrt(self.length)

    def aliasing_sup(self) -> np.ndarray:
        """``||G_n||_inf`` for every n."""
        return np.abs(self.terms).max(axis=1)

    def to_rows(self):
        """Rows ``(n, k, Re G_n[k], Im G_n[k])`` for CSV export."""
        d, L = self.terms.shape
        for n in range(d):
            for k in range(L):
                z = self.terms[n, k]
                yield n, k, float(z.real), float(z.imag)


def band_shift(stride: int, length: int) -> int:
    return length // stride


def aliasing_from_responses(W: np.ndarray, stride: int) -> np.ndarray:
    """Aliasing terms from non-unitary responses ``W`` of shape ``(..., M, L)``."""
    L = W.shape[-1]
    s = L // stride
    Wc = np.conj(W)
    return np.stack(
        [(Wc * np.roll(W, n * s, axis=-1)).sum(axis=-2) / stride for n in range(stride)],
        axis=-2,
    )


def aliasing_terms(fb: Filterbank) -> AliasingSpectrum:
    G = aliasing_from_responses(fb.responses, fb.stride)
    # G_0 is real by construction; drop rounding noise in its imaginary part
    G[0] = G[0].real
    Ghat = np.fft.fft(G, axis=-1, norm="ortho")
    return AliasingSpectrum(G, Ghat, fb.stride, fb.signal_length)


def walnut_apply(alias: AliasingSpectrum, x_hat) -> np.ndarray:
    """``sum_n G_n . T_{nL/d} x_hat`` along the last axis."""
    x_hat = np.asarray(x_hat, dtype=np.complex128)
    s = band_shift(alias.stride, alias.length)
    out = np.zeros(np.broadcast_shapes(x_hat.shape, (alias.length,)), dtype=np.complex128)
    for n in range(alias.stride):
        out += alias.terms[n] * np.roll(x_hat, n * s, axis=-1)
    return out


def assemble_shat(alias: AliasingSpectrum) -> np.ndarray:
    """Dense ``L x L`` spectral frame operator from the aliasing terms."""
    L, d = alias.length, alias.stride
    s = L // d
    S_hat = np.zeros((L, L), dtype=np.complex128)
    k = np.arange(L)
    for n in range(d):
        S_hat[k, (k - n * s) % L] = alias.terms[n]
    return S_hat


def band_mask(stride: int, length: int) -> np.ndarray:
    """Boolean mask of the entries allowed to be nonzero in ``S_hat``."""
    k = np.arange(length)
    return ((k[:, None] - k[None, :]) % (length // stride)) == 0


@dataclass(frozen=True, eq=False)
class FrameOperatorDense:
    matrix: np.ndarray    # time-domain S
    spectral: np.ndarray  # F S F*


def _check_dense(L):
    if L > DENSE_LIMIT:
        raise ResourceLimitError(f"signal length {L} exceeds dense limit {DENSE_LIMIT}")


def unitary_dft_matrix(L: int) -> np.ndarray:
    return np.fft.fft(np.eye(L), axis=0, norm="ortho")


def frame_operator_matrix(fb: Filterbank) -> np.ndarray:
    """Time-domain ``S``; column ``j`` is ``S`` applied to the ``j``-th basis vector."""
    L = fb.signal_length
    _check_dense(L)
    # rows of the batch are basis vectors, so the result holds columns as rows
    return frame_operator_apply(fb, np.eye(L)).T


def frame_operator_dense(fb: Filterbank) -> FrameOperatorDense:
    S = frame_operator_matrix(fb)
    F = unitary_dft_matrix(fb.signal_length)
    return FrameOperatorDense(S, F @ S @ F.conj().T)
