"""Finite circular signals, strided convolution and filterbank operators.

DFT convention used throughout the package:

* ``dft(x, unitary=True)`` is the unitary transform ``F`` with the ``1/sqrt(L)``
  factor on the forward direction. Signals and the matrix transform
  ``S_hat = F S F*`` use it.
* frequency responses of filters are computed with the plain (non-unitary)
  FFT, so that ``fft(x * w) = fft(x) . fft(w)`` holds without extra factors.

Under this split the aliasing terms satisfy the Walnut identity exactly (see
:mod:`framealias.walnut`).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidArgumentError

DENSE_LIMIT = 4096
JSON_SCHEMA_VERSION = 1


def _as_complex(x):
    return np.asarray(x, dtype=np.complex128)


def minimal_length(kernel_size: int, stride: int) -> int:
    """Smallest admissible signal length ``d * ceil((2 L_K - 1) / d)``."""
    return stride * math.ceil((2 * kernel_size - 1) / stride)


def round_length(length: int, stride: int) -> int:
    """Round ``length`` up to the next multiple of ``stride``."""
    return stride * math.ceil(length / stride)


@dataclass(frozen=True, eq=False)
class Filterbank:
    """M kernels of size L_K, a stride and the ambient signal length.

    The full-length filters are the kernels zero-padded on coordinates
    ``L_K .. L-1``. ``relaxed_support`` marks filterbanks produced by
    reductions whose filters were not originally short kernels (hybrid and
    Gram-dual constructions); their ``kernel_size`` is then simply the width of
    the stored support.
    """

    kernels: np.ndarray
    stride: int
    signal_length: int
    relaxed_support: bool = False

    def __post_init__(self):
        k = np.array(self.kernels, dtype=np.complex128)
        if k.ndim == 1:
            k = k[None, :]
        if k.ndim != 2 or k.shape[0] < 1 or k.shape[1] < 1:
            raise InvalidArgumentError(f"kernels must be a non-empty M x L_K array, got {k.shape}")
        d, L = int(self.stride), int(self.signal_length)
        if d < 1:
            raise InvalidArgumentError(f"stride must be positive, got {d}")
        if L % d:
            raise InvalidArgumentError(f"signal length {L} is not a multiple of stride {d}")
        if L < k.shape[1]:
            raise InvalidArgumentError(f"signal length {L} shorter than kernel size {k.shape[1]}")
        k.setflags(write=False)
        object.__setattr__(self, "kernels", k)
        object.__setattr__(self, "stride", d)
        object.__setattr__(self, "signal_length", L)

    @classmethod
    def create(cls, kernels, stride: int, signal_length: int | None = None, **kw) -> "Filterbank":
        """Build a filterbank, rounding the requested length up to a multiple of the stride.

        With ``signal_length=None`` the minimal admissible length is used.
        """
        k = np.atleast_2d(np.asarray(kernels))
        if signal_length is None:
            signal_length = minimal_length(k.shape[1], stride)
        L = round_length(max(int(signal_length), k.shape[1]), stride)
        return cls(k, stride, L, **kw)

    @property
    def num_filters(self) -> int:
        return self.kernels.shape[0]

    @property
    def kernel_size(self) -> int:
        return self.kernels.shape[1]

    @property
    def num_coefficients(self) -> int:
        return self.signal_length // self.stride

    @property
    def filters(self) -> np.ndarray:
        """Full-length filters, shape ``(M, L)``."""
        out = np.zeros((self.num_filters, self.signal_length), dtype=np.complex128)
        out[:, : self.kernel_size] = self.kernels
        return out

    @property
    def responses(self) -> np.ndarray:
        """Non-unitary frequency responses ``fft(w_j)``, shape ``(M, L)``."""
        return np.fft.fft(self.kernels, n=self.signal_length, axis=-1)

    def with_kernels(self, kernels) -> "Filterbank":
        return Filterbank(kernels, self.stride, self.signal_length, self.relaxed_support)

    def at_length(self, signal_length: int) -> "Filterbank":
        """Same kernels embedded in a different ambient length."""
        return Filterbank(self.kernels, self.stride, round_length(signal_length, self.stride),
                          self.relaxed_support)

    def at_minimal_length(self) -> "Filterbank":
        return self.at_length(minimal_length(self.kernel_size, self.stride))

    def scaled(self, c) -> "Filterbank":
        return self.with_kernels(c * self.kernels)

    # serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "schema_version": JSON_SCHEMA_VERSION,
            "stride": self.stride,
            "signal_length": self.signal_length,
            "kernels": [[[float(z.real), float(z.imag)] for z in row] for row in self.kernels],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Filterbank":
        try:
            stride = int(doc["stride"])
            length = int(doc["signal_length"])
            raw = np.asarray(doc["kernels"], dtype=np.float64)
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidArgumentError(f"malformed filterbank document: {exc}") from exc
        if raw.ndim != 3 or raw.shape[-1] != 2:
            raise InvalidArgumentError("kernels must be an M x L_K list of [re, im] pairs")
        return cls.create(raw[..., 0] + 1j * raw[..., 1], stride, length)


def dumps_json(doc) -> str:
    """Serialize with 17 significant digits for every float."""
    return _encode(doc, 0)


def _encode(obj, depth):
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not math.isfinite(v):
            return "null"
        return format(v, ".17g")
    if isinstance(obj, str):
        return json.dumps(obj)
    pad = "  " * (depth + 1)
    end = "  " * depth
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, depth + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (list, tuple, dict, np.ndarray)) for v in seq):
            return "[" + ", ".join(_encode(v, depth + 1) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, depth + 1) for v in seq) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj)!r}")


def save_filterbank(fb: Filterbank, path) -> None:
    Path(path).write_text(dumps_json(fb.to_dict()) + "\n", encoding="utf-8")


def load_filterbank(path) -> Filterbank:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidArgumentError(f"{path}: not valid JSON ({exc})") from exc
    return Filterbank.from_dict(doc)


# signal arithmetic ---------------------------------------------------------

def dft(x, unitary: bool = True) -> np.ndarray:
    """DFT along the last axis; ``unitary`` puts ``1/sqrt(L)`` on the forward transform."""
    return np.fft.fft(_as_complex(x), axis=-1, norm="ortho" if unitary else "backward")


def idft(x, unitary: bool = True) -> np.ndarray:
    """Inverse of :func:`dft` for the same ``unitary`` flag."""
    return np.fft.ifft(_as_complex(x), axis=-1, norm="ortho" if unitary else "backward")


def circular_convolve(x, w) -> np.ndarray:
    """``(x * w)[n] = sum_l x[l] w[n - l mod L]``."""
    x, w = _as_complex(x), _as_complex(w)
    if x.shape[-1] != w.shape[-1]:
        raise InvalidArgumentError(f"length mismatch: {x.shape[-1]} vs {w.shape[-1]}")
    return np.fft.ifft(np.fft.fft(x, axis=-1) * np.fft.fft(w, axis=-1), axis=-1)


def downsample(x, d: int) -> np.ndarray:
    x = _as_complex(x)
    if x.shape[-1] % d:
        raise InvalidArgumentError(f"stride {d} does not divide length {x.shape[-1]}")
    return x[..., ::d]


def upsample(y, d: int) -> np.ndarray:
    y = _as_complex(y)
    out = np.zeros(y.shape[:-1] + (y.shape[-1] * d,), dtype=np.complex128)
    out[..., ::d] = y
    return out


def strided_convolve(x, w, d: int) -> np.ndarray:
    """``(x * w) downsampled by d``; output length ``L/d``."""
    x = _as_complex(x)
    if d < 1 or x.shape[-1] % d:
        raise InvalidArgumentError(f"stride {d} does not divide length {x.shape[-1]}")
    return downsample(circular_convolve(x, w), d)


def reverse(w) -> np.ndarray:
    """Circular time reversal ``(Rw)[n] = w[-n]``."""
    w = _as_complex(w)
    return np.roll(w[..., ::-1], 1, axis=-1)


def _check_signal(fb: Filterbank, x):
    x = _as_complex(x)
    if x.shape[-1] != fb.signal_length:
        raise InvalidArgumentError(
            f"signal length {x.shape[-1]} does not match filterbank length {fb.signal_length}")
    return x


def analysis(fb: Filterbank, x) -> np.ndarray:
    """Coefficients ``(x * w_j) downsampled by d`` for every channel.

    ``x`` of shape ``(..., L)`` gives an array of shape ``(..., M, L/d)``.
    """
    x = _check_signal(fb, x)
    X = np.fft.fft(x, axis=-1)[..., None, :]
    return np.fft.ifft(X * fb.responses, axis=-1)[..., :: fb.stride]


def synthesis(fb: Filterbank, c) -> np.ndarray:
    """Adjoint of :func:`analysis`: ``sum_j (c_j upsampled) * conj(R w_j)``."""
    c = _as_complex(c)
    if c.shape[-2:] != (fb.num_filters, fb.num_coefficients):
        raise InvalidArgumentError(
            f"coefficient shape {c.shape[-2:]} does not match "
            f"({fb.num_filters}, {fb.num_coefficients})")
    # fft(conj(R w)) = conj(fft(w))
    U = np.fft.fft(upsample(c, fb.stride), axis=-1)
    return np.fft.ifft((U * np.conj(fb.responses)).sum(axis=-2), axis=-1)


def frame_operator_apply(fb: Filterbank, x) -> np.ndarray:
    """``S x = synthesis(analysis(x))``."""
    return synthesis(fb, analysis(fb, x))


def analysis_matrix(fb: Filterbank) -> np.ndarray:
    """Explicit ``(M L/d) x L`` matrix of the analysis operator.

    Row ``j * L/d + m`` holds ``w_j[d m - l]`` for ``l = 0..L-1``.
    """
    L, d = fb.signal_length, fb.stride
    m = np.arange(L // d)[:, None]
    ell = np.arange(L)[None, :]
    idx = (d * m - ell) % L
    return fb.filters[:, idx].reshape(fb.num_filters * (L // d), L)
