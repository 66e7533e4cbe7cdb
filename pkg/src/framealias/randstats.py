"""Moments of the aliasing terms for randomly initialized kernels.

Kernels are real i.i.d. with zero mean and variance ``sigma^2``. Under the
package's non-unitary response convention

    E[G_n[k]] = (sigma^2 M / d) sum_{l < L_K} exp(+2 pi i l n / d)
    V[G_n[k]] = (sigma^4 M / d^2) (F(2k/L - n/d) + L_K^2)   (Gaussian kernels)

with the Fejer ratio ``F(t) = sin^2(L_K pi t) / sin^2(pi t)`` (limit ``L_K^2``
at integers). Both are independent of the ambient length; ``E[S] = I``
requires ``d | L_K`` and ``sigma^2 = d / (M L_K)``.

The variance uses Isserlis' theorem and is only available for Gaussian
kernels.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import Filterbank, minimal_length
from .errors import InvalidArgumentError, UnsupportedSpecError
from .walnut import frame_operator_matrix

CHUNK = 250


@dataclass(frozen=True)
class RandomKernelSpec:
    """Distribution of the kernel entries and the filterbank shape.

    ``mean``/``variance`` parametrize the Gaussian; ``low``/``high`` the uniform.
    """

    num_filters: int
    kernel_size: int
    stride: int
    signal_length: int | None = None
    distribution: str = "gaussian"
    mean: float = 0.0
    variance: float = 1.0
    low: float = -1.0
    high: float = 1.0

    def __post_init__(self):
        if self.distribution not in ("gaussian", "uniform"):
            raise InvalidArgumentError(f"unknown distribution {self.distribution!r}")
        if min(self.num_filters, self.kernel_size, self.stride) < 1:
            raise InvalidArgumentError("M, L_K and d must be positive")
        if self.distribution == "gaussian" and not self.variance > 0:
            raise InvalidArgumentError("variance must be positive")
        if self.distribution == "uniform" and not self.high > self.low:
            raise InvalidArgumentError("uniform distribution needs low < high")
        L = self.signal_length
        if L is None:
            L = minimal_length(self.kernel_size, self.stride)
        if L % self.stride or L < self.kernel_size:
            raise InvalidArgumentError(f"invalid signal length {L}")
        object.__setattr__(self, "signal_length", int(L))

    @classmethod
    def parseval_at_expectation(cls, num_filters, kernel_size, stride, signal_length=None):
        """Gaussian spec with ``sigma^2 = d / (M L_K)``."""
        return cls(num_filters, kernel_size, stride, signal_length,
                   variance=stride / (num_filters * kernel_size))

    @property
    def entry_mean(self) -> float:
        return self.mean if self.distribution == "gaussian" else 0.5 * (self.low + self.high)

    @property
    def entry_variance(self) -> float:
        if self.distribution == "gaussian":
            return self.variance
        return (self.high - self.low) ** 2 / 12.0

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        shape = (size, self.num_filters, self.kernel_size)
        if self.distribution == "gaussian":
            return rng.normal(self.mean, math.sqrt(self.variance), shape)
        return rng.uniform(self.low, self.high, shape)


@dataclass(frozen=True, eq=False)
class MomentTable:
    """Mean and variance of ``G_n[k]`` on the ``d x L`` grid.

    Empirical tables also carry standard errors of both estimates and the
    number of draws; closed-form tables leave them as ``None``.
    """

    expected: np.ndarray
    variance: np.ndarray
    bounds: tuple[float, float] | None = None
    se_mean: np.ndarray | None = None
    se_variance: np.ndarray | None = None
    draws: int | None = None


def _require_centered(spec: RandomKernelSpec):
    if spec.entry_mean != 0:
        raise UnsupportedSpecError("closed-form moments need zero-mean kernels")


def fejer_ratio(t, kernel_size: int) -> np.ndarray:
    """``sin^2(L_K pi t) / sin^2(pi t)`` with the value ``L_K^2`` at integers."""
    t = np.asarray(t, dtype=np.float64)
    den = np.sin(np.pi * t) ** 2
    num = np.sin(kernel_size * np.pi * t) ** 2
    near = np.abs(t - np.round(t)) < 1e-12
    out = np.empty_like(t)
    out[near] = kernel_size**2
    out[~near] = num[~near] / den[~near]
    return out


def expected_aliasing(spec: RandomKernelSpec) -> np.ndarray:
    """Closed-form ``E[G_n[k]]``, shape ``(d, L)``; constant along ``k``."""
    _require_centered(spec)
    d, L = spec.stride, spec.signal_length
    n = np.arange(d)[:, None]
    ell = np.arange(spec.kernel_size)[None, :]
    col = spec.entry_variance * spec.num_filters / d * np.exp(2j * np.pi * ell * n / d).sum(axis=1)
    if d > 1 and spec.kernel_size % d == 0:
        col[1:] = 0.0  # roots of unity cancel exactly
    return np.repeat(col[:, None], L, axis=1)


def variance_bounds(spec: RandomKernelSpec) -> tuple[float, float]:
    base = spec.entry_variance**2 * spec.num_filters * spec.kernel_size**2 / spec.stride**2
    return base, 2 * base


def variance_aliasing(spec: RandomKernelSpec) -> np.ndarray:
    """Closed-form ``V[G_n[k]] = E|G_n[k] - E G_n[k]|^2``, shape ``(d, L)``."""
    if spec.distribution != "gaussian":
        raise UnsupportedSpecError("the variance closed form holds for Gaussian kernels only")
    _require_centered(spec)
    d, L = spec.stride, spec.signal_length
    n = np.arange(d)[:, None]
    k = np.arange(L)[None, :]
    # integer numerators keep the peak positions exact
    t = (2 * k * d - n * L) / (L * d)
    scale = spec.variance**2 * spec.num_filters / d**2
    return scale * (fejer_ratio(t, spec.kernel_size) + spec.kernel_size**2)


def closed_form_moments(spec: RandomKernelSpec) -> MomentTable:
    return MomentTable(expected_aliasing(spec), variance_aliasing(spec), variance_bounds(spec))


def variance_peaks(spec: RandomKernelSpec) -> list[set]:
    """Indices ``k`` attaining the maximum closed-form variance, per ``n``."""
    V = variance_aliasing(spec)
    return [set(np.flatnonzero(np.isclose(row, row.max(), rtol=1e-12, atol=0)).tolist()) for row in V]


# Monte Carlo -----------------------------------------------------------------

def aliasing_from_kernels(kernels: np.ndarray, stride: int, length: int) -> np.ndarray:
    """Aliasing terms of a batch of kernels ``(..., M, L_K)`` via their Gram matrix.

    ``G_n[k] = d^-1 sum_D e^{2 pi i k D / L} sum_l P[l + D, l] e^{2 pi i n l / d}``
    with ``P = sum_j conj(w_j) w_j^T``; the cost no longer scales with ``M L``.
    """
    kernels = np.asarray(kernels)
    LK = kernels.shape[-1]
    if length < LK or length % stride:
        raise InvalidArgumentError(f"length {length} must be a multiple of {stride} and at least {LK}")
    P = np.einsum("...mi,...mj->...ij", np.conj(kernels), kernels)
    ell = np.arange(LK)
    out = []
    for n in range(stride):
        Q = P * np.exp(2j * np.pi * n * ell / stride)
        C = np.zeros(P.shape[:-2] + (length,), dtype=np.complex128)
        for D in range(-(LK - 1), LK):
            C[..., D % length] += np.trace(Q, offset=-D, axis1=-2, axis2=-1)
        out.append(np.fft.ifft(C, axis=-1) * (length / stride))
    return np.stack(out, axis=-2)


def _chunk_stats(args):
    spec, seed_seq, size = args
    rng = np.random.default_rng(seed_seq)
    k = spec.sample(rng, size)
    G = aliasing_from_kernels(k, spec.stride, spec.signal_length)
    mean = G.mean(axis=0)
    dev = G - mean
    return size, mean, (np.abs(dev) ** 2).sum(axis=0), G


def _chunks(draws: int, seed: int):
    sizes = [CHUNK] * (draws // CHUNK) + ([draws % CHUNK] if draws % CHUNK else [])
    seqs = np.random.SeedSequence(seed).spawn(len(sizes))
    return list(zip(seqs, sizes))


def _iter_chunks(spec, draws, seed, n_jobs):
    jobs = [(spec, s, n) for s, n in _chunks(draws, seed)]
    if n_jobs is None or n_jobs <= 1:
        for j in jobs:
            yield _chunk_mean(j)
        return
    with ProcessPoolExecutor(max_workers=n_jobs) as ex:
        # map preserves the submission order, so the merge is order-fixed
        yield from ex.map(_chunk_mean, jobs)


def _chunk_mean(args):
    size, mean, m2, _ = _chunk_stats(args)
    return size, mean, m2


def _merge_means(spec, draws, seed, n_jobs):
    """Chan's pairwise merge of per-chunk means and second central moments."""
    count, mean, m2 = 0, None, None
    for size, cm, cm2 in _iter_chunks(spec, draws, seed, n_jobs):
        if mean is None:
            count, mean, m2 = size, cm, cm2
            continue
        tot = count + size
        delta = cm - mean
        mean = mean + delta * (size / tot)
        m2 = m2 + cm2 + np.abs(delta) ** 2 * (count * size / tot)
        count = tot
    return count, mean, m2


def _fourth_pass(args):
    spec, seed_seq, size, mu = args
    *_, G = _chunk_stats((spec, seed_seq, size))
    a = np.abs(G - mu) ** 2
    return a.sum(axis=0), (a**2).sum(axis=0)


def monte_carlo_moments(spec: RandomKernelSpec, draws: int, seed: int = 0,
                        n_jobs: int | None = None) -> MomentTable:
    """Empirical mean and variance of ``G_n[k]`` over independent draws.

    Draws are generated in fixed-size chunks, each from its own child of
    ``SeedSequence(seed)``; chunk statistics are merged in chunk order, so the
    result does not depend on ``n_jobs``. ``se_mean`` is ``sqrt(V/N)`` and
    ``se_variance`` the standard error of the sample mean of
    ``|G - mean|^2``, from a second pass around the final mean.
    """
    if draws < 2:
        raise InvalidArgumentError("need at least two draws")
    N, mean, m2 = _merge_means(spec, draws, seed, n_jobs)
    var = m2 / (N - 1)
    jobs = [(spec, s, n, mean) for s, n in _chunks(draws, seed)]
    if n_jobs is None or n_jobs <= 1:
        parts = [_fourth_pass(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=n_jobs) as ex:
            parts = list(ex.map(_fourth_pass, jobs))
    s1 = sum(p[0] for p in parts)
    s2 = sum(p[1] for p in parts)
    spread = np.maximum(s2 / N - (s1 / N) ** 2, 0.0)
    bounds = variance_bounds(spec) if spec.distribution == "gaussian" else None
    return MomentTable(mean, var, bounds, np.sqrt(var / N), np.sqrt(spread / N), N)


def monte_carlo_frame_operator(spec: RandomKernelSpec, draws: int, seed: int = 0) -> np.ndarray:
    """Average time-domain frame operator over ``draws`` random filterbanks."""
    rng = np.random.default_rng(seed)
    L = spec.signal_length
    acc = np.zeros((L, L), dtype=np.complex128)
    for sizes in [CHUNK] * (draws // CHUNK) + ([draws % CHUNK] if draws % CHUNK else []):
        for k in spec.sample(rng, sizes):
            acc += frame_operator_matrix(Filterbank(k, spec.stride, L))
    return acc / draws


def agreement(emp: MomentTable, closed: MomentTable, z: float = 3.0) -> tuple[float, float]:
    """Fractions of grid points where the empirical mean and variance are within ``z`` SE."""
    ok_mean = np.abs(emp.expected - closed.expected) <= z * emp.se_mean
    ok_var = np.abs(emp.variance - closed.variance) <= z * emp.se_variance
    return float(ok_mean.mean()), float(ok_var.mean())
