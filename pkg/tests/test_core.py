import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import complex_normal, parseval_fb, random_fb
from framealias.core import (Filterbank, analysis, analysis_matrix, circular_convolve, dft,
                             downsample, dumps_json, frame_operator_apply, idft, load_filterbank,
                             minimal_length, reverse, save_filterbank, strided_convolve, synthesis,
                             upsample)
from framealias.errors import InvalidArgumentError


def naive_convolve(x, w):
    L = len(x)
    return np.array([sum(x[l] * w[(n - l) % L] for l in range(L)) for n in range(L)])


def delta(L, m=0):
    e = np.zeros(L, dtype=complex)
    e[m] = 1
    return e


class TestConvolution:
    def test_delta_is_identity(self, rng):
        x = complex_normal(rng, 10)
        assert np.allclose(circular_convolve(x, delta(10)), x, atol=1e-14)

    def test_shift_property(self, rng):
        w = complex_normal(rng, 9)
        assert np.allclose(circular_convolve(delta(9, 4), w), np.roll(w, 4), atol=1e-14)

    def test_matches_double_loop(self, rng):
        x, w = complex_normal(rng, 12), complex_normal(rng, 12)
        assert np.abs(circular_convolve(x, w) - naive_convolve(x, w)).max() <= 1e-12

    @given(st.integers(1, 40), st.integers(0, 2**31))
    @settings(max_examples=40, deadline=None)
    def test_commutative(self, L, seed):
        r = np.random.default_rng(seed)
        x, w = complex_normal(r, L), complex_normal(r, L)
        assert np.allclose(circular_convolve(x, w), circular_convolve(w, x), atol=1e-10)

    def test_length_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            circular_convolve(np.ones(4), np.ones(5))


class TestStrided:
    def test_stride_one(self, rng):
        x, w = complex_normal(rng, 8), complex_normal(rng, 8)
        assert np.allclose(strided_convolve(x, w, 1), circular_convolve(x, w))

    def test_delta_input(self, rng):
        w = complex_normal(rng, 8)
        assert np.allclose(strided_convolve(delta(8), w, 2), w[[0, 2, 4, 6]], atol=1e-14)

    def test_composition(self, rng):
        x, w = complex_normal(rng, 24), complex_normal(rng, 24)
        np.testing.assert_array_equal(strided_convolve(x, w, 4),
                                      downsample(circular_convolve(x, w), 4))

    def test_stride_must_divide(self):
        with pytest.raises(InvalidArgumentError):
            strided_convolve(np.ones(10), np.ones(10), 3)

    def test_up_down(self, rng):
        y = complex_normal(rng, 5)
        np.testing.assert_array_equal(downsample(upsample(y, 3), 3), y)


class TestDFT:
    def test_delta_unitary(self):
        assert np.allclose(dft(delta(9)), np.full(9, 1 / 3))

    def test_constant_unitary(self):
        assert np.allclose(dft(np.ones(4)), [2, 0, 0, 0])

    @pytest.mark.parametrize("unitary", [True, False])
    def test_round_trip(self, rng, unitary):
        x = complex_normal(rng, 31)
        assert np.abs(idft(dft(x, unitary), unitary) - x).max() <= 1e-12 * np.linalg.norm(x)

    def test_non_unitary_is_plain_sum(self):
        assert np.allclose(dft(np.ones(5), unitary=False), [5, 0, 0, 0, 0])

    def test_convolution_theorem(self, rng):
        L = 20
        x, w = complex_normal(rng, L), complex_normal(rng, L)
        lhs = dft(circular_convolve(x, w))
        assert np.allclose(lhs, np.sqrt(L) * dft(x) * dft(w), atol=1e-12)

    def test_reverse(self):
        np.testing.assert_array_equal(reverse(np.arange(5)), [0, 4, 3, 2, 1])


class TestFilterbank:
    def test_length_rounding(self):
        fb = Filterbank.create(np.ones((2, 3)), 4, 10)
        assert fb.signal_length == 12

    def test_minimal_length(self):
        assert minimal_length(8, 2) == 16
        assert minimal_length(8, 4) == 16
        assert minimal_length(3, 8) == 8
        assert Filterbank.create(np.ones((1, 5)), 3).signal_length == 9

    @pytest.mark.parametrize("kw", [dict(stride=0, signal_length=4),
                                    dict(stride=3, signal_length=4),
                                    dict(stride=1, signal_length=2)])
    def test_invalid(self, kw):
        with pytest.raises(InvalidArgumentError):
            Filterbank(np.ones((2, 3)), **kw)

    def test_immutable(self):
        fb = Filterbank(np.ones((2, 3)), 1, 4)
        with pytest.raises(ValueError):
            fb.kernels[0, 0] = 2

    def test_filters_zero_padded(self, rng):
        fb = random_fb(rng, 3, 4, 2, 10)
        assert np.all(fb.filters[:, 4:] == 0)
        np.testing.assert_array_equal(fb.filters[:, :4], fb.kernels)

    def test_real_kernels_embedded(self):
        fb = Filterbank(np.ones((1, 2)), 1, 2)
        assert fb.kernels.dtype == np.complex128


class TestOperators:
    def test_identity_filter(self, rng):
        x = complex_normal(rng, 8)
        fb = Filterbank(delta(1), 1, 8)
        assert np.allclose(analysis(fb, x)[0], x)
        assert np.allclose(synthesis(fb, x[None, :]), x)
        assert np.allclose(frame_operator_apply(fb, x), x)

    def test_identity_filter_strided(self, rng):
        x = complex_normal(rng, 8)
        fb = Filterbank(delta(1), 2, 8)
        assert np.allclose(analysis(fb, x)[0], x[[0, 2, 4, 6]])

    def test_analysis_per_channel(self, rng):
        fb = random_fb(rng, 4, 5, 3, 15)
        x = complex_normal(rng, 15)
        y = analysis(fb, x)
        for j in range(4):
            assert np.allclose(y[j], strided_convolve(x, fb.filters[j], 3), atol=1e-14)

    def test_adjoint_identity(self, rng):
        fb = random_fb(rng, 3, 6, 2, 12)
        for _ in range(50):
            x = complex_normal(rng, 12)
            c = complex_normal(rng, 3, 6)
            lhs = np.vdot(c, analysis(fb, x))      # <analysis x, c>
            rhs = np.vdot(synthesis(fb, c), x)     # <x, synthesis c>
            assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))

    def test_synthesis_matches_matrix_adjoint(self, rng):
        fb = random_fb(rng, 3, 4, 2, 8)
        Th = np.stack([analysis(fb, e).reshape(-1) for e in np.eye(8)], axis=1)
        np.testing.assert_allclose(analysis_matrix(fb), Th, atol=1e-14)
        c = complex_normal(rng, 3, 4)
        assert np.allclose(synthesis(fb, c), Th.conj().T @ c.reshape(-1), atol=1e-12)

    def test_frame_operator_composition(self, rng):
        fb = random_fb(rng, 4, 3, 2, 10)
        x = complex_normal(rng, 10)
        assert np.allclose(frame_operator_apply(fb, x), synthesis(fb, analysis(fb, x)))

    def test_parseval_returns_input(self, rng):
        fb = parseval_fb(rng, 5, 3, 12, degree=2)
        x = complex_normal(rng, 12)
        assert np.allclose(frame_operator_apply(fb, x), x, atol=1e-12)

    def test_batched(self, rng):
        fb = random_fb(rng, 2, 3, 2, 8)
        X = complex_normal(rng, 5, 8)
        y = analysis(fb, X)
        assert y.shape == (5, 2, 4)
        assert np.allclose(y[3], analysis(fb, X[3]))

    def test_shape_errors(self, rng):
        fb = random_fb(rng, 2, 3, 2, 8)
        with pytest.raises(InvalidArgumentError):
            analysis(fb, np.ones(6))
        with pytest.raises(InvalidArgumentError):
            synthesis(fb, np.ones((2, 3)))


class TestSerialization:
    def test_round_trip(self, rng, tmp_path):
        fb = random_fb(rng, 3, 4, 2, 10)
        save_filterbank(fb, tmp_path / "fb.json")
        back = load_filterbank(tmp_path / "fb.json")
        np.testing.assert_array_equal(back.kernels, fb.kernels)
        assert (back.stride, back.signal_length) == (2, 10)

    def test_document_layout(self, rng):
        doc = json.loads(dumps_json(random_fb(rng, 2, 3, 1, 4).to_dict()))
        assert set(doc) == {"schema_version", "stride", "signal_length", "kernels"}
        assert np.asarray(doc["kernels"]).shape == (2, 3, 2)

    def test_full_precision(self):
        assert dumps_json(0.1) == "0.10000000000000001"
        assert dumps_json(float("inf")) == "null"

    @pytest.mark.parametrize("doc", ["{}", '{"stride": 1, "signal_length": 4, "kernels": [1, 2]}',
                                     "not json"])
    def test_malformed(self, tmp_path, doc):
        p = tmp_path / "bad.json"
        p.write_text(doc)
        with pytest.raises(InvalidArgumentError):
            load_filterbank(p)
