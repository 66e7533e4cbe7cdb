import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import complex_normal, parseval_fb, random_fb
from framealias.core import Filterbank
from framealias.errors import DegenerateResponseError, InvalidArgumentError, UndefinedObjectiveError
from framealias.objectives import (ObjectiveKind, eval_LG, eval_LGhat, eval_Lkappa, eval_LS,
                                   eval_Ltheta, evaluate, gradient_check, has_ties)
from framealias.stability import frame_spectrum, optimal_bounds
from framealias.walnut import aliasing_terms


def untied(rng, kind, M=4, LK=5, d=2):
    while True:
        fb = random_fb(rng, M, LK, d)
        if not has_ties(fb, kind):
            return fb


class TestValues:
    @pytest.mark.parametrize("kind", ["LS", "LG", "LGhat", "Lkappa", "Ltheta"])
    def test_parseval_zero(self, rng, kind):
        fb = parseval_fb(rng, 6, 2, degree=3)
        assert evaluate(kind, fb, grad=False).value <= 1e-8

    def test_LS_scaled(self, rng):
        fb = parseval_fb(rng, 4, 2, degree=1).scaled(np.sqrt(2))
        assert eval_LS(fb).value == pytest.approx(1)

    def test_LS_eigen(self, rng):
        fb = random_fb(rng, 3, 4, 2)
        assert eval_LS(fb, grad=False).value == pytest.approx(np.abs(frame_spectrum(fb) - 1).max())

    def test_LG_ratio(self):
        # responses 1 and 2 on a length-2 grid give max/min - 1 = 1, no aliasing for d = 1
        k = np.array([[(1 + np.sqrt(2)) / 2, (1 - np.sqrt(2)) / 2]])
        fb = Filterbank.create(k, 1, 2)
        G0 = aliasing_terms(fb).response
        assert sorted(G0) == pytest.approx([1.0, 2.0])
        assert eval_LG(fb, grad=False, length=2).value == pytest.approx(1.0)

    def test_LG_independent(self, rng):
        fb = random_fb(rng, 4, 5, 3)
        G = aliasing_terms(fb.at_minimal_length()).terms
        ref = G[0].real.max() / G[0].real.min() - 1 + sum(np.linalg.norm(G[n]) for n in (1, 2))
        assert eval_LG(fb, grad=False).value == pytest.approx(ref, rel=1e-12)
        ref_inf = ref - sum(np.linalg.norm(G[n]) for n in (1, 2)) + sum(np.abs(G[n]).max() for n in (1, 2))
        assert eval_LG(fb, grad=False, norm="inf").value == pytest.approx(ref_inf, rel=1e-12)

    def test_LG_degenerate(self):
        with pytest.raises(DegenerateResponseError):
            eval_LG(Filterbank([[1.0, 1.0]], 1, 2), length=2)

    def test_LGhat_identity(self):
        assert eval_LGhat(Filterbank([1.0], 1, 8)).value == pytest.approx(0, abs=1e-14)

    def test_LGhat_independent(self, rng):
        fb = random_fb(rng, 4, 5, 2)
        alias = aliasing_terms(fb.at_minimal_length())
        ref = abs(alias.mean_response - np.abs(alias.coefficients).sum())
        assert eval_LGhat(fb, grad=False).value == pytest.approx(ref, rel=1e-12)

    def test_length_default_minimal(self, rng):
        fb = random_fb(rng, 3, 4, 2, L=40)
        assert eval_LGhat(fb).value == pytest.approx(eval_LGhat(fb.at_minimal_length()).value)

    def test_kappa(self, rng):
        fb = parseval_fb(rng, 4, 2, degree=1)
        assert eval_Lkappa(fb.scaled(3.0)).value == pytest.approx(0, abs=1e-12)
        fb = random_fb(rng, 5, 3, 2)
        b = optimal_bounds(fb.at_minimal_length())
        assert eval_Lkappa(fb).value == pytest.approx(b.upper / b.lower - 1)
        with pytest.raises(UndefinedObjectiveError):
            eval_Lkappa(Filterbank([1.0], 2, 8))

    def test_theta(self, rng):
        fb = random_fb(rng, 5, 3, 2)
        lam = frame_spectrum(fb.at_minimal_length())
        assert eval_Ltheta(fb).value == pytest.approx(0.5 * (lam.max() - lam.mean()))

    def test_evaluation_only(self, rng):
        with pytest.raises(InvalidArgumentError):
            evaluate("Lkappa", random_fb(rng, 2, 2, 1))

    def test_parse(self):
        assert ObjectiveKind.parse("lghat") is ObjectiveKind.LGHAT
        assert not ObjectiveKind.LTHETA.differentiable
        with pytest.raises(InvalidArgumentError):
            ObjectiveKind.parse("L2")


class TestGradients:
    @pytest.mark.parametrize("kind", ["LS", "LG", "LGhat"])
    def test_matches_finite_differences(self, rng, kind):
        for _ in range(5):
            fb = untied(rng, kind)
            assert gradient_check(fb, kind) <= 1e-5

    @pytest.mark.parametrize("kind", ["LG", "LGhat"])
    def test_with_parseval_term(self, rng, kind):
        fb = untied(rng, kind, M=3, LK=4, d=3)
        assert gradient_check(fb, kind, parseval_weight=1.0) <= 1e-5

    @pytest.mark.parametrize("norm", ["inf", "1"])
    def test_LG_norms(self, rng, norm):
        fb = untied(rng, "LG")
        assert gradient_check(fb, "LG", norm=norm) <= 1e-5

    def test_parseval_stationary(self, rng):
        fb = parseval_fb(rng, 5, 2, degree=2)
        assert np.linalg.norm(eval_LGhat(fb).gradient) <= 1e-6

    def test_real_kernels_have_ties(self, rng):
        # real kernels give a symmetric response, so max/min are attained twice
        fb = Filterbank.create(rng.standard_normal((4, 5)), 2)
        assert has_ties(fb, "LG")

    def test_gradient_shape(self, rng):
        fb = random_fb(rng, 3, 7, 2, L=50)
        for kind in ("LS", "LG", "LGhat"):
            assert evaluate(kind, fb).gradient.shape == (3, 7)

    @given(st.integers(0, 2**31))
    @settings(max_examples=15, deadline=None)
    def test_descent_direction(self, seed):
        fb = random_fb(np.random.default_rng(seed), 4, 4, 2)
        ev = eval_LGhat(fb)
        step = fb.with_kernels(fb.kernels - 1e-7 * ev.gradient)
        assert eval_LGhat(step, grad=False).value <= ev.value


def test_complexity_separation_small():
    # the aliasing objectives avoid the dense L x L eigenproblem
    fb = Filterbank.create(complex_normal(np.random.default_rng(0), 64, 32) / 64, 2)
    t = time.perf_counter()
    for _ in range(3):
        eval_LS(fb)
    ls = time.perf_counter() - t
    t = time.perf_counter()
    for _ in range(3):
        eval_LGhat(fb)
    assert time.perf_counter() - t < ls
