import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sotrack.errors import ZeroNorm
from sotrack.geometry import BoundingBox, Detection, Patch
from sotrack.matching import (TargetTemplate, class_filter, cosine, cosine_score, fourier_embed,
                              select_by_similarity, update_template)

SRC = BoundingBox(8, 8, 16, 16)


def patch(pixels):
    return Patch(np.asarray(pixels, dtype=np.uint8), SRC)


def noise_patch(seed, side=16, high=256):
    return patch(np.random.default_rng(seed).integers(0, high, (side, side, 3)))


def det(label, cx=0.0):
    return Detection(BoundingBox(cx, 0, 4, 4), label, 0.9)


def dc_free(embedding, side):
    """Embedding with the DC bins (real and imaginary, every channel) zeroed."""
    out = embedding.copy()
    n = side * side
    for block in range(6):
        out[block * n] = 0.0
    return out


class TestClassFilter:
    def test_identity_when_all_match(self):
        dets = [det(1), det(1, 2)]
        assert class_filter(dets, 1) == dets

    def test_empty_when_none_match(self):
        assert class_filter([det(2), det(3)], 1) == []

    def test_mixed_keeps_order(self):
        person, car = 0, 1
        dets = [det(person, 1), det(car, 2), det(person, 3)]
        assert class_filter(dets, person) == [dets[0], dets[2]]


class TestEmbedding:
    def test_length_and_determinism(self):
        p = noise_patch(0)
        e = fourier_embed(p)
        assert e.shape == (6 * 16 * 16,)
        assert np.array_equal(e, fourier_embed(p))

    def test_uniform_patch_has_only_dc_energy(self):
        e = fourier_embed(patch(np.full((8, 8, 3), (10, 20, 30))))
        n = 64
        for channel, value in enumerate((10, 20, 30)):
            real = e[channel * n:(channel + 1) * n]
            assert real[0] == value * n
            assert np.all(real[1:] == 0)
        assert np.all(e[3 * n:] == 0)

    def test_impulse_has_flat_magnitude(self):
        px = np.zeros((8, 8, 3))
        px[0, 0] = (5, 5, 5)
        e = fourier_embed(patch(px))
        n = 64
        magnitude = np.hypot(e[:n], e[3 * n:4 * n])
        assert np.allclose(magnitude, 5.0)

    def test_layout_real_then_imaginary(self):
        p = noise_patch(3, side=4)
        e = fourier_embed(p)
        spectra = [np.fft.fft2(p.pixels[..., c].astype(float)) for c in range(3)]
        want = np.concatenate([s.real.ravel() for s in spectra] + [s.imag.ravel() for s in spectra])
        assert np.allclose(e, want)


class TestCosine:
    def test_self_similarity(self):
        p = noise_patch(1)
        assert cosine_score(TargetTemplate.from_patch(p, 0), p) == pytest.approx(1.0, abs=1e-12)

    def test_zero_norm(self):
        black = patch(np.zeros((8, 8, 3)))
        with pytest.raises(ZeroNorm):
            cosine_score(TargetTemplate.from_patch(noise_patch(1, 8), 0), black)
        with pytest.raises(ZeroNorm):
            cosine(np.zeros(3), np.ones(3))

    def test_negation_on_4x4_patch(self):
        # 255 - p changes only the DC bin by a constant and flips every other
        # bin, so the DC-free embeddings are exact opposites
        p = noise_patch(7, side=4)
        neg = patch(255 - p.pixels.astype(int))
        u = dc_free(fourier_embed(p), 4)
        v = dc_free(fourier_embed(neg), 4)
        direct = sum(a * b for a, b in zip(u, v)) / (np.sqrt(sum(a * a for a in u)) * np.sqrt(sum(b * b for b in v)))
        assert direct == pytest.approx(-1.0, abs=1e-12)
        assert cosine(u, v) == pytest.approx(-1.0, abs=1e-12)

    def test_cosine_matches_pixel_space_inner_product(self):
        # Parseval: the DFT embedding preserves angles between patches
        a, b = noise_patch(11), noise_patch(12)
        x = a.pixels.astype(float).ravel()
        y = b.pixels.astype(float).ravel()
        want = x @ y / (np.linalg.norm(x) * np.linalg.norm(y))
        assert cosine_score(TargetTemplate.from_patch(a, 0), b) == pytest.approx(want, abs=1e-12)

    def test_independent_noise_is_uncorrelated_once_dc_is_removed(self):
        scores, full = [], []
        for seed in range(1000):
            a, b = noise_patch(2 * seed, 64), noise_patch(2 * seed + 1, 64)
            ea, eb = fourier_embed(a), fourier_embed(b)
            scores.append(cosine(dc_free(ea, 64), dc_free(eb, 64)))
            full.append(cosine(ea, eb))
        assert max(abs(s) for s in scores) < 0.2
        # the DC bin carries the mean brightness, so raw scores of two
        # uniform-noise patches sit near 3/4, far below self-similarity
        assert 0.7 < np.mean(full) < 0.8

    @given(st.integers(0, 2**32 - 1), st.sampled_from([2, 3, 7]))
    def test_positive_scaling_invariance(self, seed, factor):
        t = noise_patch(seed, 8)
        c = noise_patch(seed + 1, 8, high=256 // factor)
        scaled = patch(c.pixels.astype(int) * factor)
        template = TargetTemplate.from_patch(t, 0)
        assert cosine_score(template, scaled) == pytest.approx(cosine_score(template, c), abs=1e-9)

    @given(st.integers(0, 2**32 - 1))
    def test_self_similarity_property(self, seed):
        p = noise_patch(seed, 8)
        assert abs(cosine_score(TargetTemplate.from_patch(p, 0), p) - 1.0) <= 1e-9


class TestSelect:
    def test_single_candidate_wins(self):
        template = TargetTemplate.from_patch(noise_patch(0), 0)
        d = det(0)
        assert select_by_similarity(template, [(d, noise_patch(5))])[0] is d

    def test_identical_candidate_wins_with_one(self):
        p = noise_patch(0)
        template = TargetTemplate.from_patch(p, 0)
        cands = [(det(0, i), noise_patch(10 + i)) for i in range(4)]
        cands.insert(2, (det(0, 99), p))
        winner, score = select_by_similarity(template, cands)
        assert winner is cands[2][0] and score == pytest.approx(1.0)

    def test_tie_goes_to_lowest_index(self):
        template = TargetTemplate.from_patch(noise_patch(0), 0)
        high, low = noise_patch(20), noise_patch(21, high=40)
        pairs = [(det(0, 0), high), (det(0, 1), low), (det(0, 2), high)]
        oracle = [cosine(template.embedding, fourier_embed(p)) for _, p in pairs]
        assert oracle[0] == oracle[2] > oracle[1]
        winner, score = select_by_similarity(template, pairs)
        assert winner is pairs[0][0] and score == oracle[0]

    def test_zero_norm_candidates_are_skipped(self):
        template = TargetTemplate.from_patch(noise_patch(0), 0)
        black = patch(np.zeros((16, 16, 3)))
        good = (det(0, 1), noise_patch(4))
        assert select_by_similarity(template, [(det(0), black), good])[0] is good[0]
        with pytest.raises(ZeroNorm):
            select_by_similarity(template, [(det(0), black)])
        with pytest.raises(ValueError):
            select_by_similarity(template, [])

    @settings(max_examples=50)
    @given(st.permutations(list(range(5))))
    def test_permutation_equivariant(self, order):
        template = TargetTemplate.from_patch(noise_patch(0), 0)
        pairs = [(det(0, i), noise_patch(30 + i)) for i in range(5)]
        reference = select_by_similarity(template, pairs)[0]
        assert select_by_similarity(template, [pairs[i] for i in order])[0] is reference


class TestTemplate:
    def test_update_with_own_patch_is_fixed_point(self):
        t = TargetTemplate.from_patch(noise_patch(0), 3)
        assert update_template(t, t.patch) == t

    def test_update_then_self_similarity(self):
        t = TargetTemplate.from_patch(noise_patch(0), 3)
        p = noise_patch(9)
        assert cosine_score(update_template(t, p), p) == pytest.approx(1.0)

    def test_replacement_semantics(self):
        t = TargetTemplate.from_patch(noise_patch(0), 3)
        a, b = noise_patch(1), noise_patch(2)
        final = update_template(update_template(t, a), b)
        assert final == TargetTemplate.from_patch(b, 3)
        assert final.class_label == 3

    def test_cached_fields_coherent(self):
        from sotrack.verification import lbp_histogram
        p = noise_patch(4)
        t = TargetTemplate.from_patch(p, 0)
        assert np.array_equal(t.embedding, fourier_embed(t.patch))
        assert t.lbp_hist == lbp_histogram(p)
        assert t.lbp_hist.bins.sum() == pytest.approx(1.0, abs=1e-9)
