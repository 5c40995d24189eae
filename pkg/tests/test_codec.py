import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cohsim.codec import (
    EXPECTATION,
    EncodingParams,
    GrayImage,
    MeasurementRecord,
    PhaseImage,
    Sampled,
    angle_to_intensity,
    auxiliary_field,
    decode_phases,
    difference_port_counts,
    encode_image,
    expected_pixel_signal,
    global_transform,
    intensity_to_angle,
    interfere_with_auxiliary,
    measure_difference_ports,
    optimal_amplitude,
    point_transform,
    retrieve_image,
    sample_counts,
    sample_pixel_signal,
)
from cohsim.network import build_plan, chop
from cohsim.optics import CoherentField, DomainError, overlap


def random_gray(rng, bits, max_side=16):
    w, h = (int(v) for v in rng.integers(1, max_side + 1, size=2))
    return GrayImage(rng.integers(0, 2**bits, size=(h, w)), bits)


class TestAngleMapping:
    def test_endpoints(self):
        for bits in (1, 2, 4, 8):
            assert intensity_to_angle(0, bits) == 0.0
            assert intensity_to_angle(2**bits - 1, bits) == math.pi / 2

    def test_two_bit_labels(self):
        np.testing.assert_allclose(
            intensity_to_angle(np.arange(4), 2), [0, math.pi / 6, math.pi / 3, math.pi / 2], atol=1e-15
        )

    def test_rejects_out_of_range_label(self):
        with pytest.raises(DomainError):
            intensity_to_angle(4, 2)
        with pytest.raises(DomainError):
            intensity_to_angle(-1, 2)

    @given(st.integers(1, 12), st.data())
    def test_round_trip(self, bits, data):
        s = data.draw(st.integers(0, 2**bits - 1))
        assert angle_to_intensity(intensity_to_angle(s, bits), bits) == s

    def test_nearest_label_and_clamp(self):
        assert angle_to_intensity(math.pi / 6 + 0.01, 2) == 1
        assert angle_to_intensity(-0.05, 2) == 0
        assert angle_to_intensity(math.pi / 2 + 0.05, 2) == 3

    def test_far_outside_is_a_fault(self):
        with pytest.raises(DomainError, match="decode fault"):
            angle_to_intensity(2.0, 1)


class TestImages:
    def test_gray_rejects_bad_labels(self):
        with pytest.raises(DomainError):
            GrayImage(np.array([[0, 2]]), 1)
        with pytest.raises(DomainError):
            GrayImage(np.zeros(3), 1)

    def test_phase_rejects_out_of_range(self):
        with pytest.raises(DomainError):
            PhaseImage(2, 1, [0.0, 2.0])
        with pytest.raises(DomainError):
            PhaseImage(2, 2, [0.0, 0.1])

    def test_from_normalized_row_major(self):
        img = PhaseImage.from_normalized(np.array([[0.0, 0.5, 1.0], [1.0, 0.0, 0.25]]))
        assert img.shape == (3, 2)
        np.testing.assert_allclose(img.thetas, np.array([0, 0.5, 1, 1, 0, 0.25]) * math.pi / 2)
        np.testing.assert_allclose(img.normalized(), [[0.0, 0.5, 1.0], [1.0, 0.0, 0.25]])

    def test_json_round_trip(self, rng):
        img = PhaseImage.from_normalized(rng.random((3, 5)))
        back = PhaseImage.from_json(json.loads(img.dumps()))
        assert back.shape == img.shape
        np.testing.assert_array_equal(back.thetas, img.thetas)


class TestEncode:
    def test_direct_formula(self):
        img = GrayImage(np.array([[0, 1], [2, 3]]), 2)
        f = encode_image(img, EncodingParams(2.0, 2))
        np.testing.assert_allclose(f.amplitudes, 2.0 * np.exp(1j * np.arange(4) * math.pi / 6), atol=1e-15)

    @pytest.mark.parametrize("T", [4, 6, 9])
    def test_through_network_matches_direct(self, rng, T):
        img = PhaseImage.from_normalized(rng.random((1, T)))
        params = EncodingParams(1.3)
        np.testing.assert_allclose(
            encode_image(img, params, build_plan(T)).amplitudes, encode_image(img, params).amplitudes, atol=1e-12
        )

    def test_plan_size_mismatch(self):
        with pytest.raises(DomainError):
            encode_image(PhaseImage(2, 1, [0, 0]), EncodingParams(1.0), build_plan(4))


class TestTransforms:
    @given(st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi), st.floats(0.1, 5))
    def test_point_transform_adds_phase(self, t1, t2, a):
        f = CoherentField([a * np.exp(1j * t1), 1.0, 2j])
        out = point_transform(f, 1, t2)
        assert out[1] == pytest.approx(a * np.exp(1j * (t1 + t2)), abs=1e-12)
        assert abs(abs(out[1]) - a) <= 1e-14 * max(1, a)
        assert out[2] == f[2] and out[3] == f[3]

    def test_point_transform_bad_mode(self):
        with pytest.raises(DomainError):
            point_transform(CoherentField([1, 2]), 3, 0.1)

    @pytest.mark.parametrize("T", [2, 5, 8])
    def test_global_equals_all_point_transforms(self, T):
        plan = build_plan(T)
        alpha, dt = 2.2 + 0.3j, 0.77
        expected = chop(alpha, plan)
        for k in range(1, T + 1):
            expected = point_transform(expected, k, dt)
        got = global_transform(alpha, dt, plan)
        np.testing.assert_allclose(got.amplitudes, expected.amplitudes, atol=1e-14)
        np.testing.assert_allclose(np.abs(got.amplitudes), abs(alpha) / math.sqrt(T), rtol=1e-12)


class TestSignal:
    def test_splitter_outputs(self):
        s, d = interfere_with_auxiliary(1j, 1.0)
        assert s == pytest.approx((1 + 1j) / math.sqrt(2))
        assert d == pytest.approx((1j - 1) / math.sqrt(2))

    def test_expected_signal_matches_difference_port(self, rng):
        params = EncodingParams(1.7, auxiliary_phase=0.2)
        for theta in rng.uniform(0, math.pi / 2, size=10):
            _, d = interfere_with_auxiliary(1.7 * np.exp(1j * theta), 1.7 * np.exp(0.2j))
            assert expected_pixel_signal(theta, params) == pytest.approx(abs(d) ** 2, rel=1e-12)

    def test_vector_and_dark_pixel(self):
        params = EncodingParams(math.sqrt(2.3))
        np.testing.assert_allclose(expected_pixel_signal([0.0, math.pi / 2], params), [0.0, 2.3], atol=1e-14)

    def test_record_shot_noise(self):
        r = MeasurementRecord.from_mean(17.2)
        assert r.shot_noise == pytest.approx(math.sqrt(17.2))
        assert r.measured_n == 17.2 and r.sampled_n is None
        assert MeasurementRecord.from_mean(-1e-17).expected_n == 0.0


class TestSampling:
    def test_deterministic(self):
        np.testing.assert_array_equal(sample_counts(3.0, 50, 7), sample_counts(3.0, 50, 7))
        assert sample_pixel_signal(1.0, EncodingParams(2.0), 5) == sample_pixel_signal(1.0, EncodingParams(2.0), 5)

    def test_zero_mean(self):
        assert np.all(sample_counts(0.0, 100, 1) == 0)

    def test_negative_mean(self):
        with pytest.raises(DomainError):
            sample_counts(-1.0, 3, 0)

    def test_moments(self):
        x = sample_counts(4.0, 200_000, 11)
        assert x.mean() == pytest.approx(4.0, abs=0.03)
        assert x.var() == pytest.approx(4.0, rel=0.03)

    def test_sampled_records_are_order_independent(self, rng):
        f = encode_image(PhaseImage.from_normalized(rng.random((2, 3))), EncodingParams(3.0))
        ref = auxiliary_field(EncodingParams(3.0), 6)
        recs = measure_difference_ports(f, ref, Sampled(9, shots=4))
        _, measured = difference_port_counts(f, ref, Sampled(9, shots=4))
        np.testing.assert_array_equal([r.measured_n for r in recs], measured)
        assert all(len(r.sampled_n) == 4 and r.rng_seed == 9 for r in recs)
        # a single-mode field hits the same substream as mode 1 of the bigger one
        _, first = difference_port_counts(
            CoherentField(f.amplitudes[:1]), CoherentField(ref.amplitudes[:1]), Sampled(9, shots=4)
        )
        assert first[0] == measured[0]

    def test_shots_positive(self):
        with pytest.raises(DomainError):
            Sampled(0, shots=0)


class TestRetrieval:
    @pytest.mark.parametrize("bits", [1, 2, 4, 8])
    def test_expectation_round_trip(self, rng, bits):
        params = EncodingParams.optimal(bits)
        for _ in range(10):
            img = random_gray(rng, bits)
            out, records = retrieve_image(encode_image(img, params), params, EXPECTATION, (img.width, img.height))
            np.testing.assert_array_equal(out.pixels, img.pixels)
            assert len(records) == img.width * img.height

    def test_binary_sampled_mostly_right(self, rng):
        params = EncodingParams.optimal(1)
        img = random_gray(rng, 1)
        out, _ = retrieve_image(encode_image(img, params), params, Sampled(3, shots=50), (img.width, img.height))
        assert np.mean(out.pixels == img.pixels) > 0.95

    def test_default_shape_is_one_row(self):
        params = EncodingParams.optimal(1)
        out, _ = retrieve_image(encode_image(GrayImage(np.array([[1, 0, 1]]), 1), params), params)
        assert out.pixels.shape == (1, 3)

    def test_bad_shape(self):
        with pytest.raises(DomainError):
            retrieve_image(CoherentField([1, 1, 1]), EncodingParams(1.0), shape=(2, 2))

    def test_inconsistent_amplitude(self):
        # field amplitude far above the declared one drives n above 2 a^2
        with pytest.raises(DomainError):
            decode_phases(np.array([5.0]), EncodingParams(1.0))


class TestOptimalAmplitude:
    def test_binary(self):
        assert optimal_amplitude(1) ** 2 == pytest.approx(math.log(10), rel=1e-14)

    def test_two_bit(self):
        assert optimal_amplitude(2) ** 2 == pytest.approx(math.log(10) / (1 - math.cos(math.pi / 6)), rel=1e-14)

    @pytest.mark.parametrize("bits", [1, 2, 3, 5])
    def test_adjacent_overlap_hits_target(self, bits):
        a = optimal_amplitude(bits, 0.05)
        step = math.pi / 2 / (2**bits - 1)
        # difference-port amplitudes of neighbouring labels with theta_r = 0
        d0 = a * (np.exp(1j * step) - 1) / math.sqrt(2)
        d1 = a * (np.exp(2j * step) - 1) / math.sqrt(2)
        assert overlap(d1, d0) == pytest.approx(0.05, rel=1e-9)

    def test_bad_inputs(self):
        for args in [(0, 0.1), (1, 0.0), (1, 1.0)]:
            with pytest.raises(DomainError):
                optimal_amplitude(*args)
        with pytest.raises(DomainError):
            EncodingParams(0.0)
        with pytest.raises(DomainError):
            EncodingParams(1.0, overlap_target=2.0)
