"""Compressor family: exact examples, certification, bit accounting."""

import numpy as np
import pytest

from fpnet.compression import (bit_cost, c1_inf_quantizer, c2_uniform,
                               c3_sparsify_quantize, certify_compressor, compress,
                               decode, gaussian_sampler, identity_compressor,
                               scaled_compress, sparse_sampler, uniform_box_sampler)
from fpnet.errors import InvalidParameterError


def test_c2_direct_formula_example():
    # Delta=1, x=[0.2, 0.6] -> floor([0.7, 1.1]) = [0, 1]
    spec = c2_uniform(2, delta_step=1.0)
    out = decode(compress(spec, np.array([0.2, 0.6]), np.random.default_rng(0)))
    assert np.array_equal(out, np.array([0.0, 1.0]))


def test_c2_integer_lattice_points_are_fixed():
    spec = c2_uniform(5, delta_step=1.0)
    rng = np.random.default_rng(1)
    x = np.array([-3.0, 0.0, 2.0, 7.0, -1.0])
    assert np.array_equal(decode(compress(spec, x, rng)), x)


class _ZeroDitherRng:
    def uniform(self, lo, hi, size=None):
        return np.zeros(size)


def test_c1_zero_dither_recovers_lattice_point():
    # l=2, x=[1,-1], dither=0: (1/2) sign(x) * floor(2|x|) = [1,-1]
    spec = c1_inf_quantizer(2, l_bits=2)
    msg = compress(spec, np.array([1.0, -1.0]), _ZeroDitherRng())
    assert np.array_equal(decode(msg), np.array([1.0, -1.0]))


def test_c1_zero_vector_special_case():
    spec = c1_inf_quantizer(4, l_bits=2)
    msg = compress(spec, np.zeros(4), np.random.default_rng(2))
    assert np.array_equal(decode(msg), np.zeros(4))
    assert msg.bits == bit_cost(spec)


def test_c1_is_unbiased():
    spec = c1_inf_quantizer(6, l_bits=2)
    rng = np.random.default_rng(3)
    x = rng.standard_normal(6)
    acc = np.zeros(6)
    n = 40_000
    for _ in range(n):
        acc += decode(compress(spec, x, rng))
    assert np.max(np.abs(acc / n - x)) <= 0.02


def test_c3_with_full_keep_equals_dithered_uniform():
    # p -> 1 limit: same dithered rounding as a direct implementation
    x_rng = np.random.default_rng(100)
    rng_a = np.random.default_rng(4)
    rng_b = np.random.default_rng(4)
    spec = c3_sparsify_quantize(8, p_keep=1.0 - 1e-12, delta_step=1.0)
    for _ in range(100):
        x = x_rng.standard_normal(8)
        out = decode(compress(spec, x, rng_b))
        keep = rng_a.uniform(0.0, 1.0, size=8) < spec.p_keep
        dither = rng_a.uniform(-0.5, 0.5, size=int(keep.sum()))
        direct = np.zeros(8)
        direct[keep] = np.rint(x[keep] / spec.p_keep + dither)
        assert np.allclose(out, direct, atol=1e-9)


def test_identity_roundtrip_exact():
    spec = identity_compressor(7)
    rng = np.random.default_rng(5)
    x = rng.standard_normal(7)
    assert np.array_equal(decode(compress(spec, x, rng)), x)


def test_decode_is_deterministic_replay():
    spec = c3_sparsify_quantize(30)
    rng = np.random.default_rng(6)
    x = rng.standard_normal(30)
    msg = compress(spec, x, np.random.default_rng(42))
    again = compress(spec, x, np.random.default_rng(42))
    assert np.array_equal(decode(msg), decode(again))
    assert msg.bits == again.bits


# -- declared constants ------------------------------------------------------

def test_declared_constants_match_kind_formulas():
    c1 = c1_inf_quantizer(30, l_bits=2)
    assert c1.r == pytest.approx(1.0 + 30.0 / 16.0)
    assert c1.phi == pytest.approx(1.0 / c1.r)
    assert c1.delta_sq == 0.0
    c2 = c2_uniform(30, delta_step=1.0)
    assert (c2.r, c2.phi) == (1.0, 1.0)
    assert c2.delta_sq == pytest.approx(30.0 / 4.0)
    c3 = c3_sparsify_quantize(30, p_keep=0.75, delta_step=1.0)
    assert c3.r == pytest.approx(1.0 / 0.75)
    assert c3.phi == pytest.approx(0.75)
    assert c3.delta_sq == pytest.approx(30.0 * 0.75**3 / 4.0)


def test_c1_raw_error_factor_is_not_contractive():
    # r_bar = 2 r^2 (1 - phi) + 2 (1 - r)^2 exceeds 1 for the default l=2,
    # n=30 quantizer: convergence must not rely on compressor contractivity
    # (the engine-level acceptance runs use exactly this kind)
    spec = c1_inf_quantizer(30, l_bits=2)
    r_bar = 2 * spec.r**2 * (1 - spec.phi) + 2 * (1 - spec.r) ** 2
    assert r_bar > 1.0


def test_c2_worst_case_error_bound_deterministic():
    # per-coordinate dithered-floor error <= 1/2 so LHS <= n/4 always
    spec = c2_uniform(30, delta_step=1.0)
    rng = np.random.default_rng(7)
    for _ in range(200):
        x = 5.0 * rng.standard_normal(30)
        err = np.sum((decode(compress(spec, x, rng)) - x) ** 2)
        assert err <= 30.0 / 4.0 + 1e-12


@pytest.mark.parametrize("make_spec", [
    lambda: c1_inf_quantizer(30, l_bits=2),
    lambda: c2_uniform(30, delta_step=1.0),
    lambda: c3_sparsify_quantize(30, p_keep=0.75, delta_step=1.0),
    lambda: identity_compressor(30),
])
@pytest.mark.parametrize("sampler", [
    gaussian_sampler(30, 2.0), uniform_box_sampler(30, 3.0), sparse_sampler(30, 0.2, 2.0)
])
def test_unified_contract_over_samplers(make_spec, sampler):
    report = certify_compressor(make_spec(), n_trials=10_000, vector_sampler=sampler,
                                seed=8, n_points=3)
    assert report.passed, str(report)


def test_certification_rejects_too_few_trials():
    with pytest.raises(InvalidParameterError):
        certify_compressor(c2_uniform(4), n_trials=100)


# -- dynamic scaling ---------------------------------------------------------

def test_scaled_compress_unit_scale_equals_compress():
    spec = c2_uniform(6)
    x = np.array([0.2, 1.4, -0.7, 3.3, 0.0, -2.2])
    a = decode(scaled_compress(spec, x, 1.0, np.random.default_rng(9)))
    b = decode(compress(spec, x, np.random.default_rng(9)))
    assert np.array_equal(a, b)


def test_scaled_identity_is_exact_for_any_scale():
    spec = identity_compressor(4)
    y = np.array([0.3, -1.2, 8.0, 0.01])
    for s in (0.01, 1.0, 37.5):
        assert np.allclose(s * decode(scaled_compress(spec, y, s, np.random.default_rng(0))),
                           y, atol=1e-12)


def test_scaled_compress_rejects_bad_scale():
    with pytest.raises(InvalidParameterError):
        scaled_compress(c2_uniform(3), np.zeros(3), 0.0, np.random.default_rng(0))


def test_dynamic_scaling_shrinks_absolute_error():
    # E|| s C(y/s)/r - y ||^2 <= (1-phi)||y||^2 + s^2 delta^2: the absolute
    # term shrinks by s^2, i.e. 10^4x between s = 1 and s = 0.01
    spec = c2_uniform(30, delta_step=1.0)
    rng = np.random.default_rng(10)
    y = rng.standard_normal(30)
    err = {}
    for s in (1.0, 0.01):
        sq = [np.sum((s * decode(scaled_compress(spec, y, s, rng)) - y) ** 2)
              for _ in range(2000)]
        err[s] = np.mean(sq)
        assert err[s] <= s**2 * spec.delta_sq + 1e-12  # phi = 1: no relative term
    assert err[0.01] <= 2e-4 * err[1.0]  # realized errors track the s^2 law


# -- bit accounting ----------------------------------------------------------

def test_bit_costs_for_reference_settings():
    assert bit_cost(c1_inf_quantizer(30, l_bits=2, float_bits=64)) == 154
    assert bit_cost(c2_uniform(30, int_bits=8)) == 240
    assert bit_cost(c3_sparsify_quantize(30, p_keep=0.75, int_bits=8)) == pytest.approx(180)


def test_c1_c2_message_bits_are_exact():
    rng = np.random.default_rng(11)
    x = rng.standard_normal(30)
    assert compress(c1_inf_quantizer(30, l_bits=2), x, rng).bits == 154
    assert compress(c2_uniform(30), x, rng).bits == 240


def test_c3_realized_bits_average_to_expected_cost():
    spec = c3_sparsify_quantize(30, p_keep=0.75, int_bits=8)
    rng = np.random.default_rng(12)
    x = rng.standard_normal(30)
    costs = [compress(spec, x, rng).bits for _ in range(1000)]
    assert np.mean(costs) == pytest.approx(180.0, rel=0.02)


def test_c3_reports_index_overhead_separately():
    spec = c3_sparsify_quantize(30, p_keep=0.75, int_bits=8)
    msg = compress(spec, np.random.default_rng(13).standard_normal(30),
                   np.random.default_rng(14))
    kept = len(msg.payload["idx"])
    assert msg.bits == kept * 8
    assert msg.bits_with_index == kept * (8 + 5)  # ceil(log2 30) = 5 index bits
