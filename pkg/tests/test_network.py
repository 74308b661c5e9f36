import math

import numpy as np
import pytest

from dgas.errors import ConfigurationError, InvalidInputError
from dgas.rnn import (
    ModelConfig,
    ParameterSet,
    Targets,
    check_shapes,
    forward,
    init_parameters,
    joint_loss,
    trace_loss,
    zero_parameters,
)
from dgas.vocab import CharVocabulary, encode_domain

VOCAB = CharVocabulary("abcdefghijk")  # 11 chars + unknown slot = 12


def small_config(**overrides):
    defaults = dict(
        cell_type="gru",
        hidden_size=4,
        heads="both",
        families=("benign", "fam_a", "fam_b"),
        max_sequence_length=16,
    )
    defaults.update(overrides)
    return ModelConfig(**defaults)


def test_zero_parameters_give_chance_outputs():
    config = small_config()
    params = zero_parameters(config, VOCAB.size)
    out = forward(encode_domain("abc", VOCAB, 16), config, params)
    assert out.detect_prob == 0.5
    np.testing.assert_allclose(out.family_probs, np.full(3, 1.0 / 3.0))


def test_bidirectional_feature_is_concatenation():
    config = small_config(bidirectional=True)
    params = init_parameters(config, VOCAB.size, np.random.default_rng(0))
    out = forward(encode_domain("abcab", VOCAB, 16), config, params)
    assert out.trace.feature.shape == (2 * config.hidden_size,)


def test_single_character_hand_computed_probability():
    # K=2, one character, every weight pinned by hand; detection
    # probability must equal the explicitly computed sigmoid value.
    config = small_config(hidden_size=2, heads="detect", families=())
    params = zero_parameters(config, VOCAB.size)
    k = 2
    col = 0  # character "a"
    params["fw.W"][0 * k + 0, col] = 1.0   # update gate, unit 0
    params["fw.W"][2 * k + 0, col] = 0.8   # candidate, unit 0
    params["fw.b"][2 * k + 1] = -0.3       # candidate bias, unit 1
    params["detect.w"][:] = [1.5, -2.0]
    params["detect.b"][0] = 0.25

    z = np.array([1.0 / (1.0 + math.exp(-1.0)), 0.5])
    g = np.array([math.tanh(0.8), math.tanh(-0.3)])
    h = z * g  # h_prev is zero
    logit = 1.5 * h[0] - 2.0 * h[1] + 0.25
    expected = 1.0 / (1.0 + math.exp(-logit))

    out = forward(encode_domain("a", VOCAB, 16), config, params)
    assert out.detect_prob == pytest.approx(expected, rel=1e-12)


def test_empty_sequence_rejected():
    config = small_config()
    params = zero_parameters(config, VOCAB.size)
    with pytest.raises(InvalidInputError):
        forward(np.array([], dtype=np.int64), config, params)


def test_probability_contracts_hold_for_random_models():
    rng = np.random.default_rng(42)
    for i in range(20):
        config = small_config(
            cell_type=rng.choice(["gru", "lstm"]),
            bidirectional=bool(rng.integers(2)),
            dense_size=int(rng.integers(2, 5)) if rng.integers(2) else None,
        )
        params = init_parameters(config, VOCAB.size, rng)
        out = forward(encode_domain("abcjkab", VOCAB, 16), config, params)
        assert 0.0 < out.detect_prob < 1.0
        assert np.all(out.family_probs >= 0.0)
        assert abs(out.family_probs.sum() - 1.0) < 1e-9


def test_forward_is_deterministic():
    config = small_config(cell_type="lstm", bidirectional=True)
    params = init_parameters(config, VOCAB.size, np.random.default_rng(5))
    indices = encode_domain("badcafe", VOCAB, 16)
    first = forward(indices, config, params)
    second = forward(indices, config, params)
    assert first.detect_prob == second.detect_prob
    np.testing.assert_array_equal(first.family_probs, second.family_probs)
    np.testing.assert_array_equal(first.trace.feature, second.trace.feature)


def test_output_depends_only_on_last_max_len_characters():
    config = small_config(max_sequence_length=6)
    params = init_parameters(config, VOCAB.size, np.random.default_rng(9))
    long_name = "abcabcabcfedcba"
    short_name = long_name[-6:]
    p_long = forward(encode_domain(long_name, VOCAB, 6), config, params).detect_prob
    p_short = forward(encode_domain(short_name, VOCAB, 6), config, params).detect_prob
    assert p_long == p_short


def test_palindrome_with_tied_directions_gives_equal_final_states():
    config = small_config(bidirectional=True)
    params = init_parameters(config, VOCAB.size, np.random.default_rng(21))
    for name in ("W", "U", "b"):
        params.tensors[f"bw.{name}"] = params[f"fw.{name}"].copy()
    out = forward(encode_domain("abcba", VOCAB, 16), config, params)
    np.testing.assert_array_equal(
        out.trace.directions["fw"].final_state,
        out.trace.directions["bw"].final_state,
    )


def test_shape_check_rejects_mismatches():
    config = small_config()
    params = zero_parameters(config, VOCAB.size)
    check_shapes(config, params, VOCAB.size)  # passes as built

    broken = params.copy()
    broken.tensors["fw.U"] = np.zeros((3, 3))
    with pytest.raises(ConfigurationError):
        check_shapes(config, broken, VOCAB.size)

    missing = params.copy()
    del missing.tensors["detect.w"]
    with pytest.raises(ConfigurationError):
        check_shapes(config, missing, VOCAB.size)

    extra = params.copy()
    extra.tensors["stray"] = np.zeros(3)
    with pytest.raises(ConfigurationError):
        check_shapes(config, extra, VOCAB.size)


def test_dense_layer_adds_expected_tensors():
    config = small_config(dense_size=5)
    params = zero_parameters(config, VOCAB.size)
    assert params["dense.W"].shape == (5, config.hidden_size)
    assert params["dense.b"].shape == (5,)


class TestLoss:
    def test_perfect_prediction_gives_zero(self):
        probs = np.array([0.0, 1.0, 0.0])
        assert joint_loss(1.0, probs, 1, 1) == 0.0

    def test_even_detection_gives_ln_two(self):
        assert joint_loss(0.5, None, 1, None, weight_detect=1.0) == pytest.approx(
            math.log(2.0), rel=1e-12
        )

    def test_random_instance_matches_independent_formula(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            p = float(rng.uniform(0.01, 0.99))
            q = rng.dirichlet(np.ones(4))
            y = int(rng.integers(2))
            fam = int(rng.integers(4))
            wd, wc = rng.uniform(0.1, 2.0, size=2)
            expected = wd * (-y * math.log(p) - (1 - y) * math.log(1.0 - p))
            expected += wc * -math.log(q[fam])
            got = joint_loss(p, q, y, fam, weight_detect=wd, weight_classify=wc)
            assert got == pytest.approx(expected, rel=1e-12)

    def test_trace_loss_agrees_with_probability_form(self):
        config = small_config()
        params = init_parameters(config, VOCAB.size, np.random.default_rng(77))
        out = forward(encode_domain("fedcba", VOCAB, 16), config, params)
        targets = Targets(label=1, family_index=2)
        direct = joint_loss(out.detect_prob, out.family_probs, 1, 2)
        assert trace_loss(out.trace, targets) == pytest.approx(direct, rel=1e-10)

    def test_loss_nonnegative(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            p = float(rng.uniform(0.001, 0.999))
            q = rng.dirichlet(np.ones(3))
            assert joint_loss(p, q, int(rng.integers(2)), int(rng.integers(3))) >= 0.0
