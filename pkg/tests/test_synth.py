"""Ground-truth specs and synthetic corpus generation."""

import json

import numpy as np
import pytest

from lanedep import (
    GroundTruthSpec,
    LaneDepError,
    Side,
    default_synth_spec,
    generate_corpus,
    load_synth_spec,
    save_synth_spec,
)
from lanedep.traces import extract_features, feature_matrix


# ---------------------------------------------------------------------------
# spec container and serialization


def test_spec_to_model_carries_parameters(ground_truth):
    model = ground_truth.to_model()
    assert model.side is Side.LEFT
    assert model.K == 3
    assert np.array_equal(model.weights, ground_truth.weights)
    assert np.array_equal(model.means, ground_truth.means)
    assert np.array_equal(model.covariances, ground_truth.covariances)


def test_spec_json_roundtrip(tmp_path, ground_truth):
    path = tmp_path / "spec.json"
    save_synth_spec(ground_truth, path)
    back = load_synth_spec(path)
    assert back.side is ground_truth.side
    assert np.array_equal(back.weights, ground_truth.weights)
    assert np.array_equal(back.means, ground_truth.means)
    assert np.array_equal(back.covariances, ground_truth.covariances)
    assert np.array_equal(back.bounds.lower, ground_truth.bounds.lower)
    assert back.n == ground_truth.n
    assert back.ts == ground_truth.ts
    assert back.noise == ground_truth.noise
    assert back.seed == ground_truth.seed


def test_spec_missing_field(tmp_path, ground_truth):
    path = tmp_path / "spec.json"
    save_synth_spec(ground_truth, path)
    doc = json.loads(path.read_text())
    del doc["means"]
    path.write_text(json.dumps(doc))
    with pytest.raises(LaneDepError):
        load_synth_spec(path)
    with pytest.raises(LaneDepError):
        load_synth_spec(tmp_path / "absent.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{oops")
    with pytest.raises(LaneDepError):
        load_synth_spec(bad)


def test_spec_optional_fields_default(tmp_path, ground_truth):
    path = tmp_path / "spec.json"
    save_synth_spec(ground_truth, path)
    doc = json.loads(path.read_text())
    for key in ("n", "ts", "noise", "seed"):
        del doc[key]
    path.write_text(json.dumps(doc))
    back = load_synth_spec(path)
    assert back.n == 5000
    assert back.ts == 0.1
    assert back.noise is True
    assert back.seed == 0


# ---------------------------------------------------------------------------
# mirroring


def test_mirrored_flips_signed_dimensions(ground_truth):
    m = ground_truth.mirrored()
    assert m.side is Side.RIGHT
    sign = np.ones(8)
    sign[[1, 6, 7]] = -1.0
    np.testing.assert_array_equal(m.means, ground_truth.means * sign)
    np.testing.assert_array_equal(
        m.covariances, ground_truth.covariances * np.outer(sign, sign)
    )
    # bounds on flipped dimensions swap and negate
    np.testing.assert_array_equal(m.bounds.lower[[1, 6, 7]],
                                  -ground_truth.bounds.upper[[1, 6, 7]])
    np.testing.assert_array_equal(m.bounds.upper[[1, 6, 7]],
                                  -ground_truth.bounds.lower[[1, 6, 7]])
    np.testing.assert_array_equal(m.bounds.lower[[0, 2, 3, 4, 5]],
                                  ground_truth.bounds.lower[[0, 2, 3, 4, 5]])


def test_mirroring_is_an_involution(ground_truth):
    twice = ground_truth.mirrored().mirrored()
    assert twice.side is ground_truth.side
    np.testing.assert_array_equal(twice.means, ground_truth.means)
    np.testing.assert_array_equal(twice.covariances, ground_truth.covariances)
    np.testing.assert_array_equal(twice.bounds.lower, ground_truth.bounds.lower)
    np.testing.assert_array_equal(twice.bounds.upper, ground_truth.bounds.upper)


def test_mirrored_density_is_symmetric(ground_truth):
    left = ground_truth.to_model()
    right = ground_truth.mirrored().to_model()
    sign = np.ones(8)
    sign[[1, 6, 7]] = -1.0
    rng = np.random.default_rng(2)
    pts = rng.uniform(ground_truth.bounds.lower, ground_truth.bounds.upper, size=(50, 8))
    np.testing.assert_allclose(right.pdf(pts * sign), left.pdf(pts), rtol=1e-9)


def test_default_spec_loads_and_mirrors():
    left = default_synth_spec(Side.LEFT)
    assert left.side is Side.LEFT
    assert left.means.shape[1] == 8
    assert left.to_model().K == left.weights.size
    right = default_synth_spec(Side.RIGHT)
    assert right.side is Side.RIGHT
    np.testing.assert_array_equal(right.means[:, 0], left.means[:, 0])
    np.testing.assert_array_equal(right.means[:, 1], -left.means[:, 1])


# ---------------------------------------------------------------------------
# corpus generation


def test_generate_corpus_counts_and_sides(ground_truth):
    traces, features = generate_corpus(ground_truth, n=40, seed=3)
    assert len(traces) == len(features) == 40
    for trace, xi in zip(traces, features):
        assert trace.side is Side.LEFT
        assert xi.side is Side.LEFT
        assert ground_truth.bounds.contains(xi.to_array())[0]


def test_generate_corpus_durations_snapped_to_grid(ground_truth):
    traces, features = generate_corpus(ground_truth, n=25, seed=4)
    for trace, xi in zip(traces, features):
        ratio = xi.T / ground_truth.ts
        assert ratio == pytest.approx(round(ratio), abs=1e-9)
        assert trace.duration == pytest.approx(xi.T, abs=1e-9)


def test_generate_corpus_deterministic(ground_truth):
    t1, f1 = generate_corpus(ground_truth, n=10, seed=9)
    t2, f2 = generate_corpus(ground_truth, n=10, seed=9)
    assert np.array_equal(feature_matrix(f1), feature_matrix(f2))
    for a, b in zip(t1, t2):
        assert np.array_equal(a.y, b.y)
        assert np.array_equal(a.v, b.v)
    t3, f3 = generate_corpus(ground_truth, n=10, seed=10)
    assert not np.array_equal(feature_matrix(f1), feature_matrix(f3))


def test_extraction_recovers_noise_free_ground_truth(ground_truth):
    quiet = GroundTruthSpec(
        side=ground_truth.side,
        weights=ground_truth.weights,
        means=ground_truth.means,
        covariances=ground_truth.covariances,
        bounds=ground_truth.bounds,
        noise=False,
    )
    traces, features = generate_corpus(quiet, n=15, seed=6)
    for trace, xi in zip(traces, features):
        got = extract_features(trace)
        assert got.T == pytest.approx(xi.T, abs=1e-9)
        assert got.v_bar == pytest.approx(xi.v_bar, rel=1e-9)
        assert got.d_y == pytest.approx(xi.d_y, rel=1e-6)
        assert got.a_bar == pytest.approx(xi.a_bar, abs=1e-6)
        assert got.rho_0 == pytest.approx(xi.rho_0, rel=1e-6, abs=1e-12)
        assert got.delta_rho == pytest.approx(xi.delta_rho, rel=1e-6, abs=1e-12)


def test_extraction_statistically_recovers_noisy_ground_truth(ground_truth):
    traces, features = generate_corpus(ground_truth, n=60, seed=8)
    got = np.array([extract_features(t).to_array() for t in traces])
    want = feature_matrix(features)
    # exact in duration, unbiased elsewhere
    np.testing.assert_allclose(got[:, 0], want[:, 0], atol=1e-9)
    err_dy = got[:, 1] - want[:, 1]
    assert np.abs(err_dy.mean()) < 0.01
    # per-event noise levels are recovered within the sampling spread
    assert np.corrcoef(got[:, 2], want[:, 2])[0, 1] > 0.5


def test_generate_corpus_rejects_bad_count(ground_truth):
    with pytest.raises(LaneDepError):
        generate_corpus(ground_truth, n=0)
