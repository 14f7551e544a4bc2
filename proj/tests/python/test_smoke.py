import numpy as np
import pytest

import auxfm

SMALL = """
train.mode = conditional_two_stage
train.steps = 40
train.batch = 32
train.prototype_steps = 40
train.hidden = 16
dataset.kind = ring
dataset.K = 4
dataset.n_per_mode = 10
"""


@pytest.fixture(scope="module")
def trained():
    return auxfm.train(SMALL, seed=1)


def test_datasets():
    ds = auxfm.make_ring(8, 5, 0.0, seed=2)
    assert len(ds) == 40
    assert ds.points.shape == (40, 2)
    np.testing.assert_allclose(np.linalg.norm(ds.mode_centers, axis=1), 1.0)
    bi = auxfm.make_bimodal_ring(2.0, 0.1, 10)
    assert bi.labels[:4] == [0, 1, 0, 1]


def test_train_outputs(trained):
    assert len(trained["loss"]) == 40
    assert len(trained["prototype_loss"]) == 40
    assert trained["prototype"].num_classes == 4
    v = trained["velocity"]
    out = v(np.zeros((3, 2)), 0.5)
    assert out.shape == (3, 2)


def test_guidance_one_matches_conditional(trained):
    v, p = trained["velocity"], trained["prototype"]
    labels = [0, 1, 2, 3] * 5
    a = auxfm.conditional_sample(v, p, labels, steps=12, seed=3)
    before = v.forward_calls
    b = auxfm.cfg_sample(v, p, labels, 1.0, steps=12, seed=3)
    assert np.array_equal(a["samples"], b["samples"])
    assert b["velocity_evaluations"] == 12
    assert v.forward_calls - before == 12


def test_trajectory_and_metrics(trained):
    ds = trained["dataset"]
    r = auxfm.euler_sample(trained["velocity"], steps=3, batch=7, trajectory=True)
    assert r["times"] == [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]
    assert len(r["states"]) == 4
    centers = ds.mode_centers
    assert auxfm.mode_accuracy(centers, [0, 1, 2, 3], centers) == 1.0
    assert auxfm.distance_error(centers, centers) == 0.0
    assert auxfm.energy_distance(centers, centers) == pytest.approx(0.0, abs=1e-12)


def test_checkpoint_roundtrip(trained, tmp_path):
    path = tmp_path / "v.ckpt"
    auxfm.save_velocity(trained["velocity"], path)
    back = auxfm.load_velocity(path)
    x = np.random.default_rng(0).normal(size=(5, 2))
    assert np.array_equal(back(x, 0.3), trained["velocity"](x, 0.3))


def test_errors():
    with pytest.raises(ValueError):
        auxfm.train("train.stpes = 3")
    with pytest.raises(ValueError):
        auxfm.mode_accuracy(np.zeros((2, 2)), [0], np.zeros((1, 2)))
    with pytest.raises(OSError):
        auxfm.load_velocity("/nonexistent/v.ckpt")


def test_oracle_negative_control_rejected():
    r = auxfm.continuity_check(0.5, particles=2000, steps=100, permutations=100, adot_scale=2.0)
    assert not r["passed"]
    assert r["discrepancy"] > r["threshold"]
