import json

import numpy as np
import pytest

import vict


@pytest.fixture(scope="module")
def checkpoint():
    ckpt, trace = vict.pretrain(steps=3)
    assert len(trace) == 3
    return ckpt


def test_names():
    assert vict.TASKS == ["denoise", "derain", "lowlight", "segmentation", "depth"]
    assert len(vict.CORRUPTIONS) == 15


def test_generate_and_corrupt_are_deterministic():
    x, y = vict.generate("denoise", 7)
    assert x.shape == (3, 32, 32) and x.dtype == np.float32
    a = vict.corrupt(y, "gaussian_noise", 3, seed=1)
    b = vict.corrupt(y, "gaussian_noise", 3, seed=1)
    assert np.array_equal(a, b)
    assert a.min() >= 0.0 and a.max() <= 1.0
    assert not np.array_equal(a, y)


def test_bad_arguments_raise():
    _, y = vict.generate("denoise", 0)
    with pytest.raises(ValueError):
        vict.corrupt(y, "gaussian_noise", 6)
    with pytest.raises(vict.VictError):
        vict.corrupt(np.zeros((3, 8, 4), np.float32), "fog", 1)


def test_zero_steps_matches_frozen(checkpoint):
    x, y = vict.generate("derain", 1)
    x_t, _ = vict.generate("derain", 2)
    frozen = vict.frozen_predict(checkpoint, x, y, x_t)
    tuned, trace = vict.adapt_and_predict(checkpoint, x, y, x_t, steps=0)
    assert trace == []
    assert np.array_equal(frozen, tuned)


def test_adaptation_trace_and_weights_untouched(checkpoint):
    digest = checkpoint.digest
    x, y = vict.generate("denoise", 3)
    x_t, _ = vict.generate("denoise", 4)
    _, trace = vict.adapt_and_predict(checkpoint, x, y, x_t, steps=2, lr=1e-3)
    assert len(trace) == 2
    assert trace[0] == pytest.approx(vict.cycle_loss(checkpoint, x, y, x_t), rel=1e-5)
    assert checkpoint.digest == digest


def test_checkpoint_round_trip(checkpoint, tmp_path):
    path = str(tmp_path / "m.ckpt")
    checkpoint.save(path)
    loaded = vict.load_checkpoint(path)
    assert loaded.digest == checkpoint.digest
    assert loaded.config == checkpoint.config
    assert loaded.num_parameters == checkpoint.num_parameters


def test_bench_report(checkpoint):
    report = json.loads(vict.bench(checkpoint, num_samples=2, steps=1))
    rows = report["rows"]
    assert {r["method"] for r in rows} == {"frozen", "vict"}
    assert all(r["n"] == 2 for r in rows if r["corruption"] != "avg")
    assert any(r["corruption"] == "avg" for r in rows)


def test_gradcheck():
    err, ok = vict.gradcheck()
    assert ok and err < vict.GRADCHECK_TOLERANCE
