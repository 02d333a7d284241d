import json
import math

import numpy as np
import pytest

import tubedetr


def test_target_distribution():
    tau = tubedetr.target_distribution(2, 5)
    assert np.allclose(tau, [0.0545, 0.2442, 0.4026, 0.2442, 0.0545], atol=1e-4)
    assert abs(sum(tau) - 1.0) < 1e-12
    with pytest.raises(IndexError):
        tubedetr.target_distribution(5, 5)


def test_decode_span():
    assert tubedetr.decode_span([0.1, 0.6, 0.3], [0.5, 0.2, 0.3]) == (1, 2)
    assert tubedetr.decode_span([0.25] * 4, [0.25] * 4) == (0, 1)


def test_metrics():
    g = (0.5, 0.5, 0.3, 0.2)
    p = (0.6, 0.5, 0.3, 0.2)
    assert tubedetr.viou(4, 7, [p] * 4, 2, 5, [g] * 4) == pytest.approx(1 / 6)
    assert tubedetr.tiou(4, 7, 2, 5) == pytest.approx(1 / 3)
    frames = [(0.1, 0.1, 0.05, 0.05)] * 10
    frames[2:6] = [g] * 4
    assert tubedetr.siou(frames, 2, 5, [g] * 4) == 1.0
    with pytest.raises(tubedetr.ValidationError):
        tubedetr.viou(4, 7, [p] * 3, 2, 5, [g] * 4)


def test_complexity():
    r = tubedetr.complexity(T=200, k=5)
    assert r["encoder_ratio"] == 0.2
    assert tubedetr.complexity(T=7, k=5)["clips"] == 2


def test_model_predict_and_loss():
    video, annotation = tubedetr.generate_sample(0, 0, frames=8, height=16, width=16)
    assert video.shape == (8, 3, 16, 16)
    model = tubedetr.make_model(dim=16, heads=2, ffn_dim=32, encoder_layers=1, decoder_layers=1,
                                frames=8, height=16, width=16, k=2)
    out = model.predict(video, annotation["query"])
    assert 0 <= out["t_s"] < out["t_e"] < 8
    assert len(out["boxes"]) == out["t_e"] - out["t_s"] + 1
    loss = tubedetr.sample_loss(model, video, annotation)
    assert math.isfinite(loss["total"]) and loss["total"] > 0


def test_bad_config():
    with pytest.raises(tubedetr.ConfigError):
        tubedetr.make_model(heads=3)
