import numpy as np
import pytest

import tfr


def naive_dft2(f):
    n = f.shape[0]
    k = np.arange(n)
    w = np.exp(-2j * np.pi * np.outer(k, k) / n)
    return w @ f @ w


def test_dft_matches_naive():
    rng = np.random.default_rng(0)
    f = rng.random((8, 8))
    assert np.max(np.abs(tfr.dft2(f) - naive_dft2(f))) < 1e-9


def test_mask_and_filter():
    m = tfr.make_mask(8, 2)
    assert m.sum() == 60
    assert (m[3:5, 3:5] == 0).all()
    f = np.random.default_rng(1).random((16, 16))
    assert np.allclose(tfr.highpass_filter(f, 0), f, atol=1e-9)
    assert np.all(tfr.highpass_filter(f, 16) == 0)


def test_auc_and_loss():
    assert tfr.auc([0, 0, 1, 1], [0.3, 0.7, 0.5, 0.9]) == 0.75
    x = np.ones((2, 2))
    assert tfr.recon_loss(x, np.zeros((2, 2))) == pytest.approx(101.0)
    with pytest.raises(tfr.TfrError):
        tfr.auc([1, 1], [0.1, 0.2])


def test_model_pipeline(tmp_path):
    textures = [tfr.gen_texture(size=32, seed=s) for s in range(3)]
    model = tfr.Model.initialize(32, 32, 1, [8, 16], seed=1)
    assert model.parameter_count == 3057
    losses = model.fit(textures, epochs=5, learning_rate=3e-3, batch_size=3)
    assert len(losses) == 5 and losses[-1] < losses[0]
    out = model.forward(textures[0])
    assert out.shape == (32, 32, 1)
    assert ((out > 0) & (out < 1)).all()

    path = tmp_path / "m.tfr"
    model.save(path)
    assert np.array_equal(tfr.Model.load(path).forward(textures[0]), out)

    defect, mask = tfr.inject_defect(textures[1], contrast=0.8, margin=6, seed=2)
    assert mask.sum() > 0
    counts = tfr.detect_counts(model, textures[0], [textures[0], defect], tau=2, th=4, border=4)
    assert counts[0] == 0


def test_image_io(tmp_path):
    img = np.linspace(0, 1, 256).reshape(16, 16)
    tfr.save_image(img, tmp_path / "a.png")
    back = tfr.load_image(tmp_path / "a.png")
    assert back.shape == (16, 16, 1)
    assert np.max(np.abs(back[..., 0] - img)) <= 1 / 255
