import math

import numpy as np
import pytest

import posedist


def test_noise_free_calibration_recovers_camera():
    s = posedist.simulate_scene(8, seed=3)
    c = posedist.calibrate(s["ankles"], s["shoulders"], s["image_size"], height_m=s["height_m"])
    assert c.fx == pytest.approx(s["fx"], rel=1e-6)
    assert c.fy == pytest.approx(s["fy"], rel=1e-6)
    assert c.rho == pytest.approx(s["rho"], rel=1e-6)
    assert np.allclose(c.normal, s["normal"], atol=1e-8)
    assert np.allclose(c.ankles, s["ankles_3d"], atol=1e-6)


def test_ground_distances_match_truth():
    s = posedist.simulate_scene(6, seed=4)
    c = posedist.calibrate(s["ankles"], s["shoulders"], s["image_size"], height_m=s["height_m"])
    d = posedist.ground_distances(c, s["ankles"])
    truth = np.linalg.norm(s["ankles_3d"][:, None, :] - s["ankles_3d"][None, :, :], axis=2)
    assert d.shape == (6, 6)
    assert np.allclose(d, truth, rtol=1e-6, atol=1e-8)


def test_methods_agree_without_noise():
    s = posedist.simulate_scene(12, seed=5)
    args = (s["ankles"], s["shoulders"], s["image_size"])
    for method in ("batch", "ransac", "baseline", "distortion"):
        c = posedist.calibrate(*args, height_m=s["height_m"], method=method)
        assert c.fx == pytest.approx(s["fx"], rel=1e-5), method
    r = posedist.calibrate(*args, height_m=s["height_m"], method="ransac")
    assert all(r.inliers)


def test_errors_and_helpers():
    s = posedist.simulate_scene(2, seed=1)
    with pytest.raises(posedist.EstimationFailure):
        posedist.calibrate(s["ankles"], s["shoulders"], s["image_size"])
    with pytest.raises(ValueError):
        posedist.calibrate(s["ankles"], s["shoulders"], s["image_size"], method="nope")
    assert posedist.ransac_iterations(0.99, 0.1, 3) == 4603
    assert posedist.ransac_iterations(0.99, 0.5, 2) == math.ceil(math.log(0.01) / math.log(0.75))
    assert posedist.classify_distance(2.0) == "B2_4"


def test_run_study_csv():
    text = posedist.run_study("noise", 2, seed=1)
    lines = text.strip().splitlines()
    assert lines[0].startswith("study,")
    assert len(lines) == 1 + 12
