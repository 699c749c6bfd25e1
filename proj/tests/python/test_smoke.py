import numpy as np
import pytest

import signstitch as ss


def toy_dictionary(count=4, frames=30, seed=0):
    rng = np.random.default_rng(seed)
    t = np.arange(frames)[:, None] / ss.DEFAULT_FPS
    entries = {}
    for i in range(count):
        posture = rng.uniform(-0.5, 0.5, ss.ANGLES)
        entries[f"SIGN{i}"] = posture + 0.2 * np.sin(2 * np.pi * 0.8 * t + rng.uniform(0, 6, ss.ANGLES))
    return ss.Dictionary(entries)


def test_reference_skeleton_shape():
    skel = ss.Skeleton.reference()
    assert skel.keypoint_count == 61
    assert skel.angle_count == 104
    assert ss.forward_kinematics(np.zeros(104)).shape == (61, 3)
    np.testing.assert_allclose(ss.forward_kinematics(np.zeros(104)), skel.rest_pose())


def test_forward_kinematics_keeps_bone_lengths():
    skel = ss.Skeleton.reference()
    angles = np.random.default_rng(1).uniform(-np.pi, np.pi, (20, 104))
    poses = ss.forward_kinematics(angles)
    assert poses.shape == (20, 61, 3)
    parents = np.array(skel.parents)
    child = np.flatnonzero(parents >= 0)
    lengths = np.linalg.norm(poses[:, child] - poses[:, parents[child]], axis=2)
    np.testing.assert_allclose(lengths, np.broadcast_to(np.array(skel.bone_lengths)[child], lengths.shape), rtol=1e-9)


def test_stitch_layout_and_determinism():
    d = toy_dictionary()
    a = ss.stitch(["SIGN2", "SIGN0", "SIGN3"], d)
    b = ss.stitch(["SIGN2", "SIGN0", "SIGN3"], d)
    assert np.array_equal(a["poses"], b["poses"])
    assert a["poses"].shape[1:] == (61, 3)
    assert len(a["gloss_spans"]) == 3 and len(a["transition_spans"]) == 2
    total = 3 * 30 + sum(t["frames"] for t in a["transitions"])
    assert a["poses"].shape[0] == total
    assert a["gloss_spans"][-1][1] == total


def test_unfiltered_transitions_respect_bound():
    r = ss.stitch(["SIGN0", "SIGN1"], toy_dictionary(), filtered=False)
    start, end = r["transition_spans"][0]
    steps = np.linalg.norm(np.diff(r["poses"][start - 1 : end + 1], axis=0), axis=2).mean(axis=1)
    assert np.all(steps <= r["transitions"][0]["velocity_bound"] * (1 + 1e-9))


def test_unknown_gloss_and_fallback():
    d = toy_dictionary()
    with pytest.raises(ss.UnresolvableGlossError):
        ss.stitch(["SIGN0", "MOND"], d)
    emb = ss.Embeddings(2)
    emb.add("SIGN0", np.array([1.0, 0.0]))
    emb.add("SIGN1", np.array([0.0, 1.0]))
    emb.add("MOND", np.array([0.2, 1.0]))
    assert ss.resolve(d, "MOND", emb)[0] == "SIGN1"
    assert ss.stitch(["SIGN0", "MOND"], d, embeddings=emb)["resolved_glosses"] == ["SIGN0", "SIGN1"]


def test_filter_keeps_constants_and_rejects_bad_cutoff():
    x = np.full((50, 2, 3), 1.5)
    np.testing.assert_allclose(ss.butterworth_lowpass(x), x, atol=1e-9)
    with pytest.raises(ss.ConfigurationError):
        ss.butterworth_lowpass(x, cutoff_hz=12.5, fps=25.0)


def test_augmentation_helpers():
    g = ["A", "B", "C", "D", "E"]
    assert ss.permute_glosses(g, 0, 3) == g
    assert sorted(ss.permute_glosses(g, 5, 3)) == g
    poses = np.random.default_rng(2).normal(size=(40, 61, 3))
    assert ss.scale_speed(poses, 1.5).shape[0] == 60
    assert ss.resample(poses, 40).tolist() == poses.tolist()


def test_scores():
    r = ss.score(["a b c", "the cat"], ["a b c", "the cat"])
    assert r["bleu_1"] == pytest.approx(100.0)
    assert r["rouge_l"] == pytest.approx(1.0)
    assert ss.score(["a b c"], ["a b d"])["bleu_2"] == pytest.approx(57.735, abs=1e-3)
    with pytest.raises(ss.InvalidInputError):
        ss.score(["a"], [])


def test_sspk_and_dictionary_round_trip(tmp_path):
    poses = ss.stitch(["SIGN1", "SIGN3"], toy_dictionary())["poses"].astype(np.float32).astype(np.float64)
    path = str(tmp_path / "x.sspk")
    ss.write_sspk(poses, 25.0, path)
    back, fps = ss.read_pose_file(path)
    assert fps == 25.0
    assert np.array_equal(back, poses)
    (tmp_path / "bad.sspk").write_bytes(b"XXXX" + open(path, "rb").read()[4:])
    with pytest.raises(ss.FormatError):
        ss.read_pose_file(str(tmp_path / "bad.sspk"))

    d = toy_dictionary()
    d.save(str(tmp_path / "d.json"))
    again = ss.Dictionary.load(str(tmp_path / "d.json"))
    assert again.glosses == d.glosses
    np.testing.assert_array_equal(again.angles("SIGN2"), d.angles("SIGN2"))


def test_normalize_pose_puts_neck_at_origin():
    poses = ss.forward_kinematics(np.random.default_rng(3).uniform(-0.5, 0.5, (5, 104))) + 3.0
    out = ss.normalize_pose(poses)
    neck = ss.Skeleton.reference().names.index("neck")
    np.testing.assert_allclose(out[:, neck], 0.0, atol=1e-12)
