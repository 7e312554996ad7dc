import numpy as np
import pytest

import scene_annotate as sa

RECIPE = {
    "width": 64,
    "height": 64,
    "seed": 3,
    "categories": [
        {"name": "ground", "fill": {"kind": "solid", "primary": [30, 60, 200]}},
        {"name": "sun", "fill": {"kind": "solid", "primary": [230, 210, 40]}},
    ],
    "scenes": [
        {
            "name": "sky",
            "background": 0,
            "objects": [{"category": 1, "min_size": 0.35, "max_size": 0.55}],
            "train": 6,
            "pretest": 3,
            "test": 3,
        }
    ],
}


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("data")
    assert sa.synthesize(root, RECIPE) == 12
    return root


@pytest.fixture(scope="module")
def model(dataset):
    return sa.train(dataset / "manifest.jsonl", {"seed": 7})


def two_tone():
    image = np.zeros((48, 48, 3), dtype=np.uint8)
    image[:, :24] = (200, 30, 30)
    image[:, 24:] = (30, 30, 200)
    return image


def test_segment_two_halves():
    labels = sa.segment(two_tone())
    assert labels.shape == (48, 48)
    assert set(np.unique(labels)) == {0, 1}
    assert labels[0, 0] != labels[0, 47]


def test_descriptor_is_normalized():
    features = sa.describe(two_tone())
    assert features.shape == (144,)
    assert features.sum() == pytest.approx(1.0)


def test_png_round_trip(tmp_path):
    sa.write_png(tmp_path / "x.png", two_tone())
    assert np.array_equal(sa.read_png(tmp_path / "x.png"), two_tone())


def test_errors_map_to_python():
    with pytest.raises(sa.ContractError):
        sa.segment(np.zeros((4, 4), dtype=np.uint8))
    with pytest.raises(sa.DataError):
        sa.read_png("/nonexistent.png")
    with pytest.raises(sa.DataError):
        sa.segment(two_tone(), {"no_such_key": 1})
    assert issubclass(sa.DataError, ValueError)


def test_train_annotate_evaluate(model, dataset, tmp_path):
    assert model.categories == ["ground", "sun"]
    assert model.topics == 2
    model.save(tmp_path / "m.bundle")
    reloaded = sa.Model.load(tmp_path / "m.bundle")
    image = sa.read_png(next((dataset / "images").glob("*test*.png")))
    annotation, overlay, labels = reloaded.annotate(image)
    assert overlay.shape == image.shape
    assert labels.shape == image.shape[:2]
    assert {r["tag"]["name"] for r in annotation["regions"] if r["tag"]} == {"ground", "sun"}
    report = sa.evaluate(model, dataset / "manifest.jsonl")
    assert report["images"] == 3
    assert report["prf"]["mean_f"] == pytest.approx(1.0)


def test_training_is_deterministic(model, dataset, tmp_path):
    again = sa.train(dataset / "manifest.jsonl", {"seed": 7, "jobs": 3})
    model.save(tmp_path / "a.bundle")
    again.save(tmp_path / "b.bundle")
    assert (tmp_path / "a.bundle").read_bytes() == (tmp_path / "b.bundle").read_bytes()
