import json

import numpy as np
import pytest

from datamoll.errors import DataError
from datamoll.mol1 import MAGIC, Mol1Dataset, load_mol1, manifest_path, save_mol1
from datamoll.tensors import ChannelStats


def make_dataset(rng, n=6, h=4, w=5, c=2, classes=3):
    return Mol1Dataset(
        images=rng.standard_normal((n, h, w, c)),
        labels=rng.integers(0, classes, n),
        num_classes=classes,
        stats=ChannelStats(mean=rng.standard_normal(c), std=rng.uniform(0.5, 2.0, c)),
        provenance="test",
    )


class TestRoundtrip:
    def test_save_load_identity(self, tmp_path):
        rng = np.random.default_rng(0)
        ds = make_dataset(rng)
        path = tmp_path / "data.mol1"
        save_mol1(ds, path)
        back = load_mol1(path)
        assert back.images.shape == ds.images.shape
        assert np.array_equal(back.images, ds.images.astype(np.float32).astype(np.float64))
        assert np.array_equal(back.labels, ds.labels)
        assert back.num_classes == ds.num_classes
        assert back.provenance == "test"
        assert back.stats.mean == pytest.approx(ds.stats.mean)

    def test_save_is_deterministic(self, tmp_path):
        rng = np.random.default_rng(1)
        ds = make_dataset(rng)
        save_mol1(ds, tmp_path / "a.mol1")
        save_mol1(ds, tmp_path / "b.mol1")
        assert (tmp_path / "a.mol1").read_bytes() == (tmp_path / "b.mol1").read_bytes()

    def test_layout(self, tmp_path):
        ds = Mol1Dataset(
            images=np.zeros((2, 1, 1, 1)),
            labels=np.array([0, 1]),
            num_classes=2,
            stats=ChannelStats(mean=np.zeros(1), std=np.ones(1)),
        )
        path = tmp_path / "tiny.mol1"
        save_mol1(ds, path)
        raw = path.read_bytes()
        assert raw[:4] == MAGIC
        assert len(raw) == 4 + 20 + 2 * 4 + 2 * 4  # magic, header, pixels, labels


class TestValidation:
    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.mol1"
        path.write_bytes(b"NOPE" + b"\x00" * 40)
        with pytest.raises(DataError):
            load_mol1(path)

    def test_truncated_file(self, tmp_path):
        rng = np.random.default_rng(2)
        path = tmp_path / "t.mol1"
        save_mol1(make_dataset(rng), path)
        path.write_bytes(path.read_bytes()[:-5])
        with pytest.raises(DataError):
            load_mol1(path)

    def test_missing_manifest(self, tmp_path):
        rng = np.random.default_rng(3)
        path = tmp_path / "m.mol1"
        save_mol1(make_dataset(rng), path)
        manifest_path(path).unlink()
        with pytest.raises(DataError):
            load_mol1(path)

    def test_label_out_of_range(self):
        with pytest.raises(DataError):
            Mol1Dataset(
                images=np.zeros((1, 2, 2, 1)),
                labels=np.array([5]),
                num_classes=2,
                stats=ChannelStats(mean=np.zeros(1), std=np.ones(1)),
            )

    def test_empty_dataset(self):
        with pytest.raises(DataError):
            Mol1Dataset(
                images=np.zeros((0, 2, 2, 1)),
                labels=np.zeros(0, dtype=int),
                num_classes=2,
                stats=ChannelStats(mean=np.zeros(1), std=np.ones(1)),
            )

    def test_manifest_contents(self, tmp_path):
        rng = np.random.default_rng(4)
        ds = make_dataset(rng)
        path = tmp_path / "d.mol1"
        save_mol1(ds, path)
        manifest = json.loads(manifest_path(path).read_text())
        assert set(manifest) == {"mean", "std", "provenance"}
        assert len(manifest["mean"]) == ds.channels
