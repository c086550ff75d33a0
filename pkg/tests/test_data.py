import gzip
import struct

import numpy as np
import pytest

from conftest import DATA
from wpbayes.data import (Dataset, load_csv, load_dataset, load_idx, normalize_unit_ball,
                          read_idx, read_schema, save_dataset, split_halves, write_idx)


def _write(path, text):
    path.write_text(text)
    return path


def test_idx_round_trip_bytes(tmp_path, rng):
    a = rng.integers(0, 256, size=(3, 4, 5)).astype(np.uint8)
    p = tmp_path / "a.idx"
    write_idx(p, a)
    blob = p.read_bytes()
    assert blob[:4] == b"\x00\x00\x08\x03"
    assert struct.unpack(">3I", blob[4:16]) == (3, 4, 5)
    assert blob[16:] == a.tobytes()
    assert np.array_equal(read_idx(p), a)
    gz = tmp_path / "a.idx.gz"
    write_idx(gz, a)
    assert gzip.decompress(gz.read_bytes()) == blob
    assert np.array_equal(read_idx(gz), a)


def test_idx_errors_name_offset(tmp_path):
    p = tmp_path / "x.idx"
    p.write_bytes(b"\x00\x00")
    with pytest.raises(ValueError, match="offset 0"):
        read_idx(p)
    p.write_bytes(struct.pack(">I", 0x0801) + b"\x00\x00")
    with pytest.raises(ValueError, match="offset 4"):
        read_idx(p)
    p.write_bytes(struct.pack(">II", 0x0801, 10) + b"\x01\x02")
    with pytest.raises(ValueError, match="offset 10"):
        read_idx(p)
    p.write_bytes(struct.pack(">II", 0x0801, 1) + b"\x01")
    with pytest.raises(ValueError, match="bad magic"):
        read_idx(p, expected_magic=0x0803)


def test_load_idx_scaling(tmp_path):
    img = np.zeros((3, 2, 2), dtype=np.uint8)
    img[0, 0, 0] = 255
    img[1] = 255
    write_idx(tmp_path / "i", img)
    write_idx(tmp_path / "l", np.array([0, 3, 1], dtype=np.uint8))
    d = load_idx(tmp_path / "i", tmp_path / "l", num_classes=10)
    assert d.features.shape == (3, 4) and d.num_classes == 10
    # the all-255 image has norm 2 and fixes the scale
    np.testing.assert_allclose(d.features[1], 0.5)
    assert d.features[0, 0] == 0.5
    assert np.all(d.features[2] == 0)


def test_csv_encoding_order(tmp_path):
    csv_path = _write(tmp_path / "t.csv", "b,1.0,x\na,3.0,y\nb,2.0,x\nc,?,x\n")
    schema = {0: "categorical", 1: "numeric", 2: "label"}
    d = load_csv(csv_path, schema)
    assert len(d) == 3 and d.provenance["rows_dropped"] == 1
    assert d.provenance["label_order"] == ["x", "y"]
    assert d.labels.tolist() == [0, 1, 0]
    # columns: one-hot (b, a) then min-max numeric; row norms reach sqrt(2)
    raw = np.array([[1, 0, 0.0], [0, 1, 1.0], [1, 0, 0.5]])
    np.testing.assert_allclose(d.features, raw / np.sqrt(2), rtol=1e-15)


def test_csv_all_zero_rows(tmp_path):
    csv_path = _write(tmp_path / "z.csv", "0,0,a\n0,0,b\n0,0,a\n")
    d = load_csv(csv_path, {0: "numeric", 1: "numeric", 2: "label"})
    assert np.all(d.features == 0)
    assert d.max_norm == 0.0


def test_schema_file(tmp_path):
    p = _write(tmp_path / "s", "# comment\n0:label\n\n2:numeric  # trailing\n")
    assert read_schema(p) == {0: "label", 2: "numeric"}
    _write(p, "0:weird\n")
    with pytest.raises(ValueError, match=":1:"):
        read_schema(p)


def test_csv_validation(tmp_path):
    p = _write(tmp_path / "c.csv", "1,a\n")
    with pytest.raises(ValueError):
        load_csv(p, {0: "numeric", 1: "label"})
    with pytest.raises(ValueError):
        load_csv(p, {0: "numeric"})


def test_unit_ball(rng):
    X = rng.normal(size=(50, 4)) * 3
    Z = normalize_unit_ball(X)
    assert np.linalg.norm(Z, axis=1).max() == pytest.approx(1.0, abs=1e-15)
    small = rng.random((5, 2)) * 0.1
    assert np.array_equal(normalize_unit_ball(small), small)


def test_split_halves_sizes_and_determinism(rng):
    d = Dataset(rng.random((5, 2)), np.array([0, 1, 0, 1, 0]), 2)
    a, b = split_halves(d, 3)
    assert (len(a), len(b)) == (2, 3)
    a2, b2 = split_halves(d, 3)
    assert np.array_equal(a.features, a2.features) and np.array_equal(b.labels, b2.labels)
    assert np.linalg.norm(a.features, axis=1).max() <= 1.0


def test_subset_accepts_empty_and_mask(rng):
    d = Dataset(rng.random((4, 2)), np.array([0, 1, 0, 1]), 2)
    assert len(d.subset([])) == 0
    assert len(d.subset(np.array([True, False, True, False]))) == 2


def test_dataset_validation():
    with pytest.raises(ValueError):
        Dataset(np.zeros((2, 2)), np.array([0, 2]), 2)
    with pytest.raises(ValueError):
        Dataset(np.array([[np.nan, 0.0]]), np.array([0]), 2)


def test_npz_round_trip(tmp_path, rng):
    d = Dataset(rng.random((6, 3)), rng.integers(0, 3, 6), 3, "toy")
    save_dataset(tmp_path / "d.npz", d)
    e = load_dataset(tmp_path / "d.npz")
    assert np.array_equal(e.features, d.features) and e.name == "toy"
    assert e.digest() == d.digest()


@pytest.mark.parametrize("name,m,d,k", [("tictactoe", 958, 27, 2), ("mushrooms", 5644, 98, 2),
                                        ("yeast", 1484, 8, 10), ("pendigits", 10992, 16, 10)])
def test_bundled_csv_shapes(name, m, d, k):
    if not (DATA / f"{name}.csv").exists():
        pytest.skip(f"{name} not fetched")
    ds = load_csv(DATA / f"{name}.csv", DATA / f"{name}.schema", name)
    assert (len(ds), ds.dim, ds.num_classes) == (m, d, k)
    assert ds.max_norm <= 1.0 + 1e-12
