import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from irp.anchors import ParallelAnchors
from irp.errors import FileFormatError
from irp.fileio import (
    HEADER,
    default_manifest_path,
    file_digest,
    read_csv,
    read_embeddings,
    read_header,
    read_ints,
    read_manifest,
    write_csv,
    write_embeddings,
    write_ints,
    write_manifest,
)
from irp.translator import TranslationConfig, translate


class TestBinary:
    def test_header_fields(self, tmp_path, rng):
        path = tmp_path / "x.irp"
        write_embeddings(path, rng.standard_normal((7, 3)), flags=1)
        raw = path.read_bytes()
        assert raw[:4] == b"IRP1"
        assert struct.unpack("<HIIH", raw[4:16]) == (1, 7, 3, 1)
        assert len(raw) == 16 + 4 * 7 * 3
        assert read_header(path) == (7, 3, 1)

    @settings(max_examples=30, deadline=None)
    @given(arrays(np.float32, st.tuples(st.integers(1, 6), st.integers(1, 5)),
                  elements=st.floats(-1e6, 1e6, width=32)))
    def test_float32_round_trip_is_exact(self, tmp_path_factory, M):
        path = tmp_path_factory.mktemp("rt") / "m.irp"
        write_embeddings(path, M)
        back = read_embeddings(path)
        assert back.dtype == np.float64
        assert back.astype(np.float32).tobytes() == M.tobytes()

    def test_float64_input_rounds_to_float32(self, tmp_path):
        M = np.array([[1 / 3, 2 / 3]])
        write_embeddings(tmp_path / "m.irp", M)
        np.testing.assert_array_equal(read_embeddings(tmp_path / "m.irp"), M.astype(np.float32))

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "m.irp"
        path.write_bytes(HEADER.pack(b"NOPE", 1, 1, 1, 0) + b"\0" * 4)
        with pytest.raises(FileFormatError, match="magic"):
            read_embeddings(path)

    def test_bad_version(self, tmp_path):
        path = tmp_path / "m.irp"
        path.write_bytes(HEADER.pack(b"IRP1", 9, 1, 1, 0) + b"\0" * 4)
        with pytest.raises(FileFormatError, match="version"):
            read_embeddings(path)

    def test_truncated_payload(self, tmp_path, rng):
        path = tmp_path / "m.irp"
        write_embeddings(path, rng.standard_normal((4, 4)))
        path.write_bytes(path.read_bytes()[:-1])
        with pytest.raises(FileFormatError, match="4x4"):
            read_embeddings(path)

    def test_short_header(self, tmp_path):
        path = tmp_path / "m.irp"
        path.write_bytes(b"IRP1")
        with pytest.raises(FileFormatError):
            read_embeddings(path)

    def test_rejects_vectors(self, tmp_path):
        with pytest.raises(FileFormatError):
            write_embeddings(tmp_path / "v.irp", np.ones(3))


class TestCsv:
    def test_round_trip_matches_binary(self, tmp_path, rng):
        M = rng.standard_normal((9, 4)) * 100
        write_csv(tmp_path / "m.csv", M)
        write_embeddings(tmp_path / "m.irp", M)
        np.testing.assert_array_equal(read_csv(tmp_path / "m.csv"), read_embeddings(tmp_path / "m.irp"))
        np.testing.assert_array_equal(read_embeddings(tmp_path / "m.csv"), read_embeddings(tmp_path / "m.irp"))

    def test_formats_give_identical_translations(self, tmp_path, rng):
        X, Y = rng.standard_normal((120, 12)), rng.standard_normal((120, 10))
        for name, M in (("x", X), ("y", Y)):
            write_csv(tmp_path / f"{name}.csv", M)
            write_embeddings(tmp_path / f"{name}.irp", M)
        idx = np.arange(0, 120, 2)
        out = []
        for ext in (".csv", ".irp"):
            Xf, Yf = read_embeddings(tmp_path / f"x{ext}"), read_embeddings(tmp_path / f"y{ext}")
            anchors = ParallelAnchors({"x": Xf[idx], "y": Yf[idx]})
            out.append(translate(Xf, anchors, "x", "y", TranslationConfig(omega=2, delta=0.3))[0])
        assert out[0].tobytes() == out[1].tobytes()

    @pytest.mark.parametrize("text,match", [
        ("", "empty"),
        ("a,b\n1,2\n", "header"),
        ("c0,c1\n1,2,3\n", "expected 2"),
        ("c0,c1\n1,x\n", ":2"),
        ("c0,c1\n", "no data"),
    ])
    def test_malformed(self, tmp_path, text, match):
        path = tmp_path / "bad.csv"
        path.write_text(text)
        with pytest.raises(FileFormatError, match=match):
            read_csv(path)


class TestSidecars:
    def test_ints_round_trip(self, tmp_path):
        write_ints(tmp_path / "i.txt", [3, 0, 17])
        np.testing.assert_array_equal(read_ints(tmp_path / "i.txt"), [3, 0, 17])

    def test_ints_reject_garbage(self, tmp_path):
        (tmp_path / "i.txt").write_text("1\n2.5\n")
        with pytest.raises(FileFormatError, match=":2"):
            read_ints(tmp_path / "i.txt")

    def test_digest_is_sha256(self, tmp_path):
        (tmp_path / "f").write_bytes(b"abc")
        assert file_digest(tmp_path / "f") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"


class TestManifest:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "m.txt"
        write_manifest(path, {"omega": 8, "delta": 0.65, "dims": [48, 64], "ref": None, "flag": True})
        assert path.read_text().splitlines()[0].startswith("#")
        assert read_manifest(path) == {"omega": "8", "delta": "0.65", "dims": "48,64", "ref": "none", "flag": "True"}

    def test_floats_keep_full_precision(self, tmp_path):
        write_manifest(tmp_path / "m.txt", {"x": 0.1 + 0.2})
        assert float(read_manifest(tmp_path / "m.txt")["x"]) == 0.1 + 0.2

    def test_malformed(self, tmp_path):
        (tmp_path / "m.txt").write_text("no separator here\n")
        with pytest.raises(FileFormatError):
            read_manifest(tmp_path / "m.txt")

    def test_default_path(self):
        assert default_manifest_path("out/y.irp") == "out/y.manifest.txt"
