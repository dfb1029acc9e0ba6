"""Binary container format and checkpoint round trips."""

import struct

import numpy as np
import pytest

from tsdiff.checkpoint import MAGIC, load_checkpoint, read_container, save_checkpoint, write_container
from tsdiff.model import EncoderConfig
from tsdiff.tokenizer import build_vocab
from tsdiff.train import Checkpoint, TrainConfig


def _checkpoint():
    rng = np.random.default_rng(42)
    return Checkpoint(
        params={"a.w": rng.standard_normal((3, 4)), "b.bias": rng.standard_normal(4)},
        epoch=7,
        val_loss=1.25,
        encoder_config=EncoderConfig(),
        train_config=TrainConfig(),
        vocab=build_vocab(["larger spike than reference"]),
        metadata={"seed": 0, "fingerprints": {"manifest": "ab" * 32}},
    )


class TestContainer:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "x.bin"
        tensors = {"t1": np.arange(6, dtype=np.float64).reshape(2, 3), "t2": np.array(5.0)}
        write_container(path, {"kind": "test", "note": "n"}, tensors)
        header, back = read_container(path)
        assert header["kind"] == "test"
        assert header["note"] == "n"
        np.testing.assert_array_equal(back["t1"], tensors["t1"])
        assert back["t1"].dtype == np.dtype("<f4")
        np.testing.assert_array_equal(back["t2"], np.float32(5.0))

    def test_writes_are_byte_deterministic(self, tmp_path):
        tensors = {"t": np.linspace(0, 1, 10)}
        a = tmp_path / "a.bin"
        b = tmp_path / "b.bin"
        write_container(a, {"z": 1, "a": 2}, tensors)
        write_container(b, {"a": 2, "z": 1}, tensors)
        assert a.read_bytes() == b.read_bytes()

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "x.bin"
        path.write_bytes(b"NOTMAGIC" + b"\x00" * 16)
        with pytest.raises(ValueError, match="magic"):
            read_container(path)

    def test_truncated_payload_rejected(self, tmp_path):
        path = tmp_path / "x.bin"
        write_container(path, {}, {"t": np.ones(8)})
        path.write_bytes(path.read_bytes()[:-4])
        with pytest.raises(ValueError, match="truncated"):
            read_container(path)

    def test_trailing_bytes_rejected(self, tmp_path):
        path = tmp_path / "x.bin"
        write_container(path, {}, {"t": np.ones(8)})
        path.write_bytes(path.read_bytes() + b"junk")
        with pytest.raises(ValueError, match="trailing"):
            read_container(path)

    def test_corrupt_header_rejected(self, tmp_path):
        path = tmp_path / "x.bin"
        write_container(path, {"k": 1}, {})
        raw = bytearray(path.read_bytes())
        raw[len(MAGIC) + 4] = ord("X")  # break the JSON opening brace
        path.write_bytes(bytes(raw))
        with pytest.raises(ValueError, match="header"):
            read_container(path)

    def test_header_length_field_is_little_endian_u32(self, tmp_path):
        path = tmp_path / "x.bin"
        write_container(path, {"k": 1}, {})
        raw = path.read_bytes()
        (header_len,) = struct.unpack_from("<I", raw, len(MAGIC))
        assert raw[len(MAGIC) + 4 : len(MAGIC) + 4 + header_len].startswith(b"{")


class TestCheckpointIO:
    def test_round_trip_preserves_everything_but_precision(self, tmp_path):
        ckpt = _checkpoint()
        path = tmp_path / "c.tsckpt"
        save_checkpoint(path, ckpt)
        back = load_checkpoint(path)
        assert back.epoch == ckpt.epoch
        assert back.val_loss == ckpt.val_loss
        assert back.encoder_config == ckpt.encoder_config
        assert back.train_config == ckpt.train_config
        assert back.vocab.tokens == ckpt.vocab.tokens
        assert back.metadata == ckpt.metadata
        assert set(back.params) == set(ckpt.params)
        for name, stored in back.params.items():
            assert stored.dtype == np.float64
            np.testing.assert_array_equal(stored, ckpt.params[name].astype("<f4").astype(np.float64))

    def test_wrong_kind_rejected(self, tmp_path):
        path = tmp_path / "c.bin"
        write_container(path, {"kind": "index"}, {})
        with pytest.raises(ValueError, match="checkpoint"):
            load_checkpoint(path)

    def test_save_is_byte_deterministic(self, tmp_path):
        ckpt = _checkpoint()
        a = tmp_path / "a.tsckpt"
        b = tmp_path / "b.tsckpt"
        save_checkpoint(a, ckpt)
        save_checkpoint(b, ckpt)
        assert a.read_bytes() == b.read_bytes()
