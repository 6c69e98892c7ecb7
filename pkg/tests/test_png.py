import struct
import zlib

import numpy as np
import pytest

from datamoll.png import encode_png, png_size


def decode_png(data: bytes) -> np.ndarray:
    """Reference decoder (inverse filters per the PNG spec), for tests only."""
    assert data[:8] == bytes([137, 80, 78, 71, 13, 10, 26, 10])
    pos, idat, meta = 8, b"", None
    while pos < len(data):
        (length,) = struct.unpack(">I", data[pos : pos + 4])
        kind = data[pos + 4 : pos + 8]
        payload = data[pos + 8 : pos + 8 + length]
        (crc,) = struct.unpack(">I", data[pos + 8 + length : pos + 12 + length])
        assert crc == zlib.crc32(payload, zlib.crc32(kind)), "chunk CRC mismatch"
        if kind == b"IHDR":
            w, h, depth, color_type, comp, filt, interlace = struct.unpack(
                ">IIBBBBB", payload
            )
            assert (depth, comp, filt, interlace) == (8, 0, 0, 0)
            meta = (w, h, color_type)
        elif kind == b"IDAT":
            idat += payload
        pos += 12 + length
    w, h, color_type = meta
    bpp = {0: 1, 2: 3}[color_type]
    stride = w * bpp
    raw = zlib.decompress(idat)
    assert len(raw) == h * (stride + 1)
    prior = np.zeros(stride, dtype=np.int64)
    rows = []
    offset = 0
    for _ in range(h):
        filter_id = raw[offset]
        line = np.frombuffer(raw[offset + 1 : offset + 1 + stride], dtype=np.uint8)
        offset += 1 + stride
        rec = np.zeros(stride, dtype=np.int64)
        for x in range(stride):
            a = rec[x - bpp] if x >= bpp else 0
            b = prior[x]
            c = prior[x - bpp] if x >= bpp else 0
            if filter_id == 0:
                pred = 0
            elif filter_id == 1:
                pred = a
            elif filter_id == 2:
                pred = b
            elif filter_id == 3:
                pred = (a + b) // 2
            else:
                p = a + b - c
                pa, pb, pc = abs(p - a), abs(p - b), abs(p - c)
                pred = a if (pa <= pb and pa <= pc) else (b if pb <= pc else c)
            rec[x] = (int(line[x]) + pred) % 256
        rows.append(rec)
        prior = rec
    out = np.stack(rows).astype(np.uint8)
    return out.reshape(h, w, 3) if color_type == 2 else out.reshape(h, w)


class TestEncoder:
    @pytest.mark.parametrize("shape", [(1, 1), (5, 7), (16, 16), (3, 9, 3), (32, 32, 3)])
    def test_lossless_roundtrip(self, shape):
        img = np.random.default_rng(hash(shape) % 2**32).integers(
            0, 256, size=shape, dtype=np.uint8
        )
        assert np.array_equal(decode_png(encode_png(img)), img)

    def test_single_channel_axis_squeezed(self):
        img = np.random.default_rng(1).integers(0, 256, size=(6, 6, 1), dtype=np.uint8)
        assert np.array_equal(decode_png(encode_png(img)), img[:, :, 0])

    def test_deterministic(self):
        img = np.random.default_rng(2).integers(0, 256, size=(20, 20), dtype=np.uint8)
        assert encode_png(img) == encode_png(img)

    def test_smooth_compresses_better_than_noise(self):
        rng = np.random.default_rng(3)
        noise = rng.integers(0, 256, size=(32, 32), dtype=np.uint8)
        ramp = np.tile(np.arange(32, dtype=np.uint8) * 8, (32, 1))
        assert png_size(ramp) < png_size(noise)

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            encode_png(np.zeros((4, 4), dtype=np.float64))
        with pytest.raises(ValueError):
            encode_png(np.zeros((4, 4, 2), dtype=np.uint8))
