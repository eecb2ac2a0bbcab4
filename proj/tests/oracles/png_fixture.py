"""Writes PNG fixtures with an independent encoder (Pillow) plus their raw pixels.

Run from the repo root: python3 tests/oracles/png_fixture.py
"""
import struct
import zlib

import numpy as np
from PIL import Image

rng = np.random.default_rng(20240611)


def smooth(h, w, c):
    y, x = np.mgrid[0:h, 0:w]
    base = (x * 9 + y * 5)[..., None] + np.arange(c) * 40
    noise = rng.integers(0, 6, size=(h, w, c))
    return ((base + noise) % 256).astype(np.uint8)


def filters_used(path):
    data = open(path, "rb").read()
    pos, idat, width, ch = 8, b"", 0, 0
    while pos < len(data):
        n, = struct.unpack(">I", data[pos:pos + 4])
        typ = data[pos + 4:pos + 8]
        body = data[pos + 8:pos + 8 + n]
        if typ == b"IHDR":
            width = struct.unpack(">I", body[:4])[0]
            ch = {0: 1, 2: 3}[body[9]]
        if typ == b"IDAT":
            idat += body
        pos += 12 + n
    raw = zlib.decompress(idat)
    stride = width * ch + 1
    return sorted({raw[i] for i in range(0, len(raw), stride)})


rgb = smooth(23, 17, 3)
Image.fromarray(rgb, "RGB").save("tests/data/filters_rgb.png", optimize=False)
rgb.tofile("tests/data/filters_rgb.bin")
gray = smooth(9, 31, 1)[..., 0]
Image.fromarray(gray, "L").save("tests/data/filters_gray.png")
gray.tofile("tests/data/filters_gray.bin")
print("rgb filters", filters_used("tests/data/filters_rgb.png"))
print("gray filters", filters_used("tests/data/filters_gray.png"))


def chunk(typ, body):
    return struct.pack(">I", len(body)) + typ + body + struct.pack(">I", zlib.crc32(typ + body) & 0xFFFFFFFF)


def paeth(a, b, c):
    p = a + b - c
    pa, pb, pc = abs(p - a), abs(p - b), abs(p - c)
    if pa <= pb and pa <= pc:
        return a
    return b if pb <= pc else c


def write_cycled(path, img):
    """Row y uses filter y % 5 so every filter type appears."""
    h, w, c = img.shape
    rows = img.reshape(h, w * c).astype(int)
    out = bytearray()
    for y in range(h):
        f = y % 5
        cur = rows[y]
        prev = rows[y - 1] if y else np.zeros_like(cur)
        out.append(f)
        for i in range(w * c):
            a = cur[i - c] if i >= c else 0
            b = prev[i]
            cc = prev[i - c] if i >= c else 0
            pred = [0, a, b, (a + b) // 2, paeth(a, b, cc)][f]
            out.append((cur[i] - pred) % 256)
    ihdr = struct.pack(">IIBBBBB", w, h, 8, 2 if c == 3 else 0, 0, 0, 0)
    png = b"\x89PNG\r\n\x1a\n" + chunk(b"IHDR", ihdr) + chunk(b"tEXt", b"note\x00ancillary") \
        + chunk(b"IDAT", zlib.compress(bytes(out))[:40]) + chunk(b"IDAT", zlib.compress(bytes(out))[40:]) \
        + chunk(b"IEND", b"")
    open(path, "wb").write(png)


cyc = smooth(15, 13, 3)
write_cycled("tests/data/filters_cycled.png", cyc)
cyc.tofile("tests/data/filters_cycled.bin")
back = np.asarray(Image.open("tests/data/filters_cycled.png"))
assert (back == cyc).all()
print("cycled filters", filters_used("tests/data/filters_cycled.png"))
