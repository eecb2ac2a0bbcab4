"""Reference values for the chaotic keystream tests.

Two independent routes:
  * a high-precision (mpmath, 40 significant digits) evaluation of one map step,
    used to bound the double-precision implementation's per-step error;
  * a plain double emulation (Python floats use the same IEEE binary64 and the
    platform libm), used to freeze golden bit patterns.

Run: python3 chaos_oracle.py
"""
import math
import struct

import mpmath

mpmath.mp.dps = 40


def hp_step(mu, k, x):
    mu = mpmath.mpf(mu)
    x = mpmath.mpf(x)
    v = mpmath.cos(mu * mpmath.acos(x)) * mpmath.mpf(2) ** k
    return v - mpmath.floor(v)


def dbl_step(mu, k, x):
    v = math.cos(mu * math.acos(x)) * float(2 ** k)
    return v - math.floor(v)


def dbl_sequence(mu, x0, k, n, burn_in):
    x = x0
    for _ in range(burn_in):
        x = dbl_step(mu, k, x)
    out = []
    for _ in range(n):
        x = dbl_step(mu, k, x)
        out.append(x)
    return out


def hexf(v):
    return "0x%016x" % struct.unpack("<Q", struct.pack("<d", v))[0]


if __name__ == "__main__":
    print("single step mu=3.9 k=14 x=0.6 (decimal inputs):", mpmath.nstr(hp_step("3.9", 14, "0.6"), 30))
    print("single step on exact doubles:", mpmath.nstr(hp_step(3.9, 14, 0.6), 30))
    print("double step:", repr(dbl_step(3.9, 14, 0.6)))

    for burn in (0, 50):
        seq = dbl_sequence(3.9, 0.6, 14, 5, burn)
        print("burn_in", burn)
        prev = 0.6
        for _ in range(burn):
            prev = dbl_step(3.9, 14, prev)
        for v in seq:
            ref = hp_step(3.9, 14, prev)
            print("  ", hexf(v), repr(v), "hp-from-prev", mpmath.nstr(ref, 20), "err", float(abs(ref - v)))
            prev = v
        print("   bytes", [min(255, int(math.floor(v * 256))) for v in seq[:4]])

    # Divergence of two high-precision orbits whose mu differs by 1e-15.
    a = mpmath.mpf("0.6")
    b = mpmath.mpf("0.6")
    for i in range(1, 40):
        a = hp_step(mpmath.mpf("3.9"), 14, a)
        b = hp_step(mpmath.mpf("3.9") + mpmath.mpf("1e-15"), 14, b)
        if abs(a - b) > 0.1:
            print("hp divergence after", i, "iterations")
            break

    # Golden encryption of an 8-byte vector under burn_in 50.
    seq = dbl_sequence(3.9, 0.6, 14, 8, 50)
    order = sorted(range(8), key=lambda i: (seq[i], i))
    perm = [0] * 8
    for pos, i in enumerate(order):
        perm[i] = pos
    ks = [min(255, int(math.floor(v * 256))) for v in seq]
    plain = [0x53, 0x44, 0x32, 0x00, 0xFF, 0x10, 0x80, 0x7F]
    scr = [0] * 8
    for i in range(8):
        scr[perm[i]] = plain[i]
    cipher = [s ^ m for s, m in zip(scr, ks)]
    print("perm", perm, "ks", ks, "cipher", ["0x%02X" % c for c in cipher])
