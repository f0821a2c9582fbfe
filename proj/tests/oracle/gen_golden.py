#!/usr/bin/env python3
"""Generates the golden wire frames under tests/testdata/.

Independent straight-line implementation of the codecs and the frame layout,
used to pin the byte format. Run from the repo root:

    python3 tests/oracle/gen_golden.py

The outputs are committed; regenerate only when the wire format changes.
"""
import json
import math
import pathlib
import struct

import numpy as np

OUT = pathlib.Path(__file__).resolve().parent.parent / "testdata"

MAGIC = b"MSC1"
CODEC_ID = {"ms": 0, "sp": 1, "qu": 2, "rt": 3}
FLAG_SIGN = 0x01
FLAG_KV = 0x02


def f32(x):
    return float(np.float32(x))


def pack_mask(fields, w):
    nbytes = (len(fields) * w + 7) // 8
    out = bytearray(nbytes)
    bit = 0
    for f in fields:
        for j in range(w):
            if (f >> j) & 1:
                out[bit >> 3] |= 1 << (bit & 7)
            bit += 1
    return bytes(out)


def build_frame(codec, shape, k, b_or_q, mask, top_values, sign=False,
                quant_range=None, key_value=False):
    w = b_or_q + (1 if sign else 0) if codec == "ms" else (b_or_q if codec == "qu" else 1)
    frame = bytearray()
    frame += MAGIC
    frame.append(CODEC_ID[codec])
    frame.append((FLAG_SIGN if sign else 0) | (FLAG_KV if key_value else 0))
    frame.append(b_or_q if codec in ("ms", "qu") else 1)
    frame.append(len(shape))
    for dim in shape:
        frame += struct.pack("<I", dim)
    frame += struct.pack("<I", k)
    if codec == "qu":
        frame += struct.pack("<ff", *quant_range)
    if key_value:
        for i, field in enumerate(mask):
            if field:
                frame += struct.pack("<I", i)
    else:
        frame += pack_mask(mask, w)
    for v in top_values:
        frame += struct.pack("<f", f32(v))
    return bytes(frame)


def top_k_indices(vals, k):
    order = sorted(range(len(vals)), key=lambda i: (-abs(vals[i]), i))
    return sorted(order[:k])


def ms_encode(vals, k, b, sign=False):
    vals = [f32(v) for v in vals]
    kept = top_k_indices(vals, k)
    top_values = [vals[i] for i in kept]
    top_min = f32(min(abs(v) for v in top_values))
    sentinel = (1 << b) - 1
    mask = []
    kept_set = set(kept)
    for i, v in enumerate(vals):
        if i in kept_set:
            mask.append(sentinel)
            continue
        code = 0
        if top_min > 0:
            code = min(math.floor(abs(v) * sentinel / top_min), sentinel - 1)
        if sign and v < 0:
            code |= 1 << b
        mask.append(code)
    return mask, top_values, top_min


def ms_decode(mask, top_values, b, sign=False):
    sentinel = (1 << b) - 1
    top_min = f32(min(abs(v) for v in top_values))
    out = []
    cursor = 0
    for field in mask:
        if field == sentinel:
            out.append(f32(top_values[cursor]))
            cursor += 1
            continue
        code = field & sentinel
        value = code * top_min / sentinel
        if sign and field >> b:
            value = -value
        out.append(f32(value))
    return out


def sp_encode(vals, k):
    vals = [f32(v) for v in vals]
    kept = set(top_k_indices(vals, k))
    mask = [1 if i in kept else 0 for i in range(len(vals))]
    top_values = [vals[i] for i in sorted(kept)]
    return mask, top_values


def sp_decode(mask, top_values):
    out = []
    cursor = 0
    for bit in mask:
        if bit:
            out.append(f32(top_values[cursor]))
            cursor += 1
        else:
            out.append(0.0)
    return out


def qu_encode(vals, q):
    vals = [f32(v) for v in vals]
    lo, hi = f32(min(vals)), f32(max(vals))
    levels = (1 << q) - 1
    if hi == lo:
        return [0] * len(vals), (lo, hi)
    span = hi - lo
    codes = [max(0, min(levels, math.floor((v - lo) / span * levels + 0.5)))
             for v in vals]
    return codes, (lo, hi)


def qu_decode(codes, q, lo, hi):
    levels = (1 << q) - 1
    span = f32(hi) - f32(lo)
    return [f32(c * span / levels + f32(lo)) for c in codes]


def write_tensor(path, shape, vals):
    with open(path, "wb") as fh:
        fh.write(struct.pack("<I", len(shape)))
        for dim in shape:
            fh.write(struct.pack("<I", dim))
        for v in vals:
            fh.write(struct.pack("<f", f32(v)))


def main():
    OUT.mkdir(exist_ok=True)
    manifest = []

    # 1. MS, the 16-element worked example flavor: k=4, b=2.
    vals = [2.5, 1.0, 3.0, 0.3, 2.1, 1.5, 4.0, 0.0,
            0.2, 0.6, 0.05, 0.9, 1.2, 0.4, 0.1, 0.7]
    mask, top, _ = ms_encode(vals, 4, 2)
    frame = build_frame("ms", [16], 4, 2, mask, top)
    (OUT / "ms_basic.frame").write_bytes(frame)
    write_tensor(OUT / "ms_basic.tns", [16], vals)
    manifest.append({
        "name": "ms_basic", "frame": "ms_basic.frame", "codec": "ms",
        "shape": [16], "k": 4, "b": 2, "sign": False,
        "input": [f32(v) for v in vals], "r": 0.75,
        "mask": mask, "top_values": [f32(v) for v in top],
        "expect_decode": ms_decode(mask, top, 2),
    })
    assert len(frame) == 12 + 4 + 4 + 16, len(frame)  # header+dims, 4B mask, 16B values

    # 2. MS with sign bit: k=4, b=2, w=3.
    vals = [-4.0, 1.0, 3.0, -1.5, 0.5, -2.1, 0.0, 2.2]
    mask, top, _ = ms_encode(vals, 4, 2, sign=True)
    frame = build_frame("ms", [8], 4, 2, mask, top, sign=True)
    (OUT / "ms_signbit.frame").write_bytes(frame)
    manifest.append({
        "name": "ms_signbit", "frame": "ms_signbit.frame", "codec": "ms",
        "shape": [8], "k": 4, "b": 2, "sign": True,
        "input": [f32(v) for v in vals], "r": 0.5,
        "mask": mask, "top_values": [f32(v) for v in top],
        "expect_decode": ms_decode(mask, top, 2, sign=True),
    })

    # 3. SP in mask form: d=8, k=3 (32k >= d).
    vals = [0.5, 6.0, -1.25, 0.0, 2.5, 0.75, -3.5, 1.0]
    mask, top = sp_encode(vals, 3)
    frame = build_frame("sp", [2, 4], 3, 1, mask, top)
    (OUT / "sp_mask.frame").write_bytes(frame)
    manifest.append({
        "name": "sp_mask", "frame": "sp_mask.frame", "codec": "sp",
        "shape": [2, 4], "k": 3, "b": 0, "sign": False,
        "input": [f32(v) for v in vals], "r": 0.625,
        "mask": mask, "top_values": [f32(v) for v in top],
        "expect_decode": sp_decode(mask, top),
    })

    # 4. SP in key-value form: d=256, k=4 (32k < d, sparsity above crossover).
    vals = [0.0] * 256
    for idx, v in [(7, 5.0), (64, -8.5), (130, 3.25), (255, 12.0)]:
        vals[idx] = v
    mask, top = sp_encode(vals, 4)
    frame = build_frame("sp", [256], 4, 1, mask, top, key_value=True)
    (OUT / "sp_keyvalue.frame").write_bytes(frame)
    manifest.append({
        "name": "sp_keyvalue", "frame": "sp_keyvalue.frame", "codec": "sp",
        "shape": [256], "k": 4, "b": 0, "sign": False,
        "input": [f32(v) for v in vals], "r": 0.984375,
        "mask": mask, "top_values": [f32(v) for v in top],
        "expect_decode": sp_decode(mask, top),
    })

    # 5. QU, 3 bits, signed range.
    vals = [-2.0, -0.5, 0.0, 0.31, 1.0, 1.75, 2.2, 6.0]
    codes, (lo, hi) = qu_encode(vals, 3)
    frame = build_frame("qu", [8], 0, 3, codes, [], quant_range=(lo, hi))
    (OUT / "qu_q3.frame").write_bytes(frame)
    manifest.append({
        "name": "qu_q3", "frame": "qu_q3.frame", "codec": "qu",
        "shape": [8], "k": 0, "q": 3, "sign": False,
        "input": [f32(v) for v in vals],
        "mask": codes, "top_values": [], "range": [lo, hi],
        "expect_decode": qu_decode(codes, 3, lo, hi),
    })

    # 6. RT frame with a hand-picked sampled subset (payload format = SP).
    vals = [0.0, 0.0, 4.5, 0.0, 0.0, 1.5, 0.0, 0.0]
    mask = [0, 0, 1, 0, 0, 1, 0, 0]
    top = [4.5, 1.5]
    frame = build_frame("rt", [8], 2, 1, mask, top)
    (OUT / "rt_mask.frame").write_bytes(frame)
    manifest.append({
        "name": "rt_mask", "frame": "rt_mask.frame", "codec": "rt",
        "shape": [8], "k": 2, "b": 0, "sign": False,
        "mask": mask, "top_values": top,
        "expect_decode": sp_decode(mask, top),
    })

    with open(OUT / "golden_manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=1)
    print(f"wrote {len(manifest)} golden cases to {OUT}")


if __name__ == "__main__":
    main()
