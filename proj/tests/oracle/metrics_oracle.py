#!/usr/bin/env python3
# Copyright 2026 The EMF Authors
# SPDX-License-Identifier: Apache-2.0
"""Standalone recomputation of the four quality scores from EMV1 files.

Uses only the Python standard library and reads the container bytes itself.

usage: metrics_oracle.py MANIFEST.json
  MANIFEST is a list of {"file": path, "subjects": [labels]}; paths are
  relative to the manifest. Prints a JSON list of
  {"imaging", "background", "subject", "overall", "average"}.
"""

import json
import math
import os
import struct
import sys

BINS = 8
K = 100.0
CLIP_LOW = 0
CLIP_HIGH = 255
PRESENCE = 0.5


def read_emv(path):
    with open(path, "rb") as f:
        data = f.read()
    if data[:4] != b"EMV1":
        raise ValueError(f"{path}: bad magic")
    (hlen,) = struct.unpack(">I", data[4:8])
    header = json.loads(data[8 : 8 + hlen].decode("utf-8"))
    p = header["params"]
    w, h, n = p["width"], p["height"], p["frame_count"]
    size = w * h * 3
    body = data[8 + hlen :]
    if len(body) != size * n:
        raise ValueError(f"{path}: payload is {len(body)} bytes, expected {size * n}")
    frames = [body[i * size : (i + 1) * size] for i in range(n)]
    return w, h, frames, header["tracks"]


def gray(frame, w, x, y):
    o = (y * w + x) * 3
    return math.floor((299 * frame[o] + 587 * frame[o + 1] + 114 * frame[o + 2]) / 1000 + 0.5)


def lap_var(frame, w, h):
    if w < 3 or h < 3:
        return 0.0
    vals = []
    for y in range(1, h - 1):
        for x in range(1, w - 1):
            vals.append(
                gray(frame, w, x - 1, y)
                + gray(frame, w, x + 1, y)
                + gray(frame, w, x, y - 1)
                + gray(frame, w, x, y + 1)
                - 4 * gray(frame, w, x, y)
            )
    mean = sum(vals) / len(vals)
    return sum((v - mean) ** 2 for v in vals) / len(vals)


def inside(box, x, y):
    bx, by, bw, bh = box
    return bx <= x < bx + bw and by <= y < by + bh


def hist(frame, w, h, keep):
    counts = [0] * (3 * BINS)
    n = 0
    for y in range(h):
        for x in range(w):
            if not keep(x, y):
                continue
            n += 1
            o = (y * w + x) * 3
            for c in range(3):
                counts[c * BINS + frame[o + c] * BINS // 256] += 1
    if n == 0:
        return [1.0 / BINS] * (3 * BINS)
    return [v / n for v in counts]


def cosine(a, b):
    dot = sum(x * y for x, y in zip(a, b))
    na = math.sqrt(sum(x * x for x in a))
    nb = math.sqrt(sum(y * y for y in b))
    if na == 0 or nb == 0:
        return 0.0
    return min(1.0, max(0.0, dot / (na * nb)))


def imaging(w, h, frames):
    total = 0.0
    for fr in frames:
        clipped = 0
        for i in range(w * h):
            px = fr[i * 3 : i * 3 + 3]
            if any(v <= CLIP_LOW or v >= CLIP_HIGH for v in px):
                clipped += 1
        v = lap_var(fr, w, h)
        total += 0.5 * (1 - clipped / (w * h)) + 0.5 * (v / (v + K))
    return total / len(frames)


def background(w, h, frames, tracks):
    def feat(f):
        boxes = [t["boxes"][f] for t in tracks if t["boxes"][f] is not None]
        return hist(frames[f], w, h, lambda x, y: not any(inside(b, x, y) for b in boxes))

    feats = [feat(f) for f in range(len(frames))]
    return sum(cosine(feats[i - 1], feats[i]) for i in range(1, len(feats))) / (len(feats) - 1)


def subject(w, h, frames, tracks, subjects):
    total = 0.0
    for s in subjects:
        mine = [t for t in tracks if t["label"] == s]
        present = [f for f in range(len(frames)) if any(t["boxes"][f] is not None for t in mine)]
        if len(present) < 2:
            continue
        feats = []
        for f in present:
            boxes = [t["boxes"][f] for t in mine if t["boxes"][f] is not None]
            feats.append(hist(frames[f], w, h, lambda x, y, bs=boxes: any(inside(b, x, y) for b in bs)))
        total += sum(cosine(feats[i - 1], feats[i]) for i in range(1, len(feats))) / (len(feats) - 1)
    return total / len(subjects)


def overall(frames, tracks, subjects):
    hits = 0
    for s in subjects:
        mine = [t for t in tracks if t["label"] == s]
        present = sum(1 for f in range(len(frames)) if any(t["boxes"][f] is not None for t in mine))
        if present >= PRESENCE * len(frames):
            hits += 1
    return hits / len(subjects)


def main():
    manifest_path = sys.argv[1]
    base = os.path.dirname(os.path.abspath(manifest_path))
    with open(manifest_path) as f:
        manifest = json.load(f)
    out = []
    for item in manifest:
        w, h, frames, tracks = read_emv(os.path.join(base, item["file"]))
        subjects = item["subjects"]
        r = {
            "imaging": imaging(w, h, frames),
            "background": background(w, h, frames, tracks),
            "subject": subject(w, h, frames, tracks, subjects),
            "overall": overall(frames, tracks, subjects),
        }
        r["average"] = (r["imaging"] + r["background"] + r["subject"] + r["overall"]) / 4
        out.append(r)
    json.dump(out, sys.stdout)


if __name__ == "__main__":
    main()
