#!/usr/bin/env python3
# Copyright 2026 The LEGIT Toolkit Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Convert a pixel-outline Unifont build (TTF/WOFF) into Unifont .hex format.

Unifont outlines are unions of 64-unit squares on a 16px em, so sampling
each pixel center recovers the original bitmap exactly. Codepoints drawn
with the "unassigned" placeholder box are dropped.

usage: woff_to_hex.py FONT [--max 0x2FFF] > out.hex
"""
import argparse

import numpy as np
from fontTools.pens.recordingPen import RecordingPen
from fontTools.ttLib import TTFont
from matplotlib.path import Path

UNIT = 64
ASCENT = 896


def contours(glyph_set, name):
    pen = RecordingPen()
    glyph_set[name].draw(pen)
    polys, cur = [], []
    for op, pts in pen.value:
        if op == "moveTo":
            cur = [pts[0]]
        elif op in ("lineTo", "qCurveTo", "curveTo"):
            cur.extend(pts)
        elif op in ("closePath", "endPath"):
            if cur:
                polys.append(cur)
            cur = []
    if cur:
        polys.append(cur)
    return polys


def rasterize(glyph_set, hmtx, name):
    width = hmtx[name][0] // UNIT
    xs, ys = np.meshgrid(np.arange(width) * UNIT + UNIT // 2,
                         ASCENT - np.arange(16) * UNIT - UNIT // 2)
    pts = np.stack([xs.ravel(), ys.ravel()], axis=1)
    inside = np.zeros(len(pts), dtype=np.int32)
    for poly in contours(glyph_set, name):
        inside ^= Path(np.array(poly + [poly[0]], dtype=float), closed=True).contains_points(pts)
    return width, inside.reshape(16, width)


def is_unassigned_placeholder(width, bm):
    if width != 16:
        return False
    frame = np.array([0] + [1] * 14 + [0])
    return (not bm[0].any() and not bm[15].any()
            and (bm[1] == frame).all() and (bm[14] == frame).all()
            and (bm[1:15, 0] == 0).all() and (bm[1:15, 1] == 1).all())


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("font")
    ap.add_argument("--max", default="0x2FFF")
    args = ap.parse_args()
    font = TTFont(args.font)
    cmap = font.getBestCmap()
    gs = font.getGlyphSet()
    hmtx = font["hmtx"]
    for cp in range(int(args.max, 16) + 1):
        if cp not in cmap:
            continue
        width, bm = rasterize(gs, hmtx, cmap[cp])
        if width not in (8, 16) or is_unassigned_placeholder(width, bm):
            continue
        digits = width // 4
        rows = "".join(
            format(int("".join(map(str, row)), 2), "0%dX" % digits) for row in bm)
        print("%04X:%s" % (cp, rows))


if __name__ == "__main__":
    main()
