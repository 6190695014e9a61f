#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
# Copyright Contributors to the spectraface Project.
"""Recompute the bench Reconstruction column from the files on disk.

For every case in the report, reads the case's input.pfm and mask.png and the
fitted reconstruction.pfm, computes sqrt(mean over masked pixels of the summed
squared channel differences) and compares it with the reported value.
Prints the largest absolute difference; exits 1 if it exceeds --tolerance.
"""

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np
from PIL import Image


def read_pfm(path: Path) -> np.ndarray:
    with open(path, "rb") as f:
        data = f.read()
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while data[pos : pos + 1].isspace():
            pos += 1
        end = pos
        while not data[end : end + 1].isspace():
            end += 1
        tokens.append(data[pos:end].decode("ascii"))
        pos = end
    pos += 1  # single whitespace after the scale
    kind, width, height, scale = tokens[0], int(tokens[1]), int(tokens[2]), float(tokens[3])
    channels = {"PF": 3, "Pf": 1}[kind]
    dtype = "<f4" if scale < 0 else ">f4"
    pixels = np.frombuffer(data, dtype=dtype, count=width * height * channels, offset=pos)
    return np.flipud(pixels.reshape(height, width, channels)).astype(np.float64)


def read_mask(path: Path) -> np.ndarray:
    img = np.asarray(Image.open(path))
    if img.ndim == 3:
        img = img[..., 0]
    threshold = 128 * 257 if img.dtype == np.uint16 else 128
    return img >= threshold


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--cases", type=Path, required=True)
    parser.add_argument("--outputs", type=Path, required=True)
    parser.add_argument("--report", type=Path, required=True)
    parser.add_argument("--tolerance", type=float, default=1e-9)
    args = parser.parse_args()

    report = json.loads(args.report.read_text())
    worst = 0.0
    for case in report["cases"]:
        name = case["name"]
        observed = read_pfm(args.cases / name / "input.pfm")
        mask = read_mask(args.cases / name / "mask.png")
        recon = read_pfm(args.outputs / name / "reconstruction.pfm")
        diff = (recon - observed)[mask]
        rmse = math.sqrt(float(np.sum(diff * diff)) / int(mask.sum()))
        worst = max(worst, abs(rmse - float(case["rmse"]["Reconstruction"])))
    print(f"cases={len(report['cases'])} max_abs_diff={worst:.3e}")
    return 0 if worst < args.tolerance else 1


if __name__ == "__main__":
    sys.exit(main())
