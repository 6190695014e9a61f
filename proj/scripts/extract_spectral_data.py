#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
# Copyright Contributors to the spectraface Project.
"""Regenerate the CIE and camera tables under data/ from the colour-science package.

    pip install colour-science
    python3 scripts/extract_spectral_data.py data/

data/hemoglobin.csv is not produced here; it is a transcription of the
tabulated oxy/deoxy molar extinction coefficients (S. Prahl, OMLC).
"""

import pathlib
import sys

import colour
import numpy as np
from colour.characterisation import MSDS_CAMERA_SENSITIVITIES
from colour.colorimetry import SDS_BASIS_FUNCTIONS_CIE_ILLUMINANT_D_SERIES

LO, HI = 380, 780


def write(path, header, comment, wavelengths, columns):
    with open(path, "w") as f:
        for line in comment:
            f.write(f"# {line}\n")
        f.write(",".join(["wavelength"] + header) + "\n")
        for i, wl in enumerate(wavelengths):
            vals = ",".join(f"{c[i]:.10g}" for c in columns)
            f.write(f"{wl:g},{vals}\n")


def main(out):
    out = pathlib.Path(out)
    out.mkdir(parents=True, exist_ok=True)
    wl5 = np.arange(LO, HI + 1, 5)

    a = colour.SDS_ILLUMINANTS["A"]
    write(out / "cie_a.csv", ["A"], ["CIE standard illuminant A, relative SPD (100 at 560 nm)"],
          wl5, [a[wl5]])

    d = SDS_BASIS_FUNCTIONS_CIE_ILLUMINANT_D_SERIES
    write(out / "cie_d_components.csv", ["S0", "S1", "S2"],
          ["CIE daylight basis functions S0, S1, S2"], wl5, [d[k][wl5] for k in ("S0", "S1", "S2")])

    f = [colour.SDS_ILLUMINANTS[f"FL{i}"][wl5] for i in range(1, 13)]
    write(out / "cie_f.csv", [f"F{i}" for i in range(1, 13)],
          ["CIE fluorescent illuminants F1-F12, relative SPD"], wl5, f)

    cmf = colour.MSDS_CMFS["CIE 1931 2 Degree Standard Observer"]
    write(out / "cmf_1931.csv", ["x", "y", "z"], ["CIE 1931 2-degree colour matching functions"],
          wl5, [cmf[wl5][:, i] for i in range(3)])

    # Camera set: the two measured Bayer-sensor cameras shipped with
    # colour-science plus 26 derived cameras. Each derived camera is a convex
    # mix of the two measured ones, shifted in wavelength by up to +-5 nm.
    wl10 = np.arange(400, 721, 10, dtype=float)
    canon = np.genfromtxt(pathlib.Path(colour.__file__).parent / "characterisation" / "datasets"
                          / "rawtoaces" / "CANON_EOS_5DMark_II_RGB_Sensitivities.csv",
                          delimiter=",", names=True)
    nikon = MSDS_CAMERA_SENSITIVITIES["Nikon 5100 (NPL)"]
    measured = {
        "nikon_d5100": np.stack([nikon[wl10][:, c] for c in range(3)], 1),
        "canon_eos_5d_mark_ii": np.stack(
            [np.interp(wl10, canon["wavelength"], canon[c]) for c in "RGB"], 1),
    }
    measured = {k: np.clip(v, 0.0, None) / np.clip(v, 0.0, None).max() for k, v in measured.items()}
    cameras = dict(measured)
    a_cam, b_cam = measured.values()
    rng = np.random.default_rng(2013)
    for k in range(26):
        mix, shift = rng.uniform(0.0, 1.0), rng.uniform(-5.0, 5.0)
        s = mix * a_cam + (1.0 - mix) * b_cam
        s = np.stack([np.interp(wl10 - shift, wl10, s[:, c]) for c in range(3)], 1)
        cameras[f"derived_{k:02d}"] = s / s.max()
    header, cols = [], []
    for name, s in cameras.items():
        for c in range(3):
            cols.append(s[:, c])
            header.append(f"{name}_{'RGB'[c]}")
    write(out / "camera_sensitivities.csv", header,
          ["RGB spectral sensitivities, one camera per column triple, peak-normalized.",
           "nikon_d5100 (NPL) and canon_eos_5d_mark_ii (rawtoaces) are measured.",
           "derived_NN: convex mix of the two measured cameras, wavelength-shifted by U(-5,5) nm",
           "(numpy default_rng seed 2013); see scripts/extract_spectral_data.py."],
          wl10, cols)

if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data")
