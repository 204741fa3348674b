#!/usr/bin/env python3
"""Download a hyperspectral scene and export it as a bandsel CSV.

Needs network access plus numpy and scipy. The CSV has one row per pixel:
band values followed by the integer class label (0 = unlabeled background,
dropped automatically at load time).
"""
import argparse
import io
import sys
import urllib.request

import numpy as np
import scipy.io

SCENES = {
    "indian_pines": {
        "data": "https://www.ehu.eus/ccwintco/uploads/6/67/Indian_pines_corrected.mat",
        "labels": "https://www.ehu.eus/ccwintco/uploads/c/c4/Indian_pines_gt.mat",
        "data_key": "indian_pines_corrected",
        "label_key": "indian_pines_gt",
    },
    "salinas": {
        "data": "https://www.ehu.eus/ccwintco/uploads/a/a3/Salinas_corrected.mat",
        "labels": "https://www.ehu.eus/ccwintco/uploads/1/1b/Salinas_gt.mat",
        "data_key": "salinas_corrected",
        "label_key": "salinas_gt",
    },
    "botswana": {
        "data": "https://www.ehu.eus/ccwintco/uploads/7/72/Botswana.mat",
        "labels": "https://www.ehu.eus/ccwintco/uploads/5/58/Botswana_gt.mat",
        "data_key": "Botswana",
        "label_key": "Botswana_gt",
    },
}


def fetch_mat(url: str, key: str) -> np.ndarray:
    print(f"downloading {url} ...", file=sys.stderr)
    with urllib.request.urlopen(url) as response:
        payload = response.read()
    return scipy.io.loadmat(io.BytesIO(payload))[key]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("scene", choices=sorted(SCENES), nargs="?",
                        default="indian_pines")
    parser.add_argument("--out", default=None,
                        help="output CSV (default: data/<scene>.csv)")
    args = parser.parse_args()

    scene = SCENES[args.scene]
    cube = fetch_mat(scene["data"], scene["data_key"]).astype(np.float64)
    labels = fetch_mat(scene["labels"], scene["label_key"]).astype(np.int64)
    rows, cols, bands = cube.shape
    assert labels.shape == (rows, cols), "label raster shape mismatch"

    out_path = args.out or f"data/{args.scene}.csv"
    import os
    os.makedirs(os.path.dirname(out_path) or ".", exist_ok=True)
    flat = cube.reshape(rows * cols, bands)
    flat_labels = labels.reshape(rows * cols)
    with open(out_path, "w") as out:
        out.write(",".join(f"band_{b + 1}" for b in range(bands)) + ",label\n")
        for i in range(rows * cols):
            values = ",".join(repr(v) for v in flat[i])
            out.write(f"{values},{flat_labels[i]}\n")
    labeled = int((flat_labels > 0).sum())
    print(f"wrote {out_path}: {rows * cols} pixels, {bands} bands, "
          f"{labeled} labeled samples", file=sys.stderr)


if __name__ == "__main__":
    main()
