#!/usr/bin/env python3
"""Writes the scikit-image sample photographs used by the tests as 8-bit PGM luma planes."""
import pathlib
import sys

import numpy as np
import skimage.data

NAMES = ["camera", "coins", "moon", "astronaut", "coffee", "rocket", "chelsea"]


def luma(img: np.ndarray) -> np.ndarray:
    if img.ndim == 2:
        return img.astype(np.uint8)
    rgb = img[..., :3].astype(np.float64)
    y = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
    return np.clip(np.rint(y), 0, 255).astype(np.uint8)


def main(out_dir: str) -> None:
    out = pathlib.Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name in NAMES:
        y = luma(getattr(skimage.data, name)())
        h, w = y.shape
        with open(out / f"{name}.pgm", "wb") as f:
            f.write(f"P5\n{w} {h}\n255\n".encode())
            f.write(y.tobytes())
        print(f"{name}.pgm {w}x{h}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/images")
