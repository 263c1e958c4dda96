#!/usr/bin/env python3
"""Export the scikit-learn handwritten digits set as IDX files.

Produces digits-images-idx3-ubyte.gz / digits-labels-idx1-ubyte.gz in the
repository data/ directory: 1797 samples of 8x8 grayscale pixels, ten
classes. Pixel values 0..16 are rescaled to the 0..255 byte range.
"""
import gzip
import struct
from pathlib import Path

from sklearn.datasets import load_digits


def main() -> None:
    out_dir = Path(__file__).resolve().parent.parent / "data"
    out_dir.mkdir(exist_ok=True)

    digits = load_digits()
    images = digits.images  # (n, 8, 8) floats in 0..16
    labels = digits.target  # (n,) ints 0..9
    n, rows, cols = images.shape

    img_payload = bytearray()
    img_payload += struct.pack(">IIII", 0x00000803, n, rows, cols)
    for img in images:
        for row in img:
            for v in row:
                img_payload.append(int(round(v * 255.0 / 16.0)))

    lbl_payload = bytearray()
    lbl_payload += struct.pack(">II", 0x00000801, n)
    lbl_payload += bytes(int(v) for v in labels)

    for name, payload in [
        ("digits-images-idx3-ubyte.gz", img_payload),
        ("digits-labels-idx1-ubyte.gz", lbl_payload),
    ]:
        with open(out_dir / name, "wb") as raw:
            with gzip.GzipFile(fileobj=raw, mode="wb", mtime=0) as f:
                f.write(bytes(payload))

    print(f"wrote {n} samples ({rows}x{cols}) to {out_dir}")


if __name__ == "__main__":
    main()
