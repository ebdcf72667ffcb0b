#!/usr/bin/env python3
"""Build the MNIST subset shipped under data/mnist/ from the npm `mnist` package.

The npm package (https://www.npmjs.com/package/mnist, v1.1.0) bundles 10,000
MNIST digits as JSON arrays of pixel/255 rounded to three decimals, so the
original byte values are recovered exactly with round(x * 255).

Usage:
    npm pack mnist@1.1.0 && tar xzf mnist-1.1.0.tgz
    python3 scripts/mnist_subset.py package/src/digits data/mnist

Writes gzipped IDX files: 5,000 training images (500 per digit) and 1,000
test images (100 per digit, disjoint from training), each shuffled with a
fixed seed.
"""

import gzip
import json
import random
import struct
import sys
from pathlib import Path

TRAIN_PER_CLASS = 500
TEST_PER_CLASS = 100
PIXELS = 784


def load_digit(digits_dir, digit):
    flat = json.loads((digits_dir / f"{digit}.json").read_text())["data"]
    assert len(flat) % PIXELS == 0
    images = []
    for start in range(0, len(flat), PIXELS):
        px = [round(x * 255) for x in flat[start:start + PIXELS]]
        assert all(0 <= p <= 255 for p in px)
        images.append(bytes(px))
    return images


def write_idx(out_dir, stem, samples):
    with gzip.GzipFile(out_dir / f"{stem}-images-idx3-ubyte.gz", "wb", mtime=0) as f:
        f.write(struct.pack(">IIII", 0x803, len(samples), 28, 28))
        for img, _ in samples:
            f.write(img)
    with gzip.GzipFile(out_dir / f"{stem}-labels-idx1-ubyte.gz", "wb", mtime=0) as f:
        f.write(struct.pack(">II", 0x801, len(samples)))
        f.write(bytes(label for _, label in samples))


def main():
    digits_dir, out_dir = Path(sys.argv[1]), Path(sys.argv[2])
    out_dir.mkdir(parents=True, exist_ok=True)
    train, test = [], []
    for digit in range(10):
        images = load_digit(digits_dir, digit)
        assert len(images) >= TRAIN_PER_CLASS + TEST_PER_CLASS
        train += [(img, digit) for img in images[:TRAIN_PER_CLASS]]
        test += [(img, digit) for img in images[TRAIN_PER_CLASS:TRAIN_PER_CLASS + TEST_PER_CLASS]]
    rng = random.Random(0)
    rng.shuffle(train)
    rng.shuffle(test)
    write_idx(out_dir, "train", train)
    write_idx(out_dir, "t10k", test)
    print(f"wrote {len(train)} train / {len(test)} test images to {out_dir}")


if __name__ == "__main__":
    main()
