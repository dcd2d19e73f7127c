#!/usr/bin/env python3
"""Convert the digit sample bundled with the `mnist` npm package into IDX files.

The npm package (MIT licensed, https://www.npmjs.com/package/mnist) ships
10,000 real MNIST digits as JSON arrays of pixel intensities in [0, 1]
rounded to three decimals. This script restores byte intensities
(round(v * 255)), splits each digit class 80/20 by position into train and
test parts, interleaves classes round-robin, and writes the four canonical
IDX files.

    npm pack mnist && tar xzf mnist-*.tgz
    python3 tools/make_mnist_idx.py package/src/digits data/mnist
"""

import json
import os
import struct
import sys

SIZE = 28


def load_digit(path):
    raw = json.load(open(path))["data"]
    n = len(raw) // (SIZE * SIZE)
    return [raw[k * SIZE * SIZE:(k + 1) * SIZE * SIZE] for k in range(n)]


def interleave(per_class):
    out = []
    longest = max(len(v) for v in per_class.values())
    for k in range(longest):
        for label in sorted(per_class):
            if k < len(per_class[label]):
                out.append((label, per_class[label][k]))
    return out


def write_idx(prefix, samples):
    with open(prefix + "-images-idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(samples), SIZE, SIZE))
        for _, img in samples:
            f.write(bytes(min(255, max(0, round(v * 255))) for v in img))
    with open(prefix + "-labels-idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(samples)))
        f.write(bytes(label for label, _ in samples))


def main():
    src, dst = sys.argv[1], sys.argv[2]
    os.makedirs(dst, exist_ok=True)
    train, test = {}, {}
    for label in range(10):
        images = load_digit(os.path.join(src, f"{label}.json"))
        cut = (len(images) * 4) // 5
        train[label] = images[:cut]
        test[label] = images[cut:]
    write_idx(os.path.join(dst, "train"), interleave(train))
    write_idx(os.path.join(dst, "t10k"), interleave(test))


if __name__ == "__main__":
    main()
