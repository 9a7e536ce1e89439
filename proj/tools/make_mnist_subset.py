#!/usr/bin/env python3
"""Build a small MNIST subset in IDX format from the `mnist` npm package.

The npm package (https://www.npmjs.com/package/mnist) ships 10,000 MNIST
digits as JSON with pixel intensities rounded to three decimals. This script
restores the raw bytes (round(v * 255)), shuffles with a fixed seed and writes
train/test IDX files that the C++ loader reads.

    npm pack mnist && tar xzf mnist-*.tgz
    python3 tools/make_mnist_subset.py package/src/digits data/mnist-subset
"""
import argparse
import json
import pathlib
import random
import struct


def write_idx(path, magic, dims, payload):
    with open(path, "wb") as f:
        f.write(struct.pack(">I", magic))
        for d in dims:
            f.write(struct.pack(">I", d))
        f.write(bytes(payload))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("digits_dir")
    ap.add_argument("out_dir")
    ap.add_argument("--train", type=int, default=4000)
    ap.add_argument("--test", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=20200601)
    args = ap.parse_args()

    samples = []
    for label in range(10):
        raw = json.loads((pathlib.Path(args.digits_dir) / f"{label}.json").read_text())["data"]
        for k in range(len(raw) // 784):
            pix = [min(255, max(0, round(v * 255))) for v in raw[k * 784:(k + 1) * 784]]
            samples.append((label, pix))

    random.Random(args.seed).shuffle(samples)
    if args.train + args.test > len(samples):
        raise SystemExit(f"only {len(samples)} samples available")

    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    splits = {"train": samples[:args.train], "t10k": samples[args.train:args.train + args.test]}
    for name, part in splits.items():
        write_idx(out / f"{name}-images-idx3-ubyte", 0x00000803, (len(part), 28, 28),
                  [p for _, pix in part for p in pix])
        write_idx(out / f"{name}-labels-idx1-ubyte", 0x00000801, (len(part),),
                  [lab for lab, _ in part])


if __name__ == "__main__":
    main()
