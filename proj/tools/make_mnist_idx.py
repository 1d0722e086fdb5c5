#!/usr/bin/env python3
"""Convert a 784+1 column MNIST CSV (pixels then label) into IDX files.

The 5000-sample subset bundled with the mlxtend wheel works out of the box:

    pip download mlxtend --no-deps -d /tmp/mlx
    python3 tools/make_mnist_idx.py --wheel /tmp/mlx/mlxtend-*.whl --out data/mnist
"""
import argparse
import gzip
import io
import pathlib
import struct
import zipfile


def read_rows(args):
    if args.wheel:
        with zipfile.ZipFile(args.wheel) as z:
            raw = gzip.decompress(z.read("mlxtend/data/data/mnist_5k.csv.gz"))
    else:
        raw = pathlib.Path(args.csv).read_bytes()
        if args.csv.endswith(".gz"):
            raw = gzip.decompress(raw)
    for line in io.StringIO(raw.decode()):
        line = line.strip()
        if line:
            vals = [int(float(v)) for v in line.split(",")]
            yield vals[:-1], vals[-1]


def main():
    p = argparse.ArgumentParser()
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--wheel")
    src.add_argument("--csv")
    p.add_argument("--out", required=True)
    p.add_argument("--prefix", default="mnist5k")
    args = p.parse_args()

    rows = list(read_rows(args))
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / f"{args.prefix}-images-idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(rows), 28, 28))
        for pixels, _ in rows:
            assert len(pixels) == 784
            f.write(bytes(pixels))
    with open(out / f"{args.prefix}-labels-idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(rows)))
        f.write(bytes(label for _, label in rows))
    print(f"wrote {len(rows)} samples to {out}")


if __name__ == "__main__":
    main()
