#!/usr/bin/env python3
"""Write a Gaussian splatting PLY in the reference exporter layout.

Independent of the C++ writer; used to produce tests/data/fixture_4096.ply.
Also writes <out>.samples.json with a few decoded vertices for spot checks.
"""
import argparse
import json

import numpy as np


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("out")
    parser.add_argument("--count", type=int, default=4096)
    parser.add_argument("--sh-degree", type=int, default=1)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    n = args.count
    n_rest = 3 * ((args.sh_degree + 1) ** 2 - 1)
    names = ["x", "y", "z", "nx", "ny", "nz", "f_dc_0", "f_dc_1", "f_dc_2"]
    names += [f"f_rest_{i}" for i in range(n_rest)]
    names += ["opacity", "scale_0", "scale_1", "scale_2", "rot_0", "rot_1", "rot_2", "rot_3"]

    data = np.zeros((n, len(names)), dtype="<f4")
    col = {name: i for i, name in enumerate(names)}
    data[:, 0:3] = rng.normal(0.0, 2.0, (n, 3))
    data[:, col["f_dc_0"]:col["f_dc_0"] + 3] = rng.normal(0.0, 1.0, (n, 3))
    if n_rest:
        data[:, col["f_rest_0"]:col["f_rest_0"] + n_rest] = rng.normal(0.0, 0.2, (n, n_rest))
    data[:, col["opacity"]] = rng.normal(0.0, 2.0, n)
    data[:, col["scale_0"]:col["scale_0"] + 3] = rng.normal(-3.0, 0.5, (n, 3))
    quats = rng.normal(0.0, 1.0, (n, 4))
    quats /= np.linalg.norm(quats, axis=1, keepdims=True)
    data[:, col["rot_0"]:col["rot_0"] + 4] = quats
    data[0, col["opacity"]] = 0.0

    header = ["ply", "format binary_little_endian 1.0", f"element vertex {n}"]
    header += [f"property float {name}" for name in names]
    header += ["end_header"]
    with open(args.out, "wb") as f:
        f.write(("\n".join(header) + "\n").encode("ascii"))
        f.write(data.tobytes())

    samples = []
    for i in [0, 1, n // 2, n - 1]:
        row = data[i]
        samples.append({
            "index": i,
            "position": [float(v) for v in row[0:3]],
            "f_dc": [float(v) for v in row[col["f_dc_0"]:col["f_dc_0"] + 3]],
            "f_rest": [float(v) for v in row[col["f_dc_0"] + 3:col["f_dc_0"] + 3 + n_rest]],
            "opacity": float(row[col["opacity"]]),
            "scale": [float(v) for v in row[col["scale_0"]:col["scale_0"] + 3]],
            "rotation": [float(v) for v in row[col["rot_0"]:col["rot_0"] + 4]],
        })
    with open(args.out + ".samples.json", "w") as f:
        json.dump({"count": n, "sh_degree": args.sh_degree, "samples": samples}, f, indent=2)


if __name__ == "__main__":
    main()
