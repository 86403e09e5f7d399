#!/usr/bin/env python3
"""Writes re-injection kernel fixtures computed with plain scalar loops.

Each fixture is {d, D, activation, w1, w2, x, zv, alpha, expected} where
expected = alpha * sum_j act(<x, z_j>) z_j + (1 - alpha) * act(x W1) W2^T.
The C++ kernel is checked against these files; nothing here shares code with it.
"""
import argparse
import json
import math
import os
import random


def act(name, v):
    if name == "relu":
        return v if v > 0.0 else 0.0
    return v / (1.0 + math.exp(-v))


def vanilla_ffn(x, w1, w2, name):
    d, hidden = len(w1), len(w1[0])
    h = [act(name, sum(x[r] * w1[r][i] for r in range(d))) for i in range(hidden)]
    return [sum(h[i] * w2[r][i] for i in range(hidden)) for r in range(d)]


def correction(x, zv, name):
    out = [0.0] * len(x)
    for z in zv:
        g = act(name, sum(a * b for a, b in zip(x, z)))
        for r in range(len(x)):
            out[r] += g * z[r]
    return out


def fixture(d, hidden, name, w1, w2, x, zv, alpha):
    f = vanilla_ffn(x, w1, w2, name)
    c = correction(x, zv, name)
    expected = [alpha * c[r] + (1.0 - alpha) * f[r] for r in range(d)]
    return {"d": d, "D": hidden, "activation": name, "w1": w1, "w2": w2, "x": x, "zv": zv,
            "alpha": alpha, "expected": expected}


def random_fixture(rng, index):
    d = rng.randint(1, 8)
    hidden = rng.randint(1, 32)
    name = "relu" if index % 2 == 0 else "silu"
    mat = lambda rows, cols: [[rng.gauss(0.0, 1.0) for _ in range(cols)] for _ in range(rows)]
    w1, w2 = mat(d, hidden), mat(d, hidden)
    x = [rng.gauss(0.0, 1.0) for _ in range(d)]
    zv = mat(rng.randint(0, 6), d)
    alpha = [0.3, 0.0, 1.0, 0.3, rng.random()][index % 5]
    return fixture(d, hidden, name, w1, w2, x, zv, alpha)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "tests", "fixtures", "kernel"))
    ap.add_argument("--count", type=int, default=40)
    ap.add_argument("--seed", type=int, default=20240601)
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)

    rng = random.Random(args.seed)
    fixtures = {
        "hand_single_unit": fixture(1, 1, "relu", [[3.0]], [[0.5]], [2.0], [], 0.0),
        "hand_correction": fixture(2, 1, "relu", [[0.0], [0.0]], [[0.0], [0.0]], [1.0, 0.0], [[2.0, 1.0]], 1.0),
        "hand_default_alpha": fixture(2, 2, "relu", [[1.0, -1.0], [0.5, 2.0]], [[1.0, 0.0], [0.0, 1.0]],
                                      [1.0, 1.0], [[2.0, 1.0], [-1.0, -3.0]], 0.3),
    }
    for i in range(args.count):
        fixtures["random_%03d" % i] = random_fixture(rng, i)
    for name, fx in fixtures.items():
        with open(os.path.join(args.out, name + ".json"), "w") as fh:
            json.dump(fx, fh)
            fh.write("\n")
    print("wrote %d fixtures to %s" % (len(fixtures), os.path.normpath(args.out)))


if __name__ == "__main__":
    main()
