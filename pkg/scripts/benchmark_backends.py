"""Compare the compiled split-scan kernel against the numpy fallback.

Checks that both backends return identical results on random problems, then
times the bare kernel at a few shapes and one full training run each way.
The end-to-end timing re-runs this interpreter in a subprocess because the
backend is chosen once at import time.

Usage: python3 scripts/benchmark_backends.py [--repeats N]
"""

import argparse
import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from slamaudit.gbdt import _scan_python  # noqa: E402

try:
    from slamaudit.gbdt import _scan_cython
except ImportError:
    _scan_cython = None

SHAPES = ((50, 200), (200, 1500), (400, 6000))


def random_problem(rng, n_features, k):
    vals = np.sort(rng.random((n_features, k)), axis=1)
    # quantize some rows so tied values and invalid cuts get exercised
    vals[:: 3] = np.round(vals[:: 3], 1)
    g = rng.standard_normal((n_features, k))
    h = rng.random((n_features, k)) * 0.25
    return vals, g, h


def check_agreement(rng, rounds=200):
    for i in range(rounds):
        f = int(rng.integers(1, 30))
        k = int(rng.integers(2, 120))
        vals, g, h = random_problem(rng, f, k)
        lam = float(rng.choice((0.0, 1.0, 5.0)))
        min_leaf = int(rng.integers(1, 10))
        a = _scan_python.scan_splits(vals, g, h, lam, min_leaf)
        b = _scan_cython.scan_splits(vals, g, h, lam, min_leaf)
        if a != b:
            raise SystemExit(f"backends disagree on case {i}: {a} vs {b}")
    print(f"agreement: {rounds} random problems, results identical")


def time_kernel(fn, vals, g, h, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(vals, g, h, 1.0, 20)
        best = min(best, time.perf_counter() - start)
    return best


def time_training(pure_python):
    env = dict(os.environ)
    if pure_python:
        env["SLAMAUDIT_PURE_PYTHON"] = "1"
    else:
        env.pop("SLAMAUDIT_PURE_PYTHON", None)
    code = (
        "import time, sys; sys.path.insert(0, 'src')\n"
        "from slamaudit.slam_format import read_dataset, Track, Split\n"
        "from slamaudit.features import build_vocab\n"
        "from slamaudit.gbdt import GbdtConfig, train_gbdt\n"
        "from slamaudit.gbdt._backend import active_backend\n"
        "ds = read_dataset('data/mini/en_es.train.slam', Track.EN_ES, Split.TRAIN)\n"
        "vocab = build_vocab(ds)\n"
        "start = time.perf_counter()\n"
        "train_gbdt(ds, vocab, GbdtConfig())\n"
        "print(f'{active_backend()} {time.perf_counter() - start:.3f}')\n"
    )
    out = subprocess.run(
        [sys.executable, "-c", code], cwd=REPO, env=env,
        capture_output=True, text=True, check=True,
    )
    backend, seconds = out.stdout.split()
    return backend, float(seconds)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=7)
    args = parser.parse_args(argv)

    if _scan_cython is None:
        print("compiled kernel not importable; nothing to compare")
        return 1

    rng = np.random.default_rng(7)
    check_agreement(rng)

    print(f"\nkernel best-of-{args.repeats}:")
    print(f"{'shape':>14} {'python':>10} {'cython':>10} {'speedup':>8}")
    for f, k in SHAPES:
        vals, g, h = random_problem(rng, f, k)
        tp = time_kernel(_scan_python.scan_splits, vals, g, h, args.repeats)
        tc = time_kernel(_scan_cython.scan_splits, vals, g, h, args.repeats)
        print(f"{f:>6} x {k:<5} {tp * 1e3:>9.2f}ms {tc * 1e3:>9.2f}ms {tp / tc:>7.1f}x")

    print("\nfull training on data/mini/en_es.train.slam (default config):")
    for pure in (True, False):
        backend, seconds = time_training(pure)
        print(f"  {backend:>6}: {seconds:.2f}s")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
