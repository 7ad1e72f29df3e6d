#!/usr/bin/env python3
"""Smoke test for the pvf_py extension module.

Builds the cdylib with cargo if needed, loads it, and exercises matrix
generation, freeze/thaw round-trips, the privacy check, and one simulated
aggregation round per backend.

Usage: python3 python/smoke_test.py
"""

import shutil
import subprocess
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
P = (1 << 61) - 1


def build_and_import():
    print("building pvf-python (release) ...")
    subprocess.run(
        ["cargo", "build", "--release", "-p", "pvf-python"],
        cwd=REPO,
        check=True,
    )
    target = REPO / "target" / "release" / "libpvf_py.so"
    staged = Path(__file__).resolve().parent / "pvf_py.so"
    if not staged.exists() or staged.stat().st_mtime < target.stat().st_mtime:
        shutil.copy2(target, staged)
    sys.path.insert(0, str(staged.parent))
    import pvf_py

    return pvf_py


def main():
    pvf = build_and_import()
    assert pvf.DEFAULT_PRIME == P

    # Matrix generation and the element-privacy check.
    ms = pvf.FreezeMatrixSet.generate(4, delta=1, seed=7)
    assert ms.lam == 4 and ms.delta == 1
    assert ms.privacy_check()
    assert ms.compression_ratio() == (1, 2)
    leaky = [[1, 2, 3], [1, 3, 3]]
    assert not pvf.matrix_privacy_check(leaky)
    print("ok: matrix generation and privacy check")

    # Freeze three users, aggregate the images, thaw, compare to the sum.
    m = 10
    users = [[(3 * u + i) % 1000 for i in range(m)] for u in range(3)]
    sum_y, sum_k = None, None
    for u, x in enumerate(users):
        y, k = ms.freeze(x, pad_seed=u)
        if sum_y is None:
            sum_y, sum_k = list(y), list(k)
        else:
            sum_y = [(a + b) % P for a, b in zip(sum_y, y)]
            sum_k = [(a + b) % P for a, b in zip(sum_k, k)]
    thawed = ms.thaw(sum_y, sum_k, m)
    expected = [sum(col) % P for col in zip(*users)]
    assert thawed == expected, f"{thawed} != {expected}"
    print("ok: freeze/thaw equals the plain sum")

    # Matrix files round-trip.
    path = Path(__file__).resolve().parent / "matrices.pvfz"
    ms.save(str(path))
    again = pvf.FreezeMatrixSet.load(str(path))
    assert again.lam == ms.lam and again.privacy_check()
    path.unlink()
    print("ok: matrix serialization round-trip")

    # One simulated round per backend, with dropouts and extensions.
    for backend, extension in [("mask", "none"), ("mask", "uce"), ("he", "none"), ("mask", "rve")]:
        report = pvf.simulate_round(
            n=5, m=40, lam=4, delta=1, eta=0.2,
            backend=backend, extension=extension, seed=11,
        )
        assert report["correctness"], (backend, extension, report)
        assert len(report["survivors"]) == 4
        assert report["backend_entries_per_user"] == 20
        print(f"ok: {backend}/{extension} round, "
              f"user bytes {report['user_bytes']}")

    print("smoke test passed")


if __name__ == "__main__":
    main()
