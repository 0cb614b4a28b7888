"""Compare the compiled and pure-Python rounding backends.

Each backend runs in its own interpreter (the backend is fixed at import),
so the workloads are executed in a subprocess with UEMETRICS_BACKEND set.

    python3 benchmarks/bench_backends.py --repeat 3
"""

import argparse
import json
import os
import subprocess
import sys
import time

WORKLOADS = ("arith", "enclose", "cap", "pullback")


def _arith():
    import numpy as np
    from uemetrics.interval import Interval

    rng = np.random.default_rng(0)
    vals = rng.standard_normal((20_000, 2))
    ivs = [Interval(float(min(a, b)), float(max(a, b))) for a, b in vals]
    acc = Interval(0.0)
    for a, b in zip(ivs, ivs[1:]):
        acc = acc + a * b - b.sqr()
    return acc


def _enclose():
    from uemetrics.interval import EnclosureFn, Interval, enclose_range

    f = EnclosureFn(Interval(-2, 3), lambda d: d.sin() * d.exp(),
                    lambda d: (d.sin() + d.cos()) * d.exp())
    return enclose_range(f, f.domain, 18)


def _cap():
    from uemetrics.analysis import certify_derivative_chain, certify_scal_positive
    from uemetrics.construction import assemble_conical_cap
    from uemetrics.spheres import Round

    g = assemble_conical_cap(8, Round(7))
    return certify_scal_positive(g, target=21.0), certify_derivative_chain(g)


def _pullback():
    from uemetrics.analysis import certify_scal_positive
    from uemetrics.construction import build_pullback_singularity
    from uemetrics.spheres import LatitudeTwist

    g = build_pullback_singularity("sphere", LatitudeTwist(3, 1.0))
    return certify_scal_positive(g, target=10.0, depth=20)


def run_worker(repeat):
    """Time every workload in this interpreter and print JSON."""
    from uemetrics.interval import BACKEND

    fns = {"arith": _arith, "enclose": _enclose, "cap": _cap, "pullback": _pullback}
    out = {"backend": BACKEND}
    for name in WORKLOADS:
        best = float("inf")
        for _ in range(repeat):
            t0 = time.perf_counter()
            fns[name]()
            best = min(best, time.perf_counter() - t0)
        out[name] = best
    print(json.dumps(out))


def run_backend(backend, repeat):
    env = dict(os.environ)
    if backend == "python":
        env["UEMETRICS_BACKEND"] = "python"
    else:
        env.pop("UEMETRICS_BACKEND", None)
    cmd = [sys.executable, __file__, "--worker", "--repeat", str(repeat)]
    res = subprocess.run(cmd, env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3, help="runs per workload (best is kept)")
    ap.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    ap.add_argument("--json", help="also write the results to this file")
    args = ap.parse_args(argv)
    if args.worker:
        run_worker(args.repeat)
        return 0

    compiled = run_backend("compiled", args.repeat)
    python = run_backend("python", args.repeat)
    if compiled["backend"] != "compiled":
        print("note: compiled kernel not built; both runs use the Python fallback")
    print(f"{'workload':10s} {'compiled [s]':>13s} {'python [s]':>11s} {'speed-up':>9s}")
    for name in WORKLOADS:
        c, p = compiled[name], python[name]
        print(f"{name:10s} {c:13.4f} {p:11.4f} {p / c:8.2f}x")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"compiled": compiled, "python": python}, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
