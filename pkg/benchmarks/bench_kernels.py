"""Compare the numba-compiled kernels with the pure-Python fallback.

Each backend runs in its own interpreter because the switch is read at
import time from PUCCI_RADIAL_NUMBA. The numba timing excludes compilation
(one warm-up call first).

    python3 benchmarks/bench_kernels.py [--repeat 3] [--json out.json]
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import textwrap

WORKLOAD = textwrap.dedent(
    """
    import json, time
    from pucci_radial import OperatorSpec, StopRule, integrate_from_center
    from pucci_radial._jit import USE_NUMBA
    from pucci_radial.energy import total_energy

    spec = OperatorSpec(1.0, 1.5, 4)
    tol = {tol!r}

    def shoot():
        return integrate_from_center(spec, 2.1, tol=tol, stop=StopRule(2))

    def energy(prof):
        return total_energy(prof, 2, 1e-8).total

    prof = shoot()
    energy(prof)
    out = {{"numba": USE_NUMBA, "steps": len(prof.grid)}}
    for name, fn in (("integrate", shoot), ("quadrature", lambda: energy(prof))):
        best = float("inf")
        for _ in range({repeat}):
            t0 = time.perf_counter()
            fn()
            best = min(best, time.perf_counter() - t0)
        out[name] = best
    out["energy"] = energy(prof)
    out["second_zero"] = float(prof.zeros[1])
    print(json.dumps(out))
    """
)


def run_backend(numba: bool, repeat: int, tol: float) -> dict:
    env = dict(os.environ, PUCCI_RADIAL_NUMBA="1" if numba else "0")
    code = WORKLOAD.format(repeat=repeat, tol=tol)
    res = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--tol", type=float, default=1e-10, help="integration tolerance of the workload")
    ap.add_argument("--json", help="write the raw timings here")
    args = ap.parse_args(argv)

    fast = run_backend(True, args.repeat, args.tol)
    slow = run_backend(False, args.repeat, args.tol)
    if not fast["numba"]:
        print("numba unavailable; both runs used the fallback", file=sys.stderr)
    print(f"{'kernel':<12}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}")
    for key in ("integrate", "quadrature"):
        print(f"{key:<12}{fast[key]:>12.4g}{slow[key]:>12.4g}{slow[key] / fast[key]:>10.1f}")
    agree = abs(fast["energy"] - slow["energy"]) <= 1e-9 * abs(fast["energy"])
    print(f"grid points {fast['steps']}, backends agree on energy: {agree}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"numba": fast, "fallback": slow, "agree": agree}, fh, indent=2)
    return 0 if agree else 1


if __name__ == "__main__":
    sys.exit(main())
