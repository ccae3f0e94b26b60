"""Benchmark the hot kernels on both backends.

The package selects the jitted kernels at import time; this script runs the
same workload in two subprocesses (QKZHYPER_NO_NUMBA unset / set) and prints
a timing table.  The workload mirrors the dominant acceptance loads: plain
q-Pochhammer and theta products on quadrature-sized grids, the paired-ratio
kernel, and a full ell = 2 q-beta certification integral.
"""

import json
import os
import subprocess
import sys
import textwrap

WORK = textwrap.dedent(
    """
    import json, time
    import numpy as np
    import qkzhyper.kernels as K
    from qkzhyper import integrate as ig
    from qkzhyper.numkernel import qpoch, theta, qpoch_ratio

    rng = np.random.default_rng(0)
    u = rng.uniform(0.3, 1.5, 1 << 20) * np.exp(1j * rng.uniform(0, 2 * np.pi, 1 << 20))
    p = 0.2 + 0.05j

    # warm-up (jit compilation)
    qpoch(u[:64], p); theta(u[:64], p); qpoch_ratio(u[:64], 2 * u[:64], p)

    out = {"backend": K.BACKEND}
    t0 = time.perf_counter(); qpoch(u, p); out["qpoch_1M"] = time.perf_counter() - t0
    t0 = time.perf_counter(); theta(u, p); out["theta_1M"] = time.perf_counter() - t0
    t0 = time.perf_counter(); qpoch_ratio(u, 2.0 * u, p); out["ratio_1M"] = time.perf_counter() - t0

    a, b, c, x, pp = 0.3 + 0.1j, 0.35 - 0.05j, 1.2 + 0.4j, 0.4 + 0.1j, 0.2 + 0.03j
    t0 = time.perf_counter()
    ig.torus_integral(ig.qbeta_integrand(a, b, c, x, pp, 2), 2, ig.QuadratureSpec(128), measure="dt")
    out["qbeta_l2_M128"] = time.perf_counter() - t0
    print(json.dumps(out))
    """
)


def run(disable_numba):
    env = dict(os.environ)
    if disable_numba:
        env["QKZHYPER_NO_NUMBA"] = "1"
    else:
        env.pop("QKZHYPER_NO_NUMBA", None)
    proc = subprocess.run([sys.executable, "-c", WORK], env=env, capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(proc.stderr)
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main():
    rows = [run(False), run(True)]
    keys = [k for k in rows[0] if k != "backend"]
    print(f"{'kernel':<16}" + "".join(f"{r['backend']:>12}" for r in rows) + f"{'speedup':>10}")
    for k in keys:
        speed = rows[1][k] / rows[0][k]
        print(f"{k:<16}" + "".join(f"{r[k]:>11.3f}s" for r in rows) + f"{speed:>9.1f}x")


if __name__ == "__main__":
    main()
