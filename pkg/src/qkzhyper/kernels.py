"""Hot array kernels: truncated q-Pochhammer and Jacobi theta products.

Every higher-level function in the package funnels through `qpoch_array` /
`theta_array`, evaluated over large quadrature grids, so these two loops
dominate the runtime.  The jitted path is selected at import time; set
``QKZHYPER_NO_NUMBA=1`` to force the pure-numpy implementations (identical
truncation order, same results up to floating-point contraction).

Run ``python benchmarks/bench_kernels.py`` to compare both paths.
"""

import os

import numpy as np

_env = os.environ.get("QKZHYPER_NO_NUMBA", "").strip()
_want_numba = _env in ("", "0")


def _qpoch_numpy(u, p, nterms):
    out = np.ones_like(u)
    w = u.copy()
    for _ in range(nterms):
        out *= 1.0 - w
        w *= p
    return out


def _theta_numpy(u, p, nterms, pp_inf):
    return _qpoch_numpy(u, p, nterms) * _qpoch_numpy(p / u, p, nterms) * pp_inf


def _qpoch_ratio_numpy(a, b, p, nterms):
    out = np.ones_like(a)
    wa = a.copy()
    wb = b.copy()
    for _ in range(nterms):
        out *= (1.0 - wa) / (1.0 - wb)
        wa *= p
        wb *= p
    return out


_HAVE_NUMBA = False
if _want_numba:
    try:
        import numba

        @numba.njit(cache=True)
        def _qpoch_numba(u, p, nterms):  # pragma: no cover - jitted
            out = np.empty_like(u)
            for i in range(u.shape[0]):
                acc = 1.0 + 0.0j
                w = u[i]
                for _ in range(nterms):
                    acc *= 1.0 - w
                    w *= p
                out[i] = acc
            return out

        @numba.njit(cache=True)
        def _theta_numba(u, p, nterms, pp_inf):  # pragma: no cover - jitted
            out = np.empty_like(u)
            for i in range(u.shape[0]):
                acc = 1.0 + 0.0j
                w = u[i]
                v = p / u[i]
                for _ in range(nterms):
                    acc *= (1.0 - w) * (1.0 - v)
                    w *= p
                    v *= p
                out[i] = acc * pp_inf
            return out

        @numba.njit(cache=True)
        def _qpoch_ratio_numba(a, b, p, nterms):  # pragma: no cover - jitted
            out = np.empty_like(a)
            for i in range(a.shape[0]):
                acc = 1.0 + 0.0j
                wa = a[i]
                wb = b[i]
                for _ in range(nterms):
                    acc *= (1.0 - wa) / (1.0 - wb)
                    wa *= p
                    wb *= p
                out[i] = acc
            return out

        _HAVE_NUMBA = True
    except ImportError:
        _HAVE_NUMBA = False

BACKEND = "numba" if _HAVE_NUMBA else "numpy"


def qpoch_array(u, p, nterms):
    """Truncated (u; p)_infinity = prod_{k<nterms} (1 - p^k u), elementwise."""
    u = np.asarray(u, dtype=np.complex128)
    shape = u.shape
    flat = np.ascontiguousarray(u.reshape(-1))
    p = complex(p)
    if _HAVE_NUMBA:
        out = _qpoch_numba(flat, p, int(nterms))
    else:
        out = _qpoch_numpy(flat, p, int(nterms))
    return out.reshape(shape)


def theta_array(u, p, nterms, pp_inf):
    """Truncated Jacobi theta (u)_inf (p/u)_inf (p)_inf; pp_inf = (p;p)_inf."""
    u = np.asarray(u, dtype=np.complex128)
    shape = u.shape
    flat = np.ascontiguousarray(u.reshape(-1))
    p = complex(p)
    if _HAVE_NUMBA:
        out = _theta_numba(flat, p, int(nterms), complex(pp_inf))
    else:
        out = _theta_numpy(flat, p, int(nterms), complex(pp_inf))
    return out.reshape(shape)


def qpoch_ratio_array(a, b, p, nterms):
    """Overflow-safe (a;p)_inf / (b;p)_inf with termwise factor pairing."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    shape = np.broadcast_shapes(a.shape, b.shape)
    af = np.ascontiguousarray(np.broadcast_to(a, shape).reshape(-1))
    bf = np.ascontiguousarray(np.broadcast_to(b, shape).reshape(-1))
    p = complex(p)
    if _HAVE_NUMBA:
        out = _qpoch_ratio_numba(af, bf, p, int(nterms))
    else:
        out = _qpoch_ratio_numpy(af, bf, p, int(nterms))
    return out.reshape(shape)
