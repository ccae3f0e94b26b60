"""Admissible parameter sampling.

Draws are rejected until the genericity margins hold and every pole family
keeps a safe modulus band around the quadrature torus, so the trapezoidal
rule converges at the advertised geometric rate.
"""

import math

import numpy as np

from .errors import SamplingError
from .numkernel import ParameterSet

BAND = 0.75  # pole moduli must stay outside [BAND, 1/BAND] around the torus
MARGIN = 0.05
KAPPA_MARGIN = 0.02


def _band_ok(value, band=BAND, smax=60, p=None):
    """All |p^s value| outside the modulus band around 1."""
    v = abs(value)
    ap = abs(p)
    for _ in range(smax):
        if band < v < 1.0 / band:
            return False
        v *= ap
        if v < band * ap:
            break
    return True


def quadrature_band_ok(params, band=BAND):
    for m in range(params.n):
        if not _band_ok(params.xi[m] * params.z[m], band, p=params.p):
            return False
        if not _band_ok(params.z[m] / params.xi[m] / params.p, band, p=params.p):
            return False
    r = abs(params.eta)
    if not (_band_ok(1.0 / r, band, p=params.p) and _band_ok(r * abs(params.p), band, p=params.p)):
        return False
    return True


def kappa_margins_ok(params, delta=KAPPA_MARGIN, smax=40):
    """Distance of kappa from the two special-value lattices and of the
    Wbasis resonance products from p^s eta^r."""
    p, eta = params.p, params.eta
    ell = params.ell
    for r in range(max(ell, 1)):
        base_p = eta**-r * params.xi_prod
        base_m = eta**r / params.xi_prod
        for s in range(smax):
            if abs(params.kappa / (p**s * base_p) - 1) < delta:
                return False
            if abs(params.kappa * p ** (s + 1) / base_m - 1) < delta:
                return False
    for m in range(params.n - 1):
        prod = params.kappa
        for i in range(params.n):
            prod = prod * params.xi[i] if i <= m else prod / params.xi[i]
        for r in range(1 - ell, ell):
            v = prod * eta**-r
            s0 = round(math.log(abs(v)) / math.log(abs(p))) if abs(v) > 0 else 0
            for s in range(s0 - 2, s0 + 3):
                if abs(v / p**s - 1) < delta:
                    return False
    return True


def sample_params(seed, n, ell, regime="convergent", attempts=1000, delta=MARGIN):
    """Deterministic admissible draw.

    regimes:
      convergent       |z| = 1, |p| in [0.08, 0.22], |eta| in [1.6, 2.6],
                       |xi| in [0.3, 0.48], kappa order one
      solution         as convergent with kappa small enough for the x-side
                       Jackson representation
      jackson_overlap  tiny |p| so both Jackson representations converge
                       together with the straight torus
      asymptotic       small kappa for the zone checks
      small_xi         |xi| < |p| (annulus argument for the derivative tests)
    """
    rng = np.random.default_rng(seed)
    for _ in range(attempts):
        if regime in ("convergent", "solution", "asymptotic"):
            pmod = rng.uniform(0.08, 0.22)
            emod = rng.uniform(1.6, 2.6)
            xmod = [rng.uniform(0.3, 0.48) for _ in range(n)]
        elif regime == "jackson_overlap":
            emod = rng.uniform(1.35, 1.5)
            xmod = [rng.uniform(0.42, 0.5) for _ in range(n)]
            pmax = emod ** (2 - 2 * ell) * float(np.prod(xmod)) ** 2
            pmod = 0.05 * pmax
        elif regime == "small_xi":
            pmod = rng.uniform(0.25, 0.35)
            emod = rng.uniform(1.9, 2.6)
            xmod = [rng.uniform(0.3, 0.45) * pmod for _ in range(n)]
        else:
            raise ValueError(f"unknown regime {regime!r}")
        p = pmod * np.exp(1j * rng.uniform(0, 2 * np.pi))
        eta = emod * np.exp(1j * rng.uniform(-0.35, 0.35))
        xi = tuple(xm * np.exp(1j * rng.uniform(0, 2 * np.pi)) for xm in xmod)
        phases = np.sort(rng.uniform(0, 2 * np.pi, n))
        if n > 1:
            gaps = np.diff(np.concatenate([phases, [phases[0] + 2 * np.pi]]))
            if gaps.min() < 2 * np.pi / (4 * n):
                continue
        z = tuple(np.exp(1j * ph) for ph in phases)
        xiprod = float(np.prod(np.abs(xi)))
        if regime == "jackson_overlap":
            lo = max(1.0, emod ** (ell - 1)) / xiprod
            hi = min(1.0, emod ** (1 - ell)) * xiprod / pmod
            kmod = math.sqrt(lo * hi)
        elif regime in ("solution",):
            kmod = 0.5 * xiprod / pmod * rng.uniform(0.4, 0.8)
            kmod = min(kmod, 2.0)
        elif regime == "asymptotic":
            kmod = rng.uniform(0.12, 0.25)
        else:
            kmod = rng.uniform(0.6, 1.2)
        kappa = kmod * np.exp(1j * rng.uniform(0, 2 * np.pi))
        try:
            prm = ParameterSet(p=p, eta=eta, kappa=kappa, xi=xi, z=z, n=n, ell=ell)
        except Exception:
            continue
        marg = prm.margins()
        if min(marg.values()) < delta:
            continue
        if not kappa_margins_ok(prm):
            continue
        if regime != "small_xi" and not quadrature_band_ok(prm):
            continue
        if regime == "solution" and abs(p * kappa / prm.xi_prod) >= 0.8:
            continue
        return prm
    raise SamplingError(f"no admissible draw after {attempts} attempts (seed={seed})")
