"""Analytic pairings and closed-form right-hand sides.

Torus quadrature for the hypergeometric integral, nested multiple residues,
Jackson residue sums, Shapovalov pairings, and the product formulas every
integral identity is certified against.  Quadrature is the trapezoidal rule
on product circles (geometrically convergent for integrands analytic in an
annulus); residues are iterated small-circle contour integrals.
"""

import cmath
import math
from dataclasses import dataclass
from math import comb, factorial

import numpy as np

from . import combin, weightfn
from .errors import ConvergenceError, DegeneracyError, PoleProximityError
from .numkernel import DEFAULT_POLICY, phase_phi, qpoch, theta, theta_ratio

TWO_PI_I = 2j * math.pi
_CHUNK = 1 << 17


@dataclass(frozen=True)
class QuadratureSpec:
    points_per_circle: int = 128
    radii: tuple = None
    guard: float = 1e-8


@dataclass(frozen=True)
class ResiduePlan:
    center: tuple
    radii: tuple
    points: int = 64


def torus_integral(f, ell, spec=QuadratureSpec(), measure="dt_over_t"):
    """Integral over the product of circles |t_a| = r_a.

    measure="dt_over_t" gives int f (dt/t)^ell = (2 pi i)^ell * mean f;
    measure="dt" gives int f d^ell t = (2 pi i)^ell * mean (f * prod t_a).
    """
    if ell == 0:
        return complex(f(np.zeros((1, 0), dtype=np.complex128))[0])
    M = spec.points_per_circle
    radii = spec.radii if spec.radii is not None else (1.0,) * ell
    # per-axis phase stagger keeps grid ratios off the p/eta lattice and the
    # diagonals t_a = t_b; an offset uniform grid integrates circles exactly
    nodes = [
        r * np.exp(TWO_PI_I * (np.arange(M) + (a + 1.0) / (ell + 2.0)) / M)
        for a, r in enumerate(radii)
    ]
    total = 0.0 + 0j
    npts = M**ell
    # walk the grid in flat chunks to bound memory
    for start in range(0, npts, _CHUNK):
        stop = min(start + _CHUNK, npts)
        idx = np.arange(start, stop)
        t = np.empty((stop - start, ell), dtype=np.complex128)
        rem = idx
        for a in range(ell - 1, -1, -1):
            t[:, a] = nodes[a][rem % M]
            rem = rem // M
        vals = np.asarray(f(t), dtype=np.complex128)
        if measure == "dt":
            vals = vals * np.prod(t, axis=-1)
        elif measure != "dt_over_t":
            raise ValueError("measure must be 'dt_over_t' or 'dt'")
        total += vals.sum()
    return TWO_PI_I**ell * total / npts


def auto_radius(params):
    """Common circle radius separating the inner family p^s xi_m z_m from the
    outer family p^-s xi_m^-1 z_m; equals 1 in the standard |z| = 1 regime."""
    rin = max(abs(params.xi[m] * params.z[m]) for m in range(params.n))
    rout = min(abs(params.z[m] / params.xi[m]) for m in range(params.n))
    if rin >= rout:
        raise PoleProximityError("pole families not separable by a product torus")
    return math.sqrt(rin * rout)


def validate_torus(params, radius, guard=1e-8):
    """Guard against quadrature circles through catalog poles."""
    for m in range(params.n):
        for fam in (abs(params.xi[m] * params.z[m]), abs(params.z[m] / params.xi[m])):
            s = fam
            for _ in range(60):
                if abs(s - radius) < guard * radius:
                    raise PoleProximityError("torus radius hits a pole family")
                s *= abs(params.p)
                if s < guard * radius:
                    break
    r = abs(params.eta)
    for fam in (r, 1.0 / r):
        s = fam
        for _ in range(60):
            if abs(s - 1.0) < guard:
                raise PoleProximityError("pair-pole family on the diagonal torus")
            s *= abs(params.p)
            if s < guard:
                break


def hyper_I(Wf, wf, params, spec=QuadratureSpec(), policy=DEFAULT_POLICY):
    """Hypergeometric pairing I(W, w) = int Phi w W (dt/t)^ell on the torus."""
    mat = hyper_I_many([Wf], [wf], params, spec, policy)
    return complex(mat[0, 0])


def hyper_I_many(Ws, ws, params, spec=QuadratureSpec(), policy=DEFAULT_POLICY):
    """Matrix [I(W_i, w_j)] sharing one phase-function evaluation per node."""
    ell = params.ell
    if ell == 0:
        z0 = np.zeros((1, 0), dtype=np.complex128)
        return np.array(
            [[complex(W(z0)[0]) * complex(w(z0)[0]) for w in ws] for W in Ws],
            dtype=np.complex128,
        )
    if spec.radii is None:
        spec = QuadratureSpec(spec.points_per_circle, (auto_radius(params),) * ell, spec.guard)
    validate_torus(params, spec.radii[0], spec.guard)
    M = spec.points_per_circle
    nodes = [
        r * np.exp(TWO_PI_I * (np.arange(M) + (a + 1.0) / (ell + 2.0)) / M)
        for a, r in enumerate(spec.radii)
    ]
    npts = M**ell
    out = np.zeros((len(Ws), len(ws)), dtype=np.complex128)
    for start in range(0, npts, _CHUNK):
        stop = min(start + _CHUNK, npts)
        idx = np.arange(start, stop)
        t = np.empty((stop - start, ell), dtype=np.complex128)
        rem = idx
        for a in range(ell - 1, -1, -1):
            t[:, a] = nodes[a][rem % M]
            rem = rem // M
        phi = phase_phi(t, params, policy)
        Wv = [np.asarray(W(t), dtype=np.complex128) for W in Ws]
        wv = [np.asarray(w(t), dtype=np.complex128) for w in ws]
        for i, Wvi in enumerate(Wv):
            base = phi * Wvi
            for j, wvj in enumerate(wv):
                out[i, j] += (base * wvj).sum()
    return TWO_PI_I**ell * out / npts


# ---------------------------------------------------------------------------
# nested residues


def _residue_radii(center, params, shrink=0.05, smax=24):
    """Per-coordinate circle radii for the nested residue at `center`.

    Base radius is shrink times the distance to the nearest other
    singularity (fixed catalog poles, eta-shifted partners, origin).  When a
    pair divisor t_k = p^s eta^e t_j passes through the center, the inner
    circle (larger k; extracted earlier per the nested convention) is forced
    well below the divisor's displacement under the outer circle, so the
    extraction keeps picking the constant divisor only.
    """
    ell = len(center)
    p, eta = params.p, params.eta
    fixed = [0.0]
    for m in range(params.n):
        for s in range(smax):
            fixed.append(params.p**s * params.xi[m] * params.z[m])
            fixed.append(params.p ** (-s) * params.z[m] / params.xi[m])
    radii = []
    for k in range(ell):
        ck = center[k]
        cands = list(fixed)
        for b in range(ell):
            if b == k:
                continue
            for s in range(-smax, smax + 1):
                cands.append(p**s * eta * center[b])
                cands.append(p**s / eta * center[b])
                cands.append(p**s * center[b])
        dmin = math.inf
        own = 0
        for c in cands:
            d = abs(ck - c)
            if d < 1e-9 * abs(ck):
                own += 1
                continue
            dmin = min(dmin, d)
        if own > 6 or not math.isfinite(dmin):
            raise DegeneracyError("multiple singularity intersection at residue point")
        rk = shrink * dmin
        for j in range(k):
            if _divisor_through_center(center[k], center[j], p, eta, smax):
                rk = min(rk, 0.2 * abs(center[k] / center[j]) * radii[j])
        radii.append(rk)
    return tuple(radii)


def _divisor_through_center(ck, cj, p, eta, smax):
    """True when c_k / c_j = p^s eta^e for some |s| <= smax, e in {-1,0,1}.

    Detection is branch-safe: the shell s comes from moduli, the match from
    the actual quotient."""
    r = ck / cj
    ap = abs(p)
    for e in (-1, 0, 1):
        w = r / eta**e
        if abs(w) == 0:
            continue
        s = round(math.log(abs(w)) / math.log(ap))
        if abs(s) <= smax and abs(w / p**s - 1.0) < 1e-8:
            return True
    return False


def multi_residue(f, center, params=None, plan=None, shrink=0.05):
    """Nested residue Res_{t1=c1}(... Res_{tl=cl} f ...) by iterated
    small-circle trapezoidal contours (simple poles along each extraction)."""
    center = np.asarray(center, dtype=np.complex128)
    ell = len(center)
    if ell == 0:
        return complex(f(np.zeros((1, 0), dtype=np.complex128))[0])
    if plan is None:
        if params is None:
            raise ValueError("need params or an explicit plan")
        plan = ResiduePlan(tuple(center), _residue_radii(center, params, shrink))
    Mr = plan.points
    # stagger the phase grids so node ratios never sit exactly on the
    # p/eta lattice of the integrand (offset trapezoid stays exact)
    circles = [
        center[k] + plan.radii[k] * np.exp(TWO_PI_I * (np.arange(Mr) + (k + 1.0) / (ell + 2.0)) / Mr)
        for k in range(ell)
    ]
    grids = np.meshgrid(*circles, indexing="ij")
    t = np.stack([g.reshape(-1) for g in grids], axis=-1)
    vals = np.asarray(f(t), dtype=np.complex128)
    for k in range(ell):
        vals = vals * (t[:, k] - center[k])
    return complex(vals.sum() / Mr**ell)


# ---------------------------------------------------------------------------
# Jackson sums


def _phase_tilde(params, policy):
    def f(t):
        t = np.asarray(t, dtype=np.complex128)
        out = phase_phi(t, params, policy)
        for a in range(t.shape[-1]):
            out = out / t[..., a]
        return out

    return f


def jackson_sum(
    Wf,
    wf,
    params,
    side="x",
    cutoff=60,
    tol=1e-12,
    policy=DEFAULT_POLICY,
    points=64,
    enforce_regime=True,
):
    """Jackson (multilattice residue) representation of I(W, w).

    side="x": (2 pi i)^ell ell! sum over m, s >= 0 of Res at x<(m, s);
    side="y": (-2 pi i)^ell ell! sum at y>(m, -s).  Shells are |s|_1; the
    loop stops when the geometric tail estimate drops below tol.
    """
    ell, n = params.ell, params.n
    if enforce_regime:
        ratio = abs(params.p * params.kappa / params.xi_prod)
        lim = min(1.0, abs(params.eta) ** (1 - ell))
        if side == "x" and ratio >= lim:
            raise ConvergenceError(f"x-sum regime violated: {ratio:.3g} >= {lim:.3g}")
        if side == "y":
            ratio = abs(params.kappa * params.xi_prod)
            lim = max(1.0, abs(params.eta) ** (ell - 1))
            if ratio <= lim:
                raise ConvergenceError(f"y-sum regime violated: {ratio:.3g} <= {lim:.3g}")
    phit = _phase_tilde(params, policy)

    def integrand(t):
        t = np.asarray(t, dtype=np.complex128)
        return phit(t) * np.asarray(wf(t), dtype=np.complex128) * np.asarray(
            Wf(t), dtype=np.complex128
        )

    kind = "x" if side == "x" else "y"
    sign = 1.0 if side == "x" else (-1.0) ** ell
    total = 0.0 + 0j
    shells = []
    for shell in range(cutoff + 1):
        acc = 0.0 + 0j
        for mvec in combin.index_vectors(n, ell):
            for svec in _shell_vectors(ell, shell):
                sh = svec if side == "x" else tuple(-v for v in svec)
                pt = weightfn.special_point(mvec, params, kind, sh)
                plan = ResiduePlan(tuple(pt), _residue_radii(pt, params), points)
                acc += multi_residue(integrand, pt, plan=plan)
        shells.append(acc)
        total += acc
        if shell >= 2:
            a1, a0 = abs(shells[-1]), abs(shells[-2])
            scale = max(abs(total), 1e-300)
            if a1 < tol * scale and a0 < tol * scale:
                break
    value = sign * TWO_PI_I**ell * factorial(ell) * total
    last = abs(shells[-1])
    prev = abs(shells[-2]) if len(shells) > 1 else last
    ratio = last / prev if prev > 0 else 0.0
    tail = last * ratio / (1 - ratio) if 0 < ratio < 1 else last
    report = {
        "shells": len(shells),
        "last_shell": last,
        "tail_estimate": abs(TWO_PI_I**ell * factorial(ell)) * tail,
        "ratio": ratio,
    }
    return value, report


def _shell_vectors(ell, total):
    if ell == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _shell_vectors(ell - 1, total - first):
            yield (first,) + rest


# ---------------------------------------------------------------------------
# pairing matrix and determinant right-hand sides


def pairing_matrix(
    params,
    tau_w=None,
    tau_W=None,
    restrict="all",
    spec=QuadratureSpec(),
    policy=DEFAULT_POLICY,
):
    """Gram matrix [I(W_l, w_m)] over the canonical index order.

    restrict="first_zero"/"last_zero" keeps the rows and columns with
    l_1 = 0 / l_n = 0 (the minors of the special-kappa determinants).
    """
    n, ell = params.n, params.ell
    idx = combin.index_vectors(n, ell)
    if restrict == "first_zero":
        idx = [v for v in idx if v[0] == 0]
    elif restrict == "last_zero":
        idx = [v for v in idx if v[-1] == 0]
    elif restrict != "all":
        raise ValueError("restrict must be all|first_zero|last_zero")
    tau_w = tuple(tau_w) if tau_w is not None else tuple(range(n))
    tau_W = tuple(tau_W) if tau_W is not None else tuple(range(n))
    Ws = [
        (lambda t, l=l: weightfn.W_tau(l, t, params, tau_W, "subset", policy)) for l in idx
    ]
    ws = [(lambda t, l=l: weightfn.w_tau(l, t, params, tau_w, "subset", policy)) for l in idx]
    return idx, hyper_I_many(Ws, ws, params, spec, policy)


def det_rhs(params, kind="mu_gen", policy=DEFAULT_POLICY):
    """Closed form of det [I(W_l, w_m)]: kind mu_gen, or the first/last-zero
    minors mu_plus (kappa = eta^(1-ell) prod xi) / mu_minus (primed value)."""
    p, eta, ka = params.p, params.eta, params.kappa
    xi, z = params.xi, params.z
    n, ell = params.n, params.ell
    qp = lambda u: qpoch(u, p, policy)
    th = lambda u: theta(u, p, policy)
    xiprod = params.xi_prod

    if kind == "mu_gen":
        dim = comb(n + ell - 1, n - 1)
        out = (TWO_PI_I**ell * factorial(ell)) ** dim
        out *= eta ** (-n * comb(n + ell - 1, n + 1))
        for m in range(n):
            out *= xi[m] ** ((n - 1 - m) * comb(n + ell - 1, n))
        for s in range(1 - ell, ell):
            for m in range(n - 1):
                arg = eta**s / ka
                for l in range(n):
                    arg = arg / xi[l] if l <= m else arg * xi[l]
                out *= th(arg) ** combin.counts("d", n, m + 1, ell, s)
        for s in range(ell):
            fac = qp(1 / eta) ** n * qp(eta ** (s + 1 - ell) / ka * xiprod)
            fac *= qp(p * eta ** (s + 1 - ell) * ka * xiprod)
            fac /= qp(eta ** (-s - 1)) ** n * qp(p) ** (2 * n - 1)
            for m in range(n):
                fac /= qp(eta**-s * xi[m] ** 2)
            for l in range(n):
                for m in range(l + 1, n):
                    fac *= qp(eta**s / (xi[l] * xi[m]) * z[l] / z[m])
                    fac /= qp(eta**-s * xi[l] * xi[m] * z[l] / z[m])
            out *= fac ** comb(n + ell - s - 2, n - 1)
        return out

    if kind in ("mu_plus", "mu_minus"):
        dim = comb(n + ell - 2, n - 2)
        out = (TWO_PI_I**ell * factorial(ell)) ** dim
        out *= eta ** ((1 - n) * comb(n + ell - 2, n))
        if kind == "mu_plus":
            for m in range(n):
                out *= xi[m] ** ((n - 1 - m) * comb(n + ell - 2, n - 1))
            for s in range(1 - ell, ell):
                for m in range(1, n - 1):
                    arg = eta ** (s + ell - 1)
                    for l in range(m + 1):
                        arg /= xi[l] ** 2
                    out *= th(arg) ** combin.counts("d", n - 1, m, ell, s)
        else:
            for m in range(n - 1):
                out *= xi[m] ** ((n - 2 - m) * comb(n + ell - 2, n - 1))
            for s in range(1 - ell, ell):
                for m in range(n - 2):
                    arg = p * eta ** (s + 1 - ell)
                    for l in range(m + 1, n):
                        arg *= xi[l] ** 2
                    out *= th(arg) ** combin.counts("d", n - 1, m + 1, ell, s)
        special = xi[0] if kind == "mu_plus" else xi[-1]
        for s in range(ell):
            fac = qp(1 / eta) ** (n - 1) * qp(p * eta ** (s + 2 - 2 * ell) * xiprod**2)
            fac *= qp(eta**s / special**2)
            fac /= qp(eta ** (-s - 1)) ** (n - 1) * qp(p) ** (2 * n - 3)
            for m in range(n):
                if (kind == "mu_plus" and m == 0) or (kind == "mu_minus" and m == n - 1):
                    continue
                fac /= qp(eta**-s * xi[m] ** 2)
            for l in range(n):
                for m in range(l + 1, n):
                    fac *= qp(eta**s / (xi[l] * xi[m]) * z[l] / z[m])
                    fac /= qp(eta**-s * xi[l] * xi[m] * z[l] / z[m])
            out *= fac ** comb(n + ell - s - 3, n - 2)
        return out

    raise ValueError(f"unknown kind {kind!r}")


def closed_rhs(kind, params=None, policy=DEFAULT_POLICY, **kw):
    """Dispatch for the closed product formulas."""
    if kind in ("mu_gen", "mu_plus", "mu_minus"):
        return det_rhs(params, kind, policy)
    if kind == "qbeta":
        return qbeta_rhs(kw["a"], kw["b"], kw["c"], kw["x"], kw["p"], kw["ell"], policy)
    if kind == "askey_roy":
        return askey_roy_rhs(kw["a"], kw["b"], kw["c"], kw["alpha"], kw["beta"], kw["p"], policy)
    if kind == "arl":
        return arl_rhs(
            kw["a"], kw["b"], kw["c"], kw["alpha"], kw["beta"], kw["x"], kw["p"], kw["ell"], policy
        )
    if kind == "detM":
        return detM_rhs(params, policy)
    if kind == "detMq":
        return detMq_rhs(params, policy)
    raise ValueError(f"unknown kind {kind!r}")


def qbeta_rhs(a, b, c, x, p, ell, policy=DEFAULT_POLICY):
    qp = lambda u: qpoch(u, p, policy)
    out = TWO_PI_I**ell * factorial(ell)
    for s in range(ell):
        out *= qp(x) * qp(x**s * b * c) * qp(p * x**s * a / c)
        out /= qp(x ** (s + 1)) * qp(x**s * a * b)
    return out


def qbeta_integrand(a, b, c, x, p, ell, policy=DEFAULT_POLICY):
    def f(t):
        t = np.asarray(t, dtype=np.complex128)
        out = np.ones(t.shape[:-1], dtype=np.complex128)
        for k in range(ell):
            tk = t[..., k]
            out *= theta(c * tk, p, policy)
            out /= tk * qpoch(a * tk, p, policy) * qpoch(b / tk, p, policy)
        for jv in range(ell):
            for k in range(ell):
                if k != jv:
                    r = t[..., jv] / t[..., k]
                    out *= qpoch(r, p, policy) / qpoch(x * r, p, policy)
        return out

    return f


def askey_roy_rhs(a, b, c, alpha, beta, p, policy=DEFAULT_POLICY):
    qp = lambda u: qpoch(u, p, policy)
    th = lambda u: theta(u, p, policy)
    return (
        TWO_PI_I
        * qp(a * b * alpha * beta)
        * th(a * c)
        * th(b * c)
        / (qp(p) * qp(a * alpha) * qp(a * beta) * qp(b * alpha) * qp(b * beta))
    )


def askey_roy_integrand(a, b, c, alpha, beta, p, policy=DEFAULT_POLICY):
    def f(t):
        t = np.asarray(t, dtype=np.complex128)[..., 0]
        num = theta(p * t / c, p, policy) * theta(a * b * c * t, p, policy)
        den = (
            qpoch(a * t, p, policy)
            * qpoch(b * t, p, policy)
            * qpoch(alpha / t, p, policy)
            * qpoch(beta / t, p, policy)
        )
        return num / den

    return f


def arl_rhs(a, b, c, alpha, beta, x, p, ell, policy=DEFAULT_POLICY):
    qp = lambda u: qpoch(u, p, policy)
    th = lambda u: theta(u, p, policy)
    out = TWO_PI_I**ell * factorial(ell)
    for s in range(ell):
        out *= qp(x) * qp(x ** (ell + s - 1) * a * b * alpha * beta)
        out *= th(x**s * a * c) * th(x**s * b * c)
        out /= (
            qp(x ** (s + 1))
            * qp(x**s * a * alpha)
            * qp(x**s * a * beta)
            * qp(x**s * b * alpha)
            * qp(x**s * b * beta)
            * qp(p)
        )
    return out


def arl_integrand(a, b, c, alpha, beta, x, p, ell, policy=DEFAULT_POLICY):
    def f(t):
        t = np.asarray(t, dtype=np.complex128)
        out = np.ones(t.shape[:-1], dtype=np.complex128)
        for k in range(ell):
            tk = t[..., k]
            out *= theta(p * tk / c, p, policy) * theta(x ** (ell - 1) * a * b * c * tk, p, policy)
            out /= (
                tk
                * qpoch(a * tk, p, policy)
                * qpoch(b * tk, p, policy)
                * qpoch(alpha / tk, p, policy)
                * qpoch(beta / tk, p, policy)
            )
        for jv in range(ell):
            for k in range(ell):
                if k != jv:
                    r = t[..., jv] / t[..., k]
                    out *= qpoch(r, p, policy) / qpoch(x * r, p, policy)
        return out

    return f


def detM_rhs(params, policy=DEFAULT_POLICY):
    """det M = prod_{s<ell} prod_{l<m} (eta^s z_l - xi_l xi_m z_m)^C(n+ell-s-2, n-1)."""
    n, ell = params.n, params.ell
    out = 1.0 + 0j
    for s in range(ell):
        for l in range(n):
            for m in range(l + 1, n):
                base = params.eta**s * params.z[l] - params.xi[l] * params.xi[m] * params.z[m]
                out *= base ** comb(n + ell - s - 2, n - 1)
    return out


def detMq_rhs(params, policy=DEFAULT_POLICY):
    """Elliptic basis determinant with the constant Xi of the theta basis."""
    n, ell = params.n, params.ell
    p, eta, ka = params.p, params.eta, params.kappa
    xi, z = params.xi, params.z
    th = lambda u: theta(u, p, policy)
    omega = cmath.exp(2j * math.pi / n)
    Xi = qpoch(p, p, policy) ** (1 - n * n)
    for m in range(1, n):
        Xi *= (th(omega**m) / (omega**m - 1)) ** (n - m)
    Xi = Xi ** comb(n + ell - 1, n)
    out = Xi
    for s in range(1 - ell, ell):
        for m in range(n - 1):
            arg = eta**s / ka
            for l in range(n):
                arg = arg / xi[l] if l <= m else arg * xi[l]
            out *= th(arg) ** combin.counts("d", n, m + 1, ell, s)
    for m in range(n):
        out *= (z[m] / xi[m]) ** ((m + 1 - n) * comb(n + ell - 1, n))
    for s in range(ell):
        for l in range(n):
            for m in range(l + 1, n):
                out *= th(eta**s / (xi[l] * xi[m]) * z[l] / z[m]) ** comb(n + ell - s - 2, n - 1)
    return out


# ---------------------------------------------------------------------------
# Askey sums and the q-Selberg Jackson sum


def _qpoch_ratio_plattice(A, B, p):
    """Limit of (u p^A)_inf / (u p^B)_inf as u -> 1, for integers A <= B.

    Vanishes when A <= 0 < B; when both products vanish (B <= 0) the common
    (1-u) factors cancel with sign +1, as the residue picture dictates."""
    out = 1.0
    for j in range(A, B):
        out *= 1 - p**j
    return out


def _p_lattice_exponent(r, p):
    """Integer s with r = p^s, or None if r is off the lattice."""
    ap = abs(p)
    if abs(r) == 0 or ap == 0:
        return None
    s = round(math.log(abs(r)) / math.log(ap))
    return s if abs(r / p**s - 1.0) < 1e-9 else None


def ascj_sum(a, b, alpha, beta, p, m, ell, cutoff=40, tol=1e-13, policy=DEFAULT_POLICY):
    """Askey's multidimensional sum: signed two-sided lattice sum vs product.

    Same-family lattice pairs make 0/0 pair factors at x = p^m; those are
    evaluated in the cancelled (x -> p^m limit) form.  Returns
    (lhs_sum, rhs, report)."""
    if m < 1:
        raise ValueError("m >= 1 (m = 0 degenerates the pair weight)")
    qp = lambda u: qpoch(u, p, policy)
    x = p**m

    def v(s):
        return p**s * b if s >= 0 else p ** (-s - 1) * a

    def A(us):
        out = 1.0 + 0j
        for k in range(ell):
            uk = us[k]
            out *= uk * qp(p * uk / a) * qp(p * uk / b) / (qp(alpha * uk) * qp(beta * uk))
        for jv in range(ell):
            for k in range(jv + 1, ell):
                r = us[k] / us[jv]
                delta = _p_lattice_exponent(r, p)
                if delta is None:
                    out *= qp(p * r / x) / qp(p * x * r)
                else:
                    out *= _qpoch_ratio_plattice(1 - m + delta, 1 + m + delta, p)
        return out

    total = 0.0 + 0j
    shells = []
    for shell in range(cutoff + 1):
        acc = 0.0 + 0j
        for rs in _signed_shell(ell, shell):
            sgn = 1.0
            for r in rs:
                if r < 0:
                    sgn = -sgn
            us = [v(r) for r in rs]
            term = sgn * A(us)
            for k in range(ell):
                term *= us[k] ** (2 * m * (ell - 1 - k))
            acc += term
        shells.append(acc)
        total += acc
        if shell >= 3 and abs(acc) < tol * max(abs(total), 1e-300) and abs(shells[-2]) < tol * max(
            abs(total), 1e-300
        ):
            break
    rhs = p ** (m * m * comb(ell, 3) - comb(m, 2) * comb(ell, 2))
    for s in range(ell):
        rhs *= qp(p ** (m + 1)) * qp(p ** (m * (ell + s - 1)) * a * b * alpha * beta)
        rhs *= (-a * b) ** (m * s) * b * theta(a / b, p, policy)
        rhs /= (
            qp(p ** (m * (s + 1) + 1))
            * qp(p ** (m * s) * a * alpha)
            * qp(p ** (m * s) * a * beta)
            * qp(p ** (m * s) * b * alpha)
            * qp(p ** (m * s) * b * beta)
        )
    return total, rhs, {"shells": len(shells), "last_shell": abs(shells[-1])}


def _signed_shell(ell, total):
    """All r in Z^ell with sum |r_k| = total."""
    if ell == 1:
        if total == 0:
            yield (0,)
        else:
            yield (total,)
            yield (-total,)
        return
    for first_abs in range(total + 1):
        firsts = (0,) if first_abs == 0 else (first_abs, -first_abs)
        for f in firsts:
            for rest in _signed_shell(ell - 1, total - first_abs):
                yield (f,) + rest


def ascj_general_sum(a, b, alpha, beta, x, p, ell, cutoff=40, tol=1e-13, policy=DEFAULT_POLICY):
    """The j-decomposed generalization with free x; returns (lhs, rhs, report)."""
    qp = lambda u: qpoch(u, p, policy)
    th = lambda u: theta(u, p, policy)

    def Atil(us):
        out = 1.0 + 0j
        for k in range(ell):
            uk = us[k]
            out *= uk * qp(p * uk / a) * qp(p * uk / b) / (qp(alpha * uk) * qp(beta * uk))
        for jv in range(ell):
            for k in range(jv + 1, ell):
                r = us[k] / us[jv]
                out *= (1 - r) * qp(p * r / x) / qp(x * r)
        return out

    total = 0.0 + 0j
    shells = []
    for shell in range(cutoff + 1):
        acc = 0.0 + 0j
        for j in range(ell + 1):
            for rs in _shell_vectors(ell, shell):
                us = []
                cum = 0
                for i in range(j):
                    cum += rs[i]
                    us.append(p**cum * x**i * a)
                cum = 0
                for i in range(j, ell):
                    cum += rs[i]
                    us.append(p**cum * x ** (i - j) * b)
                # (ell-j-1)(ell-j) is even, so the halved exponent is integral
                expo = sum((ell - 1 - i) * (ell - i) * rs[i] for i in range(ell))
                expo -= (ell - j - 1) * (ell - j) * (1 + 2 * sum(rs[:j])) // 2
                term = (-1.0) ** j * x**expo
                for s in range(ell - j):
                    term *= th(x ** (j + s) * a / b) / th(x ** (j - s) * a / b)
                acc += term * Atil(us)
        shells.append(acc)
        total += acc
        if shell >= 3 and abs(acc) < tol * max(abs(total), 1e-300) and abs(shells[-2]) < tol * max(
            abs(total), 1e-300
        ):
            break
    rhs = 1.0 + 0j
    for s in range(ell):
        rhs *= qp(x) * qp(x ** (ell + s - 1) * a * b * alpha * beta) * b * th(x**s * a / b)
        rhs /= (
            qp(x ** (s + 1))
            * qp(x**s * a * alpha)
            * qp(x**s * a * beta)
            * qp(x**s * b * alpha)
            * qp(x**s * b * beta)
        )
    return total, rhs, {"shells": len(shells), "last_shell": abs(shells[-1])}


def qselberg_jackson(alpha, u, x, p, ell, cutoff=80, tol=1e-13, policy=DEFAULT_POLICY):
    """Jackson-sum form of the q-Selberg integral; returns (lhs, rhs, report)."""
    if abs(u) >= min(1.0, abs(x) ** (ell - 1)):
        raise ConvergenceError("need |u| < min(1, |x|^(ell-1))")
    qp = lambda v: qpoch(v, p, policy)

    def S(ts):
        out = 1.0 + 0j
        for k in range(ell):
            out *= qp(p * ts[k]) / qp(alpha * ts[k])
        for jv in range(ell):
            for k in range(jv + 1, ell):
                r = ts[k] / ts[jv]
                out *= (1 - r) * qp(p * r / x) / qp(x * r)
        return out

    total = 0.0 + 0j
    shells = []
    for shell in range(cutoff + 1):
        acc = 0.0 + 0j
        for rs in _shell_vectors(ell, shell):
            ts = []
            cum = 0
            for i in range(ell):
                cum += rs[i]
                ts.append(p**cum * x**i)
            expo_u = sum((ell - i + 1) * rs[i - 1] for i in range(1, ell + 1))
            expo_x = -sum((i - 1) * (ell - i + 1) * rs[i - 1] for i in range(1, ell + 1))
            acc += u**expo_u * x**expo_x * S(ts)
        shells.append(acc)
        total += acc
        if shell >= 3 and abs(acc) < tol * max(abs(total), 1e-300) and abs(shells[-2]) < tol * max(
            abs(total), 1e-300
        ):
            break
    rhs = 1.0 + 0j
    for s in range(ell):
        rhs *= qp(x) * qp(x**s * alpha * u) * qp(p)
        rhs /= qp(x ** (s + 1)) * qp(x**s * alpha) * qp(x**-s * u)
    return total, rhs, {"shells": len(shells), "last_shell": abs(shells[-1])}


def qselberg_X_ratio(k, a, b, c, x, p, ell, spec=QuadratureSpec(), policy=DEFAULT_POLICY):
    """X_k / X_(k-1) via torus integrals of t_1..t_k F(t) d^ell t, plus the
    closed recurrence ratio."""
    base = qbeta_integrand(a, b, c, x, p, ell, policy)

    def mono(j):
        def f(t):
            t = np.asarray(t, dtype=np.complex128)
            out = np.asarray(base(t), dtype=np.complex128).copy()
            for i in range(j):
                out *= t[..., i]
            return out

        return f

    Xk = torus_integral(mono(k), ell, spec, measure="dt")
    Xkm = torus_integral(mono(k - 1), ell, spec, measure="dt")
    closed = (
        k
        * (1 - x ** (ell - k + 1))
        * (p - x ** (k - 1) * b * c)
        / ((ell - k + 1) * (1 - x**k) * (p * x ** (ell - k) * a - c))
    )
    return Xk / Xkm, closed


# ---------------------------------------------------------------------------
# Shapovalov pairings


def omega_elliptic(params, policy=DEFAULT_POLICY):
    p, eta = params.p, params.eta

    def f(t):
        t = np.asarray(t, dtype=np.complex128)
        ell = t.shape[-1]
        out = np.ones(t.shape[:-1], dtype=np.complex128)
        for a in range(ell):
            out /= t[..., a]
            for m in range(params.n):
                r = t[..., a] / params.z[m]
                out *= theta_ratio(r / params.xi[m], params.xi[m] * r, p, policy)
        for a in range(ell):
            for b in range(a + 1, ell):
                r = t[..., a] / t[..., b]
                out *= theta_ratio(eta * r, r / eta, p, policy) / eta
        return out

    return f


def omega_trig(params):
    eta = params.eta

    def f(t):
        t = np.asarray(t, dtype=np.complex128)
        ell = t.shape[-1]
        out = np.ones(t.shape[:-1], dtype=np.complex128)
        for a in range(ell):
            out /= t[..., a] ** 2
            for m in range(params.n):
                ta = t[..., a]
                out *= (ta - params.xi[m] * params.z[m]) / (params.xi[m] * ta - params.z[m])
        for a in range(ell):
            for b in range(a + 1, ell):
                out *= (eta * t[..., a] - t[..., b]) / (t[..., a] - eta * t[..., b])
        return out

    return f


def shapovalov(flavor, f1, f2, params, side="x", points=64, policy=DEFAULT_POLICY):
    """Shapovalov pairing: sum over m of Res(Omega f1 f2) at x<m (or y>m,
    with the (-1)^ell sign)."""
    om = omega_elliptic(params, policy) if flavor == "elliptic" else omega_trig(params)

    def integrand(t):
        t = np.asarray(t, dtype=np.complex128)
        return (
            om(t)
            * np.asarray(f1(t), dtype=np.complex128)
            * np.asarray(f2(t), dtype=np.complex128)
        )

    total = 0.0 + 0j
    for mvec in combin.index_vectors(params.n, params.ell):
        pt = weightfn.special_point(mvec, params, "x" if side == "x" else "y")
        plan = ResiduePlan(tuple(pt), _residue_radii(pt, params), points)
        total += multi_residue(integrand, pt, plan=plan)
    if side == "y":
        total *= (-1.0) ** params.ell
    return total


def residue_balance_check(f, params, points=64):
    """x-side residue sum, y-side residue sum, and their signed difference."""
    xs = 0.0 + 0j
    ys = 0.0 + 0j
    for mvec in combin.index_vectors(params.n, params.ell):
        ptx = weightfn.special_point(mvec, params, "x")
        pty = weightfn.special_point(mvec, params, "y")
        xs += multi_residue(f, ptx, plan=ResiduePlan(tuple(ptx), _residue_radii(ptx, params), points))
        ys += multi_residue(f, pty, plan=ResiduePlan(tuple(pty), _residue_radii(pty, params), points))
    ys *= (-1.0) ** params.ell
    return {"x_sum": xs, "y_sum_signed": ys, "difference": xs - ys}
