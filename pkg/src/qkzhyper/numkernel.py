"""Complex special-function kernel.

Truncated q-Pochhammer products, the Jacobi theta function
theta(u) = (u;p)_inf (p/u;p)_inf (p;p)_inf, the short phase function of the
local system, and p-analogues of gamma/sine/power.  Everything is double
precision; truncation length is chosen adaptively from the closed-form tail
bound |u| |p|^N / (1-|p|) <= tail_tol.
"""

import cmath
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, PoleProximityError, ResonanceError
from .kernels import qpoch_array, qpoch_ratio_array, theta_array


@dataclass(frozen=True)
class TruncationPolicy:
    max_terms: int = 200
    tail_tol: float = 1e-14

    def nterms(self, p, umax=1.0):
        """Number of product terms so the relative tail is below tail_tol."""
        ap = abs(p)
        if ap >= 1.0:
            raise DomainError(f"|p| = {ap} >= 1")
        if ap == 0.0:
            return 1
        bound = self.tail_tol * (1.0 - ap) / max(float(umax), 1.0)
        n = int(math.ceil(math.log(bound) / math.log(ap))) + 1
        return max(1, min(n, self.max_terms))


DEFAULT_POLICY = TruncationPolicy()


def _umax(u):
    a = np.abs(np.asarray(u))
    return float(a.max()) if a.size else 1.0


def qpoch(u, p, policy=DEFAULT_POLICY):
    """(u; p)_infinity, truncated per policy.  Accepts scalars or arrays."""
    if abs(p) >= 1.0:
        raise DomainError(f"|p| = {abs(p)} >= 1")
    n = policy.nterms(p, _umax(u))
    out = qpoch_array(np.asarray(u, dtype=np.complex128), p, n)
    if np.isscalar(u) or np.ndim(u) == 0:
        return complex(out)
    return out


def pp_inf(p, policy=DEFAULT_POLICY):
    """(p; p)_infinity."""
    return complex(qpoch(p, p, policy))


def theta(u, p, policy=DEFAULT_POLICY):
    """Jacobi theta function theta(u) = (u)_inf (p/u)_inf (p)_inf."""
    if abs(p) >= 1.0:
        raise DomainError(f"|p| = {abs(p)} >= 1")
    arr = np.asarray(u, dtype=np.complex128)
    if np.any(arr == 0):
        raise DomainError("theta(0) is an essential singularity")
    umax = max(_umax(arr), _umax(p / arr))
    n = policy.nterms(p, umax)
    out = theta_array(arr, p, n, pp_inf(p, policy))
    if np.isscalar(u) or np.ndim(u) == 0:
        return complex(out)
    return out


def theta_prime_one(p, policy=DEFAULT_POLICY):
    """d theta / du at u = 1, equal to -((p;p)_inf)^3."""
    return -pp_inf(p, policy) ** 3


def qpoch_ratio(a, b, p, policy=DEFAULT_POLICY):
    """(a;p)_inf / (b;p)_inf with termwise pairing; stays finite for huge
    arguments of comparable size (the single products may overflow)."""
    if abs(p) >= 1.0:
        raise DomainError(f"|p| = {abs(p)} >= 1")
    aa = np.asarray(a, dtype=np.complex128)
    bb = np.asarray(b, dtype=np.complex128)
    n = policy.nterms(p, max(_umax(aa), _umax(bb)))
    out = qpoch_ratio_array(aa, bb, p, n)
    if np.ndim(a) == 0 and np.ndim(b) == 0:
        return complex(out)
    return out


def theta_ratio(a, b, p, policy=DEFAULT_POLICY):
    """theta(a) / theta(b), overflow-safe through paired Pochhammer ratios."""
    return qpoch_ratio(a, b, p, policy) * qpoch_ratio(
        p / np.asarray(a, dtype=np.complex128), p / np.asarray(b, dtype=np.complex128), p, policy
    )


def phase_phi(t, params, policy=DEFAULT_POLICY, guard=1e-8):
    """Short phase function Phi(t, z).

    Phi = prod_{m,a} (xi_m^-1 t_a/z_m)_inf / (xi_m t_a/z_m)_inf
        * prod_{a<b} (eta t_a/t_b)_inf / (eta^-1 t_a/t_b)_inf.

    `t` has shape (..., ell); scalar points get the pole-proximity guard,
    batched grids are assumed pre-validated by the quadrature planner.
    """
    t = np.asarray(t, dtype=np.complex128)
    ell = t.shape[-1]
    if ell == 0:
        return np.ones(t.shape[:-1], dtype=np.complex128) if t.ndim > 1 else 1.0 + 0j
    single = t.ndim == 1
    ts = t[None, :] if single else t
    p, eta = params.p, params.eta
    out = np.ones(ts.shape[:-1], dtype=np.complex128)
    for m in range(params.n):
        xi_m, z_m = params.xi[m], params.z[m]
        for a in range(ell):
            num = ts[..., a] / (xi_m * z_m)
            den = xi_m * ts[..., a] / z_m
            if single:
                _guard_qpoch_pole(complex(den.reshape(-1)[0]), p, guard, policy)
            out *= qpoch_ratio(num, den, p, policy)
    for a in range(ell):
        for b in range(a + 1, ell):
            r = ts[..., a] / ts[..., b]
            if single:
                _guard_qpoch_pole(complex(r.reshape(-1)[0] / eta), p, guard, policy)
            out *= qpoch_ratio(eta * r, r / eta, p, policy)
    return complex(out[0]) if single else out


def _guard_qpoch_pole(v, p, guard, policy):
    # 1/(v;p)_inf has poles at v = p^{-k}, k >= 0
    n = policy.nterms(p, abs(v))
    w = v
    for _ in range(n):
        if abs(1.0 - w) < guard:
            raise PoleProximityError(f"argument {v} within {guard} of a pole")
        w *= p


def p_gamma_sin(x, p, kind, extra=None, policy=DEFAULT_POLICY):
    """p-analogues: Gamma_p(x), sin_p(pi x), or the power (1-u)_p^{2x}.

    kind="gamma":  (1-p)^(1-x) (p)_inf / (p^x)_inf
    kind="sin":    pi theta(p^x) / ((1-p) (p)_inf^3)
    kind="power":  (p^-x u)_inf / (p^x u)_inf with u = extra
    """
    if abs(p) >= 1.0 or p == 0:
        raise DomainError("p-analogues need 0 < |p| < 1")
    lp = cmath.log(p)
    if kind == "gamma":
        px = cmath.exp(x * lp)
        den = qpoch(px, p, policy)
        if abs(den) < 1e-280:
            raise PoleProximityError("Gamma_p pole: (p^x)_inf vanishes")
        return cmath.exp((1 - x) * cmath.log(1 - p)) * pp_inf(p, policy) / den
    if kind == "sin":
        return math.pi * theta(cmath.exp(x * lp), p, policy) / ((1 - p) * pp_inf(p, policy) ** 3)
    if kind == "power":
        if extra is None:
            raise ValueError("kind='power' needs extra=u")
        u = extra
        den = qpoch(cmath.exp(x * lp) * u, p, policy)
        if abs(den) < 1e-280:
            raise PoleProximityError("(1-u)_p^{2x} pole")
        return qpoch(cmath.exp(-x * lp) * u, p, policy) / den
    raise ValueError(f"unknown kind {kind!r}")


def p_power_bracket(u, x, p, policy=DEFAULT_POLICY):
    """Theta-quotient power [-u]_p^{2x} = theta(p^-x u) / theta(p^x u)."""
    lp = cmath.log(p)
    return theta(cmath.exp(-x * lp) * u, p, policy) / theta(cmath.exp(x * lp) * u, p, policy)


# ---------------------------------------------------------------------------
# parameters of the local system


@dataclass(frozen=True)
class ParameterSet:
    """Parameters (p, eta, kappa, xi_1..xi_n, z_1..z_n) of the local system
    on the fiber with ell integration variables.

    Dictionary: q^2 = eta, xi_m = eta^{Lambda_m} with principal logarithms.
    """

    p: complex
    eta: complex
    kappa: complex
    xi: tuple
    z: tuple
    n: int
    ell: int

    def __post_init__(self):
        if len(self.xi) != self.n or len(self.z) != self.n:
            raise ValueError("xi and z must have length n")
        if abs(self.p) >= 1.0:
            raise DomainError("need |p| < 1")
        for v in (self.p, self.eta, self.kappa, *self.xi, *self.z):
            if v == 0:
                raise DomainError("all parameters must be nonzero")

    @property
    def q(self):
        return cmath.exp(0.5 * cmath.log(self.eta))

    @property
    def Lambda(self):
        le = cmath.log(self.eta)
        return tuple(cmath.log(x) / le for x in self.xi)

    def q_pow(self, expo):
        """q^expo for complex expo, consistent with the principal branch."""
        return cmath.exp(0.5 * expo * cmath.log(self.eta))

    @property
    def xi_prod(self):
        out = 1.0 + 0j
        for x in self.xi:
            out *= x
        return out

    def kappa_special(self, sign):
        """The two special scaling parameters: +1 -> eta^(1-ell) prod(xi),
        -1 -> p^-1 eta^(ell-1) prod(xi)^-1."""
        if sign == +1:
            return self.eta ** (1 - self.ell) * self.xi_prod
        if sign == -1:
            return self.eta ** (self.ell - 1) / (self.p * self.xi_prod)
        raise ValueError("sign must be +1 or -1")

    def permuted(self, tau):
        """Permute the module data (xi_m, z_m) -> (xi_tau_m, z_tau_m)."""
        return replace(
            self,
            xi=tuple(self.xi[i] for i in tau),
            z=tuple(self.z[i] for i in tau),
        )

    def with_xi_permuted(self, tau):
        return replace(self, xi=tuple(self.xi[i] for i in tau))

    def with_z(self, z):
        return replace(self, z=tuple(complex(v) for v in z))

    def with_kappa(self, kappa):
        return replace(self, kappa=complex(kappa))

    def with_ell(self, ell):
        return replace(self, ell=int(ell))

    def shift_z(self, m):
        z = list(self.z)
        z[m] = self.p * z[m]
        return replace(self, z=tuple(z))

    # -- genericity margins -------------------------------------------------

    def margins(self, smax=40):
        """Smallest multiplicative distances of the three resonance families
        (npZ), (Lass), (assum) from the forbidden set p^s eta^r."""
        return {
            "npZ": self._margin_npZ(smax),
            "Lass": self._margin_family([x * x for x in self.xi], smax),
            "assum": self._margin_assum(smax),
        }

    def _margin_npZ(self, smax):
        best = math.inf
        for r in range(1, max(self.ell, 1) + 1):
            v = self.eta**r
            best = min(best, _dist_to_p_powers(v, self.p, smax))
        return best

    def _margin_family(self, values, smax):
        best = math.inf
        rs = range(1 - self.ell, self.ell) if self.ell > 0 else range(0, 1)
        for v in values:
            for r in rs:
                best = min(best, _dist_to_p_powers(v * self.eta**-r, self.p, smax))
        return best

    def _margin_assum(self, smax):
        vals = []
        for l in range(self.n):
            for m in range(self.n):
                if l == m:
                    continue
                zr = self.z[l] / self.z[m]
                for sl in (1, -1):
                    for sm in (1, -1):
                        vals.append(self.xi[l] ** sl * self.xi[m] ** sm * zr)
        return self._margin_family(vals, smax) if vals else math.inf


def _dist_to_p_powers(v, p, smax):
    """min over s in [-smax, smax] of |v / p^s - 1|."""
    ap, av = abs(p), abs(v)
    best = math.inf
    # only |p|^s of comparable modulus can be close
    if av <= 0:
        return best
    s0 = round(math.log(av) / math.log(ap)) if ap not in (0.0,) else 0
    for s in range(max(-smax, s0 - 2), min(smax, s0 + 2) + 1):
        best = min(best, abs(v / p**s - 1.0))
    return best


def assert_admissible(params, delta=0.05, smax=40):
    m = params.margins(smax)
    bad = [k for k, v in m.items() if v < delta]
    if bad:
        raise ResonanceError(f"margins below {delta}: " + ", ".join(f"{k}={m[k]:.3g}" for k in bad))
    return m
