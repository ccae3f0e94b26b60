"""Index combinatorics for the weight bases.

The sets Z(n, ell) of nonnegative n-tuples summing to ell label every basis,
weight monomial and residue point in the package; the canonical order is
lexicographic ascending on entries, and every matrix uses it.
"""

import itertools
from math import comb, factorial

import numpy as np

from .numkernel import DEFAULT_POLICY, theta, theta_ratio


def index_vectors(n, ell):
    """All of Z(n, ell) in lexicographic order; length C(n+ell-1, n-1)."""
    if n < 1 or ell < 0:
        raise ValueError("need n >= 1, ell >= 0")

    def rec(k, rest):
        if k == 1:
            yield (rest,)
            return
        for first in range(rest + 1):
            for tail in rec(k - 1, rest - first):
                yield (first,) + tail

    return [tuple(v) for v in rec(n, ell)]


def partial_sums(l):
    out, acc = [], 0
    for v in l:
        acc += v
        out.append(acc)
    return tuple(out)


def dominance_le(l, m):
    """Weak dominance: sum_{i<=k} l_i <= sum_{i<=k} m_i for all k < n."""
    if len(l) != len(m) or sum(l) != sum(m):
        raise ValueError("index vectors must share n and ell")
    pl, pm = partial_sums(l), partial_sums(m)
    return all(pl[k] <= pm[k] for k in range(len(l) - 1))


def gamma_partitions(l):
    """All tuples (G_1..G_n) of disjoint subsets of {0..ell-1} with |G_m| = l_m.

    Returned as assignment tuples a -> m (block index of position a);
    count is the multinomial ell! / prod(l_m!).
    """
    ell = sum(l)
    out = []
    blocks = [m for m, lm in enumerate(l) for _ in range(lm)]
    seen = set()
    for perm in itertools.permutations(blocks):
        if perm not in seen:
            seen.add(perm)
            out.append(perm)
    assert len(out) == factorial(ell) // np.prod([factorial(v) for v in l], dtype=object)
    return out


def canonical_blocks(l):
    """Interval blocks Gamma_m = {l^(m-1)+1 .. l^m} as an assignment tuple."""
    return tuple(m for m, lm in enumerate(l) for _ in range(lm))


def all_perms(n):
    return list(itertools.permutations(range(n)))


def perm_compose(sigma, tau):
    """Composition rho(i) = tau(sigma(i))."""
    return tuple(tau[s] for s in sigma)


def perm_inverse(sigma):
    inv = [0] * len(sigma)
    for i, s in enumerate(sigma):
        inv[s] = i
    return tuple(inv)


def perm_reversal(n):
    return tuple(range(n - 1, -1, -1))


def permute_index(l, tau):
    """tau-relabel of an index vector: (l_tau_1, ..., l_tau_n)."""
    return tuple(l[i] for i in tau)


def sym_act_trig(f, sigma, eta):
    """Action [f]_sigma(t) = f(t_sigma) prod_{a<b, sigma_a>sigma_b}
    (t_sigma_b - eta t_sigma_a) / (eta t_sigma_b - t_sigma_a)."""
    sigma = tuple(sigma)

    def g(t):
        t = np.asarray(t, dtype=np.complex128)
        ts = t[..., list(sigma)]
        out = np.asarray(f(ts), dtype=np.complex128).copy()
        ell = len(sigma)
        for a in range(ell):
            for b in range(a + 1, ell):
                if sigma[a] > sigma[b]:
                    ta, tb = t[..., sigma[a]], t[..., sigma[b]]
                    out *= (tb - eta * ta) / (eta * tb - ta)
        return out

    return g


def sym_act_ell(f, sigma, eta, p, policy=DEFAULT_POLICY):
    """Elliptic action [[f]]_sigma with factor
    eta theta(eta^-1 t_sigma_b / t_sigma_a) / theta(eta t_sigma_b / t_sigma_a)."""
    sigma = tuple(sigma)

    def g(t):
        t = np.asarray(t, dtype=np.complex128)
        ts = t[..., list(sigma)]
        out = np.asarray(f(ts), dtype=np.complex128).copy()
        ell = len(sigma)
        for a in range(ell):
            for b in range(a + 1, ell):
                if sigma[a] > sigma[b]:
                    r = t[..., sigma[b]] / t[..., sigma[a]]
                    out *= eta * theta_ratio(r / eta, eta * r, p, policy)
        return out

    return g


def counts(kind, *args):
    """Counting functions used in the determinant exponents.

    counts("d", n, m, ell, s)  -> d(n,m,ell,s)
    counts("D", n, ell, s)     -> D(n,ell,s)
    counts("binom_identity", j, k, l, m) -> (lhs, rhs) of the binomial identity
    """
    if kind == "d":
        n, m, ell, s = args
        total = 0
        for i in range(ell):
            j = i - s
            if j < 0 or i + j >= ell:
                continue
            total += comb(m - 1 + i, m - 1) * comb(n - m - 1 + j, n - m - 1)
        return total
    if kind == "D":
        n, ell, s = args
        if n < 2:
            return 0
        total = 0
        r = 0
        while 2 * r <= ell - abs(s) - 1:
            k = n + ell - abs(s) - 2 * r - 3
            if k >= 0:
                total += comb(k, n - 2)
            r += 1
        return total
    if kind == "binom_identity":
        j, k, l, m = args
        lhs = sum(
            comb(j + a, j) * comb(j + k + a, k) * comb(l + m - a, m) for a in range(l + 1)
        )
        rhs = comb(j + k, k) * comb(j + k + l + m + 1, j + k + m + 1)
        return lhs, rhs
    raise ValueError(f"unknown kind {kind!r}")
