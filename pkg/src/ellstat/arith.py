"""Exact elementary arithmetic: sieves, factorization, multiplicative
functions, Ramanujan sums and quadratic characters.

Every function here returns exact integers; floating point never enters
these kernels.  The smallest-prime-factor sieve is built once, grown on
demand, and shared read-only by all callers, so everything is safe for
concurrent use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError

_SPF_SOFT_LIMIT = 1 << 22  # factorizations below this use the sieve directly
_spf: np.ndarray | None = None
_small_primes: list[int] | None = None


def primes_up_to(limit: int) -> list[int]:
    """All primes <= limit, ascending.  limit < 2 yields an empty list."""
    if limit < 2:
        return []
    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    for i in range(2, math.isqrt(limit) + 1):
        if sieve[i]:
            sieve[i * i :: i] = False
    return [int(v) for v in np.flatnonzero(sieve)]


def _spf_table(n: int) -> np.ndarray:
    """Smallest-prime-factor table covering 0..n (grown geometrically)."""
    global _spf
    if _spf is None or len(_spf) <= n:
        size = 1 << 16
        while size <= n:
            size <<= 1
        spf = np.arange(size, dtype=np.int32)
        for i in range(2, math.isqrt(size - 1) + 1):
            if spf[i] == i:
                block = spf[i * i :: i]
                np.minimum(block, i, out=block)
        _spf = spf
    return _spf


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin (valid far beyond the 10^16 inputs used here)."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _rho_factor(n: int) -> int:
    """Brent's cycle-finding rho; deterministic parameter schedule."""
    if n % 2 == 0:
        return 2
    for c in range(1, 64):
        x = y = 2
        d = 1
        while d == 1:
            x = (x * x + c) % n
            y = (y * y + c) % n
            y = (y * y + c) % n
            d = math.gcd(abs(x - y), n)
        if d != n:
            return d
    raise DomainError(f"failed to factor {n}")


def factorize(n: int) -> list[tuple[int, int]]:
    """Canonical factorization of n >= 1 as ascending (prime, exponent) pairs.

    n = 1 gives []; n = 0 is a domain error.  Small inputs walk the shared
    smallest-prime-factor sieve, larger ones fall back to trial division by
    cached small primes plus deterministic Brent rho.
    """
    if n <= 0:
        raise DomainError(f"factorize requires n >= 1, got {n}")
    if n == 1:
        return []
    if n < _SPF_SOFT_LIMIT:
        spf = _spf_table(n)
        out: list[tuple[int, int]] = []
        m = n
        while m > 1:
            p = int(spf[m])
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            out.append((p, e))
        return out

    global _small_primes
    if _small_primes is None:
        _small_primes = primes_up_to(100_000)
    out = []
    m = n
    for p in _small_primes:
        if p * p > m:
            break
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            out.append((p, e))
    if m > 1:
        # leftover cofactor: prime, prime power, or product of two large primes
        rest: list[int] = []
        stack = [m]
        while stack:
            v = stack.pop()
            if is_prime(v):
                rest.append(v)
                continue
            r = math.isqrt(v)
            if r * r == v:
                stack += [r, r]
                continue
            d = _rho_factor(v)
            stack += [d, v // d]
        for p in sorted(set(rest)):
            out.append((p, sum(1 for r in rest if r == p)))
        out.sort()
    return out


def divisors(n: int) -> list[int]:
    """Ordered list of the divisors of n."""
    divs = [1]
    for p, e in factorize(n):
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def valuation(n: int, p: int) -> int:
    """p-adic valuation of n != 0."""
    if n == 0:
        raise DomainError("valuation of 0 is infinite")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


@dataclass(frozen=True)
class MultiplicativeSuite:
    """The standard multiplicative statistics of one integer, exactly."""

    n: int
    tau: int
    sigma: int
    phi: int
    mu: int
    phi_star_mu: int
    omega: int
    rad: int


def multiplicative_suite(n: int) -> MultiplicativeSuite:
    """tau, sigma, phi, mu, phi*mu (Dirichlet), omega and rad of n, exactly.

    phi*mu is the convolution of Euler's totient with the Moebius function;
    on prime powers it equals l-2 for e=1 and l^(e-2)(l-1)^2 for e>=2.
    """
    fac = factorize(n)
    tau = sigma = phi = rad = psm = 1
    mu = 1
    for p, e in fac:
        tau *= e + 1
        sigma *= (p ** (e + 1) - 1) // (p - 1)
        phi *= p ** (e - 1) * (p - 1)
        rad *= p
        mu = 0 if e >= 2 else -mu
        psm *= (p - 2) if e == 1 else p ** (e - 2) * (p - 1) ** 2
    return MultiplicativeSuite(n, tau, sigma, phi, mu, psm, len(fac), rad)


@lru_cache(maxsize=1 << 16)
def tau(n: int) -> int:
    return multiplicative_suite(n).tau


@lru_cache(maxsize=1 << 16)
def sigma(n: int) -> int:
    return multiplicative_suite(n).sigma


@lru_cache(maxsize=1 << 16)
def phi(n: int) -> int:
    return multiplicative_suite(n).phi


@lru_cache(maxsize=1 << 16)
def mu(n: int) -> int:
    return multiplicative_suite(n).mu


@lru_cache(maxsize=1 << 16)
def phi_star_mu(n: int) -> int:
    return multiplicative_suite(n).phi_star_mu


def ramanujan_sum(k: int, a: int, method: str = "divisor") -> int:
    """Ramanujan sum c_k(a), exactly.

    method="divisor" evaluates sum_{f | (k,a)} f * mu(k/f); the independent
    path method="von_sterneck" combines the prime-power values
    c_{l^r}(a) = l^r * {0, -1/l, 1-1/l} multiplicatively.  Both agree.
    """
    if k < 1:
        raise DomainError(f"modulus must be >= 1, got {k}")
    a %= k
    if method == "divisor":
        g = math.gcd(k, a) if a else k
        return sum(f * mu(k // f) for f in divisors(g))
    if method == "von_sterneck":
        out = 1
        for p, r in factorize(k):
            v = valuation(a, p) if a else r  # a == 0 behaves like v >= r
            if v < r - 1:
                return 0
            out *= -(p ** (r - 1)) if v == r - 1 else p ** (r - 1) * (p - 1)
        return out
    raise DomainError(f"unknown method {method!r}")


def kronecker_chi(D: int, ell: int) -> int:
    """Legendre symbol (D | ell) in {-1, 0, 1} for an odd prime ell."""
    if ell == 2:
        raise DomainError("quadratic character at 2 is not defined here")
    if ell < 3 or not is_prime(ell):
        raise DomainError(f"{ell} is not an odd prime")
    r = pow(D % ell, (ell - 1) // 2, ell)
    return r - ell if r > 1 else r
