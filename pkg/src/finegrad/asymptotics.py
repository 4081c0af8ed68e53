"""Asymptotic constants and log-periodic envelope functions.

Everything here is double precision. ``b_of_t`` is the leading coefficient
envelope for the matrix and type-A counts, ``b_pm`` its perturbed versions for
the C/D counts, and ``ln_bstar`` the exact binomial maximization they
approximate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

ZETA_TRUNCATION = 1e-16
SCAN_STEP = 0.01
NEWTON_MAX_STEPS = 20
# half-width of the excluded neighbourhood around the x1 switch, in units of t^{-1/3}
SWITCH_C = 1.0
VARIANTS = ("A", "C/D+", "C/D-")


class BracketNotFound(RuntimeError):
    pass


class ConvergenceError(RuntimeError):
    def __init__(self, tau: float, sign: str, msg: str = "Newton did not converge"):
        super().__init__(f"{msg} for tau={tau!r}, sign={sign}")
        self.tau = tau
        self.sign = sign


class BelowThreshold(ValueError):
    pass


def _check_positive(**kw: float) -> None:
    for name, val in kw.items():
        if not val > 0:
            raise ValueError(f"{name} must be positive, got {val!r}")


def u(x: float, y: float) -> float:
    _check_positive(x=x, y=y)
    # x ln(s/x) + y ln(s/y), free of cancellation when x and y differ greatly
    return x * math.log1p(y / x) + y * math.log1p(x / y)


def w(z: float) -> float:
    _check_positive(z=z)
    return math.log1p(z) / z + math.log1p(1 / z)


def v(x: float) -> float:
    _check_positive(x=x)
    return u(x, x**-2)


def v_tilde(x: float) -> float:
    return max(v(x), v(x / 2))


# ---------------------------------------------------------------------------
# root finding


def _scan_bracket(f: Callable[[float], float], lo: float, hi: float, step: float = SCAN_STEP) -> tuple[float, float]:
    a, fa = lo, f(lo)
    n = int(round((hi - lo) / step))
    for i in range(1, n + 1):
        b = lo + i * step
        fb = f(b)
        if fa == 0:
            return a, a
        if fa * fb < 0:
            return a, b
        a, fa = b, fb
    raise BracketNotFound(f"no sign change on ({lo}, {hi})")


def _solve(f: Callable[[float], float], df: Callable[[float], float], lo: float, hi: float) -> float:
    """Scan for a sign change, bisect to 1e-8, then polish with Newton."""
    a, b = _scan_bracket(f, lo, hi)
    fa = f(a)
    while b - a > 1e-8:
        mid = 0.5 * (a + b)
        fm = f(mid)
        if (fm < 0) == (fa < 0):
            a, fa = mid, fm
        else:
            b = mid
    x = 0.5 * (a + b)
    for _ in range(50):
        step = f(x) / df(x)
        x -= step
        if abs(step) < 1e-15 * max(1.0, abs(x)):
            break
    if not (a - 1e-6 <= x <= b + 1e-6):
        raise BracketNotFound("Newton polish left the bisection bracket")
    return x


def z0_equation(z: float) -> float:
    return z * math.log1p(1 / z) - 2 * math.log1p(z)


def _z0_equation_prime(z: float) -> float:
    return math.log1p(1 / z) - 1 / (1 + z) - 2 / (1 + z)


def _v_prime(x: float) -> float:
    y = x**-2
    s = x + y
    return math.log(s / x) - 2 * x**-3 * math.log(s / y)


def _doubling_gap(x: float) -> float:
    return v(x / 2) - v(x)


def _doubling_gap_prime(x: float) -> float:
    return 0.5 * _v_prime(x / 2) - _v_prime(x)


# ---------------------------------------------------------------------------
# zeta and the infinite products

_EM_TERMS = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66)  # B_2 .. B_10
_EM_N = 32


def zeta_minus_one(s: float) -> float:
    """``zeta(s) - 1`` for real ``s >= 2``: Dirichlet sum plus Euler-Maclaurin tail."""
    if s < 2:
        raise ValueError(f"s must be >= 2, got {s}")
    N = _EM_N
    head = math.fsum(n**-s for n in range(2, N))
    tail = [N ** (1 - s) / (s - 1), 0.5 * N**-s]
    rising = s  # s (s+1) ... (s + 2k - 2)
    fact = 2.0
    power = N ** (-s - 1)
    for k, b2k in enumerate(_EM_TERMS, start=1):
        tail.append(b2k / fact * rising * power)
        rising *= (s + 2 * k - 1) * (s + 2 * k)
        fact *= (2 * k + 1) * (2 * k + 2)
        power /= N * N
    return head + math.fsum(tail)


def zeta(s: float) -> float:
    return 1.0 + zeta_minus_one(s)


def zeta_product(threshold: float = ZETA_TRUNCATION) -> float:
    """``prod_{m>=2} zeta(m)``, truncated once ``zeta(m) - 1 < threshold``.

    For large ``m``, ``zeta(m) - 1 ~ 2^{-m}``, so the log of the dropped factors
    from index ``M`` on is about ``2^{1-M}``; that estimate is added.
    """
    logs = []
    m = 2
    while True:
        d = zeta_minus_one(m)
        if d < threshold:
            break
        logs.append(math.log1p(d))
        m += 1
    logs.append(2.0 ** (1 - m))
    return math.exp(math.fsum(logs))


def pochhammer_factor(c: int, threshold: float = ZETA_TRUNCATION) -> float:
    """``prod_{m>=2} (1 - c^{-m})``."""
    if c < 2:
        raise ValueError(f"c must be >= 2, got {c}")
    logs = []
    m = 2
    while c**-m >= threshold:
        logs.append(math.log1p(-(c**-m)))
        m += 1
    logs.append(-(c**-m) * c / (c - 1))
    return math.exp(math.fsum(logs))


@dataclass(frozen=True)
class AsymptoticConstants:
    z0: float
    x0: float
    y0: float
    b0: float
    x1: float
    b1: float
    a0: float
    residual: float = field(default=0.0, compare=False)

    def pochhammer(self, c: int) -> float:
        return pochhammer_factor(c)

    def a_c(self, c: int) -> float:
        return self.a0 * pochhammer_factor(c)

    def as_dict(self, primes: tuple[int, ...] = (2, 3, 5, 7, 11, 13)) -> dict[str, float]:
        out = {k: getattr(self, k) for k in ("z0", "x0", "y0", "b0", "x1", "b1", "a0")}
        for c in primes:
            out[f"a{c}"] = self.a_c(c)
        return out


@lru_cache(maxsize=None)
def solve_constants() -> AsymptoticConstants:
    z0 = _solve(z0_equation, _z0_equation_prime, SCAN_STEP, 2.0)
    x0 = z0 ** (1 / 3)
    y0 = z0 ** (-2 / 3)
    # v(x/2) - v(x) vanishes at x1 > x0; start the scan past x0
    x1 = _solve(_doubling_gap, _doubling_gap_prime, x0 + SCAN_STEP, 2.0)
    return AsymptoticConstants(
        z0=z0, x0=x0, y0=y0, b0=u(x0, y0), x1=x1, b1=v(x1), a0=zeta_product(),
        residual=abs(z0_equation(z0)),
    )


# ---------------------------------------------------------------------------
# envelopes


def phi(t: float) -> float:
    if not t >= 1:
        raise ValueError(f"phi needs t >= 1, got {t!r}")
    e = math.floor(math.log2(t))
    r = t / 2.0**e
    # log2 rounding can be off by one near powers of two
    if r >= 2:
        r /= 2
    elif r < 1:
        r *= 2
    return r


def lambda_t(t: float) -> float:
    x0 = solve_constants().x0
    if t < x0**3:
        raise ValueError(f"t must be >= x0^3, got {t!r}")
    return phi(t ** (1 / 3) / x0)


def b_of_t(t: float) -> float:
    return v_tilde(solve_constants().x0 * lambda_t(t))


def branch(t: float) -> int:
    """1 when the maximum of ``v_tilde`` is taken at ``x``, 2 when at ``x/2``."""
    c = solve_constants()
    return 1 if c.x0 * lambda_t(t) < c.x1 else 2


def b1_correction(t: float) -> float:
    c = solve_constants()
    x = c.x0 * lambda_t(t)
    if x >= c.x1:
        x /= 2
    return math.log1p(x**3) / x


def _sgn(sign: str) -> int:
    if sign in ("+", 1):
        return 1
    if sign in ("-", -1):
        return -1
    raise ValueError(f"sign must be '+' or '-', got {sign!r}")


def v_tau(x: float, tau: float, sign: str) -> float:
    s = _sgn(sign)
    _check_positive(x=x)
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    y = x**-2 + s * tau / x
    if y <= 0:
        raise ValueError(f"x^-2 - tau/x must be positive (x={x}, tau={tau})")
    return u(x, y)


def _v_tau_derivs(x: float, tau: float, s: int) -> tuple[float, float]:
    y = x**-2 + s * tau / x
    dy = -2 * x**-3 - s * tau * x**-2
    d2y = 6 * x**-4 + 2 * s * tau * x**-3
    t = x + y
    ux, uy = math.log(t / x), math.log(t / y)
    uxx, uxy, uyy = 1 / t - 1 / x, 1 / t, 1 / t - 1 / y
    d1 = ux + uy * dy
    d2 = uxx + 2 * uxy * dy + uyy * dy * dy + uy * d2y
    return d1, d2


def v_tau_prime(x: float, tau: float, sign: str) -> float:
    return _v_tau_derivs(x, tau, _sgn(sign))[0]


def x0_tau(tau: float, sign: str) -> float:
    """Critical point of ``v_tau`` near ``x0``; Newton from ``x0``, at most 20 steps."""
    s = _sgn(sign)
    x = solve_constants().x0
    if tau == 0:
        return x
    for _ in range(NEWTON_MAX_STEPS):
        if x <= 0 or x**-2 + s * tau / x <= 0:
            break
        d1, d2 = _v_tau_derivs(x, tau, s)
        if abs(d1) <= 1e-12:
            return x
        if d2 >= 0:
            break
        x -= d1 / d2
    else:
        if x > 0 and x**-2 + s * tau / x > 0 and abs(_v_tau_derivs(x, tau, s)[0]) <= 1e-10:
            return x
    raise ConvergenceError(tau, "+" if s > 0 else "-")


def tau_of_t(t: float) -> float:
    return (2 * t) ** (-1 / 3)


def _tau_admissible(tau: float) -> bool:
    try:
        for sign in "+-":
            xs = x0_tau(tau, sign)
            # b_pm evaluates v_tau on [xs/2, 2 xs)
            if (2 * xs) ** -2 - tau / (2 * xs) <= 0:
                return False
            if not _v_tau_derivs(xs, tau, _sgn(sign))[1] < 0:
                return False
    except ConvergenceError:
        return False
    return True


@lru_cache(maxsize=None)
def operational_threshold() -> float:
    """Smallest ``t`` (to 1e-9 relative in tau) for which both ``b_pm`` are defined.

    Admissibility of tau is monotone on the tested range; bisection in tau.
    """
    lo, hi = 0.0, 1.0
    if _tau_admissible(hi):
        return 0.5
    while hi - lo > 1e-9:
        mid = 0.5 * (lo + hi)
        if _tau_admissible(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * lo**-3


def _b_pm(t: float, sign: str, phase: float) -> float:
    if t < operational_threshold():
        raise BelowThreshold(f"b_pm needs t >= {operational_threshold():.6g}, got {t!r}")
    tau = tau_of_t(t)
    xs = x0_tau(tau, sign)
    x = xs * phi(phase * t ** (1 / 3) / xs)
    return max(v_tau(x, tau, sign), v_tau(x / 2, tau, sign))


def b_pm(t: float, sign: str) -> float:
    """``v_tilde_tau(x0_tau * phi(t^{1/3} / x0_tau))`` at ``tau = (2t)^{-1/3}``."""
    return _b_pm(t, sign, 1.0)


def b_pm_lattice(t: float, sign: str) -> float:
    """As :func:`b_pm` but with phase ``phi((2t)^{1/3} / x0_tau)``.

    The C/D binomial ``C(q + 2^{m-1}(2^m +- 1) - 1, q)`` with ``2^m q <= t``
    rescales to ``v_tau`` on the lattice ``x = (2t)^{1/3} 2^{-m}``, so this is
    the envelope for which ``ln_bstar`` stays within ``O(ln t)``.
    """
    return _b_pm(t, sign, 2.0 ** (1 / 3))


def switch_distance(t: float) -> float:
    """``|phi(t^{1/3}/x0) - x1/x0|`` scaled by ``t^{1/3}``."""
    c = solve_constants()
    return abs(lambda_t(t) - c.x1 / c.x0) * t ** (1 / 3)


def near_switch(t: float, C: float = SWITCH_C) -> bool:
    return switch_distance(t) <= C


@dataclass(frozen=True)
class EnvelopeSample:
    t: float
    b_val: float
    b_plus: float
    b_minus: float
    b1_corr: float
    branch: int
    near_switch: bool

    def __post_init__(self):
        if not self.t > 1:
            raise ValueError("t must exceed 1")
        c = solve_constants()
        if not c.b1 - 1e-9 <= self.b_val <= c.b0 + 1e-9:
            raise ValueError(f"b(t)={self.b_val} outside [b1, b0]")
        if self.branch not in (1, 2):
            raise ValueError("branch must be 1 or 2")


def envelope_sample(t: float) -> EnvelopeSample:
    return EnvelopeSample(
        t=t, b_val=b_of_t(t), b_plus=b_pm(t, "+"), b_minus=b_pm(t, "-"),
        b1_corr=b1_correction(t), branch=branch(t), near_switch=near_switch(t),
    )


# ---------------------------------------------------------------------------
# binomial maximization


def _slots(m: int, variant: str) -> int:
    if variant == "A":
        return 4**m
    if variant == "C/D+":
        return (2**m * (2**m + 1)) // 2
    if variant == "C/D-":
        return (2**m * (2**m - 1)) // 2
    raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")


def ln_binom(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def ln_bstar(t: float, variant: str = "A") -> tuple[float, int, int]:
    """Max of ``ln C(q + M_m - 1, q)`` over ``2^m q <= t``; returns ``(value, m*, q*)``.

    The binomial is increasing in ``q``, so ``q = floor(t / 2^m)`` for each ``m``.
    """
    if not t > 1:
        raise ValueError(f"t must exceed 1, got {t!r}")
    _slots(0, variant)
    best = (-math.inf, 0, 0)
    m = 0
    while 2**m <= t:
        M = _slots(m, variant)
        q = int(t // 2**m)
        if M > 0 and q > 0:
            val = ln_binom(q + M - 1, q)
            if val > best[0]:
                best = (val, m, q)
        m += 1
    if best[0] == -math.inf:
        best = (0.0, 0, 0)
    return best
