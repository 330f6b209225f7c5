"""Bivariate Poisson pair with a killing barrier: closed-form survival and
first-passage quantities.

The pair (X1, X2) is driven by three independent Poisson streams,

    X1 = Y1 + Y12,    X2 = Y2 + Y12,

with rates lambda1, lambda2, and a shared rate lambda12 that correlates the
coordinates (and can kill both at once).  A coordinate dies when its count
reaches the barrier M; once one coordinate is dead the shared stream
disappears and the survivor counts only its own events.

``survival_both``/``fpt_both`` describe the first exit, ``survival_last``/
``fpt_last`` the final one.  The last-exit quantities average the survivor's
law over the first killing time; every time integral reduces to
:func:`fptorder.specfun.conv_integral`, split into the pair of helping
integrals H1 (event-rate part) and H2 (level-count part) that
:func:`helping_integrals` exposes for verification.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .specfun import conv_integral, conv_integral_dt

__all__ = [
    "BiPoissonParams",
    "poisson_pmf",
    "marginal_survival",
    "marginal_fpt",
    "joint_pmf",
    "conditional_pmf",
    "survival_both",
    "fpt_both",
    "survival_last",
    "fpt_last",
    "helping_integrals",
]


@dataclass(frozen=True)
class BiPoissonParams:
    """Intensities and barrier of the correlated pair."""

    lambda1: float
    lambda2: float
    lambda12: float
    barrier_m: int

    def __post_init__(self):
        for name in ("lambda1", "lambda2", "lambda12"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be non-negative")
        if self.barrier_m < 1:
            raise ValueError("barrier_m must be >= 1")
        if self.lambda1 + self.lambda12 <= 0.0 and self.lambda2 + self.lambda12 <= 0.0:
            raise ValueError("at least one coordinate needs a positive total rate")

    @property
    def total_rate(self) -> float:
        return self.lambda1 + self.lambda2 + self.lambda12


def poisson_pmf(k: int, rate: float, t: float) -> float:
    """P(N_t = k) for a Poisson process of the given rate, in log space."""
    if k < 0 or rate < 0.0 or t < 0.0:
        raise ValueError("k, rate, t must be non-negative")
    x = rate * t
    if x == 0.0:
        return 1.0 if k == 0 else 0.0
    return math.exp(k * math.log(x) - x - math.lgamma(k + 1))


def marginal_survival(rate: float, m: int, t: float) -> float:
    """P(count < m at time t): the barrier-m survival of one coordinate."""
    if m < 1:
        raise ValueError("barrier must be >= 1")
    return math.fsum(poisson_pmf(k, rate, t) for k in range(m))


def marginal_fpt(rate: float, m: int, t: float) -> float:
    """Density of the first time the count reaches m (= -d/dt of the survival).

    The per-level flux sum telescopes to the Erlang(m, rate) density
    rate * (rate*t)^(m-1) e^(-rate*t)/(m-1)!, which is what is evaluated here;
    it is exactly the derivative of :func:`marginal_survival`.
    """
    if t <= 0.0:
        raise ValueError("marginal_fpt requires t > 0")
    if rate <= 0.0:
        raise ValueError("marginal_fpt requires rate > 0")
    return rate * poisson_pmf(m - 1, rate, t)


def joint_pmf(x1: int, x2: int, params: BiPoissonParams, t: float) -> float:
    """P(X1 = x1, X2 = x2 at time t).

    Summed over the shared count k: the k-th term is the product of three
    independent Poisson masses with k common events,
    lam1^(x1-k) lam2^(x2-k) lam12^k t^(x1+x2-k) e^(-at) / ((x1-k)!(x2-k)!k!).
    """
    if x1 < 0 or x2 < 0 or t < 0.0:
        raise ValueError("x1, x2, t must be non-negative")
    if t == 0.0:
        return 1.0 if (x1 == 0 and x2 == 0) else 0.0
    a = params.total_rate
    log_t = math.log(t)
    terms = []
    for k in range(min(x1, x2) + 1):
        ln = -a * t + (x1 + x2 - k) * log_t
        ln -= math.lgamma(x1 - k + 1) + math.lgamma(x2 - k + 1) + math.lgamma(k + 1)
        skip = False
        for lam, e in ((params.lambda1, x1 - k), (params.lambda2, x2 - k), (params.lambda12, k)):
            if e > 0:
                if lam == 0.0:
                    skip = True
                    break
                ln += e * math.log(lam)
        if not skip:
            terms.append(math.exp(ln))
    return math.fsum(terms)


def conditional_pmf(x: int, y: int, params: BiPoissonParams, t: float) -> float:
    """P(X1 = x at t | X2 = y at t).

    Given y driving events of X2, each is a shared event independently with
    probability p = lam12/(lam2 + lam12); the shared ones also count toward
    X1.  Hence the convolution of Binomial(y, p) with Poisson(lam1 * t).
    """
    if x < 0 or y < 0 or t < 0.0:
        raise ValueError("x, y, t must be non-negative")
    gamma = params.lambda2 + params.lambda12
    p = params.lambda12 / gamma if gamma > 0.0 else 0.0
    terms = []
    for j in range(min(x, y) + 1):
        binom = math.comb(y, j) * p**j * (1.0 - p) ** (y - j)
        terms.append(binom * poisson_pmf(x - j, params.lambda1, t))
    return math.fsum(terms)


def survival_both(params: BiPoissonParams, t: float) -> float:
    """P(both coordinates below the barrier at time t)."""
    m = params.barrier_m
    return math.fsum(
        joint_pmf(x, y, params, t) for x in range(m) for y in range(m)
    )


def fpt_both(params: BiPoissonParams, t: float) -> float:
    """Density of the first exit time (= -d/dt survival_both).

    Term-wise derivative of the joint mass: each (x, y, k) term contributes
    [a*t - (x + y - k)] * t^(x+y-k-1) in place of t^(x+y-k).
    """
    if t <= 0.0:
        raise ValueError("fpt_both requires t > 0")
    a = params.total_rate
    m = params.barrier_m
    log_t = math.log(t)
    terms = []
    for x in range(m):
        for y in range(m):
            for k in range(min(x, y) + 1):
                n = x + y - k
                ln = -a * t - (
                    math.lgamma(x - k + 1) + math.lgamma(y - k + 1) + math.lgamma(k + 1)
                )
                skip = False
                for lam, e in ((params.lambda1, x - k), (params.lambda2, y - k), (params.lambda12, k)):
                    if e > 0:
                        if lam == 0.0:
                            skip = True
                            break
                        ln += e * math.log(lam)
                if skip:
                    continue
                # d/dt of t^n is a*t^n - n*t^(n-1) after the sign flip
                terms.append(a * math.exp(ln + n * log_t))
                if n > 0:
                    terms.append(-n * math.exp(ln + (n - 1) * log_t))
    return math.fsum(terms)


def helping_integrals(
    j: int, i: int, k: int, l: int, lam_survivor: float, gamma: float, t: float
) -> tuple[float, float]:
    """The (H1, H2) pair for one (j, i, k, l) term of the last-exit sum.

        H1 =  gamma * e^(-lam_s t) * int_0^t (t-tau)^(j-i) tau^(i-k+l)   e^(-gamma tau) dtau
        H2 = -l     * e^(-lam_s t) * int_0^t (t-tau)^(j-i) tau^(i-k+l-1) e^(-gamma tau) dtau

    H2 vanishes for l == 0.  Their sum integrates the survivor's transition
    weight against one level term of the dead coordinate's first-passage
    density.
    """
    pref = math.exp(-lam_survivor * t)
    h1 = gamma * pref * conv_integral(j - i, i - k + l, gamma, t)
    h2 = 0.0 if l == 0 else -l * pref * conv_integral(j - i, i - k + l - 1, gamma, t)
    return h1, h2


def _last_exit_terms(params: BiPoissonParams, survivor: int):
    """Yield (weight, j, i, k, l) for the addend where ``survivor`` outlives the other.

    Weights are assembled in log space: factorials reach (M-1)! and the
    binomial covers M trials, all terms positive.
    """
    if survivor == 1:
        lam_s = params.lambda1
        gamma = params.lambda2 + params.lambda12
    else:
        lam_s = params.lambda2
        gamma = params.lambda1 + params.lambda12
    if gamma <= 0.0:
        return  # the other coordinate never exits; this addend is empty
    m = params.barrier_m
    p = params.lambda12 / gamma
    if p == 1.0:
        return  # every binomial factor carries (1-p)^(m-k) with k <= m-1
    log_gamma = math.log(gamma)
    for j in range(m):
        for i in range(j + 1):
            if lam_s == 0.0 and j > i:
                continue  # survivor cannot jump after the kill
            ln_move = (j - i) * math.log(lam_s) - math.lgamma(j - i + 1) if j > i else 0.0
            for k in range(i + 1):
                if lam_s == 0.0 and i > k:
                    continue  # own-stream jumps before the kill need lam_s > 0
                if p == 0.0 and k > 0:
                    continue
                ln_own = (i - k) * math.log(lam_s) - math.lgamma(i - k + 1) if i > k else 0.0
                ln_binom = math.log(math.comb(m, k)) + (m - k) * math.log1p(-p)
                if k > 0:
                    ln_binom += k * math.log(p)
                for l in range(m):
                    ln_level = l * log_gamma - math.lgamma(l + 1)
                    yield math.exp(ln_move + ln_own + ln_binom + ln_level), j, i, k, l


def _last_exit_addend(params: BiPoissonParams, survivor: int, t: float) -> float:
    lam_s = params.lambda1 if survivor == 1 else params.lambda2
    gamma = (params.lambda2 if survivor == 1 else params.lambda1) + params.lambda12
    total = 0.0
    comp = 0.0
    for w, j, i, k, l in _last_exit_terms(params, survivor):
        h1, h2 = helping_integrals(j, i, k, l, lam_s, gamma, t)
        term = w * (h1 + h2)
        y = term - comp
        s = total + y
        comp = (s - total) - y
        total = s
    return total


def _last_exit_addend_dt(params: BiPoissonParams, survivor: int, t: float) -> float:
    """Exact time derivative of one last-exit addend (term-wise Leibniz rule)."""
    lam_s = params.lambda1 if survivor == 1 else params.lambda2
    gamma = (params.lambda2 if survivor == 1 else params.lambda1) + params.lambda12
    pref = math.exp(-lam_s * t)
    total = 0.0
    comp = 0.0
    for w, j, i, k, l in _last_exit_terms(params, survivor):
        g1 = conv_integral(j - i, i - k + l, gamma, t)
        d1 = conv_integral_dt(j - i, i - k + l, gamma, t)
        dh = gamma * pref * (d1 - lam_s * g1)
        if l > 0:
            g2 = conv_integral(j - i, i - k + l - 1, gamma, t)
            d2 = conv_integral_dt(j - i, i - k + l - 1, gamma, t)
            dh += -l * pref * (d2 - lam_s * g2)
        term = w * dh
        y = term - comp
        s = total + y
        comp = (s - total) - y
        total = s
    return total


def survival_last(params: BiPoissonParams, t: float) -> float:
    """P(at least one coordinate still below the barrier at time t).

    First addend: both alive.  The other two average the lone survivor's
    transition law over the first killing time of its partner; simultaneous
    kills need no extra term because they already end both coordinates inside
    the first addend's complement.
    """
    if t < 0.0:
        raise ValueError("t must be non-negative")
    if t == 0.0:
        return 1.0
    return (
        survival_both(params, t)
        + _last_exit_addend(params, 1, t)
        + _last_exit_addend(params, 2, t)
    )


def fpt_last(params: BiPoissonParams, t: float) -> float:
    """Density of the last exit time (= -d/dt survival_last), differentiated
    analytically term by term rather than by finite differences."""
    if t <= 0.0:
        raise ValueError("fpt_last requires t > 0")
    return (
        fpt_both(params, t)
        - _last_exit_addend_dt(params, 1, t)
        - _last_exit_addend_dt(params, 2, t)
    )
