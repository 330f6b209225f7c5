"""Special functions and adaptive quadrature used by the closed-form evaluators.

Everything here is a pure function of its arguments.  The two workhorses are

* ``conv_integral`` -- the convolution integral

      int_0^t (t - tau)^alpha tau^beta exp(-lam*tau) dtau
          = B(alpha+1, beta+1) * t^(alpha+beta+1) * 1F1(beta+1; alpha+beta+2; -lam*t)

  which turns all the time integrals of the jump models into Beta/Kummer
  evaluations, and

* ``adaptive_quad`` -- a Gauss-Kronrod (G7/K15) bisection integrator that serves
  as the independent numerical oracle for the closed forms.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

__all__ = [
    "QuadTolerance",
    "QuadResult",
    "ConvergenceError",
    "QuadratureError",
    "ln_gamma",
    "beta",
    "kummer_1f1",
    "conv_integral",
    "conv_integral_dt",
    "adaptive_quad",
]


class ConvergenceError(RuntimeError):
    """A series or iteration failed to converge within its budget."""


class QuadratureError(RuntimeError):
    """Quadrature could not meet the requested tolerance.

    Carries the best estimate and the achieved error bound so callers can
    decide whether the result is still usable.
    """

    def __init__(self, message: str, estimate: float, error: float):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


@dataclass(frozen=True)
class QuadTolerance:
    """Tolerance budget for adaptive quadrature."""

    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_subdivisions: int = 400

    def __post_init__(self):
        if not self.abs_tol > 0.0:
            raise ValueError(f"abs_tol must be positive, got {self.abs_tol}")
        if not self.rel_tol > 0.0:
            raise ValueError(f"rel_tol must be positive, got {self.rel_tol}")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


class QuadResult(NamedTuple):
    value: float
    error: float


def ln_gamma(x: float) -> float:
    """log Gamma(x) for x > 0."""
    if not x > 0.0:
        raise ValueError(f"ln_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def beta(a: float, b: float) -> float:
    """Beta function B(a, b) = Gamma(a)Gamma(b)/Gamma(a+b), a, b > 0.

    Evaluated in log space so large integer orders (factorial ratios) do not
    overflow.  The sum lgamma(a) + lgamma(b) is symmetric as computed, so
    beta(a, b) == beta(b, a) bit for bit.
    """
    if not (a > 0.0 and b > 0.0):
        raise ValueError(f"beta requires positive arguments, got ({a}, {b})")
    return math.exp(math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))


_KUMMER_MAX_TERMS = 500_000


def kummer_1f1(p: float, q: float, z: float) -> float:
    """Confluent hypergeometric function 1F1(p; q; z).

    Only z <= 0 arises in this package (arguments of the form -lam*t).  For
    those the alternating series is avoided via the Kummer transformation

        1F1(p, q, z) = exp(z) * 1F1(q - p, q, -z),

    whose series has positive terms whenever q > p > 0, so there is no
    cancellation.  Positive z falls back to the direct series (positive terms
    for p, q > 0).
    """
    if q <= 0.0 and q == int(q):
        raise ValueError(f"1F1 undefined for non-positive integer q = {q}")
    if z == 0.0:
        return 1.0
    if z < 0.0:
        return math.exp(z) * _kummer_series(q - p, q, -z)
    return _kummer_series(p, q, z)


def _kummer_series(a: float, q: float, x: float) -> float:
    # sum_n (a)_n x^n / ((q)_n n!) with x >= 0; terms positive for a, q > 0
    term = 1.0
    total = 1.0
    comp = 0.0  # Kahan compensation
    for n in range(_KUMMER_MAX_TERMS):
        term *= (a + n) * x / ((q + n) * (n + 1))
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if abs(term) <= 1e-17 * abs(total) and n > 2:
            return total
    raise ConvergenceError(
        f"1F1 series did not converge for a={a}, q={q}, x={x} "
        f"within {_KUMMER_MAX_TERMS} terms"
    )


def conv_integral(alpha: int, beta_: int, lam: float, t: float) -> float:
    """int_0^t (t - tau)^alpha * tau^beta_ * exp(-lam*tau) dtau.

    Closed form B(alpha+1, beta_+1) * t^(alpha+beta_+1) * 1F1(beta_+1;
    alpha+beta_+2; -lam*t).  Integer orders only; the callers never need
    fractional powers.  Non-negative and non-decreasing in t.
    """
    if alpha < 0 or beta_ < 0:
        raise ValueError(f"orders must be non-negative, got ({alpha}, {beta_})")
    if lam < 0.0:
        raise ValueError(f"rate must be non-negative, got {lam}")
    if t < 0.0:
        raise ValueError(f"t must be non-negative, got {t}")
    if t == 0.0:
        return 0.0
    b = beta(alpha + 1.0, beta_ + 1.0)
    return b * t ** (alpha + beta_ + 1) * kummer_1f1(beta_ + 1.0, alpha + beta_ + 2.0, -lam * t)


def conv_integral_dt(alpha: int, beta_: int, lam: float, t: float) -> float:
    """Time derivative of ``conv_integral``.

    Leibniz rule: the boundary term vanishes for alpha >= 1, leaving
    alpha * conv_integral(alpha-1, beta_, lam, t); for alpha == 0 only the
    boundary term t^beta_ * exp(-lam*t) survives.
    """
    if t < 0.0:
        raise ValueError(f"t must be non-negative, got {t}")
    if t == 0.0:
        return 0.0
    if alpha == 0:
        return t**beta_ * math.exp(-lam * t)
    return alpha * conv_integral(alpha - 1, beta_, lam, t)


# Gauss-Kronrod 7/15 pair on [-1, 1] (QUADPACK dqk15 constants).
_XGK = (
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
)
_WGK = (
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
)
_WG = (
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
)


def _gk15(f: Callable[[float], float], a: float, b: float) -> tuple[float, float]:
    """One G7/K15 panel; returns (kronrod value, error estimate)."""
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    fc = f(mid)
    resk = _WGK[7] * fc
    resg = _WG[3] * fc
    for j in range(7):
        x = half * _XGK[j]
        f1 = f(mid - x)
        f2 = f(mid + x)
        resk += _WGK[j] * (f1 + f2)
        if j % 2 == 1:  # odd Kronrod indices are the Gauss-7 nodes
            resg += _WG[j // 2] * (f1 + f2)
    resk *= half
    resg *= half
    err = abs(resk - resg)
    # QUADPACK-style sharpening of the raw |K - G| difference
    if err != 0.0:
        err = min(err, (200.0 * err) ** 1.5) if (200.0 * err) < 1.0 else err
    return resk, err


def adaptive_quad(
    f: Callable[[float], float],
    t: float,
    tol: QuadTolerance | None = None,
) -> QuadResult:
    """Integrate ``f`` over [0, t] with a bisecting Gauss-Kronrod rule.

    Returns the estimate together with the achieved error bound.  Raises
    :class:`QuadratureError` (carrying the best estimate) if the subdivision
    budget is exhausted before the tolerance is met.
    """
    if t < 0.0:
        raise ValueError(f"t must be non-negative, got {t}")
    if tol is None:
        tol = QuadTolerance()
    if t == 0.0:
        return QuadResult(0.0, 0.0)

    val, err = _gk15(f, 0.0, t)
    # max-heap on panel error
    panels = [(-err, 0.0, t, val, err)]
    total = val
    total_err = err
    for _ in range(tol.max_subdivisions):
        if total_err <= max(tol.abs_tol, tol.rel_tol * abs(total)):
            return QuadResult(total, total_err)
        _, a, b, pval, perr = heapq.heappop(panels)
        mid = 0.5 * (a + b)
        lval, lerr = _gk15(f, a, mid)
        rval, rerr = _gk15(f, mid, b)
        total += (lval + rval) - pval
        total_err += (lerr + rerr) - perr
        heapq.heappush(panels, (-lerr, a, mid, lval, lerr))
        heapq.heappush(panels, (-rerr, mid, b, rval, rerr))
    if total_err <= max(tol.abs_tol, tol.rel_tol * abs(total)):
        return QuadResult(total, total_err)
    raise QuadratureError(
        f"tolerance not met after {tol.max_subdivisions} subdivisions: "
        f"estimate {total!r}, error bound {total_err:.3e}",
        estimate=total,
        error=total_err,
    )
