"""Trivariate Poisson / common-shock default model with killing barrier 1.

Three counters are driven by six independent Poisson streams,

    X1 = Y1 + Y12 + Y13,   X2 = Y2 + Y12 + Y23,   X3 = Y3 + Y13 + Y23,

and a coordinate dies on its first event (barrier 1), which makes the model a
Marshall-Olkin common-shock system: a cross stream firing kills two
coordinates at once.  When a coordinate dies, every stream carrying its index
is switched off, so the survivors slow down.

All three survival functions are finite mixtures of exponentials in t.  The
mixtures are assembled once per parameter set (:func:`survival_mixes`) from
the per-path contributions on the killing graph:

* one coordinate killed           -> :func:`contrib_one_kill`
* two killed at different times   -> :func:`contrib_two_sequential`
* two killed by one shared event  -> :func:`contrib_two_simultaneous`

The mixture form makes derivatives (:func:`fpt_n`) and discounted integrals
(the CDS legs) exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

__all__ = [
    "TriPoissonParams",
    "ExpMix",
    "survival_mixes",
    "trivariate_pmf",
    "survival3",
    "survival2",
    "survival1",
    "contrib_one_kill",
    "contrib_two_sequential",
    "contrib_two_simultaneous",
    "fpt_n",
]

# relative gap below which two decay rates are treated as confluent
_CONFLUENT_RTOL = 1e-12


@dataclass(frozen=True)
class TriPoissonParams:
    """Single intensities (lambda1..3) and pairwise cross intensities
    (lambda12, lambda13, lambda23), each >= 0 with a positive total."""

    lam: tuple[float, float, float]
    cross: tuple[float, float, float]  # (12, 13, 23)

    def __post_init__(self):
        if len(self.lam) != 3 or len(self.cross) != 3:
            raise ValueError("need three single and three cross intensities")
        if any(v < 0.0 for v in self.lam) or any(v < 0.0 for v in self.cross):
            raise ValueError("intensities must be non-negative")
        if self.total_rate <= 0.0:
            raise ValueError("total intensity must be positive")

    @property
    def total_rate(self) -> float:
        """Sum of all six stream intensities; the all-alive survival decays at this rate."""
        return sum(self.lam) + sum(self.cross)

    def single(self, i: int) -> float:
        return self.lam[i - 1]

    def pair(self, i: int, j: int) -> float:
        key = frozenset((i, j))
        if key == frozenset((1, 2)):
            return self.cross[0]
        if key == frozenset((1, 3)):
            return self.cross[1]
        if key == frozenset((2, 3)):
            return self.cross[2]
        raise ValueError(f"invalid coordinate pair ({i}, {j})")


class ExpMix:
    """A finite mixture sum_k c_k * t^p_k * e^(-g_k t) (p_k in {0, 1}).

    The t*e^(-g t) terms only appear through confluent limits of coinciding
    rates; ordinary parameter sets stay at p = 0 throughout.
    """

    def __init__(self, terms: Iterable[tuple[float, float, int]] = ()):
        merged: dict[tuple[float, int], float] = {}
        for c, g, p in terms:
            if c == 0.0:
                continue
            merged[(g, p)] = merged.get((g, p), 0.0) + c
        self.terms = tuple(
            (c, g, p) for (g, p), c in sorted(merged.items()) if c != 0.0
        )

    def value(self, t: float) -> float:
        return math.fsum(
            c * (t if p else 1.0) * math.exp(-g * t) for c, g, p in self.terms
        )

    def neg_derivative(self) -> "ExpMix":
        """-d/dt of the mixture, again an ExpMix."""
        out: list[tuple[float, float, int]] = []
        for c, g, p in self.terms:
            out.append((c * g, g, p))
            if p == 1:
                out.append((-c, g, 0))
        return ExpMix(out)

    def __add__(self, other: "ExpMix") -> "ExpMix":
        return ExpMix(self.terms + other.terms)

    def value_at_zero(self) -> float:
        return math.fsum(c for c, _, p in self.terms if p == 0)


def _decaying_diff(b: float, a: float, t: float) -> float:
    """e^(-b t) - e^(-a t), stable when a is close to b."""
    return -math.exp(-b * t) * math.expm1(-(a - b) * t)


def _confluent(b: float, a: float) -> bool:
    scale = max(abs(a), abs(b), 1e-300)
    return abs(a - b) <= _CONFLUENT_RTOL * scale


def _diff_mix(coef: float, b: float, a: float) -> list[tuple[float, float, int]]:
    """Terms of coef * (e^(-b t) - e^(-a t)), with the t*e^(-b t) confluent limit."""
    if _confluent(b, a):
        if a == b:
            return []
        return [(coef * (a - b), b, 1)]
    return [(coef, b, 0), (-coef, a, 0)]


def _one_kill_mix(params: TriPoissonParams, i: int, j: int, r: int) -> ExpMix:
    """Path AAA -> coordinate i dead: probability that exactly i was killed
    (by its own stream) at some time before t and j, r are still alive."""
    li = params.single(i)
    if li == 0.0:
        return ExpMix()
    a = params.total_rate
    b = params.single(j) + params.single(r) + params.pair(j, r)
    c = li + params.pair(i, j) + params.pair(i, r)  # equals a - b
    return ExpMix(_diff_mix(li / c, b, a))


def _two_sequential_mix(params: TriPoissonParams, first: int, second: int, r: int) -> ExpMix:
    """Path where ``first`` dies (own stream), then ``second`` dies (own
    stream), leaving r alone.  Double time integral in closed form."""
    lf = params.single(first)
    ls = params.single(second)
    if lf == 0.0 or ls == 0.0:
        return ExpMix()
    a = params.total_rate
    lr = params.single(r)
    c = lf + params.pair(first, second) + params.pair(first, r)
    d = ls + params.pair(second, r)
    # c > 0 and d > 0 here because lf, ls > 0
    coef_a = lf * ls / (c * d)
    coef_b = lf * ls / (c * (a - lr))  # a - lr = c + d > 0
    terms = _diff_mix(coef_a, lr, ls + lr + params.pair(second, r))
    terms += _diff_mix(-coef_b, lr, a)
    return ExpMix(terms)


def _two_simultaneous_mix(params: TriPoissonParams, i: int, j: int, r: int) -> ExpMix:
    """Path where one shared event kills i and j together, leaving r alone."""
    lij = params.pair(i, j)
    if lij == 0.0:
        return ExpMix()
    a = params.total_rate
    lr = params.single(r)
    return ExpMix(_diff_mix(lij / (a - lr), lr, a))


def survival_mixes(params: TriPoissonParams) -> tuple[ExpMix, ExpMix, ExpMix]:
    """Assemble (S3, S2, S1) as exponential mixtures.

    S3 is the all-alive survival e^(-a t).  S2 adds the three single-kill
    paths; S1 adds the nine paths that leave one survivor (six sequential
    orderings plus three simultaneous double kills).
    """
    a = params.total_rate
    s3 = ExpMix([(1.0, a, 0)])
    s2 = s3
    for i in (1, 2, 3):
        j, r = (q for q in (1, 2, 3) if q != i)
        s2 = s2 + _one_kill_mix(params, i, j, r)
    s1 = s2
    for r in (1, 2, 3):
        i, j = (q for q in (1, 2, 3) if q != r)
        s1 = s1 + _two_sequential_mix(params, i, j, r)
        s1 = s1 + _two_sequential_mix(params, j, i, r)
        s1 = s1 + _two_simultaneous_mix(params, i, j, r)
    return s3, s2, s1


def trivariate_pmf(x: tuple[int, int, int], params: TriPoissonParams, t: float) -> float:
    """P(X1, X2, X3) = x at time t for the unkilled counting process.

    Sum over the admissible shared counts (y12, y13, y23); every term is a
    product of six Poisson masses, assembled in log space.
    """
    x1, x2, x3 = x
    if min(x1, x2, x3) < 0 or t < 0.0:
        raise ValueError("counts and t must be non-negative")
    if t == 0.0:
        return 1.0 if x1 == x2 == x3 == 0 else 0.0
    l1, l2, l3 = params.lam
    l12, l13, l23 = params.cross
    a = params.total_rate
    log_t = math.log(t)
    terms = []
    for y12 in range(min(x1, x2) + 1):
        for y13 in range(min(x1 - y12, x3) + 1):
            for y23 in range(min(x2 - y12, x3 - y13) + 1):
                counts = (
                    (l1, x1 - y12 - y13),
                    (l2, x2 - y12 - y23),
                    (l3, x3 - y13 - y23),
                    (l12, y12),
                    (l13, y13),
                    (l23, y23),
                )
                ln = -a * t
                skip = False
                for lam, e in counts:
                    if e > 0:
                        if lam == 0.0:
                            skip = True
                            break
                        ln += e * (math.log(lam) + log_t)
                    ln -= math.lgamma(e + 1)
                if not skip:
                    terms.append(math.exp(ln))
    return math.fsum(terms)


def survival3(params: TriPoissonParams, t: float) -> float:
    """P(no coordinate killed by time t) = e^(-a t)."""
    return math.exp(-params.total_rate * t)


def survival2(params: TriPoissonParams, t: float) -> float:
    """P(at most one coordinate killed by time t)."""
    _, s2, _ = survival_mixes(params)
    return s2.value(t)


def survival1(params: TriPoissonParams, t: float) -> float:
    """P(at least one coordinate alive at time t)."""
    _, _, s1 = survival_mixes(params)
    return s1.value(t)


def contrib_one_kill(params: TriPoissonParams, i: int, j: int, r: int, t: float) -> float:
    """Contribution of the single-kill path (i dead; j, r alive) at time t."""
    _check_perm(i, j, r)
    return _one_kill_mix(params, i, j, r).value(t)


def contrib_two_sequential(params: TriPoissonParams, i: int, j: int, r: int, t: float) -> float:
    """Contribution of the ordered path (i dead first, then j; r alive)."""
    _check_perm(i, j, r)
    return _two_sequential_mix(params, i, j, r).value(t)


def contrib_two_simultaneous(params: TriPoissonParams, i: int, j: int, r: int, t: float) -> float:
    """Contribution of the shared-event path (i and j dead together; r alive)."""
    _check_perm(i, j, r)
    return _two_simultaneous_mix(params, i, j, r).value(t)


def fpt_n(params: TriPoissonParams, n: int, t: float) -> float:
    """Density of the time the n-th survival level is lost: -dS^n/dt.

    Exact mixture derivative; S^3 gives the first kill, S^1 the last.
    """
    if n not in (1, 2, 3):
        raise ValueError("n must be 1, 2, or 3")
    mixes = survival_mixes(params)
    return mixes[3 - n].neg_derivative().value(t)


def _check_perm(i: int, j: int, r: int) -> None:
    if sorted((i, j, r)) != [1, 2, 3]:
        raise ValueError(f"(i, j, r) must be a permutation of (1, 2, 3), got {(i, j, r)}")
