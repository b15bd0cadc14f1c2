"""Weight distributions, generalized inverses, dyadic quantile sequences,
and the growth/dimension regime classifier.

A distribution function F with F(0-) = 0 is represented either as a finite
atom list or as a piecewise inverse (constant and power-law segments on
(0,1]).  The sequence a_k = F^{-1}(1/2 + 2^{-k}) controls both the
static growth dichotomy and the dynamical regime; `classify_regime` turns
symbolic knowledge about a_k into theorem-tagged conclusions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np


class DistributionError(ValueError):
    pass


@dataclass(frozen=True)
class Cdf:
    """Distribution function of a nonnegative weight.

    kind "atoms": finite support given by (values, cum) with cum increasing
    to 1; F^{-1}(t) = values[min i : cum[i] >= t].
    kind "power": F(x) = 1/2 + x**a on [0, (1/2)**(1/a)] (the one-parameter
    family with a polynomial density just above the critical mass at 0).
    """

    kind: str
    values: tuple = ()
    cum: tuple = ()
    a: float = 0.0
    spec: str = ""

    # -- evaluation ---------------------------------------------------------

    def quantile(self, t):
        """Generalized inverse F^{-1}(t) = inf{y : F(y) >= t}, t in (0,1).

        Accepts scalars or arrays; arrays are evaluated without validation
        of individual entries (labels from rng.py are always in (0,1)).
        """
        if np.isscalar(t):
            if not (0.0 < t < 1.0):
                raise DistributionError(f"quantile requires t in (0,1), got {t}")
            return float(self._q(np.asarray([t]))[0])
        return self._q(np.asarray(t, dtype=np.float64))

    def _q(self, t: np.ndarray) -> np.ndarray:
        if self.kind == "atoms":
            cum = np.asarray(self.cum)
            vals = np.asarray(self.values)
            i = np.searchsorted(cum, t, side="left")
            i = np.minimum(i, len(vals) - 1)
            return vals[i]
        # power kind
        out = np.zeros_like(t)
        hi = t > 0.5
        out[hi] = np.power(t[hi] - 0.5, 1.0 / self.a)
        return out

    def cdf(self, x):
        """F(x), right-continuous; defined for scalars or arrays."""
        xs = np.asarray(x, dtype=np.float64)
        if self.kind == "atoms":
            vals = np.asarray(self.values)
            cum = np.asarray(self.cum)
            j = np.searchsorted(vals, xs, side="right") - 1
            out = np.where(j >= 0, cum[np.maximum(j, 0)], 0.0)
        else:
            xmax = 0.5 ** (1.0 / self.a)
            out = np.clip(0.5 + np.power(np.clip(xs, 0.0, None), self.a), 0.0, 1.0)
            out = np.where(xs < 0, 0.0, np.where(xs >= xmax, 1.0, out))
        return float(out) if np.isscalar(x) else out

    @property
    def f0(self) -> float:
        return self.cdf(0.0)

    def ak(self, k: int) -> float:
        """a_k = F^{-1}(1/2 + 2^{-k}) for k >= 2."""
        if k < 2:
            raise DistributionError("ak requires k >= 2")
        return self.quantile(0.5 + 2.0 ** (-k))

    def atoms(self) -> tuple[np.ndarray, np.ndarray]:
        """(values, point masses); only for finite-support distributions."""
        if self.kind != "atoms":
            raise DistributionError("not a finite-support distribution")
        cum = np.asarray(self.cum)
        probs = np.diff(np.concatenate([[0.0], cum]))
        return np.asarray(self.values), probs

    def max_weight(self) -> float:
        if self.kind == "atoms":
            return float(self.values[-1])
        return 0.5 ** (1.0 / self.a)


def quantile(F: Cdf, t: float):
    return F.quantile(t)


def sample_weight(F: Cdf, u):
    """tau = F^{-1}(omega) for a uniform label omega."""
    return F.quantile(u)


def ak(F: Cdf, k: int) -> float:
    return F.ak(k)


# -- constructors -----------------------------------------------------------


def from_atoms(pairs: Sequence[tuple[float, float]], spec: str = "") -> Cdf:
    """Cdf from sorted (value, cumulative probability) pairs."""
    vals = [float(v) for v, _ in pairs]
    cums = [float(c) for _, c in pairs]
    if any(v < 0 for v in vals):
        raise DistributionError("weights must be nonnegative (F(0-) = 0)")
    if sorted(vals) != vals or sorted(cums) != cums:
        raise DistributionError("atom list must be sorted in value and cumulative prob")
    if not math.isclose(cums[-1], 1.0, abs_tol=1e-12):
        raise DistributionError("final cumulative probability must be 1")
    cums[-1] = 1.0
    # collapse duplicate cumulative points onto the smallest value (infimum)
    out_v, out_c = [], []
    for v, c in zip(vals, cums):
        if out_c and c == out_c[-1]:
            continue
        if out_v and v == out_v[-1]:
            out_c[-1] = c
            continue
        out_v.append(v)
        out_c.append(c)
    if not spec:
        spec = "atoms:" + ",".join(f"{repr(v)}@{repr(c)}" for v, c in zip(out_v, out_c))
    return Cdf(kind="atoms", values=tuple(out_v), cum=tuple(out_c), spec=spec)


def bernoulli(p0: float = 0.5, value: float = 1.0) -> Cdf:
    """Mass p0 at 0 and the rest at `value`."""
    if not (0.0 < p0 < 1.0):
        raise DistributionError("bernoulli requires p0 in (0,1)")
    return from_atoms([(0.0, p0), (value, 1.0)], spec=f"bernoulli:{repr(p0)},{repr(value)}")


def zhang(a: float) -> Cdf:
    """F(x) = 1/2 + x**a on [0, (1/2)**(1/a)]; 0 below, 1 above."""
    if a <= 0:
        raise DistributionError("zhang family requires a > 0")
    return Cdf(kind="power", a=float(a), spec=f"zhang:{repr(float(a))}")


@dataclass(frozen=True)
class AkSequence:
    """Symbolic family for the dyadic quantile sequence a_k, k >= 2.

    constant: a_k = c
    powerlog: a_k = c * k**(-beta) * log(k+1)**(-gamma)
    geometric: a_k = c * r**k
    explicit: a finite prefix starting at k=2, then an optional tail family
    """

    family: str
    params: tuple = ()
    prefix: tuple = ()
    tail: Optional["AkSequence"] = None

    def __post_init__(self):
        if self.family not in ("constant", "powerlog", "geometric", "explicit"):
            raise DistributionError(f"unknown a_k family {self.family!r}")
        v = self.values(65)
        if np.any(v < 0):
            raise DistributionError("a_k must be nonnegative")
        if np.any(np.diff(v) > 1e-15 * np.maximum(v[:-1], 1.0)):
            raise DistributionError("a_k must be nonincreasing for k >= 2")

    def value(self, k: int) -> float:
        if k < 2:
            raise DistributionError("a_k defined for k >= 2")
        if self.family == "constant":
            return float(self.params[0])
        if self.family == "powerlog":
            c, beta, gamma = self.params
            return float(c) * k ** (-beta) * math.log(k + 1) ** (-gamma)
        if self.family == "geometric":
            c, r = self.params
            return float(c) * r**k
        i = k - 2
        if i < len(self.prefix):
            return float(self.prefix[i])
        if self.tail is not None:
            return self.tail.value(k)
        return float(self.prefix[-1]) if self.prefix else 0.0

    def values(self, k_max: int) -> np.ndarray:
        return np.array([self.value(k) for k in range(2, k_max + 1)])

    def scaled(self, c: float) -> "AkSequence":
        if self.family == "explicit":
            tail = self.tail.scaled(c) if self.tail else None
            return AkSequence("explicit", prefix=tuple(c * v for v in self.prefix), tail=tail)
        p = (c * self.params[0],) + tuple(self.params[1:])
        return AkSequence(self.family, params=p)

    # -- symbolic convergence tests ----------------------------------------

    def _is_zero(self) -> bool:
        if self.family == "explicit":
            return all(v == 0 for v in self.prefix) and (self.tail is None or self.tail._is_zero())
        return self.params[0] == 0

    def sum_behavior(self, power_shift: float = 0.0) -> str:
        """Convergence of sum k**power_shift * a_k: converges|diverges|unknown.

        Decided symbolically per family (p-series, log-refined p-series,
        geometric); arbitrary explicit tails are undecidable numerically.
        """
        if self._is_zero():
            return "converges"
        if self.family == "explicit":
            return self.tail.sum_behavior(power_shift) if self.tail else "unknown"
        if self.family == "constant":
            return "diverges"  # c > 0, and k**shift with shift >= 0
        if self.family == "geometric":
            c, r = self.params
            if r < 1.0:
                return "converges"
            return "diverges"
        c, beta, gamma = self.params
        b = beta - power_shift
        if b > 1.0:
            return "converges"
        if b < 1.0:
            return "diverges"
        return "converges" if gamma > 1.0 else "diverges"

    def kak_behavior(self) -> str:
        """Limit behavior of k*a_k.

        One of: to_infinity, liminf_zero, liminf_positive_limsup_finite,
        liminf_positive_limsup_infinite, unknown.  The supported closed-form
        families are eventually monotone, so liminf and limsup coincide.
        """
        if self._is_zero():
            return "liminf_zero"
        if self.family == "explicit":
            return self.tail.kak_behavior() if self.tail else "unknown"
        if self.family == "constant":
            return "to_infinity"
        if self.family == "geometric":
            c, r = self.params
            return "liminf_zero" if r < 1.0 else "to_infinity"
        c, beta, gamma = self.params
        if beta < 1.0:
            return "to_infinity"
        if beta > 1.0:
            return "liminf_zero"
        if gamma > 0:
            return "liminf_zero"
        if gamma == 0:
            return "liminf_positive_limsup_finite"
        return "to_infinity"


def constant_ak(c: float) -> AkSequence:
    return AkSequence("constant", params=(float(c),))


def powerlog_ak(c: float, beta: float, gamma: float) -> AkSequence:
    return AkSequence("powerlog", params=(float(c), float(beta), float(gamma)))


def geometric_ak(c: float, r: float) -> AkSequence:
    if not (0.0 <= r <= 1.0):
        raise DistributionError("geometric ratio must be in [0,1]")
    return AkSequence("geometric", params=(float(c), float(r)))


def explicit_ak(values: Sequence[float], tail: Optional[AkSequence] = None) -> AkSequence:
    return AkSequence("explicit", prefix=tuple(float(v) for v in values), tail=tail)


DEFAULT_K_MAX = 64


def from_ak(seq: AkSequence, k_max: int = DEFAULT_K_MAX, spec: str = "") -> Cdf:
    """Distribution with F(0) = 1/2 realizing the given a_k on dyadic slots.

    F^{-1}(1/2 + u) = a_k for u in (2^{-(k+1)}, 2^{-k}], 2 <= k <= k_max;
    a_2 on (1/4, 1/2]; the tail below 2^{-(k_max+1)} is capped at a_{k_max}.
    """
    if k_max < 2:
        raise DistributionError("k_max must be >= 2")
    vals = seq.values(k_max)
    if np.any(np.diff(vals) > 0):
        raise DistributionError("a_k must be nonincreasing")
    pairs = [(0.0, 0.5)]
    for k in range(k_max, 1, -1):
        pairs.append((float(seq.value(k)), 0.5 + 2.0 ** (-k) if k > 2 else 1.0))
    return from_atoms(pairs, spec=spec)


# -- regime classifier ------------------------------------------------------


@dataclass(frozen=True)
class Conclusion:
    tag: str
    statement: str

    def __str__(self):
        return f"{self.tag}: {self.statement}"


@dataclass
class RegimeReport:
    regime: str  # subcritical | critical | supercritical
    sum_ak: str  # converges | diverges | unknown
    sum_k78_ak: str
    kak_behavior: str
    conclusions: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def tags(self) -> list[str]:
        return [c.tag for c in self.conclusions]

    def to_dict(self) -> dict:
        return {
            "regime": self.regime,
            "sum_ak": self.sum_ak,
            "sum_k78_ak": self.sum_k78_ak,
            "kak_behavior": self.kak_behavior,
            "conclusions": [{"tag": c.tag, "statement": c.statement} for c in self.conclusions],
            "notes": list(self.notes),
        }


_T11 = "Hausdorff dimension of {t : rho_t < infinity} = 31/36 a.s."
_T121 = "upper Minkowski dimension of {t in [0,s] : rho_t <= x} = 31/36 w.h.p. as s grows, any x >= 0"
_T122 = "upper Minkowski dimension of {t in [0,s] : rho_t <= x} = 1 w.h.p. as s grows, any x > 0"
_T13 = "no exceptional times: {t : rho_t = infinity} is a.s. empty"
_T411 = "lower Minkowski dimension of {t in [0,s] : rho_t <= x} <= 31/36 a.s."
_T412 = "for any eps > 0 there is x > 0 with upper Minkowski dimension <= 31/36 + eps a.s."
_T413 = "for any eps > 0 there is x > 0 with upper Minkowski dimension > 1 - eps w.h.p. as s grows"
_DICH_UNDECIDED = "rho_t < infinity at every fixed time; dynamical behavior not decided by Thm 1.3"


def classify_regime(f0: float, seq: AkSequence) -> RegimeReport:
    """Map symbolic knowledge of (F(0), a_k) to theorem-tagged conclusions.

    Conclusions cite only statements whose hypotheses the symbolic analysis
    establishes; "unknown" fields yield no conclusion.  The exponent in the
    no-exceptional-times test is 7/8 as stated (the possible small
    improvement is reported as a note, not used as a rule).
    """
    if not (0.0 <= f0 <= 1.0):
        raise DistributionError("f0 must be a probability")
    if f0 < 0.5:
        regime = "subcritical"
    elif f0 == 0.5:
        regime = "critical"
    else:
        regime = "supercritical"

    sum_ak = seq.sum_behavior(0.0)
    sum_k78 = seq.sum_behavior(7.0 / 8.0)
    kak = seq.kak_behavior()
    report = RegimeReport(regime, sum_ak, sum_k78, kak)

    if regime == "subcritical":
        report.notes.append("time constant positive: passage times grow linearly; no critical-regime statement applies")
        return report
    if regime == "supercritical":
        report.notes.append("time constant zero and passage times tight; no critical-regime statement applies")
        return report

    report.notes.append("weights from from_ak are bounded by a_2, so all moment hypotheses hold")
    if sum_ak == "diverges":
        report.notes.append("rho = infinity a.s.: every fixed time is non-exceptional for {rho_t < infinity}")
        report.conclusions.append(Conclusion("Thm 1.1", _T11))
        if kak == "to_infinity":
            report.conclusions.append(Conclusion("Thm 1.2(1)", _T121))
        elif kak == "liminf_zero":
            report.conclusions.append(Conclusion("Thm 1.2(2)", _T122))
        elif kak == "liminf_positive_limsup_finite":
            report.conclusions.append(Conclusion("Thm 4.1(2)", _T412))
            report.conclusions.append(Conclusion("Thm 4.1(3)", _T413))
        elif kak == "liminf_positive_limsup_infinite":
            report.conclusions.append(Conclusion("Thm 4.1(1)", _T411))
            report.conclusions.append(Conclusion("Thm 4.1(2)", _T412))
        else:
            report.notes.append("k*a_k behavior unknown: Minkowski dimension undecided")
    elif sum_ak == "converges":
        if sum_k78 == "converges":
            report.conclusions.append(Conclusion("Thm 1.3", _T13))
            report.notes.append("Thm 1.3 margin: the 7/8 exponent admits a small improvement; not applied as a rule")
        elif sum_k78 == "diverges":
            report.conclusions.append(Conclusion("dichotomy", _DICH_UNDECIDED))
        else:
            report.conclusions.append(
                Conclusion("dichotomy", "rho_t < infinity at every fixed time; Thm 1.3 hypothesis not established")
            )
    else:
        if seq.family == "explicit" and seq.prefix:
            v = np.asarray(seq.prefix)
            report.notes.append(
                f"heuristic partial sums over the explicit prefix: sum a_k ~= {v.sum():.6g}, "
                f"sum k^(7/8) a_k ~= {(np.arange(2, 2 + len(v)) ** 0.875 * v).sum():.6g} (no convergence decision)"
            )
        report.notes.append("sum a_k undecidable symbolically: no conclusion")
    return report


# -- structured-text distribution specs -------------------------------------


def parse_ak_sequence(text: str) -> tuple[AkSequence, int]:
    """Parse 'family:params[:kmax=K]' into (sequence, k_max)."""
    parts = text.split(":")
    k_max = DEFAULT_K_MAX
    if parts and parts[-1].startswith("kmax="):
        k_max = int(parts.pop()[5:])
    if len(parts) != 2:
        raise DistributionError(f"bad a_k spec {text!r}")
    fam, raw = parts
    try:
        nums = [float(s) for s in raw.split(",") if s != ""]
    except ValueError as exc:
        raise DistributionError(f"bad numeric parameters in {text!r}") from exc
    if fam == "constant":
        if len(nums) != 1:
            raise DistributionError("constant takes one parameter")
        return constant_ak(nums[0]), k_max
    if fam == "powerlog":
        if len(nums) != 3:
            raise DistributionError("powerlog takes c,beta,gamma")
        return powerlog_ak(*nums), k_max
    if fam == "geometric":
        if len(nums) != 2:
            raise DistributionError("geometric takes c,r")
        return geometric_ak(*nums), k_max
    if fam == "explicit":
        return explicit_ak(nums), k_max
    raise DistributionError(f"unknown a_k family {fam!r}")


def format_ak_sequence(seq: AkSequence, k_max: int = DEFAULT_K_MAX) -> str:
    if seq.family == "explicit":
        body = ",".join(repr(v) for v in seq.prefix)
    else:
        body = ",".join(repr(v) for v in seq.params)
    return f"{seq.family}:{body}:kmax={k_max}"


def parse_distribution(text: str) -> Cdf:
    """Parse a one-line distribution spec.

    Grammar (numbers are Python float literals; round-trips bit-exactly):
        bernoulli:<p0>[,<value>]
        atoms:<v>@<cum>[,<v>@<cum>...]
        zhang:<a>
        ak-<family>:<params>[:kmax=<K>]     family/params per parse_ak_sequence
    """
    head, _, rest = text.partition(":")
    if not rest:
        raise DistributionError(f"bad distribution spec {text!r}")
    if head == "bernoulli":
        nums = [float(s) for s in rest.split(",")]
        if len(nums) == 1:
            return bernoulli(nums[0])
        if len(nums) == 2:
            return bernoulli(nums[0], nums[1])
        raise DistributionError("bernoulli takes p0[,value]")
    if head == "atoms":
        pairs = []
        for item in rest.split(","):
            v, _, c = item.partition("@")
            if not c:
                raise DistributionError(f"bad atom {item!r}")
            pairs.append((float(v), float(c)))
        return from_atoms(pairs)
    if head == "zhang":
        return zhang(float(rest))
    if head.startswith("ak-"):
        seq, k_max = parse_ak_sequence(head[3:] + ":" + rest)
        return from_ak(seq, k_max, spec=f"ak-{format_ak_sequence(seq, k_max)}")
    raise DistributionError(f"unknown distribution family {head!r}")


def format_distribution(F: Cdf) -> str:
    if not F.spec:
        raise DistributionError("distribution carries no spec string")
    return F.spec
