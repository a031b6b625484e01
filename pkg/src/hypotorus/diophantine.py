"""Small-divisor arithmetic for mode-wise solvability analysis.

The solvability of each mode equation hinges on the distance from
``kappa * lambda_j`` to the nearest integer, where ``kappa`` is the mean of
the coefficient.  This module provides

* exact and floating-point distance-to-integer helpers, plus the two-sided
  sandwich ``4 d <= |1 - e^{2 pi i x}| <= 2 pi d`` that converts distances
  into divisor bounds;
* an exact classifier for rational ``kappa = p/q`` (resonances recur along a
  residue class, or the distance has a uniform positive floor);
* a heuristic fit that inspects the record envelope of ``-log d_j`` for the
  exponentially-deep approximations characteristic of exponential-Liouville
  numbers;
* a certified constructor that builds such a number by a greedy exact-rational
  scheme and returns a certificate whose verification uses integer arithmetic
  only.

Exponents follow the convention ``x_j = (j + 1)^(1/(2 n mu))`` for 0-based
mode indices.
"""

from __future__ import annotations

import json
import math
import sys
from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from .spectrum import EigenSequence

__all__ = [
    "dist_to_int",
    "dist_to_int_exact",
    "divisor_sandwich",
    "DistanceSequence",
    "distance_sequence",
    "FitReport",
    "liouville_fit",
    "RationalVerdict",
    "classify_rational",
    "CertLevel",
    "LiouvilleCertificate",
    "construct_liouville",
    "LevelOverflow",
    "exponent_from_params",
]

# Rational upper bound on log2(e) = 1.4426950408...; used to turn a bound
# exp(-x) into a bound 2^(-K) without ever touching floats.
_L2E_UP = Fraction(1442696, 1000000)

# max/median threshold for the bounded-slope test, growth factor for the
# monotone-growth flag, and the floor applied to the median.  The test runs
# on scale-normalized slopes (envelope growth per e-fold of x), whose natural
# unit is the log of a continued-fraction partial quotient, i.e. order one;
# flooring the median there keeps flat and generic data bounded.
_RATIO_BOUND = 4.0
_GROWTH_FACTOR = 2.0
_MEDIAN_FLOOR = 1.0


class LevelOverflow(RuntimeError):
    """A certified construction level would exceed the configured caps."""


# ---------------------------------------------------------------------------
# distances and the divisor sandwich
# ---------------------------------------------------------------------------

def dist_to_int(x: float) -> float:
    """Distance from ``x`` to the nearest integer, in [0, 1/2].

    Ties (half-integers) return exactly 0.5.  The result is exact whenever
    the fractional part of ``x`` is: ``min(f, 1 - f)`` incurs no rounding for
    f in [0, 1] by Sterbenz's lemma.
    """
    f = float(x) % 1.0
    return min(f, 1.0 - f)


def dist_to_int_exact(v: Union[Fraction, int]) -> Fraction:
    """Exact rational distance from ``v`` to the nearest integer."""
    v = Fraction(v)
    f = v - (v.numerator // v.denominator)
    return min(f, 1 - f)


def divisor_sandwich(x: float) -> Tuple[float, float, float]:
    """Return ``(4d, |1 - e^{2 pi i x}|, 2 pi d)`` with ``d = dist_to_int(x)``.

    The middle value is computed as ``2 sin(pi d)``, which equals the modulus
    of ``1 - e^{2 pi i x}`` exactly in real arithmetic.  All three outputs are
    derived from the same exact ``d`` so that the two-sided inequality
    ``lower <= value <= upper`` holds in floating point as well: with
    ``y = fl(pi * d)`` the upper bound is ``2 * y`` (sine never exceeds its
    argument) and the lower bound ``4 * d`` sits below the chord of the sine
    with a pi/2 margin.
    """
    d = dist_to_int(x)
    y = math.pi * d
    value = 2.0 * math.sin(y)
    lower = 4.0 * d
    upper = 2.0 * y
    if not (lower <= value <= upper):  # pragma: no cover - proof in tests
        raise AssertionError(f"sandwich violated at x={x!r}: {lower} {value} {upper}")
    return lower, value, upper


# ---------------------------------------------------------------------------
# distance sequences
# ---------------------------------------------------------------------------

def exponent_from_params(params: Tuple[int, Union[Fraction, float]]) -> Fraction:
    """Exponent ``1/(2 n mu)`` as an exact Fraction."""
    n, mu = params
    n = int(n)
    if n < 1:
        raise ValueError(f"dimension n must be a positive integer, got {n}")
    mu = Fraction(mu) if not isinstance(mu, float) else Fraction(mu).limit_denominator(10**9)
    if mu <= 0:
        raise ValueError(f"mu must be positive, got {mu}")
    return 1 / (2 * n * mu)


@dataclass(frozen=True)
class DistanceSequence:
    """Distances ``d_j = dist(kappa * lambda_j, Z)`` over a mode window.

    ``exact`` records whether the distances were computed in rational
    arithmetic (integer eigenvalues and rational ``kappa``), in which case
    zeros in ``d`` are genuine resonances rather than float underflow.
    """

    kappa: Union[float, Fraction]
    params: Tuple[int, Fraction]
    e: Fraction
    js: Tuple[int, ...]
    lambdas: Tuple[int, ...] | Tuple[float, ...]
    d: np.ndarray
    exact: bool

    def __len__(self) -> int:
        return len(self.js)

    @property
    def resonant_indices(self) -> Tuple[int, ...]:
        return tuple(int(self.js[i]) for i in np.flatnonzero(self.d == 0.0))

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("j,lambda,d\n")
            for j, lam, dj in zip(self.js, self.lambdas, self.d):
                fh.write(f"{j},{lam},{float(dj)!r}\n")

    @staticmethod
    def from_csv(path, kappa=float("nan"), params=(1, Fraction(1, 2))) -> "DistanceSequence":
        js, lams, ds = [], [], []
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().strip()
            if header != "j,lambda,d":
                raise ValueError(f"unexpected header {header!r}")
            for line in fh:
                j_s, lam_s, d_s = line.strip().split(",")
                js.append(int(j_s))
                lams.append(int(lam_s) if "." not in lam_s else float(lam_s))
                ds.append(float(d_s))
        e = exponent_from_params(params)
        n, mu = params
        return DistanceSequence(
            kappa=kappa, params=(int(n), Fraction(mu)), e=e,
            js=tuple(js), lambdas=tuple(lams),
            d=np.asarray(ds, dtype=float), exact=False,
        )


def distance_sequence(
    kappa: Union[float, Fraction],
    eigs: EigenSequence,
    params: Tuple[int, Union[Fraction, float]] = (1, Fraction(1, 2)),
    J: Optional[int] = None,
) -> DistanceSequence:
    """Tabulate ``d_j = dist(kappa * lambda_j, Z)`` for ``j < J``.

    With a ``Fraction`` kappa and integer eigenvalues the distances are
    computed exactly (then rounded once to float for storage); zeros are
    exact resonances.  Float kappa gives a heuristic table whose precision
    degrades like ``|kappa| * lambda_j * eps``.
    """
    n_modes = len(eigs) if J is None else int(J)
    if n_modes < 1:
        raise ValueError("need at least one mode")
    if J is not None and J > len(eigs):
        raise ValueError(f"J={J} exceeds the tabulated window {len(eigs)}")
    e = exponent_from_params(params)
    n, mu = params
    params_norm = (int(n), Fraction(mu) if not isinstance(mu, float)
                   else Fraction(mu).limit_denominator(10**9))
    js = tuple(range(n_modes))
    exact = isinstance(kappa, (Fraction, int)) and eigs.integer_valued
    if exact:
        kap = Fraction(kappa)
        lams = tuple(eigs.exact_lambda(j) for j in js)
        d = np.array([float(dist_to_int_exact(kap * lam)) for lam in lams])
    else:
        kap = float(kappa)
        lams = tuple(float(eigs.lambdas[j]) for j in js)
        d = np.array([dist_to_int(kap * lam) for lam in lams])
    return DistanceSequence(kappa=kappa, params=params_norm, e=e,
                            js=js, lambdas=lams, d=d, exact=exact)


# ---------------------------------------------------------------------------
# heuristic fit
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FitReport:
    """Windowed-slope report for a distance sequence.

    ``slopes`` are least-squares slopes of the running record envelope of
    ``-log d_j`` against ``(j+1)^e`` over dyadic index windows; they carry
    the sparse-subsequence signal that raw per-mode regressions wash out.
    ``normalized_slopes`` rescale each slope by the x-value at the window
    start, i.e. envelope growth per e-fold of x: for a number satisfying the
    Diophantine lower bound this stays of the order of the log of a
    continued-fraction partial quotient, while exponentially deep
    approximations make it grow like x itself.  ``raw_slopes`` are the
    regressions on the unenveloped values, for inspection.  Classification
    is heuristic by construction; only rational classification and
    certificates are definitive.
    """

    windows: Tuple[Tuple[int, int], ...]
    slopes: Tuple[float, ...]
    normalized_slopes: Tuple[float, ...]
    raw_slopes: Tuple[float, ...]
    max_over_median: float
    growth_monotone: bool
    classification: str
    resonant_indices: Tuple[int, ...]
    e: float
    n_modes_used: int
    heuristic: bool = True

    def to_json(self) -> str:
        return json.dumps(
            {
                "classification": self.classification,
                "heuristic": self.heuristic,
                "windows": [list(w) for w in self.windows],
                "slopes": list(self.slopes),
                "normalized_slopes": list(self.normalized_slopes),
                "raw_slopes": list(self.raw_slopes),
                "max_over_median": self.max_over_median,
                "growth_monotone": self.growth_monotone,
                "resonant_indices": list(self.resonant_indices),
                "exponent": self.e,
                "n_modes_used": self.n_modes_used,
            },
            indent=2,
            sort_keys=True,
        )


def _dyadic_windows(n_modes: int) -> Iterable[Tuple[int, int]]:
    k = 2
    while 2 ** (k + 1) <= n_modes:
        yield (2 ** k, 2 ** (k + 1))
        k += 1


def _ols_slope(x: np.ndarray, y: np.ndarray) -> float:
    xm = x - x.mean()
    den = float(xm @ xm)
    if den == 0.0:
        return float("nan")
    return float(xm @ (y - y.mean())) / den


def liouville_fit(seq: DistanceSequence) -> FitReport:
    """Heuristic exponential-Liouville detection from a distance table.

    Fits ``-log d_j`` against ``x_j = (j+1)^e`` by least squares over dyadic
    windows ``[2^k, 2^{k+1})``.  Classification uses the slopes of the
    running record envelope (cumulative max of ``-log d_j``), normalized by
    the window-start x: a number fails the Diophantine lower bound exactly
    when ``(-log d_j)/x_j`` stays bounded away from zero along a
    subsequence, so the normalized envelope growth is the finite-sample face
    of that ratio.

    * "non-Liouville evidence": normalized slopes bounded
      (``max/median < 4`` with the median floored at 1);
    * "Liouville suspected": the bounded test fails, or the normalized
      slopes grow monotonically by more than 2x from window to window.

    Modes with ``d_j == 0`` are excluded from the fit and reported as
    resonant; if more than half the modes are resonant the input is a
    rational-resonance problem and ``classify_rational`` should be used.
    """
    n_modes = len(seq)
    if n_modes < 64:
        raise ValueError(f"need at least 64 modes for a windowed fit, got {n_modes}")
    d = np.asarray(seq.d, dtype=float)
    resonant = np.flatnonzero(d == 0.0)
    if len(resonant) > n_modes // 2:
        raise ValueError(
            f"{len(resonant)} of {n_modes} distances are exactly zero; "
            "the sequence is resonance-dominated - use classify_rational"
        )
    e = float(seq.e)
    x = (np.arange(n_modes) + 1.0) ** e
    with np.errstate(divide="ignore"):
        y = np.where(d > 0.0, -np.log(d), np.nan)

    env = np.empty(n_modes)
    cur = -np.inf
    for j in range(n_modes):
        if not np.isnan(y[j]):
            cur = max(cur, y[j])
        env[j] = cur

    windows, slopes, norm_slopes, raw_slopes = [], [], [], []
    for lo, hi in _dyadic_windows(n_modes):
        xs = x[lo:hi]
        es = env[lo:hi]
        ok_env = np.isfinite(es)
        ok_raw = np.isfinite(y[lo:hi])
        if ok_env.sum() < 4:
            continue
        windows.append((lo, hi))
        s = _ols_slope(xs[ok_env], es[ok_env])
        slopes.append(s)
        norm_slopes.append(s * float(x[lo]))
        raw_slopes.append(
            _ols_slope(xs[ok_raw], y[lo:hi][ok_raw]) if ok_raw.sum() >= 4 else float("nan")
        )

    med = max(float(np.median(norm_slopes)), _MEDIAN_FLOOR)
    ratio = max(norm_slopes) / med
    growth = len(norm_slopes) >= 2 and all(
        s1 > max(_GROWTH_FACTOR * s0, 0.0)
        for s0, s1 in zip(norm_slopes, norm_slopes[1:])
    )
    if ratio >= _RATIO_BOUND or growth:
        label = "Liouville suspected"
    else:
        label = "non-Liouville evidence"
    return FitReport(
        windows=tuple(windows),
        slopes=tuple(slopes),
        normalized_slopes=tuple(norm_slopes),
        raw_slopes=tuple(raw_slopes),
        max_over_median=float(ratio),
        growth_monotone=bool(growth),
        classification=label,
        resonant_indices=tuple(int(seq.js[i]) for i in resonant),
        e=e,
        n_modes_used=int(n_modes - len(resonant)),
    )


# ---------------------------------------------------------------------------
# exact rational classification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RationalVerdict:
    """Exact resonance structure of ``kappa = p/q`` against an eigensequence.

    For formula-backed sequences the verdict covers all of ``j`` (scope
    "infinite"); for tabulated sequences only the stored window is inspected
    (scope "window").  ``resonant_classes`` lists the residues ``r`` modulo
    ``period`` (of the mode index for 1-d kinds, of the block index for the
    n-d kind) along which ``q | p lambda``; ``floor`` is the exact minimum of
    the nonzero distances, at least ``1/q``.
    """

    p: int
    q: int
    kind: str
    scope: str
    resonant: bool
    period: Optional[int]
    resonant_classes: Tuple[int, ...]
    floor: Optional[Fraction]
    class_variable: str = "j"

    @property
    def verdict(self) -> str:
        if self.resonant:
            return "resonant/Liouville-degenerate"
        return f"uniformly non-Liouville with floor {self.floor}"

    def to_json(self) -> str:
        return json.dumps(
            {
                "p": self.p,
                "q": self.q,
                "kind": self.kind,
                "scope": self.scope,
                "resonant": self.resonant,
                "period": self.period,
                "resonant_classes": list(self.resonant_classes),
                "class_variable": self.class_variable,
                "floor": None if self.floor is None else
                    {"num": str(self.floor.numerator), "den": str(self.floor.denominator)},
                "verdict": self.verdict,
            },
            indent=2,
            sort_keys=True,
        )


def classify_rational(p: int, q: int, eigs: EigenSequence) -> RationalVerdict:
    """Exact verdict for rational ``kappa = p/q`` (``q > 0``).

    ``d_j = dist(p lambda_j / q, Z) = min(r, q - r)/q`` with
    ``r = p lambda_j mod q``.  For the formula-backed eigenvalue kinds the
    residues are periodic (period ``q`` in the mode index, or in the value
    index for the product kind), so either some residue class is resonant --
    then infinitely many modes are unsolvable and the operator side is
    degenerate -- or every distance sits at or above an exact positive floor.
    """
    p, q = int(p), int(q)
    if q <= 0:
        raise ValueError(f"q must be a positive integer, got {q}")
    if not eigs.integer_valued:
        raise ValueError("classify_rational needs integer eigenvalues")

    def residues(values: Iterable[int]) -> Tuple[Tuple[int, ...], Optional[Fraction]]:
        zero_classes = []
        min_nonzero = None
        for idx, lam in enumerate(values):
            r = (p * lam) % q
            if r == 0:
                zero_classes.append(idx)
            else:
                dq = min(r, q - r)
                if min_nonzero is None or dq < min_nonzero:
                    min_nonzero = dq
        floor = None if min_nonzero is None else Fraction(min_nonzero, q)
        return tuple(zero_classes), floor

    kind = eigs.kind
    head = kind.split()[0]
    if head in ("harmonic1d", "harmonic1d_power"):
        k = int(kind.split()[1]) if head == "harmonic1d_power" else 1
        vals = [(2 * j + 1) ** k for j in range(q)]
        classes, floor = residues(vals)
        scope, period, var = "infinite", q, "j"
    elif head == "harmonic_nd":
        # every energy block n + 2*ell is hit by at least one mode, so the
        # residue pattern in the block index decides recurrence
        vals = [eigs.n + 2 * ell for ell in range(q)]
        classes, floor = residues(vals)
        scope, period, var = "infinite", q, "block"
    else:
        vals = list(eigs.exact)
        classes, floor = residues(vals)
        scope, period, var = "window", None, "j"

    return RationalVerdict(
        p=p, q=q, kind=kind, scope=scope,
        resonant=bool(classes), period=period,
        resonant_classes=classes, floor=floor,
        class_variable=var,
    )


# ---------------------------------------------------------------------------
# certified construction
# ---------------------------------------------------------------------------

def _nth_root_floor(x: int, k: int) -> int:
    """Floor of the k-th root of a nonnegative integer, by Newton iteration."""
    if x < 0:
        raise ValueError("negative radicand")
    if x == 0:
        return 0
    if k == 1:
        return x
    r = 1 << (-(-x.bit_length() // k))
    while True:
        rn = ((k - 1) * r + x // r ** (k - 1)) // k
        if rn >= r:
            break
        r = rn
    while r ** k > x:
        r -= 1
    return r


def _x_upper(j: int, e: Fraction) -> int:
    """Integer upper bound ``ceil((j+1)^e)`` computed exactly."""
    num, den = e.numerator, e.denominator
    t = (j + 1) ** num
    r = _nth_root_floor(t, den)
    return r if r ** den == t else r + 1


def _k_bound(j: int, e: Fraction) -> int:
    """Smallest certified K with ``2^-K <= exp(-(j+1)^e)``.

    ``K = ceil(x_up * L2E_UP)`` with ``x_up >= (j+1)^e`` and
    ``L2E_UP > log2(e)``, so ``2^-K <= 2^(-x log2 e) = e^-x`` by a chain of
    exact integer inequalities.
    """
    xu = _x_upper(j, e)
    n, d = _L2E_UP.numerator, _L2E_UP.denominator
    return -((-xu * n) // d)


def _frac_le_pow2(a: int, b: int, K: int) -> bool:
    """Exact test ``a/b <= 2^-K`` for ``a >= 0``, ``b > 0``, ``K >= 0``.

    Uses bit lengths to decide all but a one-bit-wide band, so the huge-K
    cases never materialize ``2^K``.
    """
    if a == 0:
        return True
    alen, blen = a.bit_length(), b.bit_length()
    if alen + K <= blen - 1:
        return True
    if alen + K >= blen + 1:
        return False
    return (a << K) <= b


@contextmanager
def _unlimited_int_digits():
    """Certificates for deep levels carry integers with tens of thousands of
    digits; lift CPython's conversion guard around our own (de)serialization."""
    get = getattr(sys, "get_int_max_str_digits", None)
    set_ = getattr(sys, "set_int_max_str_digits", None)
    if get is None or set_ is None:  # pragma: no cover - older interpreters
        yield
        return
    old = get()
    set_(0)
    try:
        yield
    finally:
        set_(old)


def _fraction_json(v: Fraction) -> dict:
    return {"num": str(v.numerator), "den": str(v.denominator)}


def _fraction_from_json(obj: dict) -> Fraction:
    return Fraction(int(obj["num"]), int(obj["den"]))


@dataclass(frozen=True)
class CertLevel:
    """One certified approximation level ``|kappa*lambda - tau| <= 2^-K``."""

    j: int
    lam: int
    tau: int
    gap: Fraction
    K: int


@dataclass(frozen=True)
class LiouvilleCertificate:
    """Exact-rational certificate for an exponential-Liouville number.

    At every stored level the integer distance is exponentially small:
    ``|kappa*lambda_{j_l} - tau_l| <= 2^{-K_l} <= exp(-(j_l+1)^e)``.
    ``verify`` recomputes each gap from scratch and re-derives each exponent
    bound; the check path is pure integer arithmetic (the power ``2^-K`` is
    compared through bit lengths and is never materialized for large ``K``).
    """

    kappa: Fraction
    levels: Tuple[CertLevel, ...]
    n: int
    mu: Fraction
    e: Fraction
    eigs_kind: str
    ap_index: Tuple[int, int]

    def verify(self) -> bool:
        prev_j = -1
        for lev in self.levels:
            if lev.j <= prev_j:
                return False
            prev_j = lev.j
            base, step = self.ap_index
            if lev.lam != base + step * lev.j:
                return False
            gap = abs(self.kappa * lev.lam - lev.tau)
            if gap != lev.gap:
                return False
            K = _k_bound(lev.j, self.e)
            if K > lev.K:
                return False
            if not _frac_le_pow2(gap.numerator, gap.denominator, K):
                return False
        return True

    def gaps(self) -> Tuple[Fraction, ...]:
        return tuple(lev.gap for lev in self.levels)

    def to_json(self) -> str:
        with _unlimited_int_digits():
            return json.dumps(
                {
                    "kappa": _fraction_json(self.kappa),
                    "n": self.n,
                    "mu": _fraction_json(self.mu),
                    "exponent": _fraction_json(self.e),
                    "eigs_kind": self.eigs_kind,
                    "ap_index": list(self.ap_index),
                    "levels": [
                        {
                            "j": str(lev.j),
                            "lambda": str(lev.lam),
                            "tau": str(lev.tau),
                            "gap": _fraction_json(lev.gap),
                            "K": str(lev.K),
                        }
                        for lev in self.levels
                    ],
                },
                indent=2,
                sort_keys=True,
            )

    @staticmethod
    def from_json(text: str) -> "LiouvilleCertificate":
        with _unlimited_int_digits():
            obj = json.loads(text)
            levels = tuple(
                CertLevel(
                    j=int(lv["j"]),
                    lam=int(lv["lambda"]),
                    tau=int(lv["tau"]),
                    gap=_fraction_from_json(lv["gap"]),
                    K=int(lv["K"]),
                )
                for lv in obj["levels"]
            )
            return LiouvilleCertificate(
                kappa=_fraction_from_json(obj["kappa"]),
                levels=levels,
                n=int(obj["n"]),
                mu=_fraction_from_json(obj["mu"]),
                e=_fraction_from_json(obj["exponent"]),
                eigs_kind=obj["eigs_kind"],
                ap_index=tuple(int(v) for v in obj["ap_index"]),
            )

    def to_csv(self, path) -> None:
        with _unlimited_int_digits(), open(path, "w", encoding="utf-8") as fh:
            fh.write("level,j,lambda,tau,gap_num,gap_den,K\n")
            for i, lev in enumerate(self.levels, start=1):
                fh.write(
                    f"{i},{lev.j},{lev.lam},{lev.tau},"
                    f"{lev.gap.numerator},{lev.gap.denominator},{lev.K}\n"
                )


def construct_liouville(
    eigs: EigenSequence,
    params: Tuple[int, Union[Fraction, float]],
    L: int,
    *,
    j_cap: Optional[int] = 10**6,
    bits_cap: int = 2_000_000,
    j_start: int = 1,
    tau_start: int = 1,
) -> LiouvilleCertificate:
    """Greedy exact-rational construction of an exponential-Liouville number.

    Starting from ``kappa_1 = tau_1 / lambda_{j_1}``, each new level picks the
    smallest admissible eigenvalue ``lambda = lambda_{j}`` with
    ``P * lambda == 1 (mod D)`` (``kappa = P/D`` in lowest terms), so the
    adjusted ``kappa - 1/(D lambda)`` equals ``tau/lambda`` exactly for an
    integer ``tau``.  Admissible means large enough that the adjustment --
    and the summed tail of all later adjustments, via a budget that halves
    per level -- keeps every earlier gap below ``exp(-(j_i+1)^e)``.

    Raises :class:`LevelOverflow` when the next level would exceed ``j_cap``
    (pass ``None`` to lift; levels grow roughly like ``exp((j+1)^e)`` per
    step) or when the certified modulus would need more than ``bits_cap``
    bits (levels beyond that are astronomically out of reach of exact
    arithmetic: the following eigenvalue index is itself exponential in the
    previous one).
    """
    if L < 1:
        raise ValueError(f"need at least one level, got L={L}")
    if not eigs.integer_valued:
        raise ValueError("construction needs integer eigenvalues")
    if eigs.ap_index is None:
        raise ValueError(
            f"eigenvalue kind {eigs.kind!r} is not an arithmetic progression in j; "
            "the congruence step of the construction needs one"
        )
    lam_arr = eigs.lambdas
    if len(lam_arr) >= 2 and not np.all(np.diff(lam_arr) > 0):
        raise ValueError("construction needs strictly increasing eigenvalues")
    e = exponent_from_params(params)
    n, mu = params
    mu = Fraction(mu) if not isinstance(mu, float) else Fraction(mu).limit_denominator(10**9)
    base, step = eigs.ap_index

    j1 = int(j_start)
    lam1 = base + step * j1
    if lam1 < 2:
        raise ValueError(f"starting eigenvalue {lam1} is too small to carry a denominator")
    tau1 = int(tau_start)
    kappa = Fraction(tau1, lam1)
    js = [j1]
    lams = [lam1]
    taus = [tau1]

    for lev in range(2, L + 1):
        P, D = kappa.numerator, kappa.denominator
        if math.gcd(step, D) != 1:
            raise LevelOverflow(
                f"level {lev}: progression step {step} shares a factor with the "
                f"working denominator {D}"
            )
        lam_min = lams[-1] + step  # strict increase at minimum
        for i in range(len(js)):
            K = (lev - (i + 1)) + _k_bound(js[i], e)
            if K > bits_cap:
                raise LevelOverflow(
                    f"level {lev}: certified modulus needs more than {bits_cap} bits"
                )
            # lambda >= 2^K * lambda_{j_i} / D  ensures the adjustment at this
            # level erodes the level-i gap by at most 2^-K.
            need = -((-(1 << K) * lams[i]) // D)
            if need > lam_min:
                lam_min = need
        t = pow(P % D, -1, D) if D > 1 else 0
        j0 = ((t - base) * pow(step, -1, D)) % D if D > 1 else 0
        j_floor = max(js[-1] + 1, -((-(lam_min - base)) // step))
        j = j0 + D * (-(-(j_floor - j0) // D))
        if j_cap is not None and j > j_cap:
            shown = str(j) if j.bit_length() <= 64 else f"~2^{j.bit_length()}"
            raise LevelOverflow(
                f"level {lev}: needs mode index {shown} beyond the cap {j_cap}"
            )
        lam = base + step * j
        tau = (P * lam - 1) // D
        kappa = kappa - Fraction(1, D * lam)
        assert kappa == Fraction(tau, lam)
        js.append(j)
        lams.append(lam)
        taus.append(tau)

    levels = []
    for j, lam, tau in zip(js, lams, taus):
        gap = abs(kappa * lam - tau)
        K = _k_bound(j, e)
        if not _frac_le_pow2(gap.numerator, gap.denominator, K):
            raise AssertionError(f"internal: gap at level j={j} misses its certified bound")
        levels.append(CertLevel(j=j, lam=lam, tau=tau, gap=gap, K=K))

    cert = LiouvilleCertificate(
        kappa=kappa,
        levels=tuple(levels),
        n=int(n),
        mu=mu,
        e=e,
        eigs_kind=eigs.kind,
        ap_index=(base, step),
    )
    if not cert.verify():  # pragma: no cover - construction guarantees this
        raise AssertionError("internal: freshly built certificate failed verification")
    return cert
