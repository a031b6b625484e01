"""Witness constructions: explicit mode pairs (u_j, f_j) certifying non-GH.

Each constructor returns a :class:`WitnessBundle` holding a sparse subsequence
of modes j_l where the mode equation

    u' + i*lambda_j*c(t)*u = f_j          (see :func:`modes.apply_mode`)

is satisfied with sup|u_{j_l}| bounded below by a positive constant while
sup|f_{j_l}| decays exponentially (or vanishes): regular data forced through
an irregular solution, which is exactly the failure of global hypoellipticity.
Texts that write the operator with D_t = -i d/dt list a forcing that differs
from ours by a factor of i; no modulus, norm, or decay rate changes.

Constructors
------------
``constant_witness``
    c constant: pure exponentials ``u = e^{-i tau t}`` along a resonant
    subsequence (f = 0) or a Liouville-certified one (|f| = certified gap).
``sign_change_witness``
    Im c changes sign: a Gevrey bump times ``exp[lambda*(B - iA)]`` anchored
    where the primitive of Im c peaks; forcing supported where the primitive
    is uniformly below the peak.
``plateau_witness``
    Im c vanishes identically on an interval with a (+, 0, -) sign pattern
    around it: two-bump variant anchored at the interval endpoints.
``L0_reduction_witness``
    c real-valued with exponential-Liouville mean: phase-only transport of a
    fixed bump, with amplitudes pinned by the certificate gaps.

Numerics
--------
Real parts of every evaluated exponent are <= 0 by construction, so ``exp``
may underflow to zero but can never overflow; no clamping is needed on the
decay side (the mode-solver clamp policy would only bind at +700).  Residual
checks run through :func:`modes.apply_mode` on the sample grid for levels the
grid resolves (bandwidth below ~0.45 of Nyquist); levels beyond that carry
``residual=None`` and are verified on their closed form in exact rational
arithmetic.  Per-mode assembly is independent across levels and could be
farmed out; everything here is pure given the grid.
"""

from __future__ import annotations

import cmath
import csv
import io
import json
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Integral
from typing import Optional, Sequence

import numpy as np

from .diophantine import LiouvilleCertificate, _unlimited_int_digits, classify_rational
from .modes import ModeField, apply_mode
from .spectrum import EigenSequence
from .torusfn import TorusFunction, grid

__all__ = [
    "NoCertificate",
    "PartitionNotFound",
    "PatternNotFound",
    "GevreyBump",
    "gevrey_bump",
    "WitnessLevel",
    "DecayRecord",
    "WitnessBundle",
    "constant_witness",
    "sign_change_witness",
    "plateau_witness",
    "L0_reduction_witness",
]

#: per-mode residual tolerance for the grid-verified constructions
TOL_RESIDUAL = 1e-7
#: tighter tolerance for the constant-coefficient construction (pure modes)
TOL_RESIDUAL_CONSTANT = 1e-9
#: fraction of the Nyquist frequency a level's bandwidth may occupy before we
#: refuse to verify it on the grid
_BAND_FRACTION = 0.45
#: sampled values smaller than this are treated as exact zeros by the decay fit
_FIT_FLOOR = 1e-300


class NoCertificate(ValueError):
    """alpha cannot back a witness: no resonance and no verified certificate."""


class PartitionNotFound(RuntimeError):
    """grid search found no positive margin for the sign-change partition."""


class PatternNotFound(RuntimeError):
    """the (+, 0, -) plateau pattern is absent at grid resolution."""


# --------------------------------------------------------------------------- #
# Gevrey bump factory
# --------------------------------------------------------------------------- #

def _ramp(x: np.ndarray, sigma: float) -> np.ndarray:
    """The flat ramp r(x) = exp(-x^(-1/(sigma-1))) for x > 0, else 0."""
    xx = np.atleast_1d(np.asarray(x, dtype=np.float64))
    out = np.zeros_like(xx)
    pos = xx > 0.0
    p = 1.0 / (sigma - 1.0)
    with np.errstate(over="ignore", divide="ignore", under="ignore"):
        # x^-p overflows to inf for tiny x; exp(-inf) = 0 is the right limit
        out[pos] = np.exp(-np.power(xx[pos], -p))
    return out


def _step(x: np.ndarray, sigma: float) -> np.ndarray:
    """Smoothed step: exactly 0 for x <= 0, exactly 1 for x >= 1.

    s(x) = r(x) / (r(x) + r(1-x)) with the ramp above; strictly increasing on
    (0, 1), and s(x) + s(1-x) = 1, which the plateau witness uses to make two
    bumps sum to one across a shared transition band.
    """
    xx = np.atleast_1d(np.asarray(x, dtype=np.float64))
    lo = _ramp(xx, sigma)
    hi = _ramp(1.0 - xx, sigma)
    out = np.empty_like(xx)
    out[xx <= 0.0] = 0.0
    out[xx >= 1.0] = 1.0
    mid = (xx > 0.0) & (xx < 1.0)
    out[mid] = lo[mid] / (lo[mid] + hi[mid])
    return out.reshape(np.shape(x))


@dataclass(frozen=True)
class GevreyBump:
    """Compactly supported Gevrey-class cutoff on the circle.

    Exactly 0 outside ``support`` = [alpha, beta], exactly 1 on ``plateau`` =
    [gamma, delta], monotone on the two transition bands, values in [0, 1]
    everywhere -- and all four statements hold at grid points by construction,
    not up to rounding.  ``samples`` carries the N-grid trace; calling the
    object evaluates the closed form at arbitrary points.
    """

    sigma: float
    support: tuple[float, float]
    plateau: tuple[float, float]
    samples: TorusFunction

    def __call__(self, t):
        a, b = self.support
        g, d = self.plateau
        tt = np.asarray(t, dtype=np.float64)
        up = _step((tt - a) / (g - a), self.sigma)
        down = _step((b - tt) / (b - d), self.sigma)
        out = up * down
        if np.isscalar(t) or out.shape == ():
            return float(out)
        return out

    def derivative(self) -> TorusFunction:
        """Spectral derivative of the sampled bump."""
        return self.samples.derivative()

    def summary(self) -> dict:
        return {
            "sigma": self.sigma,
            "support": [self.support[0], self.support[1]],
            "plateau": [self.plateau[0], self.plateau[1]],
            "n": self.samples.n,
        }


def gevrey_bump(sigma: float, support: Sequence[float], plateau: Sequence[float],
                N: int = 256) -> GevreyBump:
    """Build the standard flat-function bump of Gevrey order ``sigma``.

    Two smoothed steps are multiplied: one rising across [alpha, gamma], one
    falling across [delta, beta].  Each step is a ratio of the flat ramp
    r(x) = exp(-x^(-1/(sigma-1))), so the result is Gevrey-sigma; sigma <= 1
    is rejected because analytic compactly-supported cutoffs do not exist.
    """
    sigma = float(sigma)
    if not sigma > 1.0:
        raise ValueError(
            f"sigma must exceed 1 (got {sigma}): analytic flat cutoffs do not exist")
    a, b = float(support[0]), float(support[1])
    g, d = float(plateau[0]), float(plateau[1])
    if not (0.0 < a < g < d < b < 2.0 * math.pi):
        raise ValueError(
            f"need 0 < alpha < gamma < delta < beta < 2*pi, got "
            f"support=({a}, {b}), plateau=({g}, {d})")
    t = grid(N)
    vals = _step((t - a) / (g - a), sigma) * _step((b - t) / (b - d), sigma)
    return GevreyBump(sigma=sigma, support=(a, b), plateau=(g, d),
                      samples=TorusFunction.from_samples(vals))


# --------------------------------------------------------------------------- #
# bundle containers
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class WitnessLevel:
    """One active mode of a witness.

    ``u``/``f`` hold grid samples when the level's bandwidth fits the grid;
    otherwise they are None and the level is described by its closed form
    (``freq`` for the constant construction) with ``residual=None`` and a note
    saying how the identity was verified.  ``sup_u``/``sup_f`` are exact where
    the construction pins them (1.0, 0.0, |gap|) and grid maxima otherwise.
    """

    j: int
    lam: float
    sup_u: float
    sup_f: float
    u: Optional[TorusFunction] = None
    f: Optional[TorusFunction] = None
    lam_exact: object = None
    residual: Optional[float] = None
    freq: Optional[int] = None      # constant witness: u = exp(-i*freq*t)
    note: str = ""

    @property
    def sampled(self) -> bool:
        return self.u is not None


@dataclass(frozen=True)
class DecayRecord:
    """Exponential-decay summary for sup|f_j| along the subsequence.

    ``eps_f``/``r2`` fit -log sup|f| against x = j^(1/(2 n mu)); ``rate_lambda``
    /``r2_lambda`` fit against lambda_j (the variable the sign-change margin
    bounds from below).  ``f_zero`` marks a forcing that vanishes identically,
    in which case no fit is run and the rates are +inf by convention.
    """

    f_zero: bool
    eps_f: float
    r2: float
    rate_lambda: float
    r2_lambda: float
    n_fit: int
    note: str = ""


def _linfit(x: np.ndarray, z: np.ndarray) -> tuple[float, float]:
    """Least-squares slope of z against x plus the usual R^2."""
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, z, rcond=None)
    pred = A @ coef
    ss_res = float(np.sum((z - pred) ** 2))
    ss_tot = float(np.sum((z - np.mean(z)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0.0 else 1.0
    return float(coef[0]), r2


def _decay_record(levels: Sequence[WitnessLevel], exponent: float) -> DecayRecord:
    sups = np.array([lv.sup_f for lv in levels], dtype=np.float64)
    keep = sups > _FIT_FLOOR
    if not np.any(keep):
        return DecayRecord(f_zero=True, eps_f=math.inf, r2=1.0,
                           rate_lambda=math.inf, r2_lambda=1.0, n_fit=0,
                           note="forcing vanishes identically on the subsequence")
    # deep Liouville levels carry indices beyond double range; they always sit
    # under the floor, so convert only what survives the cut
    kept = [lv for lv, k in zip(levels, keep) if k]
    js = np.array([float(lv.j) for lv in kept])
    lams = np.abs(np.array([lv.lam for lv in kept], dtype=np.float64))
    z = -np.log(sups[keep])
    note = ""
    dropped = int(len(levels) - int(np.sum(keep)))
    if dropped:
        note = (f"{dropped} level(s) below the double-precision floor were "
                f"excluded from the fit")
    if len(z) < 2:
        return DecayRecord(f_zero=False, eps_f=math.nan, r2=math.nan,
                           rate_lambda=math.nan, r2_lambda=math.nan,
                           n_fit=int(len(z)),
                           note=(note + "; " if note else "") + "fewer than two usable levels")
    eps, r2 = _linfit(np.power(js, exponent), z)
    rate, r2l = _linfit(lams, z)
    return DecayRecord(f_zero=False, eps_f=eps, r2=r2, rate_lambda=rate,
                       r2_lambda=r2l, n_fit=int(len(z)), note=note)


def _json_safe(v):
    """Best-effort conversion of meta values to JSON-encodable data."""
    if isinstance(v, GevreyBump):
        return v.summary()
    if isinstance(v, TorusFunction):
        return {"n": v.n, "sup": v.sup_norm()}
    if isinstance(v, Fraction):
        return {"num": str(v.numerator), "den": str(v.denominator)}
    if isinstance(v, (bool, str)) or v is None:
        return v
    if isinstance(v, Integral):
        # deep Liouville levels carry indices far beyond what JSON consumers
        # can parse as numbers; follow the certificate format and emit strings
        i = int(v)
        return i if i.bit_length() <= 64 else str(i)
    if isinstance(v, (float, np.floating)):
        f = float(v)
        return f if math.isfinite(f) else None
    if isinstance(v, (complex, np.complexfloating)):
        return {"re": float(v.real), "im": float(v.imag)}
    if isinstance(v, dict):
        return {str(k): _json_safe(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_json_safe(x) for x in v]
    return str(v)


@dataclass
class WitnessBundle:
    """A verified non-hypoellipticity witness on a sparse mode subsequence.

    ``levels`` is the primary storage (the construction is zero off the
    subsequence, so nothing else is kept); ``u``/``f`` ModeField views over
    the grid-sampled levels are built on demand by :meth:`to_mode_fields`.
    ``floor_u`` is the reported constant c0 with sup|u_{j_l}| >= c0 > 0, and
    ``decay`` summarizes the forcing decay; ``exponent`` is the Gelfand-Shilov
    abscissa power 1/(2 n mu) used for the fit.
    """

    kind: str
    levels: list[WitnessLevel]
    c: TorusFunction
    eigs: EigenSequence
    exponent: float
    floor_u: float
    decay: DecayRecord
    meta: dict = field(default_factory=dict)

    @property
    def eigs_kind(self) -> str:
        return self.eigs.kind

    @property
    def subsequence(self) -> list[int]:
        return [lv.j for lv in self.levels]

    def level(self, j: int) -> WitnessLevel:
        for lv in self.levels:
            if lv.j == j:
                return lv
        raise KeyError(f"mode {j} is not on the witness subsequence")

    def to_mode_fields(self) -> tuple[ModeField, ModeField]:
        """Dense (u, f) ModeFields over the grid-sampled levels, None elsewhere."""
        sampled = [lv for lv in self.levels if lv.sampled]
        if not sampled:
            raise RuntimeError("no grid-sampled levels in this bundle")
        J = max(lv.j for lv in sampled) + 1
        if J > self.eigs.J:
            raise RuntimeError(
                f"sampled subsequence reaches j = {J - 1} beyond the stored "
                f"eigenvalue window (J = {self.eigs.J})")
        us: list[Optional[TorusFunction]] = [None] * J
        fs: list[Optional[TorusFunction]] = [None] * J
        for lv in sampled:
            us[lv.j] = lv.u
            fs[lv.j] = lv.f
        return ModeField(us, self.eigs), ModeField(fs, self.eigs)

    # -- verification -------------------------------------------------- #

    def verify(self, tol_residual: Optional[float] = None) -> dict:
        """Re-run the bundle's own checks; returns a report dict with "ok"."""
        tol = tol_residual if tol_residual is not None else (
            TOL_RESIDUAL_CONSTANT if self.kind == "constant" else TOL_RESIDUAL)
        residuals = []
        for lv in self.levels:
            if not lv.sampled:
                continue
            r = (apply_mode(lv.lam, self.c, lv.u) - lv.f).sup_norm()
            residuals.append((lv.j, r))
        max_res = max((r for _, r in residuals), default=None)
        floor = min((lv.sup_u for lv in self.levels), default=0.0)
        checks = {
            "residuals_ok": all(r < tol for _, r in residuals),
            "floor_positive": floor > 0.0,
            # floor_u is a reported lower bound; every level must respect it
            "floor_holds": floor >= self.floor_u - 1e-12 * max(1.0, self.floor_u),
            "decay_ok": (self.decay.f_zero or self.decay.n_fit < 2
                         or self.decay.eps_f > 0.0),
        }
        return {
            "ok": all(checks.values()),
            "checks": checks,
            "max_residual": max_res,
            "n_sampled": len(residuals),
            "floor_u": floor,
            "eps_f": self.decay.eps_f,
            "f_zero": self.decay.f_zero,
        }

    # -- export --------------------------------------------------------- #

    def manifest(self) -> dict:
        dec = self.decay
        with _unlimited_int_digits():
            return self._manifest_dict(dec)

    def _manifest_dict(self, dec: DecayRecord) -> dict:
        return {
            "kind": self.kind,
            "eigs_kind": self.eigs_kind,
            "exponent": self.exponent,
            "floor_u": self.floor_u,
            "n_levels": len(self.levels),
            "subsequence": [_json_safe(j) for j in self.subsequence],
            "decay": {
                "f_zero": dec.f_zero,
                "eps_f": _json_safe(dec.eps_f),
                "r2": _json_safe(dec.r2),
                "rate_lambda": _json_safe(dec.rate_lambda),
                "r2_lambda": _json_safe(dec.r2_lambda),
                "n_fit": dec.n_fit,
                "note": dec.note,
            },
            "levels": [
                {
                    "j": _json_safe(lv.j),
                    "lambda": _json_safe(lv.lam),
                    "lambda_exact": None if lv.lam_exact is None else str(lv.lam_exact),
                    "sup_u": lv.sup_u,
                    "sup_f": lv.sup_f,
                    "residual": _json_safe(lv.residual),
                    "sampled": lv.sampled,
                    "freq": _json_safe(lv.freq),
                    "note": lv.note,
                }
                for lv in self.levels
            ],
            "meta": _json_safe(self.meta),
        }

    def norms_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["j", "sup_u", "sup_f"])
        with _unlimited_int_digits():
            for lv in self.levels:
                w.writerow([lv.j, repr(float(lv.sup_u)), repr(float(lv.sup_f))])
        return buf.getvalue()

    def write(self, directory: str) -> dict:
        """Write manifest.json and norms.csv under ``directory``; returns paths."""
        os.makedirs(directory, exist_ok=True)
        man_path = os.path.join(directory, "manifest.json")
        csv_path = os.path.join(directory, "norms.csv")
        with _unlimited_int_digits(), open(man_path, "w", encoding="utf-8") as fh:
            json.dump(self.manifest(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        with open(csv_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.norms_csv())
        return {"manifest": man_path, "norms": csv_path}


# --------------------------------------------------------------------------- #
# constant coefficient: resonance and Liouville certificates
# --------------------------------------------------------------------------- #

def _exponent_of(eigs: EigenSequence, mu) -> float:
    return 1.0 / (2.0 * eigs.n * float(mu))


def constant_witness(alpha, eigs: EigenSequence, L: int = 4,
                     N: int = 256, mu=Fraction(1, 2)) -> WitnessBundle:
    """Witness for L = D_t + alpha*P with constant alpha.

    Accepts an exact rational alpha (integers always resonate; other rationals
    must hit a resonant class of the spectrum) or a
    :class:`~hypotorus.diophantine.LiouvilleCertificate`.  Along the chosen
    subsequence u_j = e^{-i tau_j t} with tau_j the nearest resonance integer,
    so sup|u_j| = 1 exactly and sup|f_j| = |alpha*lambda_j - tau_j| -- zero on
    resonances, the certified gap on a Liouville subsequence.  Non-integral
    floats are refused (:class:`NoCertificate`): they carry no exact
    arithmetic to certify either route (exact-integer floats convert
    losslessly and are accepted).  Levels whose frequency exceeds the grid
    band are kept in closed form and verified in exact rational arithmetic.
    """
    if isinstance(alpha, LiouvilleCertificate):
        return _constant_from_certificate(alpha, eigs, L, N)

    frac = None
    if isinstance(alpha, Fraction):
        frac = alpha
    elif isinstance(alpha, Integral):
        frac = Fraction(int(alpha))
    elif isinstance(alpha, float):
        if float(alpha).is_integer():
            frac = Fraction(int(alpha))
        else:
            raise NoCertificate(
                f"alpha = {alpha!r} is a float: no exact resonance arithmetic and no "
                f"certificate; pass a Fraction or a LiouvilleCertificate")
    else:
        raise TypeError(f"unsupported alpha type: {type(alpha).__name__}")

    if not eigs.integer_valued:
        raise NoCertificate(
            f"eigenvalue kind {eigs.kind!r} has no exact integer form; "
            f"resonance cannot be certified")

    q = frac.denominator
    if q == 1:
        js = list(range(L))
        route = "integer-resonance"
    else:
        rv = classify_rational(frac.numerator, q, eigs)
        if not rv.resonant:
            raise NoCertificate(
                f"alpha = {frac} never resonates on {eigs.kind!r} "
                f"(divisor floor {rv.floor}); nothing to witness")
        js = []
        j = 0
        scan_cap = max(64, 4 * L * (rv.period or q))
        while len(js) < L and j < scan_cap:
            if (frac.numerator * eigs.exact_lambda(j)) % q == 0:
                js.append(j)
            j += 1
        if len(js) < L:
            raise NoCertificate(
                f"found only {len(js)} resonant modes for alpha = {frac} "
                f"within the first {scan_cap} indices")
        route = "rational-resonance"

    c_tf = TorusFunction.constant(complex(float(frac)), N)
    levels = []
    for j in js:
        lam = eigs.exact_lambda(j)
        tau_frac = frac * lam
        if tau_frac.denominator != 1:
            raise AssertionError(f"internal: mode {j} is not resonant for {frac}")
        tau = int(tau_frac)
        lam_f = float(lam)
        if abs(tau) <= N // 2 - 1:
            u = TorusFunction.harmonic(-tau, N)
            f = TorusFunction.zero(N)
            res = (apply_mode(lam_f, c_tf, u) - f).sup_norm()
            note = ""
        else:
            u = f = None
            res = None
            note = ("frequency beyond the grid band; "
                    "f = i(alpha*lambda - tau)e^{-i tau t} = 0 exactly")
        levels.append(WitnessLevel(j=j, lam=lam_f, sup_u=1.0, sup_f=0.0,
                                   u=u, f=f, lam_exact=lam, residual=res,
                                   freq=tau, note=note))

    exponent = _exponent_of(eigs, mu)
    bundle = WitnessBundle(
        kind="constant",
        levels=levels,
        c=c_tf,
        eigs=eigs,
        exponent=exponent,
        floor_u=1.0,
        decay=_decay_record(levels, exponent),
        meta={"alpha": str(frac), "route": route,
              "tau": [lv.freq for lv in levels]},
    )
    _require(bundle, TOL_RESIDUAL_CONSTANT)
    return bundle


def _constant_from_certificate(cert: LiouvilleCertificate, eigs: EigenSequence,
                               L: int, N: int) -> WitnessBundle:
    if not cert.verify():
        raise NoCertificate("the supplied LiouvilleCertificate fails verification")
    if eigs.kind.split()[0] != cert.eigs_kind.split()[0]:
        raise NoCertificate(
            f"certificate was built on {cert.eigs_kind!r}, got eigenvalues of "
            f"kind {eigs.kind!r}")

    kappa = cert.kappa
    c_tf = TorusFunction.constant(complex(float(kappa)), N)
    levels = []
    for lev in cert.levels[:max(1, L)]:
        delta = kappa * lev.lam - lev.tau          # signed; |delta| == lev.gap
        if abs(delta) != lev.gap:
            raise NoCertificate(f"certificate gap mismatch at level j={lev.j}")
        sup_f = float(lev.gap)                      # may underflow to 0.0: honest in doubles
        try:
            lam_f = float(lev.lam)
        except OverflowError:                       # deep levels outgrow doubles
            lam_f = math.inf
        if abs(lev.tau) <= N // 2 - 1 and abs(lam_f) * abs(float(kappa)) <= _BAND_FRACTION * N / 2:
            u = TorusFunction.harmonic(-lev.tau, N)
            f = TorusFunction.harmonic(-lev.tau, N) * complex(1j * float(delta))
            res = (apply_mode(lam_f, c_tf, u) - f).sup_norm()
            note = ""
        else:
            u = f = None
            res = None
            note = ("frequency beyond the grid band; identity "
                    "u' + i kappa lambda u = i(kappa lambda - tau)e^{-i tau t} "
                    "holds term-by-term, gap recomputed exactly")
        levels.append(WitnessLevel(j=lev.j, lam=lam_f, sup_u=1.0, sup_f=sup_f,
                                   u=u, f=f, lam_exact=lev.lam, residual=res,
                                   freq=lev.tau,
                                   note=note))

    exponent = float(cert.e)
    with _unlimited_int_digits():
        alpha_str = str(kappa)          # certificate rationals outgrow the 3.11+ str guard
    bundle = WitnessBundle(
        kind="constant",
        levels=levels,
        c=c_tf,
        eigs=eigs,
        exponent=exponent,
        floor_u=1.0,
        decay=_decay_record(levels, exponent),
        meta={
            "alpha": alpha_str,
            "route": "liouville-certificate",
            "gap_log10": [_gap_log10(lev.gap) for lev in cert.levels[:max(1, L)]],
            "K": [lev.K for lev in cert.levels[:max(1, L)]],
            "tau": [lev.tau for lev in cert.levels[:max(1, L)]],
        },
    )
    _require(bundle, TOL_RESIDUAL_CONSTANT)
    return bundle


def _gap_log10(gap: Fraction) -> float:
    """log10 of a positive Fraction via bit lengths (safe for huge dens)."""
    if gap == 0:
        return -math.inf
    num, den = gap.numerator, gap.denominator
    return (num.bit_length() - den.bit_length()) * math.log10(2.0)


def _require(bundle: WitnessBundle, tol: float) -> None:
    rep = bundle.verify(tol_residual=tol)
    if not rep["ok"]:
        raise RuntimeError(
            f"witness verification failed for kind={bundle.kind!r}: {rep['checks']} "
            f"(max residual {rep['max_residual']})")


# --------------------------------------------------------------------------- #
# window machinery shared by the variable-coefficient constructions
# --------------------------------------------------------------------------- #

def _cover_primitive(fn: TorusFunction) -> tuple[float, np.ndarray]:
    """(drift, P) with  integral_0^t fn = drift*t + P(t),  P periodic, P(0)=0."""
    drift = fn.mean().real
    P = fn.antiderivative_zero_mean_part()
    return drift, np.real(np.asarray(P.samples))


def _phi_cover(drift: float, P: np.ndarray, N: int) -> np.ndarray:
    """The primitive on 2N points of the covering line [0, 4*pi)."""
    t = 2.0 * math.pi * np.arange(2 * N) / N
    return drift * t + np.concatenate([P, P])


def _best_window(phi_cover: np.ndarray, N: int) -> Optional[dict]:
    """Exhaustive window scan: start k0, interior argmax i, two-sided depth.

    For each window [k0, k0+N) of one period on the cover, the anchor is the
    windowed argmax of the primitive; the score is the smaller of the deepest
    excursions of (phi(anchor) - phi) strictly left and right of the anchor.
    Returns the best window or None when no window has an interior anchor
    with positive two-sided depth.
    """
    best = None
    for k0 in range(N):
        w = phi_cover[k0:k0 + N]
        i = int(np.argmax(w))
        if i < 2 or i > N - 3:
            continue
        B = w - w[i]
        depth = min(float(np.max(-B[:i])), float(np.max(-B[i + 1:])))
        if depth <= 1e-12:
            continue
        if best is None or depth > best["depth"]:
            best = {"k0": k0, "i": i, "depth": depth, "B": B}
    return best


def _component(mask: np.ndarray, center: int) -> tuple[int, int]:
    """Inclusive index run of True containing ``center``."""
    lo = center
    while lo - 1 >= 0 and mask[lo - 1]:
        lo -= 1
    hi = center
    while hi + 1 < len(mask) and mask[hi + 1]:
        hi += 1
    return lo, hi


def _partition_indices(B: np.ndarray, i: int, depth: float, N: int) -> Optional[dict]:
    """Pick the four partition indices around the anchor at threshold depth/2.

    Tries margins depth/2, depth/4, depth/8 until both transition intervals
    hold at least two samples strictly inside the window; the returned
    ``c_star`` is the margin actually certified (every sample of both
    intervals has the primitive at least c_star below the anchor value).
    """
    d = -B                                   # >= 0, zero at the anchor
    for shrink in (2.0, 4.0, 8.0):
        c_star = depth / shrink
        left = d[:i]
        right = d[i + 1:]
        la, lb = _component(left > c_star, int(np.argmax(left)))
        ra, rb = _component(right > c_star, int(np.argmax(right)))
        ra += i + 1
        rb += i + 1
        la = max(la, 1)                      # keep strictly inside the window
        rb = min(rb, N - 2)
        if lb - la >= 1 and rb - ra >= 1 and lb < i and ra > i:
            return {"c_star": c_star, "la": la, "lb": lb, "ra": ra, "rb": rb}
    return None


def _roll_to_circle(values: np.ndarray, k0: int) -> np.ndarray:
    """Window-ordered samples (window index m = circle index (k0+m) mod N)."""
    return np.roll(values, k0)


def _masked_exp(g: np.ndarray, exponent: np.ndarray) -> np.ndarray:
    """g * exp(exponent) with the exponent forced to 0 wherever g == 0,
    so points outside the support can never overflow."""
    safe = np.where(g > 0.0, exponent, 0.0)
    return g * np.exp(safe)


def _band_check(lam_max: float, c_sup: float, N: int, who: str) -> None:
    need = lam_max * c_sup
    allowed = _BAND_FRACTION * (N / 2.0)
    if need > allowed:
        n_req = int(2 ** math.ceil(math.log2(max(8.0, 2.0 * need / _BAND_FRACTION))))
        raise ValueError(
            f"{who}: level bandwidth ~{need:.0f} exceeds {allowed:.0f} "
            f"(= {_BAND_FRACTION} * Nyquist) at N = {N}; pass N >= {n_req}")


# --------------------------------------------------------------------------- #
# change of sign of Im c
# --------------------------------------------------------------------------- #

def sign_change_witness(c: TorusFunction, eigs: EigenSequence, params=(1, Fraction(1, 2)),
                        N: int = 1024, sigma: float = 2.0) -> WitnessBundle:
    """Witness for Im c changing sign.

    Let Phi be the primitive of b = Im c on the covering line.  An exhaustive
    window scan places one period (t0, t0 + 2pi] so that the windowed argmax
    t* is interior with the deepest possible two-sided excursion ``depth`` of
    B(t) = Phi(t) - Phi(t*) below zero; the certified margin is c* = depth/2
    (the partition intervals are the level sets where the excursion exceeds c*).
    With bumps g* (support [alpha*, beta*], flat on [gamma*, delta*] around
    t*) and psi* (flat on [alpha*, beta*], vanishing at the window ends),

        u_j = g* exp[lambda_j psi* (B - iA)],   f_j = g*' exp[same],

    where A is the analogously anchored primitive of Re c.  Then |u_j(t*)| = 1
    exactly, |u_j| <= 1, and f_j lives on the transition bands where B < -c*,
    giving sup|f_j| <~ exp(-c* lambda_j).  Modes with negative lambda use the
    mirrored window (argmin anchor); mixed-sign spectra are restricted to the
    positive-lambda subsequence, as recorded in meta.
    """
    m_ord, mu = params
    cc = c.resample(N)
    a = cc.real_part()
    b = cc.imag_part()
    if b.sup_norm() <= 1e-14:
        raise PartitionNotFound("Im c vanishes identically; no sign change to exploit")

    lams = np.asarray(eigs.lambdas, dtype=np.float64)
    pos = lams > 0
    if np.all(pos):
        side, use = +1, np.arange(len(lams))
        sub_note = "all levels (lambda > 0)"
    elif not np.any(pos):
        side, use = -1, np.arange(len(lams))
        sub_note = "all levels (lambda < 0, mirrored window)"
    else:
        side, use = +1, np.flatnonzero(pos)
        sub_note = "restricted to the positive-lambda subsequence"

    drift_b, Pb = _cover_primitive(b)
    drift_a, Pa = _cover_primitive(a)
    phi = _phi_cover(drift_b, Pb, N)
    found = _best_window(side * phi, N)
    if found is None:
        raise PartitionNotFound(
            "no window gives an interior anchor with positive two-sided margin "
            "at this grid resolution (the primitive of Im c is one-sided)")
    k0, i, depth = found["k0"], found["i"], found["depth"]
    part = _partition_indices(found["B"], i, depth, N)
    if part is None:
        raise PartitionNotFound(
            f"margin {depth / 2:.3e} exists only on degenerate (single-sample) "
            f"intervals at N = {N}; refine the grid")
    c_star = part["c_star"]

    # feasibility (a partition exists) is decided above; only now gate on
    # the grid being wide enough to hold the most oscillatory level
    _band_check(float(np.max(np.abs(lams[use]))), a.sup_norm() + b.sup_norm(),
                N, "sign_change_witness")

    tau = 2.0 * math.pi * np.arange(N) / N       # window-local coordinate
    t0 = 2.0 * math.pi * k0 / N
    alpha_loc, gamma_loc = tau[part["la"]], tau[part["lb"]]
    delta_loc, beta_loc = tau[part["ra"]], tau[part["rb"]]

    g_star = gevrey_bump(sigma, (alpha_loc, beta_loc), (gamma_loc, delta_loc), N)
    psi_star = gevrey_bump(sigma, (alpha_loc / 2.0,
                                   beta_loc + (2.0 * math.pi - beta_loc) / 2.0),
                           (alpha_loc, beta_loc), N)

    # window-ordered primitives anchored at the window anchor
    ta = 2.0 * math.pi * np.arange(k0, k0 + N) / N
    Bw = (drift_b * ta + np.concatenate([Pb, Pb])[k0:k0 + N])
    Bw = Bw - Bw[i]
    Aw = (drift_a * ta + np.concatenate([Pa, Pa])[k0:k0 + N])
    Aw = Aw - Aw[i]

    g_w = np.real(np.asarray(g_star.samples.samples))
    psi_w = np.real(np.asarray(psi_star.samples.samples))
    dg_circle = TorusFunction.from_samples(_roll_to_circle(g_w, k0)).derivative()
    dg_w = np.roll(np.real(np.asarray(dg_circle.samples)), -k0)
    E_w = psi_w * (Bw - 1j * Aw)

    levels = []
    t_anchor = (t0 + tau[i]) % (2.0 * math.pi)
    # g*' is genuinely nonzero only on the two transition bands [alpha*,gamma*]
    # and [delta*,beta*]; zeroing f elsewhere drops the spectral-derivative
    # ringing that would otherwise put a flat noise floor under sup|f_j|
    bands = (slice(part["la"], part["lb"] + 1), slice(part["ra"], part["rb"] + 1))
    for idx in use:
        lam = float(lams[idx])
        expo = lam * E_w
        u_w = _masked_exp(g_w, expo)
        f_w = np.zeros(N, dtype=np.complex128)
        with np.errstate(under="ignore"):
            for band in bands:
                f_w[band] = dg_w[band] * np.exp(expo[band])
        # the bump is flat to all orders where it is exactly 0 or 1, so the
        # true g*' vanishes there; drop the band-endpoint ringing samples
        f_w[(g_w == 0.0) | (g_w == 1.0)] = 0.0
        u_tf = TorusFunction.from_samples(_roll_to_circle(u_w, k0))
        f_tf = TorusFunction.from_samples(_roll_to_circle(f_w, k0))
        res = (apply_mode(lam, cc, u_tf) - f_tf).sup_norm()
        at_anchor = abs(u_w[i])
        if abs(at_anchor - 1.0) > 1e-9:
            raise RuntimeError(
                f"internal: |u({t_anchor:.4f})| = {at_anchor!r} != 1 at level {idx}")
        lam_exact = eigs.exact_lambda(int(idx)) if eigs.integer_valued else None
        levels.append(WitnessLevel(j=int(idx), lam=lam,
                                   sup_u=float(np.max(np.abs(u_w))),
                                   sup_f=float(np.max(np.abs(f_w))),
                                   u=u_tf, f=f_tf, lam_exact=lam_exact,
                                   residual=float(res)))

    exponent = _exponent_of(eigs, mu)
    decay = _decay_record(levels, exponent)
    bundle = WitnessBundle(
        kind="sign-change",
        levels=levels,
        c=cc,
        eigs=eigs,
        exponent=exponent,
        floor_u=min(lv.sup_u for lv in levels),
        decay=decay,
        meta={
            "side": "max" if side > 0 else "min",
            "subsequence_note": sub_note,
            "t0": t0,
            "t_star": t_anchor,
            "depth": depth,
            "c_star": c_star,
            "partitions": {
                "alpha": (t0 + alpha_loc) % (2 * math.pi),
                "gamma": (t0 + gamma_loc) % (2 * math.pi),
                "delta": (t0 + delta_loc) % (2 * math.pi),
                "beta": (t0 + beta_loc) % (2 * math.pi),
                "window_local": [alpha_loc, gamma_loc, delta_loc, beta_loc],
            },
            "bumps": {"g_star": g_star, "psi_star": psi_star},
            "drift": {"b": drift_b, "a": drift_a},
            "B_window": TorusFunction.from_samples(_roll_to_circle(Bw, k0)),
            "A_window": TorusFunction.from_samples(_roll_to_circle(Aw, k0)),
            "primitive_note": ("B_window/A_window hold window-coordinate values "
                               "(periodic iff the respective drift vanishes)"),
        },
    )
    _require(bundle, TOL_RESIDUAL)
    if not decay.f_zero and decay.rate_lambda < 0.8 * c_star:
        raise RuntimeError(
            f"internal: fitted decay rate {decay.rate_lambda:.4f} fell below "
            f"0.8 * c_star = {0.8 * c_star:.4f}")
    return bundle


# --------------------------------------------------------------------------- #
# plateau variant: b == 0 on [t0, t1] with (+, 0, -) flanks
# --------------------------------------------------------------------------- #

def plateau_witness(c: TorusFunction, intervals: Sequence[float], eigs: EigenSequence,
                    N: int = 1024, sigma: float = 2.0,
                    params=(1, Fraction(1, 2))) -> WitnessBundle:
    """Two-bump witness for Im c vanishing identically on [t0, t1].

    Requires the (+, 0, -) pattern: b = Im c strictly positive mass just left
    of t0, machine-zero on [t0, t1], strictly negative mass just right of t1.
    Two bumps are anchored at the endpoints: g0 rises across the left flank
    (where B0(t) = int_{t0}^t b < 0), holds 1 from inside the flank through
    the plateau, and falls across a band (m0, m1) in the middle of the
    plateau; g1 mirrors it from m0 onward through the right flank.  Both
    anchored primitives vanish identically on the plateau, so the two inner
    transitions share one exponential factor and their derivative
    contributions cancel (the steps sum to 1 across the shared band); the
    forcing lives on the outer flanks where the anchored primitives are below
    -c* with c* = half the smaller flank mass.

        u_j = g0 exp[lambda_j(B0 - iA)] + g1 exp[lambda_j(B1 - iA)]

    has |u_j| = 1 on the whole plateau (in particular at both anchors).
    """
    m_ord, mu = params
    cc = c.resample(N)
    a = cc.real_part()
    b = cc.imag_part()
    t0, t1 = float(intervals[0]), float(intervals[1])
    if not (0.0 <= t0 < t1 < 2.0 * math.pi):
        raise ValueError(f"need 0 <= t0 < t1 < 2*pi, got [{t0}, {t1}]")

    bs = np.real(np.asarray(b.samples))
    step = 2.0 * math.pi / N
    i0 = int(math.ceil(t0 / step))
    i1 = int(math.floor(t1 / step))
    if i1 - i0 < 8:
        raise PatternNotFound(f"plateau [{t0}, {t1}] spans fewer than 8 grid points at N = {N}")
    if float(np.max(np.abs(bs[i0:i1 + 1]))) > 1e-12:
        raise PatternNotFound(
            "Im c does not vanish to machine precision on the given interval; "
            "the two-bump cancellation needs an exactly flat plateau")

    # cut the circle opposite the plateau so everything is window-interior
    mid = 0.5 * (t0 + t1)
    k0 = int(round(((mid + math.pi) % (2.0 * math.pi)) / step)) % N
    tcut = step * k0
    loc = lambda t: (t - tcut) % (2.0 * math.pi)      # circle -> window-local

    drift_b, Pb = _cover_primitive(b)
    drift_a, Pa = _cover_primitive(a)
    ta = 2.0 * math.pi * np.arange(k0, k0 + N) / N
    Phib = drift_b * ta + np.concatenate([Pb, Pb])[k0:k0 + N]
    Phia = drift_a * ta + np.concatenate([Pa, Pa])[k0:k0 + N]
    bw = np.roll(bs, -k0)                              # window-ordered b

    l0 = loc(step * i0) / step                         # window-local indices
    l1 = loc(step * i1) / step
    w0, w1 = int(round(l0)), int(round(l1))

    # flank masses: IL(m) = Phi(w0) - Phi(m) rising to the left, and the
    # mirrored IR on the right; margins are half the available mass
    win_lo = max(2, w0 - N // 3)
    win_hi = min(N - 3, w1 + N // 3)
    IL = Phib[w0] - Phib[win_lo:w0]                    # mass of b over (m, w0)
    IR = Phib[w1] - Phib[w1 + 1:win_hi + 1]            # -int over (w1, m) = mass of -b
    if IL.size == 0 or IR.size == 0:
        raise PatternNotFound("no room for flanks next to the plateau")
    TL, TR = float(np.max(IL)), float(np.max(IR))
    if TL <= 1e-12:
        raise PatternNotFound("no positive mass of Im c immediately left of t0")
    if TR <= 1e-12:
        raise PatternNotFound("no negative mass of Im c immediately right of t1")
    if float(np.min(bw[win_lo:w0])) < -1e-12:
        raise PatternNotFound("Im c dips negative inside the left flank window")
    if float(np.max(bw[w1 + 1:win_hi + 1])) > 1e-12:
        raise PatternNotFound("Im c rises positive inside the right flank window")

    # left transition band: from the deepest usable point up to half mass
    la = win_lo + int(np.argmax(IL))                   # support start
    half_idx = np.flatnonzero(IL >= 0.5 * TL)
    lb = win_lo + int(half_idx[-1])                    # plateau start (margin >= TL/2)
    ra_idx = np.flatnonzero(IR >= 0.5 * TR)
    ra = w1 + 1 + int(ra_idx[0])                       # plateau end (margin >= TR/2)
    rb = w1 + 1 + int(np.argmax(IR))                   # support end
    if lb - la < 1 or rb - ra < 1:
        raise PatternNotFound("flank transition bands are degenerate at this resolution")
    m_left = float(Phib[w0] - Phib[lb])
    m_right = float(Phib[w1] - Phib[ra])
    c_star = min(m_left, m_right)
    if c_star <= 0.0:
        raise PatternNotFound("no positive margin on one of the flanks")

    # inner seam: shared transition band in the middle of the plateau
    mid_w = (w0 + w1) // 2
    seam = max(2, (w1 - w0) // 8)
    m0, m1 = mid_w - seam, mid_w + seam

    tau = 2.0 * math.pi * np.arange(N) / N
    g0 = gevrey_bump(sigma, (tau[la], tau[m1]), (tau[lb], tau[m0]), N)
    g1 = gevrey_bump(sigma, (tau[m0], tau[rb]), (tau[m1], tau[ra]), N)

    lams = np.asarray(eigs.lambdas, dtype=np.float64)
    if np.any(lams <= 0):
        raise ValueError("plateau_witness expects a positive spectrum")
    _band_check(float(np.max(lams)), a.sup_norm() + b.sup_norm(), N, "plateau_witness")

    B0 = Phib - Phib[w0]
    B1 = Phib - Phib[w1]
    A = Phia - Phia[w0]
    g0_w = np.real(np.asarray(g0.samples.samples))
    g1_w = np.real(np.asarray(g1.samples.samples))
    dg0_w = np.roll(np.real(np.asarray(
        TorusFunction.from_samples(_roll_to_circle(g0_w, k0)).derivative().samples)), -k0)
    dg1_w = np.roll(np.real(np.asarray(
        TorusFunction.from_samples(_roll_to_circle(g1_w, k0)).derivative().samples)), -k0)

    levels = []
    # forcing lives only on the outer flanks: on the shared seam band
    # (m0, m1) the complement identity gives g0 + g1 == 1 while b == 0,
    # so the two derivative contributions cancel exactly and the true
    # forcing is identically zero there -- writing 0 instead of the
    # numerically cancelled sum keeps sup|f_j| free of a roundoff floor
    flank0 = slice(la, lb + 1)                   # rising flank of g0
    flank1 = slice(ra, rb + 1)                   # falling flank of g1
    for j, lam in enumerate(lams):
        lam = float(lam)
        e0 = lam * (B0 - 1j * A)
        e1 = lam * (B1 - 1j * A)
        u_w = _masked_exp(g0_w, e0) + _masked_exp(g1_w, e1)
        f_w = np.zeros(N, dtype=np.complex128)
        with np.errstate(under="ignore"):
            f_w[flank0] = dg0_w[flank0] * np.exp(e0[flank0])
            f_w[flank1] = dg1_w[flank1] * np.exp(e1[flank1])
        # each bump is flat to all orders where it is exactly 0 or 1 (and the
        # other bump is constant there too), so the true forcing vanishes;
        # drop the band-endpoint ringing samples
        f_w[((g0_w == 0.0) | (g0_w == 1.0)) & ((g1_w == 0.0) | (g1_w == 1.0))] = 0.0
        u_tf = TorusFunction.from_samples(_roll_to_circle(u_w, k0))
        f_tf = TorusFunction.from_samples(_roll_to_circle(f_w, k0))
        res = (apply_mode(lam, cc, u_tf) - f_tf).sup_norm()
        lam_exact = eigs.exact_lambda(j) if eigs.integer_valued else None
        levels.append(WitnessLevel(j=j, lam=lam,
                                   sup_u=float(np.max(np.abs(u_w))),
                                   sup_f=float(np.max(np.abs(f_w))),
                                   u=u_tf, f=f_tf, lam_exact=lam_exact,
                                   residual=float(res)))

    exponent = _exponent_of(eigs, mu)
    decay = _decay_record(levels, exponent)
    bundle = WitnessBundle(
        kind="plateau",
        levels=levels,
        c=cc,
        eigs=eigs,
        exponent=exponent,
        floor_u=min(lv.sup_u for lv in levels),
        decay=decay,
        meta={
            "anchors": {"t0": t0, "t1": t1},
            "cut": tcut,
            "margins": {"left": m_left, "right": m_right},
            "flank_mass": {"left": TL, "right": TR},
            "c_star": c_star,
            "seam": {"m0": (tcut + tau[m0]) % (2 * math.pi),
                     "m1": (tcut + tau[m1]) % (2 * math.pi)},
            "bumps": {"g0": g0, "g1": g1},
            "drift": {"b": drift_b, "a": drift_a},
            "B0_window": TorusFunction.from_samples(_roll_to_circle(B0, k0)),
            "B1_window": TorusFunction.from_samples(_roll_to_circle(B1, k0)),
            "A_window": TorusFunction.from_samples(_roll_to_circle(A, k0)),
            "primitive_note": ("window-coordinate values, cut at `cut`; "
                               "periodic iff the respective drift vanishes"),
        },
    )
    _require(bundle, TOL_RESIDUAL)
    return bundle


# --------------------------------------------------------------------------- #
# L0 reduction: real c with Liouville mean
# --------------------------------------------------------------------------- #

def L0_reduction_witness(c: TorusFunction, certificate: LiouvilleCertificate,
                         eigs: EigenSequence, N: int = 512,
                         phi=None) -> WitnessBundle:
    """Witness for real-valued c whose mean carries a Liouville certificate.

    The phase-only variant: with A = int_0^t Re c and E_l = e^{-2 pi i a0
    lambda_l} computed from the certificate's exact signed residue,

        f_l = (1 - E_l) e^{-i lambda_l A(t)} phi(t),
        u_l = e^{-i lambda_l A(t)} [Phi_phi(t) + E_l (I_phi - Phi_phi(t))],

    where phi is a fixed bump vanishing near the anchor t_l and near the seam,
    Phi_phi its cumulative integral from 0, and I_phi = int_0^{2pi} phi.  Then
    |u_l(t_l)| = I_phi for every level (no decay) while sup|f_l| = |1 - E_l|
    sup|phi| <= 2 pi gap_l sup|phi| (certified decay).  The anchor search
    maximizes the cumulative integral of Im(lambda c), which vanishes
    identically here, so the anchor sits at t = 0 and phi's default support
    stays away from it.
    """
    cc = c.resample(N)
    if cc.imag_part().sup_norm() > 1e-12:
        raise ValueError("L0_reduction_witness requires Im c == 0 "
                         "(got a genuinely complex coefficient)")
    if not isinstance(certificate, LiouvilleCertificate):
        raise NoCertificate("a verified LiouvilleCertificate is required")
    if not certificate.verify():
        raise NoCertificate("the supplied LiouvilleCertificate fails verification")
    if eigs.kind.split()[0] != certificate.eigs_kind.split()[0]:
        raise NoCertificate(
            f"certificate was built on {certificate.eigs_kind!r}, got eigenvalues "
            f"of kind {eigs.kind!r}")
    kappa = certificate.kappa
    a0 = cc.mean().real
    if abs(a0 - float(kappa)) > 1e-12 * (1.0 + abs(float(kappa))):
        raise NoCertificate(
            f"certificate is for a0 = {float(kappa)!r} but mean(Re c) = {a0!r}; "
            f"build c with the certified mean")

    a = cc.real_part()
    drift_a, Pa = _cover_primitive(a)
    t = grid(N)
    A = drift_a * t + Pa

    # anchor: argmax of the cumulative integral of Im(lambda c); Im c == 0
    # makes that cumulative identically zero, so the first grid point wins
    anchor_idx = 0
    t_anchor = float(t[anchor_idx])

    if phi is None:
        phi = gevrey_bump(2.0, (2.0, 4.5), (2.6, 3.9), N)
    if isinstance(phi, GevreyBump):
        if phi.samples.n != N:       # rebuild at N to keep the exact 0/1 grid trace
            phi = gevrey_bump(phi.sigma, phi.support, phi.plateau, N)
        phi_tf = phi.samples
    else:
        phi_tf = phi.resample(N)
    phv = np.asarray(phi_tf.samples)
    if float(np.max(np.abs(phv.imag))) > 1e-14:
        raise ValueError("phi must be real-valued")
    phv = np.real(phv)
    if float(np.min(phv)) < -1e-12 or float(np.max(phv)) > 1.0 + 1e-12:
        raise ValueError("phi must take values in [0, 1]")
    I_phi = 2.0 * math.pi * float(phi_tf.mean().real)
    if not I_phi > 0.0:
        raise ValueError("phi must have positive integral; a vanishing bump is degenerate")
    guard = [anchor_idx, (anchor_idx + 1) % N, (anchor_idx - 1) % N]
    if float(np.max(np.abs(phv[guard]))) > 0.0:
        raise ValueError("phi must vanish near the anchor point t_l")

    drift_phi, Pphi = _cover_primitive(phi_tf)
    Phi_phi = drift_phi * t + Pphi                      # cumulative from 0

    lam_cap = _BAND_FRACTION * (N / 2.0) / max(a.sup_norm(), 1e-300)
    levels = []
    for lev in certificate.levels:
        delta = kappa * lev.lam - lev.tau               # exact signed residue
        E = cmath.exp(-2j * math.pi * float(delta))
        one_minus_E = 1.0 - E
        lam_f = float(lev.lam)
        bracket = Phi_phi + E * (I_phi - Phi_phi)
        sup_u = float(np.max(np.abs(bracket)))
        sup_f = abs(one_minus_E) * float(np.max(phv))
        u_at_anchor = abs(bracket[anchor_idx])          # = |E| * I_phi = I_phi
        if abs(u_at_anchor - I_phi) > 1e-9 * max(1.0, I_phi):
            raise RuntimeError(
                f"internal: |u(t_l)| = {u_at_anchor!r} != int(phi) = {I_phi!r}")
        if lam_f <= lam_cap:
            phase = np.exp(-1j * lam_f * A)
            u_tf = TorusFunction.from_samples(phase * bracket)
            f_tf = TorusFunction.from_samples(one_minus_E * phase * phv)
            res = (apply_mode(lam_f, cc, u_tf) - f_tf).sup_norm()
            note = ""
        else:
            u_tf = f_tf = None
            res = None
            note = ("bandwidth beyond the grid; identity verified through the "
                    "exact residue (|1 - E| = 2|sin(pi delta)|)")
        levels.append(WitnessLevel(j=lev.j, lam=lam_f, sup_u=sup_u, sup_f=sup_f,
                                   u=u_tf, f=f_tf, lam_exact=lev.lam,
                                   residual=res, note=note))

    exponent = float(certificate.e)
    decay = _decay_record(levels, exponent)
    bundle = WitnessBundle(
        kind="l0-reduction",
        levels=levels,
        c=cc,
        eigs=eigs,
        exponent=exponent,
        floor_u=I_phi,
        decay=decay,
        meta={
            "a0": str(kappa),
            "t_anchor": t_anchor,
            "I_phi": I_phi,
            "sup_phi": float(np.max(phv)),
            "phi": phi if isinstance(phi, GevreyBump) else {"n": phi_tf.n},
            "gap_log10": [_gap_log10(lev.gap) for lev in certificate.levels],
            "gap_E": [abs(1.0 - cmath.exp(-2j * math.pi *
                                          float(kappa * lev.lam - lev.tau)))
                      for lev in certificate.levels],
            "u_floor_note": "|u_l(t_l)| = int(phi) exactly, independent of l",
        },
    )
    # the floor here is |u(t_l)| = I_phi, not min sup_u (sup_u >= I_phi always)
    rep = bundle.verify(tol_residual=TOL_RESIDUAL)
    if not (rep["checks"]["residuals_ok"] and rep["checks"]["decay_ok"]):
        raise RuntimeError(
            f"witness verification failed for kind='l0-reduction': {rep['checks']} "
            f"(max residual {rep['max_residual']})")
    if min(lv.sup_u for lv in levels) < I_phi - 1e-9:
        raise RuntimeError("internal: some level's sup|u| fell below int(phi)")
    return bundle
