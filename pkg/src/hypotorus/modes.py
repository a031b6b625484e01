"""Mode-by-mode solver for the periodic equations  u_j' + i*lam_j*c(t)*u_j = f_j.

Each eigenvalue lam of P turns L u = f into a scalar ODE on the circle.  When
lam*c0 is not an integer (c0 = mean of c) the ODE has exactly one periodic
solution, given by either of two equivalent integral formulas:

    u(t) = (1 - E1)^{-1} * int_0^{2pi} exp(-i lam int_{t-s}^{t} c) f(t-s) ds
    u(t) = (E2 - 1)^{-1} * int_0^{2pi} exp(+i lam int_{t}^{t+s} c) f(t+s) ds

with E1 = exp(-2 pi i lam c0), E2 = exp(+2 pi i lam c0).  Writing
int c = c0*s + C(t) - C(t-s) with C the pinned primitive of the oscillating
part, and expanding G(r) = exp(i lam C(r)) f(r) in Fourier modes, the inner
s-integral is elementary per mode:

    u(t) = pref * intfac * exp(-i lam C(t)) * sum_k Ghat_k e^{ikt} / (i (lam c0 + k))

where (pref, intfac) = ((1-E1)^{-1}, 1-E1) for the first formula and
((E2-1)^{-1}, E2-1) for the second.  The s-integral is thus evaluated in
closed form (the integrand is *not* periodic in s, so a naive trapezoid rule
in s would be wrong by O(1); see the quadrature notes in the tests).  Formula
selection follows the sign rule: the first formula when lam*b0 <= 0, the
second when lam*b0 >= 0 (b0 = Im c0), which keeps every exponential bounded.

The gauge factor exp(+-i lam C(t)) grows like exp(|lam| osc(Im C)), and the
split multiplies roundoff by that factor.  When |lam|*osc(Im C) exceeds a
small budget the solver switches to an equivalent Fourier collocation system

    i k uhat_k + i lam (chat * uhat)_k = fhat_k      (* = circular convolution)

which is solved densely and is exact on the grid up to linear-algebra
roundoff.  Every solve is verified by applying the operator back to the
result; if the integral path misses its residual budget the mode is re-solved
by collocation and flagged ``refactored``.
"""

from __future__ import annotations

import csv
import io
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .spectrum import EigenSequence
from .torusfn import MeanDecomposition, TorusFunction

__all__ = [
    "ModeField",
    "ModeSolution",
    "DivisorReport",
    "ResonantMode",
    "AllModesResonant",
    "OverflowClamped",
    "small_divisor",
    "solve_mode",
    "solve_mode_detailed",
    "solve_field",
    "apply_mode",
    "apply_operator",
    "equivalence_check",
]

TOL_RES = 1e-8          # divisor below this -> mode treated as resonant
TOL_ILL = 1e-4          # divisor below this -> solvable but flagged ill-conditioned
CLAMP = 700.0           # |real exponent| cap, the IEEE-double overflow boundary
OSC_BUDGET = 10.0       # max |lam|*osc(Im C) for the integral path in auto mode


class ResonantMode(Exception):
    """lam*c0 is (numerically) an integer: the mode equation is not invertible."""

    def __init__(self, lam: float, divisor: float, message: str | None = None):
        self.lam = lam
        self.divisor = divisor
        super().__init__(message or
                         f"resonant mode: lambda={lam}, divisor={divisor:.3e} < {TOL_RES}")


class AllModesResonant(Exception):
    """Every requested mode was resonant — there is nothing to solve."""


class OverflowClamped(UserWarning):
    """A real exponent exceeded the IEEE-double range and was clamped."""


# --------------------------------------------------------------------------- #
# small divisors
# --------------------------------------------------------------------------- #

def _divisor_parts(lam: float, c0: complex, which: int) -> tuple[float, float]:
    """(x, |sin(pi r)|) with x the real exponent of the formula's E-factor and
    r the reduced fractional part of lam*Re(c0)."""
    a0, b0 = c0.real, c0.imag
    x = 2.0 * math.pi * lam * b0
    if which == 2:
        x = -x
    y = lam * a0
    r = y - round(y)  # |r| <= 1/2 up to float error of y itself
    return x, abs(math.sin(math.pi * r))


def _divisor(lam: float, c0: complex, which: int) -> float:
    """|1 - e^{-2 pi i lam c0}| (which=1) or |e^{2 pi i lam c0} - 1| (which=2).

    Computed as sqrt(expm1(x)^2 + 4 e^x sin^2(pi r)) after range reduction,
    accurate even within 1e-15 of a resonance.
    """
    x, s = _divisor_parts(lam, c0, which)
    if x > CLAMP:
        return math.inf
    return math.hypot(math.expm1(x), 2.0 * math.exp(x / 2.0) * s)


def small_divisor(lam: float, c0: complex) -> float:
    """|1 - e^{-2 pi i lam c0}|, the prefactor denominator of the first formula.

    For real c0 this reduces to 2|sin(pi lam c0)| evaluated after reduction to
    the nearest integer, which keeps full accuracy near resonances.
    """
    return _divisor(lam, complex(c0), 1)


def _select_formula(lam: float, b0: float) -> int:
    # first formula iff lam*b0 <= 0 (ties go to the first)
    return 1 if lam * b0 <= 0.0 else 2


# --------------------------------------------------------------------------- #
# the two closed-form integral paths and the collocation path
# --------------------------------------------------------------------------- #

def _exp_factor(z_real: float, z_imag: float) -> tuple[complex, bool]:
    """exp(z) with the real part clamped to +-CLAMP; returns (value, clamped?)."""
    clamped = abs(z_real) > CLAMP
    zr = max(-CLAMP, min(CLAMP, z_real))
    return complex(math.exp(zr) * math.cos(z_imag), math.exp(zr) * math.sin(z_imag)), clamped


def _solve_integral(lam: float, dec: MeanDecomposition, f: TorusFunction,
                    which: int) -> tuple[TorusFunction, bool]:
    """One of the two closed-form formulas; returns (u, clamped_flag)."""
    n = f.n
    c0 = dec.c0
    Ct = dec.tilde_primitive
    # center Im C so the gauge exponent is symmetric around 0
    im = Ct.samples.imag
    mid = 0.5 * (im.max() + im.min())
    Cc = Ct.samples - 1j * mid

    gauge = np.exp(1j * lam * Cc)             # e^{+i lam C(t)}
    G = np.fft.fft(gauge * f.samples) / n     # Ghat_k
    k = np.fft.fftfreq(n, d=1.0 / n)          # integers; slot n/2 holds -n/2
    core = G / (1j * (lam * c0 + k))
    core[n // 2] = 0.0                        # Nyquist convention matches derivative()

    if which == 1:
        E1, clamped = _exp_factor(2.0 * math.pi * lam * c0.imag,
                                  -2.0 * math.pi * lam * c0.real)
        pref, intfac = 1.0 / (1.0 - E1), (1.0 - E1)
    else:
        E2, clamped = _exp_factor(-2.0 * math.pi * lam * c0.imag,
                                  2.0 * math.pi * lam * c0.real)
        pref, intfac = 1.0 / (E2 - 1.0), (E2 - 1.0)

    synth = np.fft.ifft(core) * n             # sum_k core_k e^{ikt} on the grid
    u = (pref * intfac) * np.exp(-1j * lam * Cc) * synth
    return TorusFunction(u), clamped


def _solve_collocation(lam: float, c: TorusFunction, f: TorusFunction) -> TorusFunction:
    """Dense Fourier collocation: exact on the grid up to solver roundoff."""
    n = f.n
    k = np.fft.fftfreq(n, d=1.0 / n)
    k[n // 2] = 0.0                           # same Nyquist rule as derivative()
    idx = np.arange(n)
    conv = c.coeffs[(idx[:, None] - idx[None, :]) % n]
    A = np.diag(1j * k) + 1j * lam * conv
    try:
        uhat = np.linalg.solve(A, f.coeffs)
    except np.linalg.LinAlgError as exc:  # exactly singular: true resonance
        raise ResonantMode(lam, 0.0, f"collocation matrix singular for lambda={lam}") from exc
    return TorusFunction.from_coeffs(uhat)


# --------------------------------------------------------------------------- #
# public solver API
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class ModeSolution:
    """solve_mode output plus its audit trail."""

    u: TorusFunction
    lam: float
    divisor: float
    formula: str            # "solu1" | "solu2" | "fourier"
    residual: float
    residual_budget: float
    ill_conditioned: bool = False
    clamped: bool = False
    refactored: bool = False


def apply_mode(lam: float, c: TorusFunction, u: TorusFunction) -> TorusFunction:
    """f = u' + i*lam*c*u (spectral derivative, pointwise product)."""
    if c.n != u.n:
        c = c.resample(u.n)
    return u.derivative() + (1j * lam) * c * u


def solve_mode_detailed(lam: float, c: TorusFunction, f: TorusFunction, *,
                        dec: MeanDecomposition | None = None,
                        formula: str | int = "auto",
                        tol_res: float = TOL_RES) -> ModeSolution:
    """Solve u' + i*lam*c*u = f; returns the solution with its audit record.

    ``formula`` is "auto" (sign rule + stability budget), 1 or 2 (force an
    integral formula), or "fourier" (force collocation).  Every path is
    residual-verified; in auto mode an integral solve that misses its budget
    is redone by collocation and flagged.
    """
    if c.n != f.n:
        c = c.resample(f.n)
    if dec is None:
        dec = c.decompose_mean()
    c0 = dec.c0

    which = _select_formula(lam, c0.imag)
    divisor = _divisor(lam, c0, which)
    if divisor < tol_res:
        raise ResonantMode(lam, divisor)
    ill = divisor < TOL_ILL

    budget = 1e-8 * (1.0 + f.sup_norm() / divisor)

    osc = float(np.ptp(dec.tilde_primitive.samples.imag))
    use_integral = abs(lam) * osc <= OSC_BUDGET
    clamped = False
    refactored = False

    if formula == "fourier":
        u = _solve_collocation(lam, c, f)
        name = "fourier"
    elif formula in (1, 2):
        which = int(formula)
        divisor = _divisor(lam, c0, which)
        if divisor < tol_res:
            raise ResonantMode(lam, divisor)
        u, clamped = _solve_integral(lam, dec, f, which)
        if clamped:
            warnings.warn(f"exponent clamped at +-{CLAMP} for lambda={lam}", OverflowClamped)
        name = f"solu{which}"
    elif formula == "auto":
        if use_integral:
            u, clamped = _solve_integral(lam, dec, f, which)
            name = f"solu{which}"
            if clamped:  # cannot happen on the selected side; defensive
                warnings.warn(f"exponent clamped for lambda={lam}", OverflowClamped)
        else:
            u = _solve_collocation(lam, c, f)
            name = "fourier"
    else:
        raise ValueError(f"formula must be 'auto', 1, 2 or 'fourier', got {formula!r}")

    residual = (apply_mode(lam, c, u) - f).sup_norm()
    if formula == "auto" and name != "fourier" and residual > budget:
        u = _solve_collocation(lam, c, f)
        name = "fourier"
        refactored = True
        residual = (apply_mode(lam, c, u) - f).sup_norm()

    return ModeSolution(u=u, lam=lam, divisor=divisor, formula=name,
                        residual=residual, residual_budget=budget,
                        ill_conditioned=ill, clamped=clamped, refactored=refactored)


def solve_mode(lam: float, c: TorusFunction, f: TorusFunction, *,
               formula: str | int = "auto", tol_res: float = TOL_RES) -> TorusFunction:
    """The unique periodic solution of u' + i*lam*c*u = f (see solve_mode_detailed)."""
    return solve_mode_detailed(lam, c, f, formula=formula, tol_res=tol_res).u


# --------------------------------------------------------------------------- #
# mode fields
# --------------------------------------------------------------------------- #

class ModeField:
    """A truncated eigenfunction expansion: entry j is u_j(t) (or None).

    ``None`` marks a mode left undefined — solve_field uses it for resonant
    modes, matching the finite exceptional set of the theory.  All defined
    entries live on one common grid.
    """

    def __init__(self, entries: list[TorusFunction | None], eigs: EigenSequence):
        if len(entries) > eigs.J:
            raise ValueError(f"{len(entries)} entries but eigensequence holds {eigs.J}")
        if not entries:
            raise ValueError("empty mode field")
        sizes = {e.n for e in entries if e is not None}
        if len(sizes) > 1:
            raise ValueError(f"entries live on different grids: {sorted(sizes)}")
        self.entries = list(entries)
        self.eigs = eigs

    @property
    def J(self) -> int:
        return len(self.entries)

    @property
    def n(self) -> int:
        for e in self.entries:
            if e is not None:
                return e.n
        raise ValueError("all entries undefined")

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, j: int) -> TorusFunction | None:
        return self.entries[j]

    @classmethod
    def zeros(cls, eigs: EigenSequence, J: int, n: int = 256) -> "ModeField":
        return cls([TorusFunction.zero(n) for _ in range(J)], eigs)

    @classmethod
    def single_mode(cls, eigs: EigenSequence, j: int, fn: TorusFunction,
                    J: int | None = None) -> "ModeField":
        J = eigs.J if J is None else J
        entries: list[TorusFunction | None] = [TorusFunction.zero(fn.n) for _ in range(J)]
        entries[j] = fn
        return cls(entries, eigs)

    def defined(self) -> list[int]:
        return [j for j, e in enumerate(self.entries) if e is not None]

    def sup_norms(self) -> np.ndarray:
        """sup_t |u_j(t)| per mode; NaN where the mode is undefined."""
        return np.array([np.nan if e is None else e.sup_norm() for e in self.entries])

    def derivative(self) -> "ModeField":
        return ModeField([None if e is None else e.derivative() for e in self.entries],
                         self.eigs)

    def map(self, fn) -> "ModeField":
        return ModeField([None if e is None else fn(e) for e in self.entries], self.eigs)

    # ---- CSV interchange: long format, one row per (mode, grid point) ---- #

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["j", "t", "re", "im"])
        for j, e in enumerate(self.entries):
            if e is None:
                continue
            for t, z in zip(e.grid, e.samples):
                w.writerow([j, repr(float(t)), repr(float(z.real)), repr(float(z.imag))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, eigs: EigenSequence, J: int | None = None) -> "ModeField":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or [h.strip() for h in rows[0]] != ["j", "t", "re", "im"]:
            raise ValueError("mode-field CSV must have header j,t,re,im")
        per_mode: dict[int, list[complex]] = {}
        for js, _, re_s, im_s in rows[1:]:
            per_mode.setdefault(int(js), []).append(complex(float(re_s), float(im_s)))
        if not per_mode:
            raise ValueError("mode-field CSV holds no data rows")
        J = J if J is not None else max(per_mode) + 1
        entries: list[TorusFunction | None] = [None] * J
        for j, vals in per_mode.items():
            entries[j] = TorusFunction(vals)
        return cls(entries, eigs)


def apply_operator(c: TorusFunction, u: ModeField) -> ModeField:
    """f_j = u_j' + i*lam_j*c*u_j for every defined mode."""
    lam = u.eigs.lambdas
    out: list[TorusFunction | None] = []
    for j, e in enumerate(u.entries):
        out.append(None if e is None else apply_mode(float(lam[j]), c, e))
    return ModeField(out, u.eigs)


# --------------------------------------------------------------------------- #
# whole-field solve with divisor report
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class DivisorRow:
    j: int
    lam: float
    divisor: float
    resonant: bool
    formula: str = ""
    residual: float = float("nan")
    ill_conditioned: bool = False
    refactored: bool = False


@dataclass
class DivisorReport:
    rows: list[DivisorRow] = field(default_factory=list)

    def resonant_indices(self) -> list[int]:
        return [r.j for r in self.rows if r.resonant]

    def max_residual(self) -> float:
        vals = [r.residual for r in self.rows if not r.resonant]
        return max(vals) if vals else float("nan")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["j", "lambda", "divisor", "resonant"])
        for r in self.rows:
            w.writerow([r.j, repr(float(r.lam)), repr(float(r.divisor)),
                        "true" if r.resonant else "false"])
        return buf.getvalue()


def _thread_count() -> int:
    raw = os.environ.get("HYPOTORUS_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def solve_field(c: TorusFunction, f: ModeField, *, formula: str | int = "auto",
                tol_res: float = TOL_RES) -> tuple[ModeField, DivisorReport]:
    """Solve every defined mode of f; resonant modes stay undefined (None).

    Raises AllModesResonant when no mode at all could be solved.  Modes are
    independent, so they may be solved concurrently (HYPOTORUS_THREADS caps
    the pool); results do not depend on the schedule.
    """
    if c.n != f.n:
        c = c.resample(f.n)
    dec = c.decompose_mean()
    lam = f.eigs.lambdas

    def one(j: int) -> tuple[TorusFunction | None, DivisorRow | None]:
        fj = f.entries[j]
        if fj is None:
            return None, None  # undefined input mode: nothing to solve or report
        try:
            sol = solve_mode_detailed(float(lam[j]), c, fj, dec=dec,
                                      formula=formula, tol_res=tol_res)
        except ResonantMode as exc:
            return None, DivisorRow(j, float(lam[j]), exc.divisor, True)
        return sol.u, DivisorRow(j, float(lam[j]), sol.divisor, False, sol.formula,
                                 sol.residual, sol.ill_conditioned, sol.refactored)

    js = list(range(f.J))
    workers = _thread_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, js))
    else:
        results = [one(j) for j in js]

    entries = [r[0] for r in results]
    report = DivisorReport([r[1] for r in results if r[1] is not None])
    if all(e is None for e in entries):
        raise AllModesResonant(
            f"all {f.J} modes resonant (e.g. lambda*c0 in Z for every mode)")
    return ModeField(entries, f.eigs), report


# --------------------------------------------------------------------------- #
# formula equivalence
# --------------------------------------------------------------------------- #

def equivalence_check(lam: float, c: TorusFunction, f: TorusFunction) -> float:
    """sup-norm gap between the two closed-form formulas on one instance.

    Both formulas are forced (no collocation, no refactoring), so the result
    measures exactly the analytic equivalence of the two representations.
    Raises ValueError when either formula would need exponent clamping, and
    ResonantMode on resonance.
    """
    dec = c.resample(f.n).decompose_mean() if c.n != f.n else c.decompose_mean()
    x1, _ = _divisor_parts(lam, dec.c0, 1)
    if abs(x1) > CLAMP:
        raise ValueError(f"|2 pi lam b0| = {abs(x1):.1f} > {CLAMP}: formulas not comparable")
    s1 = solve_mode_detailed(lam, c, f, formula=1)
    s2 = solve_mode_detailed(lam, c, f, formula=2)
    return (s1.u - s2.u).sup_norm()
