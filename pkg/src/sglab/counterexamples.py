"""Explicit counterexamples for a Liouville frequency alpha and lambda_j = j.

* Hypoellipticity: u_{j_k} = exp(-i tau_k t) and f_{j_k} = (alpha j_k - tau_k) exp(-i tau_k t)
  solve D_t u + alpha P u = f mode by mode.  f decays faster than any power
  of j, u does not decay at all.
* Solvability: f_{j_l} = j_l^{l/2} e^{l/2} |tau_l - alpha j_l| exp(-i tau_l t) is
  rapidly decreasing, yet the only candidate solution has coefficients of
  size j_l^{l/2} e^{l/2}.  Pairing it with
  psi(t) = (2 pi)^-1 sum_l e^{-l/4} exp(i tau_l t) gives j_l^{l/2} e^{l/4},
  which beats every power of lambda_{j_l}.

The frequencies tau are far too large for a time grid, so the modes are
kept symbolically (see :class:`~sglab.classify.SparseField`).
"""

from dataclasses import dataclass
from fractions import Fraction
from math import factorial, log

import numpy as np

from .classify import SparseField, SparseMode, decay_classify, fprime_membership
from .diophantine import (LN10_HIGH, LN10_LOW, MAX_DEPTH, FailingSubsequence, LiouvilleNumber,
                          SymbolicWitness, gap_below, liouville_witness)
from .errors import CertificationError, ParameterError
from .evolution import solve_mode_fourier

LN10 = log(10.0)


@dataclass(frozen=True)
class AffineAlpha:
    """c0 + c1 * alpha with exact rational coefficients."""

    c0: Fraction = Fraction(0)
    c1: Fraction = Fraction(0)

    def __add__(self, other):
        other = _affine(other)
        return AffineAlpha(self.c0 + other.c0, self.c1 + other.c1)

    def __sub__(self, other):
        other = _affine(other)
        return AffineAlpha(self.c0 - other.c0, self.c1 - other.c1)

    def __mul__(self, scalar):
        scalar = Fraction(scalar)
        return AffineAlpha(self.c0 * scalar, self.c1 * scalar)

    __rmul__ = __mul__

    def is_zero(self):
        return self.c0 == 0 and self.c1 == 0

    def bounds(self, interval):
        lo, hi = interval
        a, b = self.c0 + self.c1 * lo, self.c0 + self.c1 * hi
        return min(a, b), max(a, b)


ALPHA = AffineAlpha(Fraction(0), Fraction(1))


def _affine(x):
    return x if isinstance(x, AffineAlpha) else AffineAlpha(Fraction(x), Fraction(0))


@dataclass(frozen=True)
class HypoellipticityCounterexample:
    u: SparseField
    f: SparseField
    residuals: tuple            # AffineAlpha per mode, all exactly zero
    unit_modulus_defect: float  # max ||u(t_s)| - 1| over the sample grid
    gap_checks: tuple           # exact gap_k <= j_k^-k per entry
    f_report: object
    u_report: object

    @property
    def exact(self):
        return all(r.is_zero() for r in self.residuals)


def counterexample_hypoellipticity(witnesses, alpha, T=64, M_max=3):
    """Build u, f from a failing subsequence and verify Lu = f mode by mode."""
    if isinstance(alpha, (int, Fraction, float)):
        raise CertificationError(
            f"alpha={alpha} is rational or inexact: no certified failing subsequence exists")
    if not isinstance(witnesses, FailingSubsequence) or not witnesses.entries:
        raise ParameterError("need a non-empty failing subsequence")
    if not isinstance(alpha, LiouvilleNumber):
        raise ParameterError("the hypoellipticity counterexample needs a Liouville alpha")
    interval = alpha.interval(MAX_DEPTH)
    u_modes, f_modes, residuals, checks = [], [], [], []
    s = np.arange(T)
    defect = 0.0
    for e in witnesses.entries:
        k = -e.tau
        lam = Fraction(e.j)
        f_amp = ALPHA * lam - e.tau               # alpha j - tau, exactly
        u_amp = AffineAlpha(Fraction(1))
        # (D_t + alpha lambda) u = (k + alpha lambda) u on a single frequency
        residuals.append((ALPHA * lam + k) * 1 - f_amp)
        lo, hi = f_amp.bounds(interval)
        assert lo > 0, "gap must be certified non-zero"
        checks.append(hi <= Fraction(1, e.j**e.k))
        # |exp(-i tau t_s)| with the phase reduced exactly mod 2 pi
        phase = 2.0 * np.pi * np.array([(e.tau * int(v)) % T for v in s], dtype=float) / T
        defect = max(defect, float(np.max(np.abs(np.abs(np.exp(-1j * phase)) - 1.0))))
        log_lam = log(e.j)
        log_k = log(e.tau) if e.tau else -np.inf
        label = str(e.j)
        u_modes.append(SparseMode(label, log_lam, 0.0, k, log_k, u_amp))
        f_modes.append(SparseMode(label, log_lam, _log_fraction(hi), k, log_k, f_amp))
    u, f = SparseField(tuple(u_modes)), SparseField(tuple(f_modes))
    n = len(witnesses.entries)
    f_report = u_report = None
    if n >= 2:
        f_report = decay_classify(f, gamma_list=(0,), M_max=min(n, M_max), min_modes=2)
        u_report = decay_classify(u, gamma_list=(0,), M_max=min(n, M_max), min_modes=2)
    return HypoellipticityCounterexample(u, f, tuple(residuals), defect, tuple(checks), f_report, u_report)


def _log_fraction(x):
    x = Fraction(x)
    return log(x.numerator) - log(x.denominator)


def materialized_check(example, grid, alpha_value):
    """Dense verification for examples whose frequencies fit on ``grid``.

    Solves each materialised f mode by Fourier division and compares with u.
    """
    u = example.u.materialize(grid, amplitudes=[1.0] * len(example.u))
    f_amps = [float(m.amplitude.c0 + m.amplitude.c1 * Fraction(alpha_value)) for m in example.f.modes]
    f = example.f.materialize(grid, amplitudes=f_amps)
    worst = 0.0
    for i, m in enumerate(example.u.modes):
        lam = float(np.exp(m.log_lambda))
        uhat = solve_mode_fourier(f.spectrum[i], lam, float(alpha_value), grid.freqs)
        worst = max(worst, float(np.max(np.abs(uhat - u.spectrum[i]))))
    return worst


def solvability_schedule(L_max, start_level=1):
    """Levels n_1 < n_2 < ... with gap(n_l) < j^{-l} e^{-l} certified exactly, j = 10^{n_l!}."""
    if int(L_max) != L_max or L_max < 1:
        raise ParameterError(f"L_max must be a positive integer, got {L_max}")
    out, n = [], start_level
    for ell in range(1, int(L_max) + 1):
        while not gap_below(liouville_witness(n), ell, ell):
            n += 1
        out.append(liouville_witness(n))
        n += 1
    return out


@dataclass(frozen=True)
class CertificateRow:
    ell: int
    M: int
    log_value: float     # log(lambda^-M j^{l/2} e^{l/4})


@dataclass(frozen=True)
class SolvabilityCounterexample:
    f: SparseField
    u: SparseField
    schedule: tuple
    certificate: tuple
    increasing: dict          # M -> exact monotonicity for l > 2M
    f_report: object
    u_growth: object
    admissible: bool          # f vanishes on every resonant mode

    def values(self, M):
        return [r.log_value for r in self.certificate if r.M == M]


def _certified_step(w_a, w_b, ell, M):
    """Exact lower bound > 0 for value(l+1) - value(l), value = (l/2 - M) n! ln10 + l/4."""
    a = (Fraction(ell + 1, 2) - M) * w_b.log10_j
    b = (Fraction(ell, 2) - M) * w_a.log10_j
    low = (a * LN10_LOW if a >= 0 else a * LN10_HIGH) - (b * LN10_HIGH if b >= 0 else b * LN10_LOW)
    return low + Fraction(1, 4) > 0


def counterexample_solvability(alpha, schedule=None, L_max=12, M_max=5, decay_M=3, gamma_list=(0, 1, 2)):
    """f in F and in E with no solution in F'; see the module docstring."""
    if isinstance(alpha, (int, Fraction, float)):
        raise CertificationError(
            f"alpha={alpha} is rational or inexact: non-zero gaps stay bounded below, "
            "so no schedule with gap_l < j_l^-l e^-l exists")
    if not isinstance(alpha, LiouvilleNumber):
        raise ParameterError("alpha must be a Liouville constant")
    schedule = list(schedule) if schedule is not None else solvability_schedule(L_max)
    if not schedule:
        raise ParameterError("empty witness schedule")
    for ell, w in enumerate(schedule, start=1):
        if not isinstance(w, SymbolicWitness) or not gap_below(w, ell, ell):
            raise CertificationError(f"witness {ell} violates 0 < gap < j^-{ell} e^-{ell}")
    for a, b in zip(schedule, schedule[1:]):
        if b.level <= a.level:
            raise CertificationError("witness levels must increase")

    log_alpha = log(float(alpha.value))
    f_modes, u_modes = [], []
    for ell, w in enumerate(schedule, start=1):
        log_j = w.log10_j * LN10
        log_gap = float(w.log10_gap_high) * LN10
        tau = w.tau
        log_k = log_j + log_alpha
        label = f"10^{w.log10_j}"
        f_modes.append(SparseMode(label, log_j, ell / 2 * log_j + ell / 2 + log_gap, None if tau is None else -tau, log_k))
        u_modes.append(SparseMode(label, log_j, ell / 2 * log_j + ell / 2, None if tau is None else -tau, log_k))
    f, u = SparseField(tuple(f_modes)), SparseField(tuple(u_modes))

    rows, increasing = [], {}
    for M in range(int(M_max) + 1):
        for ell, w in enumerate(schedule, start=1):
            log_j = w.log10_j * LN10
            rows.append(CertificateRow(ell, M, (ell / 2 - M) * log_j + ell / 4))
        steps = [_certified_step(schedule[i], schedule[i + 1], i + 1, M)
                 for i in range(len(schedule) - 1) if i + 1 > 2 * M]
        increasing[M] = bool(steps) and all(steps)

    n = len(schedule)
    f_report = decay_classify(f, gamma_list=gamma_list, M_max=decay_M, min_modes=min(n, 10))
    u_growth = fprime_membership(u, min_modes=min(n, 10))
    # every populated mode has a certified non-zero gap, so none is resonant
    admissible = all(w.log10_gap_low > -np.inf for w in schedule)
    return SolvabilityCounterexample(f, u, tuple(schedule), tuple(rows), increasing, f_report, u_growth,
                                     admissible)
