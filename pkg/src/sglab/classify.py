"""Decay classification of coefficient fields.

A field is summarised per time-derivative order gamma by the slope of
log sup_t |d^gamma f_j| against log lambda_j.  Fields are either dense
(:class:`~sglab.evolution.CoefficientField`) or sparse single-frequency
fields whose modes are kept in log form, so that amplitudes like 10^-96 or
10^(10^9) never need a float.
"""

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import BandError, InsufficientDataError, ParameterError
from .evolution import CoefficientField, _lambdas

USABLE_FLOOR = 1e-30
NOT_IN_F_SLOPE = -0.5


@dataclass(frozen=True)
class SparseMode:
    """One single-frequency track a * exp(i k t) on mode j.

    ``k`` may be None when the frequency is too large to hold; ``log_abs_k``
    is always available.
    """

    label: str
    log_lambda: float
    log_amplitude: float
    k: int | None
    log_abs_k: float
    amplitude: object = None      # exact amplitude when known (Fraction, AffineAlpha, int)


@dataclass(frozen=True)
class SparseField:
    modes: tuple

    def __len__(self):
        return len(self.modes)

    def log_sup_derivative(self, gamma):
        """log sup_t |d^gamma f| = log|a| + gamma log|k| (-inf when k = 0, gamma > 0)."""
        out = []
        for m in self.modes:
            if gamma == 0:
                out.append(m.log_amplitude)
            elif m.k == 0:
                out.append(-np.inf)
            else:
                out.append(m.log_amplitude + gamma * m.log_abs_k)
        return np.array(out)

    def materialize(self, grid, amplitudes=None):
        """Dense field with one row per mode; refuses frequencies outside the band."""
        rows = np.zeros((len(self.modes), grid.T), complex)
        for i, m in enumerate(self.modes):
            pos = None if m.k is None else grid.index(m.k)
            if pos is None:
                raise BandError(f"mode {m.label}: frequency {m.k if m.k is not None else '~e^%.1f' % m.log_abs_k} "
                                f"does not fit on T={grid.T}; enlarge T")
            a = np.exp(m.log_amplitude) if amplitudes is None else amplitudes[i]
            rows[i, pos] = a
        return CoefficientField.from_spectrum(rows, grid)


@dataclass(frozen=True)
class SlopeRow:
    gamma: int
    slope: float
    intercept: float
    ci_low: float
    ci_high: float
    used: int


@dataclass(frozen=True)
class DecayReport:
    rows: tuple
    M_max: int
    verdict: str

    def slope(self, gamma):
        for r in self.rows:
            if r.gamma == gamma:
                return r.slope
        raise KeyError(gamma)


def _fit(x, y):
    n = x.size
    design = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    if n > 2:
        resid = y - design @ np.array([slope, intercept])
        s2 = float(resid @ resid) / (n - 2)
        sxx = float(np.sum((x - x.mean()) ** 2))
        half = stats.t.ppf(0.975, n - 2) * np.sqrt(s2 / sxx) if sxx > 0 else np.nan
    else:
        half = np.nan
    return float(slope), float(intercept), float(slope - half), float(slope + half)


def _log_data(field, eig, gamma):
    if isinstance(field, SparseField):
        x = np.array([m.log_lambda for m in field.modes])
        y = field.log_sup_derivative(gamma)
        return x, y, np.isfinite(y)
    if not isinstance(field, CoefficientField):
        raise ParameterError("expected a CoefficientField or SparseField")
    lam = _lambdas(eig, field.modes)
    amp = field.sup_derivative(gamma)
    usable = amp > USABLE_FLOOR
    with np.errstate(divide="ignore"):
        return np.log(lam), np.log(amp), usable


def decay_classify(field, eig=None, gamma_list=(0, 1, 2), M_max=3, min_modes=10):
    """Per-gamma decay slopes and a verdict in {in-F, not-in-F, inconclusive}.

    in-F when every slope is <= -M_max, not-in-F when some slope is >= -0.5.
    The 95% interval of each slope is reported but does not enter the verdict.
    """
    if not gamma_list:
        raise ParameterError("gamma_list must not be empty")
    rows = []
    for g in gamma_list:
        x, y, ok = _log_data(field, eig, int(g))
        if ok.sum() < min_modes:
            raise InsufficientDataError(f"gamma={g}: only {int(ok.sum())} usable modes (need {min_modes})")
        slope, intercept, lo, hi = _fit(x[ok], y[ok])
        rows.append(SlopeRow(int(g), slope, intercept, lo, hi, int(ok.sum())))
    slopes = [r.slope for r in rows]
    if any(s >= NOT_IN_F_SLOPE for s in slopes):
        verdict = "not-in-F"
    elif all(s <= -M_max for s in slopes):
        verdict = "in-F"
    else:
        verdict = "inconclusive"
    return DecayReport(tuple(rows), int(M_max), verdict)


@dataclass(frozen=True)
class GrowthReport:
    M_hat: float
    B_hat: float
    residual_rms: float
    local_slopes: np.ndarray
    super_polynomial: bool
    verdict: str


def fprime_membership(field, eig=None, min_modes=10):
    """Fit log sup_t |f_j| = log B + M log lambda_j.

    Growth is flagged super-polynomial when the slopes between consecutive
    modes increase monotonically and spread by more than 1, i.e. no single
    power of lambda_j bounds the data.
    """
    x, y, ok = _log_data(field, eig, 0)
    if ok.sum() < min_modes:
        raise InsufficientDataError(f"only {int(ok.sum())} usable modes (need {min_modes})")
    x, y = x[ok], y[ok]
    order = np.argsort(x, kind="stable")
    x, y = x[order], y[order]
    slope, intercept, _, _ = _fit(x, y)
    rms = float(np.sqrt(np.mean((y - slope * x - intercept) ** 2)))
    dx = np.diff(x)
    local = np.diff(y)[dx > 0] / dx[dx > 0]
    superpoly = bool(local.size >= 2 and np.all(np.diff(local) > 0) and local[-1] - local[0] > 1.0)
    verdict = "super-polynomial" if superpoly else "in-F-prime"
    return GrowthReport(slope, float(np.exp(intercept)) if intercept < 700 else np.inf, rms, local,
                        superpoly, verdict)


def single_frequency_field(log_lambda, log_amplitude, k, labels=None):
    """Sparse field from arrays; k entries must be ints."""
    labels = labels or [str(i + 1) for i in range(len(k))]
    modes = tuple(SparseMode(lab, float(ll), float(la), int(kk), float(np.log(abs(kk))) if kk else -np.inf)
                  for lab, ll, la, kk in zip(labels, log_lambda, log_amplitude, k))
    return SparseField(modes)

