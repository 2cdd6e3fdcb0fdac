"""Mode-by-mode solver for D_t u + omega P u = f on the circle times the line.

Expanding u and f in the eigenbasis of P reduces the problem to the scalar
periodic ODEs

    D_t u_j + omega lambda_j u_j = f_j,    D_t = -i d/dt,

one per mode.  Time is sampled on T equispaced nodes of [0, 2 pi) and every
track is carried together with its discrete Fourier coefficients

    fhat_k = (1/T) sum_s f(t_s) exp(-i k t_s),    k = -T/2 + 1, ..., T/2,

so that f(t_s) = sum_k fhat_k exp(i k t_s) and D_t acts as multiplication by k.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from math import lgamma

import numpy as np

from .diophantine import ModelSequence, small_divisor_values
from .errors import (AdmissibilityError, BandError, NumericalError, ParameterError,
                     RangeError, ResonanceError)
from .spectral import EigenDecomposition

RESONANCE_TOL = 1e-12
DIVISOR_FLOOR = 1e-30
RESIDUAL_FACTOR = 1e-8
METHODS = ("fourier-division", "quadrature-1", "quadrature-2", "resonant-integral")


@dataclass(frozen=True)
class TimeGrid:
    T: int

    def __post_init__(self):
        if int(self.T) != self.T or self.T < 8 or self.T % 2:
            raise ParameterError(f"T must be an even integer >= 8, got {self.T}")

    @property
    def nodes(self):
        return 2.0 * np.pi * np.arange(self.T) / self.T

    @property
    def freqs(self):
        """Integer frequencies in FFT storage order, Nyquist stored as +T/2."""
        k = np.fft.fftfreq(self.T, 1.0 / self.T).round().astype(np.int64)
        k[k == -self.T // 2] = self.T // 2
        return k

    def index(self, k):
        """Storage position of frequency k, or None when outside the band."""
        if not -self.T // 2 < k <= self.T // 2:
            return None
        return int(k % self.T)


def time_transform(values, direction="forward"):
    """Discrete Fourier transform along the last axis with the 1/T convention."""
    values = np.asarray(values, dtype=complex)
    T = values.shape[-1]
    if T % 2:
        raise ParameterError(f"track length must be even, got {T}")
    if direction == "forward":
        return np.fft.fft(values, axis=-1) / T
    if direction == "inverse":
        return np.fft.ifft(values, axis=-1) * T
    raise ParameterError(f"direction must be 'forward' or 'inverse', got {direction!r}")


@dataclass(frozen=True, eq=False)
class CoefficientField:
    """Tracks f_j(t_s) (J x T) and their spectra; ``source`` says which was given."""

    grid: TimeGrid
    values: np.ndarray
    spectrum: np.ndarray
    source: str

    @classmethod
    def from_time(cls, values, grid=None):
        values = np.atleast_2d(np.asarray(values, dtype=complex))
        grid = grid or TimeGrid(values.shape[1])
        if values.shape[1] != grid.T:
            raise ParameterError(f"tracks have {values.shape[1]} samples, grid has {grid.T}")
        return cls(grid, _frozen(values), _frozen(time_transform(values)), "time")

    @classmethod
    def from_spectrum(cls, spectrum, grid=None):
        spectrum = np.atleast_2d(np.asarray(spectrum, dtype=complex))
        grid = grid or TimeGrid(spectrum.shape[1])
        if spectrum.shape[1] != grid.T:
            raise ParameterError(f"spectra have {spectrum.shape[1]} entries, grid has {grid.T}")
        return cls(grid, _frozen(time_transform(spectrum, "inverse")), _frozen(spectrum), "frequency")

    @classmethod
    def zeros(cls, modes, grid):
        return cls.from_spectrum(np.zeros((modes, grid.T), complex), grid)

    @property
    def modes(self):
        return self.values.shape[0]

    def derivative_spectrum(self, gamma):
        """Spectrum of d^gamma/dt^gamma f_j, i.e. (ik)^gamma fhat_k."""
        return (1j * self.grid.freqs) ** gamma * self.spectrum

    def sup_derivative(self, gamma):
        """sup over the grid of |d^gamma f_j / dt^gamma|, per mode."""
        if gamma == 0:
            return np.max(np.abs(self.values), axis=1)
        return np.max(np.abs(time_transform(self.derivative_spectrum(gamma), "inverse")), axis=1)

    def norms(self):
        """l2 norm of each spectrum (RMS of the time track)."""
        return np.linalg.norm(self.spectrum, axis=1)


def _frozen(a):
    a = np.array(a)
    a.flags.writeable = False
    return a


def _lambdas(eig, modes):
    if isinstance(eig, EigenDecomposition):
        if modes > eig.trusted_count:
            raise RangeError(f"{modes} modes requested but only {eig.trusted_count} trusted eigenpairs exist")
        return np.array(eig.eigenvalues[:modes])
    if isinstance(eig, ModelSequence):
        return eig.values(1, modes)
    lam = np.asarray(eig, dtype=float)
    if lam.shape[0] < modes:
        raise RangeError(f"{modes} modes requested but only {lam.shape[0]} eigenvalues given")
    return lam[:modes]


def _exact_lambdas(eig, modes):
    if isinstance(eig, ModelSequence) and eig.exact:
        return [eig.exact_value(j) for j in range(1, modes + 1)]
    if isinstance(eig, (list, tuple)) and all(isinstance(v, (int, Fraction)) for v in eig):
        return [Fraction(v) for v in eig[:modes]]
    return None


@dataclass(frozen=True, eq=False)
class EvolutionProblem:
    omega: complex
    eig: object
    rhs: CoefficientField
    tol: float = RESONANCE_TOL

    def __post_init__(self):
        if not self.tol >= 0:
            raise ParameterError(f"tolerance must be non-negative, got {self.tol}")
        _lambdas(self.eig, self.rhs.modes)

    @property
    def lambdas(self):
        return _lambdas(self.eig, self.rhs.modes)

    @property
    def grid(self):
        return self.rhs.grid


def resonant_set(problem):
    """Modes j (1-based) with omega lambda_j in Z, paired with k* = -omega lambda_j."""
    omega = problem.omega
    lam = problem.lambdas
    exact = _exact_lambdas(problem.eig, problem.rhs.modes)
    if exact is not None and isinstance(omega, (int, Fraction)):
        out = []
        for j, l in enumerate(exact, start=1):
            z = Fraction(omega) * l
            if z.denominator == 1:
                out.append((j, -int(z)))
        return out
    omega = complex(omega)
    if abs(omega.imag) * float(np.min(lam)) > problem.tol:
        return []
    z = omega * lam
    near = np.rint(z.real)
    hit = (np.abs(z.imag) <= problem.tol) & (np.abs(z.real - near) <= problem.tol)
    return [(int(j) + 1, -int(near[j])) for j in np.flatnonzero(hit)]


@dataclass(frozen=True)
class Admissibility:
    j: int
    k_star: int
    residual: float
    norm: float
    admissible: bool


def _admissibility_row(spectrum, grid, j, k_star, tol):
    norm = float(np.linalg.norm(spectrum))
    pos = grid.index(k_star)
    residual = 0.0 if pos is None else float(abs(spectrum[pos]))
    return Admissibility(j, k_star, residual, norm, residual <= tol * norm)


def admissibility_check(problem, resonant=None):
    """|fhat_{j,k*}| for every resonant mode; admissible iff it is <= tol * ||f_j||."""
    resonant = resonant_set(problem) if resonant is None else resonant
    spec = problem.rhs.spectrum
    return [_admissibility_row(spec[j - 1], problem.grid, j, k, problem.tol) for j, k in resonant]


def ode_residual(uhat, fhat, lam, omega, freqs):
    """||(k + omega lambda) uhat - fhat||_2 in frequency space."""
    return float(np.linalg.norm((freqs + complex(omega) * lam) * uhat - fhat))


def solve_mode_fourier(fhat, lam, omega, freqs, tol=RESONANCE_TOL, j=None):
    """uhat_k = fhat_k / (k + omega lambda); resonant entries with negligible data set to 0."""
    fhat = np.asarray(fhat, dtype=complex)
    divisor = np.asarray(freqs) + complex(omega) * lam
    small = np.abs(divisor) <= tol
    uhat = np.zeros_like(fhat)
    if small.any():
        scale = tol * max(float(np.linalg.norm(fhat)), 1.0)
        bad = small & (np.abs(fhat) > scale)
        if bad.any():
            k = int(np.asarray(freqs)[np.flatnonzero(bad)[0]])
            raise ResonanceError(f"mode {j}: divisor k + omega*lambda vanishes at k={k} with non-zero data",
                                 j=j, k=k)
    ok = ~small
    uhat[ok] = fhat[ok] / divisor[ok]
    return uhat


def _kernel_integral(z, sign):
    """int_0^{2pi} exp(sign * i z s) ds, stable near z = 0."""
    z = np.asarray(z, dtype=complex)
    w = sign * 2j * np.pi * z
    out = np.empty_like(z)
    tiny = np.abs(w) < 1e-8
    out[~tiny] = np.expm1(w[~tiny]) / (sign * 1j * z[~tiny])
    out[tiny] = 2.0 * np.pi * (1.0 + w[tiny] / 2.0)
    return out


def quadrature_weights(lam, omega, grid, variant):
    """Circulant weights W_d with u(t_r) = sum_q W_{(r - q) mod T} f(t_q).

    The kernel exp(-+ i lambda omega s) is integrated exactly against each
    trigonometric basis function of the interpolant of f (product
    integration); a plain trapezoid rule would not be spectrally accurate
    because the kernel is not periodic on [0, 2 pi).
    """
    c = complex(omega) * lam
    k = grid.freqs.astype(float)
    if variant == 1:
        divisor = -np.expm1(-2j * np.pi * c)
        integral = _kernel_integral(c + k, -1)     # int e^{-i c s} e^{-i k s} ds
    elif variant == 2:
        divisor = np.expm1(2j * np.pi * c)
        integral = _kernel_integral(c + k, 1)      # int e^{i c s} e^{i k s} ds
    else:
        raise ParameterError(f"variant must be 1 or 2, got {variant}")
    if not abs(divisor) > DIVISOR_FLOOR:
        raise ResonanceError(f"quadrature prefactor divisor {abs(divisor):.3e} below {DIVISOR_FLOOR}")
    multiplier = 1j * integral / divisor
    if not np.all(np.isfinite(multiplier)):
        raise NumericalError(f"quadrature variant {variant} overflows for omega*lambda={c}")
    return time_transform(multiplier, "inverse") / grid.T


def solve_mode_quadrature(f_track, lam, omega, variant=None, grid=None):
    """Time-domain solution by the variant-1 or variant-2 integral formula.

    With ``variant=None`` the variant whose kernel has non-growing modulus on
    [0, 2 pi) is used (variant 1 for Im(omega) <= 0).
    """
    f_track = np.asarray(f_track, dtype=complex)
    grid = grid or TimeGrid(f_track.shape[0])
    if variant is None:
        variant = 1 if complex(omega).imag <= 0 else 2
    w = quadrature_weights(lam, omega, grid, variant)
    T = grid.T
    r = np.arange(T)
    circ = w[(r[:, None] - r[None, :]) % T]
    return circ @ f_track


def solve_mode_resonant(f_track, lam, omega, grid=None, tol=RESONANCE_TOL, j=None):
    """u(t) = i exp(-i c t) int_0^t exp(i c s) f(s) ds with c = omega lambda in Z.

    This is the u(0) = 0 member of the one-parameter family of periodic
    solutions.  Spectrally u = sum_{k != k*} fhat_k (e^{ikt} - e^{-ict})/(c + k).
    """
    f_track = np.asarray(f_track, dtype=complex)
    grid = grid or TimeGrid(f_track.shape[0])
    c = complex(omega) * lam
    k_star = -int(np.rint(c.real))
    fhat = time_transform(f_track)
    row = _admissibility_row(fhat, grid, j, k_star, tol)
    if not row.admissible:
        raise AdmissibilityError(
            f"mode {j}: forcing is not admissible (resonant coefficient {row.residual:.3e} at k={k_star})",
            j=j, residual=row.residual)
    pos = grid.index(k_star)
    if pos is None:
        raise BandError(f"resonant frequency k={k_star} lies outside the grid band; enlarge T")
    freqs = grid.freqs
    divisor = freqs + c
    keep = np.abs(divisor) > tol
    uhat = np.zeros(grid.T, complex)
    uhat[keep] = fhat[keep] / divisor[keep]
    uhat[pos] = -np.sum(uhat[keep])
    return time_transform(uhat, "inverse")


def resonant_periodicity_defect(f_track, lam, omega, grid=None):
    """|u(2 pi) - u(0)| for the integral formula evaluated in closed form at t = 2 pi."""
    f_track = np.asarray(f_track, dtype=complex)
    grid = grid or TimeGrid(f_track.shape[0])
    c = complex(omega) * lam
    fhat = time_transform(f_track)
    z = grid.freqs + c
    # i e^{-2 pi i c} int_0^{2 pi} e^{i (c + k) s} ds fhat_k, summed over k
    return float(abs(1j * np.exp(-2j * np.pi * c) * np.sum(_kernel_integral(z, 1) * fhat)))


@dataclass(frozen=True)
class SolveReport:
    resonant: tuple
    admissibility: tuple
    methods: tuple
    residuals: np.ndarray
    bounds: np.ndarray
    theta_range: tuple
    gamma_range: tuple
    initial_value: str = "u_j(0) = 0 on resonant modes"

    @property
    def admissible(self):
        return all(a.admissible for a in self.admissibility)


def solve(problem, method="fourier"):
    """Solve every mode; non-resonant modes by ``method`` ('fourier', 'quadrature',
    'quadrature-1', 'quadrature-2'), resonant ones by the integral formula."""
    if method not in ("fourier", "quadrature", "quadrature-1", "quadrature-2"):
        raise ParameterError(f"unknown method {method!r}")
    grid, rhs = problem.grid, problem.rhs
    lam = problem.lambdas
    omega = complex(problem.omega)
    freqs = grid.freqs
    resonant = resonant_set(problem)
    admiss = admissibility_check(problem, resonant)
    for row in admiss:
        if not row.admissible:
            raise AdmissibilityError(
                f"mode {row.j}: forcing is not admissible (resonant coefficient "
                f"{row.residual:.3e} at k={row.k_star})", j=row.j, residual=row.residual)
    res_modes = {j for j, _ in resonant}

    uhat = np.zeros_like(rhs.spectrum)
    methods, residuals, bounds = [], [], []
    for j in range(1, rhs.modes + 1):
        fhat, l = rhs.spectrum[j - 1], lam[j - 1]
        if j in res_modes:
            u = solve_mode_resonant(rhs.values[j - 1], l, omega, grid, problem.tol, j)
            uhat[j - 1] = time_transform(u)
            tag = "resonant-integral"
        elif method == "fourier":
            uhat[j - 1] = solve_mode_fourier(fhat, l, omega, freqs, problem.tol, j)
            tag = "fourier-division"
        else:
            variant = {"quadrature-1": 1, "quadrature-2": 2}.get(method)
            if variant is None:
                variant = 1 if omega.imag <= 0 else 2
            u = solve_mode_quadrature(rhs.values[j - 1], l, omega, variant, grid)
            uhat[j - 1] = time_transform(u)
            tag = f"quadrature-{variant}"
        res = ode_residual(uhat[j - 1], fhat, l, omega, freqs)
        bound = RESIDUAL_FACTOR * (1.0 + abs(omega) * l) * float(np.linalg.norm(fhat))
        if res > bound and res > 0:
            raise NumericalError(f"mode {j}: ODE residual {res:.3e} exceeds {bound:.3e}")
        methods.append(tag)
        residuals.append(res)
        bounds.append(bound)

    theta, gamma, _, _ = small_divisor_values(omega, lam)
    report = SolveReport(
        resonant=tuple(resonant), admissibility=tuple(admiss), methods=tuple(methods),
        residuals=np.array(residuals), bounds=np.array(bounds),
        theta_range=(float(np.min(theta)), float(np.max(theta))) if lam.size else (np.nan, np.nan),
        gamma_range=(float(np.min(gamma)), float(np.max(gamma))) if lam.size else (np.nan, np.nan))
    return CoefficientField.from_spectrum(uhat, grid), report


def gevrey_norm_proxy(track, sigma, eta, gamma_max):
    """max_{gamma <= gamma_max} eta^-gamma (gamma!)^-sigma sup_t |d^gamma track|, in log domain."""
    if int(gamma_max) != gamma_max or not 0 <= gamma_max <= 40:
        raise ParameterError(f"gamma_max must be an integer in [0, 40], got {gamma_max}")
    if not sigma > 1 or not eta > 0:
        raise ParameterError("need sigma > 1 and eta > 0")
    spectrum = time_transform(np.asarray(track, dtype=complex))
    # round-off in the FFT would otherwise be amplified by (ik)^gamma
    spectrum[np.abs(spectrum) <= 1e-15 * np.max(np.abs(spectrum), initial=0.0)] = 0.0
    field_ = CoefficientField.from_spectrum(spectrum[None, :])
    best = -np.inf
    for g in range(int(gamma_max) + 1):
        sup = float(field_.sup_derivative(g)[0])
        if sup <= 0:
            continue
        value = np.log(sup) - g * np.log(eta) - sigma * lgamma(g + 1)
        best = max(best, value)
    return float(np.exp(best)) if np.isfinite(best) else 0.0
