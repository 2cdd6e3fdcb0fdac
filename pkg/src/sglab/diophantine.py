"""Diophantine scans: dist(alpha * lambda_j, Z), small divisors, Liouville witnesses.

Three kinds of ``alpha`` are understood:

* a float (float arithmetic, resonance tolerance ``RESONANCE_TOL``);
* an exact ``Fraction`` or ``int`` (exact integer arithmetic, no tolerance);
* a :class:`LiouvilleNumber`, i.e. the constant sum_k 10^{-k!}.  It is never
  replaced by a rational.  Its true value is only known to lie in an open
  interval with rational endpoints, so every gap comes with exact lower and
  upper bounds.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

import numpy as np

from .errors import ParameterError, RangeError, SizeGuardError

RESONANCE_TOL = 1e-12
DIVISOR_FLOOR = 1e-30
FAIL_THRESHOLD = 1e-12
MAX_DEPTH = 4

# rational bounds used in exact comparisons
INV_E_LOW = Fraction(3678794411714423, 10**16)       # < 1/e
LOG10_2_HIGH = Fraction(30103, 100000)                # > log10(2)
LOG10_E_HIGH = Fraction(4342944820, 10**10)           # > log10(e)
LN10_LOW = Fraction(2302585, 10**6)                   # < ln(10)
LN10_HIGH = Fraction(2302586, 10**6)                  # > ln(10)

GOLDEN = (1.0 + 5.0**0.5) / 2.0


@dataclass(frozen=True)
class LiouvilleNumber:
    """The constant sum_{k>=1} 10^{-k!}, truncated at ``depth`` for display.

    ``value`` is the partial sum with denominator 10^{depth!} and
    ``tail_bound`` = 2 * 10^{-(depth+1)!} bounds the remainder.
    """

    depth: int
    value: Fraction
    tail_bound: Fraction

    def interval(self, depth=None):
        """Open interval (lo, hi) containing the constant, from the depth-n partial sum.

        The remainder after n terms lies strictly between 10^{-(n+1)!} and
        2 * 10^{-(n+1)!}.
        """
        n = self.depth if depth is None else depth
        v = _liouville_partial(n)
        tail = Fraction(1, 10 ** factorial(n + 1))
        return v + tail, v + 2 * tail

    def __float__(self):
        return float(self.value)

    def describe(self):
        return f"liouville(depth={self.depth})"


def _liouville_partial(n):
    den = 10 ** factorial(n)
    return Fraction(sum(10 ** (factorial(n) - factorial(k)) for k in range(1, n + 1)), den)


def liouville_number(depth):
    if int(depth) != depth or depth < 1:
        raise ParameterError(f"depth must be a positive integer, got {depth}")
    if depth > MAX_DEPTH:
        raise SizeGuardError(f"depth {depth} exceeds the exact-arithmetic budget (max {MAX_DEPTH})")
    depth = int(depth)
    return LiouvilleNumber(depth, _liouville_partial(depth), Fraction(2, 10 ** factorial(depth + 1)))


def _round_half_even(num, den):
    """Nearest integer to num/den (den > 0), ties to even."""
    q, r = divmod(num, den)
    twice = 2 * r
    if twice > den or (twice == den and q % 2):
        q += 1
    return q


def nearest_integer_gap(x):
    """(tau, |x - tau|) with tau the nearest integer, ties to even.

    Exact inputs (int, Fraction) give an exact Fraction gap.
    """
    if isinstance(x, (int, Fraction)):
        x = Fraction(x)
        tau = _round_half_even(x.numerator, x.denominator)
        return tau, abs(x - tau)
    x = float(x)
    tau = round(x)
    return int(tau), abs(x - tau)


def describe_alpha(alpha):
    if isinstance(alpha, LiouvilleNumber):
        return alpha.describe()
    if isinstance(alpha, (int, Fraction)):
        return f"rational {Fraction(alpha)}"
    return f"float {float(alpha)!r}"


# ---------------------------------------------------------------- sequences

@dataclass(frozen=True, eq=False)
class ModelSequence:
    """lambda_j for j = 1, 2, ...

    kinds: ``power`` a*j^rho, ``logpower`` a*(j/log(j+1))^rho, ``measured``
    (trusted eigenvalues of a decomposition; indicative only).
    """

    kind: str
    a: float | Fraction = 1
    rho: float = 1
    measured: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in ("power", "logpower", "measured"):
            raise ParameterError(f"unknown sequence kind {self.kind!r}")
        if self.kind == "measured":
            if self.measured is None or np.any(np.asarray(self.measured) <= 0):
                raise ParameterError("measured sequence must be strictly positive")
        elif not self.a > 0:
            raise ParameterError(f"sequence scale must be positive, got {self.a}")

    @classmethod
    def power(cls, a=1, rho=1):
        return cls("power", a, rho)

    @classmethod
    def logpower(cls, a=1, rho=1):
        return cls("logpower", a, rho)

    @classmethod
    def from_eig(cls, eig):
        lam = np.array(eig.eigenvalues[:eig.trusted_count], dtype=float)
        return cls("measured", measured=lam)

    @property
    def indicative(self):
        return self.kind == "measured"

    @property
    def exact(self):
        """True when every lambda_j is an exact rational."""
        return (self.kind == "power" and isinstance(self.a, (int, Fraction))
                and float(self.rho).is_integer() and self.rho >= 0)

    @property
    def limit(self):
        return None if self.kind != "measured" else self.measured.shape[0]

    def values(self, j_lo, j_hi):
        """Float lambda_j for j_lo <= j <= j_hi."""
        if self.limit is not None and j_hi > self.limit:
            raise RangeError(f"measured sequence has only {self.limit} trusted entries, j_max={j_hi}")
        j = np.arange(j_lo, j_hi + 1, dtype=float)
        if self.kind == "power":
            return float(self.a) * j ** self.rho
        if self.kind == "logpower":
            return float(self.a) * (j / np.log(j + 1.0)) ** self.rho
        return np.array(self.measured[j_lo - 1:j_hi])

    def exact_values(self, j_lo, j_hi):
        """Object array of exact lambda_j (ints or Fractions)."""
        if not self.exact:
            raise ParameterError("sequence has no exact representation")
        a = Fraction(self.a)
        j = np.arange(j_lo, j_hi + 1).astype(object)
        powered = j ** int(self.rho)
        return powered * a if a != 1 else powered

    def exact_value(self, j):
        return Fraction(self.a) * j ** int(self.rho)

    def describe(self):
        if self.kind == "measured":
            return f"measured({self.limit} trusted)"
        return f"{self.kind}(a={self.a}, rho={self.rho})"


# ---------------------------------------------------------------- scanning

@dataclass
class _Scan:
    j: np.ndarray
    tau: np.ndarray        # object array of python ints
    gap_low: np.ndarray    # float lower bound on dist(alpha lambda_j, Z)
    gap_high: np.ndarray   # float upper bound on |tau - alpha lambda_j|
    resonant: np.ndarray
    mode: str


def _exact_gap_arrays(num, den):
    """num/den per entry (object ints, den > 0 scalar): tau (half even) and |num - tau den|."""
    q, r = num // den, num % den
    twice = 2 * r
    up = ((twice > den) | ((twice == den) & (q % 2 == 1))).astype(bool)
    tau = q + up.astype(int).astype(object)
    diff = num - tau * den
    return tau, diff


def _scan(alpha, seq, j_lo, j_hi):
    j = np.arange(j_lo, j_hi + 1, dtype=np.int64)
    if isinstance(alpha, LiouvilleNumber):
        if not seq.exact or Fraction(seq.a).denominator != 1:
            raise ParameterError("Liouville scans need an integer-valued power sequence")
        lo, hi = alpha.interval(MAX_DEPTH)
        den = 10 ** factorial(MAX_DEPTH + 1)
        n_lo, n_hi = int(lo * den), int(hi * den)
        lam = seq.exact_values(j_lo, j_hi)
        tau_lo, d_lo = _exact_gap_arrays(lam * n_lo, den)
        d_hi = lam * n_hi - tau_lo * den
        # alpha*lambda lies strictly between lo*lambda and hi*lambda
        pos_lo = (d_lo > 0).astype(bool)
        pos_hi = (d_hi > 0).astype(bool)
        nonzero = (d_lo != 0).astype(bool) & (d_hi != 0).astype(bool)
        same_side = (pos_lo == pos_hi) & nonzero
        abs_lo = np.abs(d_lo).astype(float) / float(den)
        abs_hi = np.abs(d_hi).astype(float) / float(den)
        low = np.where(same_side, np.minimum(abs_lo, abs_hi), 0.0)
        high = np.maximum(abs_lo, abs_hi)
        return _Scan(j, tau_lo, low, high, np.zeros(j.shape, bool), "interval")
    if isinstance(alpha, (int, Fraction)) and seq.exact:
        a, scale = Fraction(alpha), Fraction(seq.a)
        base = np.arange(j_lo, j_hi + 1).astype(object) ** int(seq.rho)
        den = a.denominator * scale.denominator
        tau, diff = _exact_gap_arrays(base * (a.numerator * scale.numerator), den)
        gap = np.abs(diff).astype(float) / den
        return _Scan(j, tau, gap, gap.copy(), (diff == 0).astype(bool), "exact")
    a = float(alpha)
    x = a * seq.values(j_lo, j_hi)
    tau = np.rint(x)
    gap = np.abs(x - tau)
    return _Scan(j, tau.astype(np.int64).astype(object), gap, gap.copy(), gap <= RESONANCE_TOL, "float")


def exact_gap(alpha, seq, j):
    """Exact |tau - alpha lambda_j| for rational alpha (tau, Fraction), or
    (tau, (lower, upper)) Fraction bounds for a Liouville constant."""
    if isinstance(alpha, LiouvilleNumber):
        lo, hi = alpha.interval(MAX_DEPTH)
        lam = seq.exact_value(j)
        tau, _ = nearest_integer_gap(lo * lam)
        a, b = lo * lam - tau, hi * lam - tau
        if (a > 0) != (b > 0) or a == 0 or b == 0:
            return tau, (Fraction(0), max(abs(a), abs(b)))
        return tau, (min(abs(a), abs(b)), max(abs(a), abs(b)))
    if isinstance(alpha, (int, Fraction)) and seq.exact:
        return nearest_integer_gap(Fraction(alpha) * seq.exact_value(j))
    raise ParameterError("exact gaps need a rational or Liouville alpha and an exact sequence")


@dataclass(frozen=True)
class Witness:
    j: int
    tau: int
    gap: float
    epsilon: float | None = None
    scaled: float | None = None       # gap * j^epsilon
    exact: Fraction | None = None     # exact gap, or its exact upper bound
    certified: bool = False


@dataclass(frozen=True)
class DiophantineReport:
    alpha: str
    sequence: str
    condition: str
    j_range: tuple
    epsilons: tuple
    constants: tuple          # C(eps) per epsilon
    witnesses: tuple          # worst witness per epsilon
    resonant: tuple           # (j, tau) pairs
    verdict: str
    indicative: bool = False
    arithmetic: str = "float"

    def constant(self, eps):
        return self.constants[self.epsilons.index(eps)]

    @property
    def label(self):
        return f"{self.verdict} (indicative)" if self.indicative else self.verdict


def _check(alpha, seq, j_max, epsilons, j_min, condition):
    if int(j_max) != j_max or j_max < 10:
        raise ParameterError(f"j_max must be an integer >= 10, got {j_max}")
    if int(j_min) != j_min or not 1 <= j_min <= j_max:
        raise ParameterError(f"j_min must lie in [1, j_max], got {j_min}")
    epsilons = tuple(float(e) for e in epsilons)
    if not epsilons or any(e < 0 for e in epsilons):
        raise ParameterError("epsilons must be a non-empty list of non-negative reals")
    scan = _scan(alpha, seq, int(j_min), int(j_max))
    resonant = tuple((int(j), int(t)) for j, t in zip(scan.j[scan.resonant], scan.tau[scan.resonant]))
    gap_low, gap_high, taus = scan.gap_low, scan.gap_high, scan.tau
    if condition == "B" and scan.resonant.any():
        # tau = alpha lambda_j is excluded; the nearest admissible integer is one step away
        r = scan.resonant
        gap_low = np.where(r, 1.0 - scan.gap_high, scan.gap_low)
        gap_high = np.where(r, 1.0 - scan.gap_low, scan.gap_high)
        taus = scan.tau.copy()
        taus[r] = taus[r] + 1
    jf = scan.j.astype(float)
    constants, witnesses = [], []
    for eps in epsilons:
        scaled_low = gap_low * jf**eps
        i = int(np.argmin(scaled_low))
        constants.append(float(scaled_low[i]))
        j, tau = int(scan.j[i]), int(taus[i])
        exact = None
        if scan.mode != "float":
            _, g = exact_gap(alpha, seq, j)
            exact = g[1] if isinstance(g, tuple) else g
            if scan.resonant[i] and condition == "B":
                exact = 1 - exact
        scaled_high = float(gap_high[i] * j**eps)
        witnesses.append(Witness(j, tau, float(gap_high[i]), eps, scaled_high, exact,
                                 certified=scaled_high < FAIL_THRESHOLD))
    if condition == "A" and resonant:
        verdict = "resonance-dominated"
    else:
        # C(eps) grows with eps, so failure at the largest tested eps means failure for all
        worst = max(range(len(epsilons)), key=lambda k: epsilons[k])
        verdict = "fails-with-witnesses" if witnesses[worst].certified else "holds-on-range"
    return DiophantineReport(
        alpha=describe_alpha(alpha), sequence=seq.describe(), condition=condition,
        j_range=(int(j_min), int(j_max)), epsilons=epsilons, constants=tuple(constants),
        witnesses=tuple(witnesses), resonant=resonant, verdict=verdict,
        indicative=seq.indicative, arithmetic=scan.mode)


def check_condition_A(alpha, seq, j_max, epsilons, j_min=1):
    """Scan inf_j dist(alpha lambda_j, Z) j^eps; resonances dominate the verdict."""
    return _check(alpha, seq, j_max, epsilons, j_min, "A")


def check_condition_B(alpha, seq, j_max, epsilons, j_min=1):
    """As :func:`check_condition_A` with exact resonances excluded from the infimum."""
    return _check(alpha, seq, j_max, epsilons, j_min, "B")


# ---------------------------------------------------------------- continued fractions

def continued_fraction(x, limit=None):
    """Partial quotients of a non-negative rational."""
    x = Fraction(x)
    p, q = x.numerator, x.denominator
    out = []
    while q and (limit is None or len(out) < limit):
        a, r = divmod(p, q)
        out.append(a)
        p, q = q, r
    return out


def convergents(quotients):
    p0, q0, p1, q1 = 0, 1, 1, 0
    out = []
    for a in quotients:
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        out.append((p1, q1))
    return out


def certified_convergents(lo, hi):
    """Convergents shared by every real in the open interval (lo, hi)."""
    a, b = continued_fraction(lo), continued_fraction(hi)
    common = []
    for x, y in zip(a, b):
        if x != y:
            break
        common.append(x)
    # the last quotient of a finite expansion is ambiguous ([..., n] == [..., n-1, 1])
    common = common[:min(len(common), len(a) - 1, len(b) - 1)]
    return convergents(common)


@dataclass(frozen=True)
class SubsequenceEntry:
    k: int
    j: int
    tau: int
    C: Fraction
    gap_low: Fraction
    gap_high: Fraction

    @property
    def bound(self):
        """C_k j_k^{-k}."""
        return self.C / Fraction(self.j) ** self.k


@dataclass(frozen=True)
class FailingSubsequence:
    alpha: str
    entries: tuple
    status: str = "ok"
    resonant_denominator: int | None = None

    def verify(self):
        """Exact check of every postcondition; returns True or raises AssertionError."""
        for e in self.entries:
            assert 0 < e.gap_low <= e.gap_high < e.bound, e
            assert 0 < e.C < 1
        for a, b in zip(self.entries, self.entries[1:]):
            assert b.C < a.C and b.j > a.j
        return True


def construct_failing_subsequence(alpha, K):
    """Entries (k, j_k, tau_k, C_k, gap_k) with |tau_k - alpha j_k| < C_k j_k^{-k}.

    lambda_j = j throughout.  C_1 is a rational lower bound for 1/e and each
    later C_k is 1/e times the minimum of C_{k-1} and |m - alpha q| q^k over
    q <= j_{k-1}, m in [0, tau_{k-1} + [alpha j_{k-1}] + 1].  Pairs with a value
    below C_{k-1} < 1/2 satisfy |alpha - m/q| < 1/(2q^2), hence are
    convergents of alpha, so the minimum and the next j_k are searched over
    convergents only.
    """
    if int(K) != K or K < 1:
        raise ParameterError(f"K must be a positive integer, got {K}")
    if K > MAX_DEPTH:
        raise SizeGuardError(f"K={K} exceeds the exact-arithmetic budget (max {MAX_DEPTH})")
    if isinstance(alpha, (int, Fraction)):
        a = Fraction(alpha)
        return FailingSubsequence(describe_alpha(a), (), "resonance-dominated", a.denominator)
    if not isinstance(alpha, LiouvilleNumber):
        raise ParameterError("alpha must be a Liouville constant or an exact rational")
    lo, hi = alpha.interval(MAX_DEPTH)
    conv = [(p, q) for p, q in certified_convergents(lo, hi) if q >= 1]
    q_cert = conv[-1][1]

    def bounds(m, q):
        a, b = lo * q - m, hi * q - m
        if (a > 0) != (b > 0) or a == 0 or b == 0:
            return Fraction(0), max(abs(a), abs(b))
        return min(abs(a), abs(b)), max(abs(a), abs(b))

    entries = []
    C = INV_E_LOW
    j_prev = 0
    for k in range(1, int(K) + 1):
        if k > 1:
            prev = entries[-1]
            m_max = prev.tau + (prev.j * lo.numerator) // lo.denominator + 1
            smallest = C
            for p, q in conv:
                if q > prev.j:
                    break
                if 0 <= p <= m_max:
                    low, _ = bounds(p, q)
                    smallest = min(smallest, low * Fraction(q) ** k)
            C = INV_E_LOW * smallest
        found = None
        for p, q in conv:
            c = max(1, j_prev // q + 1)
            m, j = c * p, c * q
            low, high = bounds(m, j)
            if low > 0 and high * Fraction(j) ** k < C:
                if found is None or j < found[1]:
                    found = (m, j, low, high)
        if found is None or found[1] > q_cert:
            raise SizeGuardError(
                f"entry k={k} needs a resolution beyond the exact-arithmetic budget (depth {MAX_DEPTH})")
        m, j, low, high = found
        entries.append(SubsequenceEntry(k, j, m, C, low, high))
        j_prev = j
    return FailingSubsequence(describe_alpha(alpha), tuple(entries))


# ---------------------------------------------------------------- symbolic Liouville witnesses

@dataclass(frozen=True)
class SymbolicWitness:
    """Witness at j = 10^{n!} for the Liouville constant, held in log10 form.

    tau = sum_{k<=n} 10^{n! - k!}.  The gap j*alpha - tau equals 10^{n!} times
    the remainder after n terms, so log10(gap) lies in the open interval
    (n! - (n+1)!, n! - (n+1)! + log10 2).
    """

    level: int

    @property
    def log10_j(self):
        return factorial(self.level)

    @property
    def log10_gap_low(self):
        return factorial(self.level) - factorial(self.level + 1)

    @property
    def log10_gap_high(self):
        return self.log10_gap_low + LOG10_2_HIGH

    @property
    def tau(self):
        n = self.level
        if factorial(n) > 10_000:
            return None
        return sum(10 ** (factorial(n) - factorial(k)) for k in range(1, n + 1))

    @property
    def tau_sign(self):
        """Sign of tau - alpha*j (tau is the truncated sum, so always below)."""
        return -1


def liouville_witness(level):
    if int(level) != level or level < 1:
        raise ParameterError(f"level must be a positive integer, got {level}")
    return SymbolicWitness(int(level))


def gap_below(witness, power, e_power=0):
    """Exact test gap < j^{-power} e^{-e_power} in log10 form (e_power >= 0)."""
    rhs = -power * Fraction(witness.log10_j) - e_power * LOG10_E_HIGH
    return witness.log10_gap_high < rhs


# ---------------------------------------------------------------- small divisors

def one_minus_exp_bound(beta):
    """(4 dist(beta, Z), 2|sin(pi beta)|, l) with l = -round(beta).

    2|sin(pi beta)| = |1 - e^{2 pi i beta}| >= 4 |beta + l|.
    """
    tau, gap = nearest_integer_gap(float(beta))
    actual = 2.0 * abs(np.sin(np.pi * gap))
    return 4.0 * gap, float(actual), -tau


@dataclass(frozen=True)
class SmallDivisorTable:
    j: np.ndarray
    theta: np.ndarray
    gamma: np.ndarray
    theta_infinite: np.ndarray
    gamma_infinite: np.ndarray


def _inverse_modulus(a, s2):
    """1 / |1 - e^{a + i b}| and the divisor itself, with s2 = sin^2(b/2).

    For a > 0 the identity |1 - e^z| = e^a |1 - e^{-z}| keeps everything finite.
    """
    c = -np.abs(a)
    d = np.sqrt(np.expm1(c) ** 2 + 4.0 * np.exp(c) * s2)
    pos = a > 0
    with np.errstate(divide="ignore", over="ignore"):
        inv = np.exp(np.where(pos, -a, 0.0)) / d
        divisor = np.where(pos, d * np.exp(np.minimum(a, 700.0)), d)
    return inv, divisor


def small_divisor_values(omega, lam):
    """Theta and Gamma for an explicit array of eigenvalues."""
    omega = complex(omega)
    lam = np.asarray(lam, dtype=float)
    x = omega.real * lam
    s2 = np.sin(np.pi * np.abs(x - np.rint(x))) ** 2
    a_theta = 2.0 * np.pi * lam * omega.imag
    theta, d_theta = _inverse_modulus(a_theta, s2)
    gamma, d_gamma = _inverse_modulus(-a_theta, s2)
    t_inf = d_theta < DIVISOR_FLOOR
    g_inf = d_gamma < DIVISOR_FLOOR
    return np.where(t_inf, np.inf, theta), np.where(g_inf, np.inf, gamma), t_inf, g_inf


def small_divisors(omega, seq, j_max):
    """Theta_j = |1 - e^{-2 pi i lambda_j omega}|^{-1}, Gamma_j = |e^{2 pi i lambda_j omega} - 1|^{-1}."""
    if int(j_max) != j_max or j_max < 1:
        raise ParameterError(f"j_max must be a positive integer, got {j_max}")
    theta, gamma, t_inf, g_inf = small_divisor_values(omega, seq.values(1, int(j_max)))
    return SmallDivisorTable(np.arange(1, int(j_max) + 1), theta, gamma, t_inf, g_inf)
