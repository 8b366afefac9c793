"""Truncated real power series: construction, convolution, inversion, evaluation.

Every kernel object in this toolkit is a finite coefficient window c_0..c_N
plus optional provenance (a generator tag).  Generator tags are what make
tail statements certifiable; a bare coefficient window never certifies
summability on its own, and every report downstream carries that distinction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

import numpy as np

__all__ = [
    "PowSign",
    "Binomial",
    "Polynomial",
    "PowerTail",
    "FileList",
    "Derived",
    "TruncatedSeries",
    "KernelFlags",
    "KernelPair",
    "SingularAtOriginError",
    "OutOfDomainError",
    "binomial_series",
    "cauchy_product",
    "reciprocal",
    "invert_kernel",
    "make_kernel_pair",
    "cesaro_number",
    "cesaro_numbers",
    "cesaro_number_gamma",
    "evaluate",
    "EvaluationResult",
    "wiener_norm",
    "WienerNorm",
    "abs_tail_bound",
    "alpha_at_one",
    "AtOneEstimate",
    "pair_type_estimate",
    "kernel_underflow_index",
    "read_coefficient_file",
]


class SingularAtOriginError(ValueError):
    """Inversion requested for a series with vanishing constant term."""


class OutOfDomainError(ValueError):
    """Evaluation point outside the closed unit disc."""


class PowSign(Enum):
    """Sign of the exponent in (1-t)**(+a) versus (1-t)**(-a)."""

    PLUS = "PowPlus"
    MINUS = "PowMinus"


# --- generator tags -------------------------------------------------------
#
# A generator records where a coefficient window came from.  Binomial stores
# the *effective* exponent e, meaning the series is (1-t)**e; PowerTail says
# the coefficients follow amplitude * n**(-exponent) from `from_degree` on.


@dataclass(frozen=True)
class Binomial:
    exponent: float


@dataclass(frozen=True)
class Polynomial:
    degree: int


@dataclass(frozen=True)
class PowerTail:
    amplitude: float
    exponent: float
    from_degree: int


@dataclass(frozen=True)
class FileList:
    path: str


@dataclass(frozen=True)
class Derived:
    note: str = ""


Generator = Union[Binomial, Polynomial, PowerTail, FileList, Derived]

_BINOMIAL_CHECK_RTOL = 1e-14


def _binomial_coeffs(e: float, n_max: int) -> np.ndarray:
    """Taylor coefficients of (1-t)**e up to degree n_max, by the stable
    multiplicative recurrence c_n = c_{n-1} * (n - e - 1) / n."""
    if n_max == 0:
        return np.ones(1)
    n = np.arange(1.0, n_max + 1.0)
    return np.concatenate(([1.0], np.cumprod((n - e - 1.0) / n)))


@dataclass(frozen=True, eq=False)
class TruncatedSeries:
    """A real coefficient window c_0..c_N with optional provenance.

    Immutable: the coefficient array is copied on construction and marked
    read-only, so instances are safe to share across threads.
    """

    coeffs: np.ndarray
    generator: Optional[Generator] = None

    def __post_init__(self) -> None:
        c = np.asarray(self.coeffs, dtype=np.float64).copy()
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coefficient window must be a nonempty 1-d sequence")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficient window contains non-finite entries")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        gen = self.generator
        if isinstance(gen, Binomial) and gen.exponent != 0.0:
            self._check_binomial_recurrence(gen.exponent)
        if isinstance(gen, Polynomial) and gen.degree >= c.size:
            raise ValueError("declared polynomial degree exceeds the window")

    def _check_binomial_recurrence(self, e: float) -> None:
        c = self.coeffs
        if abs(c[0] - 1.0) > _BINOMIAL_CHECK_RTOL:
            raise ValueError("binomial series must start at c_0 = 1")
        if c.size == 1:
            return
        n = np.arange(1.0, c.size)
        expected = c[:-1] * (n - e - 1.0) / n
        scale = np.maximum(np.abs(expected), 1e-300)
        if np.max(np.abs(c[1:] - expected) / scale) > _BINOMIAL_CHECK_RTOL:
            raise ValueError("coefficients violate the binomial recurrence")

    @property
    def trunc_len(self) -> int:
        return int(self.coeffs.size)

    @property
    def degree(self) -> int:
        return int(self.coeffs.size) - 1

    def padded(self, length: int) -> np.ndarray:
        """Coefficients zero-extended (or cut) to the requested length."""
        c = self.coeffs
        if length <= c.size:
            return np.array(c[:length])
        out = np.zeros(length)
        out[: c.size] = c
        return out

    def __len__(self) -> int:
        return self.trunc_len

    def __repr__(self) -> str:
        head = np.array2string(self.coeffs[:4], precision=6, separator=", ")
        return f"TruncatedSeries(N={self.degree}, head={head}, generator={self.generator!r})"


def binomial_series(a: float, sign: PowSign, n_max: int) -> TruncatedSeries:
    """First n_max+1 Taylor coefficients of (1-t)**a (PLUS) or (1-t)**(-a) (MINUS)."""
    if not math.isfinite(a):
        raise ValueError("exponent must be finite")
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    e = float(a) if sign is PowSign.PLUS else -float(a)
    return TruncatedSeries(_binomial_coeffs(e, n_max), Binomial(e))


def cauchy_product(f: TruncatedSeries, g: TruncatedSeries) -> TruncatedSeries:
    """Formal product truncated at the shorter of the two windows."""
    n = min(f.trunc_len, g.trunc_len)
    prod = np.convolve(f.coeffs[:n], g.coeffs[:n])[:n]
    return TruncatedSeries(prod, Derived("cauchy_product"))


def _invert_coeffs(c: np.ndarray, n_max: int) -> np.ndarray:
    """Coefficients of 1/f by the convolution recurrence, f given by window c."""
    if c[0] == 0.0:
        raise SingularAtOriginError("constant term vanishes, series not invertible")
    deg = int(np.max(np.nonzero(c)[0]))  # c[0] != 0 so nonzero is nonempty
    inv0 = 1.0 / c[0]
    k = np.empty(n_max + 1)
    k[0] = inv0
    for n in range(1, n_max + 1):
        j = min(n, deg)
        stop = n - j - 1
        acc = np.dot(c[1 : j + 1], k[n - 1 : (stop if stop >= 0 else None) : -1]) if j >= 1 else 0.0
        k[n] = -inv0 * acc
        if not math.isfinite(k[n]):
            raise ValueError(f"inversion overflowed at degree {n}")
    return k


@dataclass(frozen=True)
class KernelFlags:
    is_np: bool
    is_wiener_alpha: bool
    is_wiener_k: bool
    type: str  # "Critical" | "Subcritical" | "Indeterminate"


@dataclass(frozen=True, eq=False)
class KernelPair:
    """A symbol/kernel pair (alpha, k) with alpha * k = 1 up to the recorded
    residual.  Violations of the standing hypotheses (normalization, positive
    kernel coefficients, residual size) are listed rather than raised, so that
    perturbation experiments can observe near-failures."""

    alpha: TruncatedSeries
    k: TruncatedSeries
    inversion_residual: float
    flags: KernelFlags
    violations: tuple = ()

    @property
    def trunc_len(self) -> int:
        return min(self.alpha.trunc_len, self.k.trunc_len)


_NP_SLACK = 1e-14
_RESIDUAL_TOL = 1e-10


def _is_np_window(c: np.ndarray) -> bool:
    return abs(c[0] - 1.0) <= _NP_SLACK and bool(np.all(c[1:] <= _NP_SLACK))


def _summability_flag(series: TruncatedSeries) -> bool:
    """True when the absolute coefficient sums are certified or strongly
    stabilized finite; False otherwise (including certified divergence)."""
    tail = abs_tail_bound(series)
    if tail is not None:
        return bool(math.isfinite(tail))
    absc = np.abs(series.coeffs)
    total = float(np.sum(absc))
    if total == 0.0:
        return True
    half = float(np.sum(absc[series.trunc_len // 2 :]))
    return half <= 0.02 * total


def kernel_underflow_index(coeffs: np.ndarray) -> Optional[int]:
    """First index of a trailing run of (near-)zeros following a positive,
    decaying stretch: the signature of geometric decay underflowing float
    range, as opposed to a genuine sign violation."""
    tiny = np.abs(coeffs) < 1e-290
    if not tiny.any() or tiny[0]:
        return None
    first = int(np.argmax(tiny))
    if first < 8 or not tiny[first:].all():
        return None
    head = coeffs[max(first - 8, 1) : first]
    if np.all(head > 0.0) and np.all(np.diff(head) <= 0.0):
        return first
    return None


def make_kernel_pair(alpha: TruncatedSeries, k: TruncatedSeries) -> KernelPair:
    """Assemble a KernelPair from an explicit (alpha, k) window pair,
    recomputing the residual and all flags."""
    n = min(alpha.trunc_len, k.trunc_len)
    conv = np.convolve(alpha.coeffs[:n], k.coeffs[:n])[:n]
    conv[0] -= 1.0
    residual = float(np.max(np.abs(conv)))
    violations = []
    if abs(alpha.coeffs[0] - 1.0) > _NP_SLACK or abs(k.coeffs[0] - 1.0) > _NP_SLACK:
        violations.append("normalization: alpha_0 and k_0 must equal 1")
    under = kernel_underflow_index(k.coeffs[:n])
    bad = np.nonzero(k.coeffs[1 : under if under else n] <= 0.0)[0]
    if under is not None:
        violations.append(f"kernel window underflows to zero from n={under}; shrink N")
    if bad.size:
        violations.append(f"nonpositive kernel coefficient at n={int(bad[0]) + 1}")
    if residual > _RESIDUAL_TOL:
        violations.append(f"inversion residual {residual:.3e} above {_RESIDUAL_TOL:.0e}")
    est = pair_type_estimate(alpha, k, trusted=not violations)
    flags = KernelFlags(
        is_np=_is_np_window(alpha.coeffs),
        is_wiener_alpha=_summability_flag(alpha),
        is_wiener_k=_summability_flag(k),
        type=est.type,
    )
    return KernelPair(alpha, k, residual, flags, tuple(violations))


def _inverted_series(coeffs: np.ndarray, source: Optional[Generator], note: str) -> TruncatedSeries:
    """Wrap inverted coefficients, keeping binomial provenance when the
    source certifies it: the inverse of (1-t)**e is (1-t)**(-e), and the
    construction-time recurrence check guards against numerical drift."""
    if isinstance(source, Binomial):
        try:
            return TruncatedSeries(coeffs, Binomial(-source.exponent))
        except ValueError:
            pass
    return TruncatedSeries(coeffs, Derived(note))


def reciprocal(alpha: TruncatedSeries, n_max: int) -> KernelPair:
    """Invert a symbol window to a kernel window of length n_max+1.

    The residual is computed by explicit re-multiplication.  Nonpositive
    kernel coefficients are reported in the violation list, not raised.
    A symbol window shorter than the target is zero-extended: exact for
    polynomials, and recorded as Derived provenance otherwise (inverting
    past the window treats the unseen coefficients as zero).
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    k = _invert_coeffs(alpha.padded(n_max + 1), n_max)
    if alpha.trunc_len < n_max + 1:
        gen = alpha.generator if isinstance(alpha.generator, Polynomial) else Derived("zero-extended")
        alpha = TruncatedSeries(alpha.padded(n_max + 1), gen)
    return make_kernel_pair(alpha, _inverted_series(k, alpha.generator, "reciprocal"))


def invert_kernel(k: TruncatedSeries, n_max: Optional[int] = None) -> KernelPair:
    """Given a kernel window k, recover alpha = 1/k and assemble the pair."""
    n_max = k.degree if n_max is None else n_max
    a = _invert_coeffs(k.padded(n_max + 1), n_max)
    return make_kernel_pair(_inverted_series(a, k.generator, "invert_kernel"), k)


# --- Cesaro numbers -------------------------------------------------------


def cesaro_numbers(a: float, n_max: int) -> np.ndarray:
    """Cesaro numbers k^a(0..n_max): Taylor coefficients of (1-t)**(-a),
    computed by the forward-stable product recurrence."""
    return _binomial_coeffs(-float(a), n_max)


def cesaro_number(a: float, n: int) -> float:
    """Single Cesaro number k^a(n) = a(a+1)...(a+n-1)/n! by recurrence."""
    if n < 0:
        raise ValueError("n must be non-negative")
    value = 1.0
    for i in range(1, n + 1):
        value *= (a + i - 1.0) / i
    return value


def cesaro_number_gamma(a: float, n: int) -> float:
    """Gamma-function form Gamma(n+a) / (Gamma(a) Gamma(n+1)).

    Requires a not to be a non-positive integer.  Uses log-gamma for the
    large positive arguments to avoid overflow.
    """
    if a <= 0 and float(a).is_integer():
        raise ValueError("gamma formula undefined for non-positive integer a")
    if n + a <= 0:
        # fall back on small direct gammas; all arguments stay modest here
        return math.gamma(n + a) / (math.gamma(a) * math.gamma(n + 1))
    return math.exp(math.lgamma(n + a) - math.lgamma(n + 1)) / math.gamma(a)


# --- evaluation and summability -------------------------------------------


def abs_tail_bound(series: TruncatedSeries, n_from: Optional[int] = None) -> Optional[float]:
    """Certified bound on sum_{n > n_from} |c_n|, or None when uncertifiable.

    Returns math.inf when the generator certifies divergence.  Only
    closed-form generators produce a bound; Derived/FileList windows do not.
    """
    n_from = series.degree if n_from is None else n_from
    gen = series.generator
    if isinstance(gen, Polynomial):
        return 0.0 if n_from >= gen.degree else float(np.sum(np.abs(series.coeffs[n_from + 1 :])))
    if isinstance(gen, Binomial):
        e = gen.exponent
        if e == 0.0:
            return 0.0
        if e < 0.0:
            return math.inf
        if n_from < e:
            return None
        # beyond n > e the coefficients of (1-t)**e keep one sign and the
        # full sum is exactly 0, so the absolute tail is |partial sum|;
        # past the window the tail only shrinks, so the window-end bound holds
        stop = min(n_from, series.degree)
        partial = float(np.sum(series.coeffs[: stop + 1]))
        return abs(partial) + 1e-16 * (stop + 1)
    if isinstance(gen, PowerTail):
        b = gen.exponent
        if gen.from_degree > series.degree + 1:
            return None  # the law starts past the window, leaving a gap
        if b <= 1.0:
            return math.inf  # the power-law continuation is not summable
        # known window part, then the integral comparison
        # sum_{n > N} n**-b <= N**(1-b) / (b-1) for the continuation
        window = float(np.sum(np.abs(series.coeffs[n_from + 1 : series.degree + 1])))
        start = max(n_from, series.degree, 1)
        beyond = abs(gen.amplitude) * start ** (1.0 - b) / (b - 1.0)
        return window + beyond
    return None


@dataclass(frozen=True)
class EvaluationResult:
    value: complex
    tail_bound: Optional[float]


def evaluate(f: TruncatedSeries, z: complex) -> EvaluationResult:
    """Horner evaluation of the truncated polynomial on the closed unit disc.

    The tail bound, when the generator affords one, dominates the modulus of
    the neglected tail at any point of the closed disc.
    """
    if abs(z) > 1.0 + 1e-12:
        raise OutOfDomainError(f"|z| = {abs(z):.6f} exceeds 1")
    acc = complex(0.0)
    for c in f.coeffs[::-1]:
        acc = acc * z + c
    return EvaluationResult(acc, abs_tail_bound(f))


def evaluate_on_circle(f: TruncatedSeries, radius: float, samples: int) -> np.ndarray:
    """Vectorized Horner evaluation on a uniform grid of |z| = radius."""
    if radius > 1.0 + 1e-12:
        raise OutOfDomainError(f"radius {radius} exceeds 1")
    z = radius * np.exp(2j * np.pi * np.arange(samples) / samples)
    acc = np.zeros_like(z)
    for c in f.coeffs[::-1]:
        acc = acc * z + c
    return acc


@dataclass(frozen=True)
class WienerNorm:
    value: float
    tail_known: bool
    tail_bound: Optional[float]

    @property
    def summable(self) -> Optional[bool]:
        if not self.tail_known or self.tail_bound is None:
            return None
        return math.isfinite(self.tail_bound)


def wiener_norm(f: TruncatedSeries) -> WienerNorm:
    """Partial absolute coefficient sum with a certified tail when available."""
    value = float(np.sum(np.abs(f.coeffs)))
    tail = abs_tail_bound(f)
    return WienerNorm(value, tail is not None, tail)


@dataclass(frozen=True)
class AtOneEstimate:
    """Finite-window estimate of the boundary value f(1) = sum of coefficients."""

    value: float
    tail: Optional[float]  # certified bound on the discarded tail, if any
    certified: bool
    type: str  # "Critical" | "Subcritical" | "Indeterminate"


_CRITICAL_TOL = 1e-10


def alpha_at_one(alpha: TruncatedSeries) -> AtOneEstimate:
    """Estimate alpha(1) and classify critical (= 0) vs subcritical (> 0).

    Certified exactly for binomial and polynomial generators; otherwise a
    partial-sum trend decides, or the verdict stays Indeterminate.
    """
    gen = alpha.generator
    c = alpha.coeffs
    if isinstance(gen, Binomial):
        if gen.exponent > 0.0:
            return AtOneEstimate(0.0, 0.0, True, "Critical")
        if gen.exponent == 0.0:
            return AtOneEstimate(1.0, 0.0, True, "Subcritical")
        return AtOneEstimate(math.inf, math.inf, True, "Indeterminate")
    if isinstance(gen, Polynomial):
        s = float(np.sum(c))
        if abs(s) <= _CRITICAL_TOL:
            return AtOneEstimate(s, 0.0, True, "Critical")
        return AtOneEstimate(s, 0.0, True, "Subcritical" if s > 0 else "Indeterminate")
    if isinstance(gen, PowerTail):
        s = float(np.sum(c))
        csum = np.cumsum(c)
        b, n0 = gen.exponent, gen.from_degree
        tail = abs(gen.amplitude) * alpha.degree ** (1.0 - b) / (b - 1.0) if b > 1 else math.inf
        if math.isfinite(tail):
            if s - tail > _CRITICAL_TOL:
                return AtOneEstimate(s, tail, True, "Subcritical")
            if abs(s) <= tail + _CRITICAL_TOL and abs(csum[-1]) <= abs(csum[len(csum) // 2]):
                return AtOneEstimate(s, tail, True, "Critical")
        return AtOneEstimate(s, tail, False, "Indeterminate")
    # no generator knowledge: partial-sum trend at the window checkpoints,
    # sampled at both parities to expose period-two oscillation
    s = float(np.sum(c))
    csum = np.cumsum(c)
    n = c.size
    marks = sorted({n // 4, n // 4 + 1, n // 2, n // 2 + 1, (3 * n) // 4, n - 2, n - 1})
    checkpoints = csum[[m for m in marks if 0 <= m < n]]
    spread = float(np.max(checkpoints) - np.min(checkpoints))
    if spread <= max(1e-3, 0.05 * abs(s)):
        if s > spread + _CRITICAL_TOL:
            return AtOneEstimate(s, None, False, "Subcritical")
        if abs(s) <= spread + _CRITICAL_TOL and abs(csum[-1]) <= abs(csum[n // 2]) + _CRITICAL_TOL:
            return AtOneEstimate(s, None, False, "Critical")
    return AtOneEstimate(s, None, False, "Indeterminate")


def pair_type_estimate(
    alpha: TruncatedSeries, k: TruncatedSeries, trusted: bool = True
) -> AtOneEstimate:
    """Critical/subcritical classification using both sides of a pair.

    When the symbol's own boundary value is uncertified, the kernel side
    decides through alpha(1) = 1/k(1): a certified-divergent kernel sum
    forces the critical case, a certified-finite one bounds alpha(1) away
    from zero.  Requires the pair relation to be trusted (no violations)."""
    est = alpha_at_one(alpha)
    if est.certified or not trusted:
        return est
    if np.all(k.coeffs > 0.0):
        ktail = abs_tail_bound(k)
        if ktail is not None:
            if math.isinf(ktail):
                return AtOneEstimate(0.0, 0.0, True, "Critical")
            total = float(np.sum(k.coeffs))
            low = 1.0 / (total + ktail)
            if low > _CRITICAL_TOL:
                return AtOneEstimate(1.0 / total, 1.0 / total - low, True, "Subcritical")
    return est


def read_coefficient_file(path: str) -> TruncatedSeries:
    """Read a coefficient file: one coefficient per line, '#' comments,
    index implicit from line order starting at 0."""
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                values.append(float(line))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: not a number: {line!r}") from exc
    if not values:
        raise ValueError(f"{path}: no coefficients found")
    return TruncatedSeries(np.array(values), FileList(path))
