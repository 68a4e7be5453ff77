"""Profile function F_alpha and its companions.

F_alpha solves ``F' = 1 - F**alpha, F(0) = 0``; for an integer dimension n the
profile function is ``M_n = F_{2/n}``.  Two evaluation routes are provided:

* ``inverse``: invert ``w(M) = int_0^M ds / (1 - s**alpha)``.  The inversion is
  done in the variable ``y = -log(1 - M)`` where the map is nearly linear,
  ``w(y) = y / alpha + int_0^y k(t) dt`` with a bounded, exponentially
  decaying ``k``.  This keeps ``1 - M`` accurate to full relative precision.
* ``series``: the exponential series
  ``1 - F_alpha(x) = sum_k sigma_k (gamma_alpha e^{-alpha x})**k``, valid for
  ``0 < alpha <= 1``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.polynomial import Polynomial
from scipy import integrate

from .report import VerificationReport

EULER_GAMMA = 0.577215664901532860606512090082
_AUTO_SERIES_CUTOFF = 0.25

DEFAULT_TOLERANCE = 1e-12
DEFAULT_SERIES_ORDER = 200
MAX_SERIES_ORDER = 4000

_TABLE_STEP = 0.5
_TABLE_YMAX = 40.0


class ProfileEvaluationError(RuntimeError):
    """Root-finding failure while inverting ``w(M)``."""

    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket


class SeriesTruncationError(ValueError):
    """Raised when the series tail bound exceeds the requested tolerance."""

    def __init__(self, message, tail_bound):
        super().__init__(message)
        self.tail_bound = tail_bound


class QuadratureError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# parameters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProfileParams:
    """Exponent of the profile ODE, optionally tied to a dimension n."""

    alpha: float
    n: int | None = None

    def __post_init__(self):
        if self.n is not None:
            if int(self.n) != self.n or self.n < 1:
                raise ValueError(f"dimension must be a positive integer, got {self.n!r}")
            if self.alpha != 2.0 / self.n:
                raise ValueError(f"alpha={self.alpha} inconsistent with n={self.n}")
        if not self.alpha > 0 or not math.isfinite(self.alpha):
            raise ValueError(f"alpha must be positive and finite, got {self.alpha!r}")

    @classmethod
    def for_dimension(cls, n: int) -> ProfileParams:
        if int(n) < 1:
            raise ValueError(f"dimension must be >= 1, got {n}")
        return cls(alpha=2.0 / n, n=int(n))


def _as_params(params) -> ProfileParams:
    if isinstance(params, ProfileParams):
        return params
    return ProfileParams(alpha=float(params))


# ---------------------------------------------------------------------------
# digamma and gamma_alpha
# ---------------------------------------------------------------------------

# B_{2k} / (2k) for k = 1..7
_DIGAMMA_ASYMPTOTIC = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)


def digamma(z: float) -> float:
    """Digamma function for real ``z > 0``.

    The argument is raised above 8 with ``psi(z + 1) = psi(z) + 1/z`` and the
    asymptotic expansion ``log z - 1/(2z) - sum B_2k / (2k z^2k)`` finishes.
    """
    if not z > 0:
        raise ValueError("digamma is only implemented for z > 0")
    acc = 0.0
    while z < 8.0:
        acc -= 1.0 / z
        z += 1.0
    inv2 = 1.0 / (z * z)
    poly = 0.0
    for c in reversed(_DIGAMMA_ASYMPTOTIC):
        poly = poly * inv2 + c
    return acc + math.log(z) - 0.5 / z - poly * inv2


def _quad_checked(func, a, b, epsabs=1e-14, epsrel=1e-13, limit=200, what="integral"):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        res = integrate.quad(func, a, b, epsabs=epsabs, epsrel=epsrel, limit=limit, full_output=1)
    value, err = res[0], res[1]
    # a warning with a tiny error estimate is roundoff at the target accuracy
    if len(res) > 3 and err > max(1e-10, 1e-8 * abs(value)):
        raise QuadratureError(f"{what}: quadrature did not converge on [{a}, {b}]: {res[3]}")
    return value, err


def gamma_alpha(alpha: float, route: str = "quadrature") -> float:
    """The constant ``gamma_alpha = lim_{x->inf} (1 - F_alpha(x)) e^{alpha x}``.

    Parameters
    ----------
    alpha : float
        Exponent in ``(0, 1]``.  The quadrature route also accepts ``alpha = 0``
        and returns the limiting value ``exp(-EULER_GAMMA)``.
    route : {"quadrature", "digamma"}
        ``quadrature`` integrates ``(1 - x**b) / (1 - x)``, ``b = (1-alpha)/alpha``,
        on ``[0, 1]`` using the finite limit ``b`` at ``x = 1``.  ``digamma``
        uses ``log gamma_alpha = -psi(1/alpha) - EULER_GAMMA + log(1/alpha)``.
    """
    if route not in ("quadrature", "digamma"):
        raise ValueError(f"unknown route {route!r}")
    if alpha == 0 and route == "quadrature":
        return math.exp(-EULER_GAMMA)
    if not 0 < alpha <= 1:
        raise ValueError(f"gamma_alpha needs 0 < alpha <= 1, got {alpha}")
    if route == "digamma":
        return math.exp(-digamma(1.0 / alpha) - EULER_GAMMA + math.log(1.0 / alpha))

    b = (1.0 - alpha) / alpha
    if b == 0.0:
        return 1.0

    def integrand(x):
        if x >= 1.0:
            return b
        # 1 - x**b via expm1 keeps precision as x -> 1
        return -math.expm1(b * math.log(x)) / (1.0 - x) if x > 0 else 1.0

    total = 0.0
    for a_, b_ in ((0.0, 0.5), (0.5, 1.0)):
        part, _ = _quad_checked(integrand, a_, b_, what="gamma_alpha integrand")
        total += part
    return math.exp(-total) / alpha


# ---------------------------------------------------------------------------
# Taylor coefficients
# ---------------------------------------------------------------------------


@lru_cache(maxsize=64)
def _sigma_cached(alpha: float, K: int, lead: float = 1.0) -> tuple:
    # the recurrence is quadratic-homogeneous: starting from lead = gamma
    # yields sigma_k gamma^k, which stays bounded where sigma_k alone overflows
    sig = np.zeros(K)
    sig[0] = lead
    for k in range(2, K + 1):
        nu = np.arange(1, k, dtype=float)
        weights = ((1.0 + alpha) * nu - alpha * k) * nu
        sig[k - 1] = np.dot(sig[: k - 1] * sig[k - 2 :: -1], weights) / (k * (k - 1))
    return tuple(sig)


def sigma_coeffs(alpha: float, K: int) -> list[float]:
    """Coefficients sigma_1..sigma_K of the normalized Taylor series of phi_alpha."""
    if K < 1:
        raise ValueError("K must be >= 1")
    return list(_sigma_cached(float(alpha), int(K)))


@dataclass(frozen=True)
class TaylorProfile:
    """Truncated series ``phi_alpha(t) = sum_k sigma_k (gamma_alpha t)**k``.

    ``coeffs`` holds ``sigma_k gamma_alpha**k``.
    """

    alpha: float
    gamma_alpha: float
    coeffs: np.ndarray = field(repr=False)
    K: int

    @classmethod
    def build(cls, alpha: float, K: int = DEFAULT_SERIES_ORDER) -> TaylorProfile:
        if not 0 < alpha <= 1:
            raise ValueError("the exponential series needs 0 < alpha <= 1")
        g = gamma_alpha(alpha, "digamma")
        c = np.array(_sigma_cached(float(alpha), int(K), g))
        return cls(alpha=alpha, gamma_alpha=g, coeffs=c, K=K)

    def _terms(self, t: float) -> np.ndarray:
        k = np.arange(1, self.K + 1)
        if t == 0:
            return np.zeros(self.K)
        mag = np.exp(k * math.log(abs(t)))
        sign = np.where((k % 2 == 1) & (t < 0), -1.0, 1.0)
        return self.coeffs * mag * sign

    def tail_bound(self, t: float) -> float:
        """Estimate of ``|sum_{k > K} sigma_k (gamma t)**k|``.

        Successive term ratios increase towards ``|t|``, so the tail is bounded
        by the last retained term times ``|t| / (1 - |t|)``.
        """
        at = abs(t)
        if at >= 1.0:
            return math.inf
        last = abs(self._terms(t)[-1]) if self.K else 0.0
        if self.alpha == 1.0:
            return 0.0
        return last * at / (1.0 - at)

    def evaluate(self, t: float) -> tuple[float, float]:
        """Return ``(partial sum, tail bound)`` at ``t``."""
        if abs(t) >= 1.0:
            raise SeriesTruncationError(f"series route needs |t| < 1, got t={t}", math.inf)
        terms = self._terms(t)
        # sum smallest terms first
        return float(math.fsum(terms[::-1])), self.tail_bound(t)


# ---------------------------------------------------------------------------
# evaluator
# ---------------------------------------------------------------------------


def _k_integrand(t: float, alpha: float) -> float:
    """``e/(1 - (1-e)**alpha) - 1/alpha`` with ``e = exp(-t)``."""
    e = math.exp(-t)
    if e < 1e-5:
        return (e / alpha) * ((alpha - 1.0) / 2.0 + (alpha - 1.0) * (2.0 * alpha - 1.0) / 12.0 * e)
    if t == 0.0:
        return 1.0 - 1.0 / alpha
    one_minus_e = -math.expm1(-t)
    denom = -math.expm1(alpha * math.log(one_minus_e))
    return e / denom - 1.0 / alpha


class ProfileEvaluator:
    """Evaluator of ``F_alpha`` (``M_n`` when built from a dimension).

    Construction tabulates ``w(y)`` on ``y in [0, 40]`` and, for
    ``0 < alpha <= 1``, the Taylor coefficients.  The object is read-only
    afterwards.
    """

    def __init__(self, params, tolerance: float = DEFAULT_TOLERANCE, K: int = DEFAULT_SERIES_ORDER):
        self.params = _as_params(params)
        self.alpha = self.params.alpha
        self.tolerance = tolerance
        a = self.alpha
        ys = np.arange(0.0, _TABLE_YMAX + _TABLE_STEP / 2, _TABLE_STEP)
        kcum = np.zeros_like(ys)
        for i in range(1, len(ys)):
            part, _ = _quad_checked(lambda t: _k_integrand(t, a), ys[i - 1], ys[i], what="w(M) table")
            kcum[i] = kcum[i - 1] + part
        self._ys = ys
        self._kcum = kcum
        self._ws = ys / a + kcum
        # k(t) ~ (a-1)/(2a) e^{-t} beyond the table
        self._k_inf = kcum[-1] + (a - 1.0) / (2.0 * a) * math.exp(-ys[-1])
        self.series = TaylorProfile.build(a, K) if a <= 1.0 else None

    # -- the inverse route -------------------------------------------------

    def _kint(self, y: float) -> float:
        ys = self._ys
        if y >= ys[-1]:
            a = self.alpha
            return self._kcum[-1] + (a - 1.0) / (2.0 * a) * (math.exp(-ys[-1]) - math.exp(-y))
        i = int(y / _TABLE_STEP)
        if y == ys[i]:
            return self._kcum[i]
        part, _ = _quad_checked(lambda t: _k_integrand(t, self.alpha), ys[i], y, what="w(M)")
        return self._kcum[i] + part

    def w_of_y(self, y: float) -> float:
        """``w`` at ``M = 1 - exp(-y)``."""
        return y / self.alpha + self._kint(y)

    def w_of_m(self, m: float) -> float:
        """``w(M) = int_0^M ds / (1 - s**alpha)``."""
        if not 0 <= m < 1:
            raise ValueError("M must lie in [0, 1)")
        return self.w_of_y(-math.log1p(-m))

    def _solve_y(self, w: float) -> float:
        if w < 0:
            raise ValueError(f"w must be nonnegative, got {w}")
        if w == 0:
            return 0.0
        a = self.alpha
        ws, ys = self._ws, self._ys
        if w <= ws[-1]:
            i = int(np.searchsorted(ws, w))
            lo, hi = ys[i - 1], ys[i]
            y = lo + (hi - lo) * (w - ws[i - 1]) / (ws[i] - ws[i - 1])
        else:
            lo = ys[-1]
            hi = a * (w - min(self._k_inf, self._kcum.min())) + 1.0
            y = a * (w - self._k_inf)
            y = min(max(y, lo), hi)
        tol = 1e-15 * max(1.0, y)
        for _ in range(100):
            f = self.w_of_y(y) - w
            if f == 0:
                return y
            if f > 0:
                hi = y
            else:
                lo = y
            fp = 1.0 / a + _k_integrand(y, a)
            step = f / fp
            y_new = y - step
            if not lo < y_new < hi:
                y_new = 0.5 * (lo + hi)
            if abs(y_new - y) <= tol or hi - lo <= tol:
                return y_new
            y = y_new
        raise ProfileEvaluationError(f"inversion of w(M) did not converge for w={w}", bracket=(lo, hi))

    # -- the series route --------------------------------------------------

    def _series_complement(self, w: float) -> tuple[float, float]:
        if self.series is None:
            raise ValueError(f"series route needs 0 < alpha <= 1, got alpha={self.alpha}")
        t = math.exp(-self.alpha * w)
        return self.series.evaluate(t)

    def series_available(self, w: float) -> bool:
        if self.series is None or w <= 0:
            return False
        t = math.exp(-self.alpha * w)
        # near w = 0 the value 1 - complement would cancel; the inverse route does not
        return t < _AUTO_SERIES_CUTOFF and self.series.tail_bound(t) <= 0.01 * self.tolerance

    # -- public API --------------------------------------------------------

    def complement(self, w: float, route: str = "auto") -> float:
        """``1 - F_alpha(w)``, accurate to full relative precision."""
        if route == "auto":
            route = "series" if self.series_available(w) else "inverse"
        if route == "inverse":
            return math.exp(-self._solve_y(w))
        if route == "series":
            if w < 0:
                raise ValueError(f"w must be nonnegative, got {w}")
            value, tail = self._series_complement(w)
            if tail > self.tolerance:
                raise SeriesTruncationError(
                    f"series tail bound {tail:.3e} exceeds tolerance {self.tolerance:.1e} at w={w}",
                    tail,
                )
            return value
        raise ValueError(f"unknown route {route!r}")

    def __call__(self, w: float, route: str = "auto") -> float:
        if w == 0:
            return 0.0
        if route == "inverse" or (route == "auto" and not self.series_available(w)):
            return -math.expm1(-self._solve_y(w))
        return 1.0 - self.complement(w, route)

    def derivative(self, w: float) -> float:
        """``F'(w) = 1 - F(w)**alpha``."""
        return 1.0 - self(w) ** self.alpha

    @property
    def gamma_asymptotic(self) -> float:
        """``gamma_alpha`` read off the tabulated asymptote of ``w(y) - y/alpha``."""
        return math.exp(self.alpha * self._k_inf)


@lru_cache(maxsize=32)
def _evaluator(alpha: float, n: int | None, tolerance: float) -> ProfileEvaluator:
    return ProfileEvaluator(ProfileParams(alpha, n), tolerance)


def evaluator_for(params, tolerance: float = DEFAULT_TOLERANCE) -> ProfileEvaluator:
    """Cached evaluator for ``params`` (a ProfileParams or a bare alpha)."""
    p = _as_params(params)
    return _evaluator(p.alpha, p.n, tolerance)


def profile_eval(params, w: float, route: str = "auto") -> float:
    """``F_alpha(w)``; for ``ProfileParams.for_dimension(n)`` this is ``M_n(w)``."""
    return evaluator_for(params)(w, route)


def profile_complement(params, w: float, route: str = "auto") -> float:
    return evaluator_for(params).complement(w, route)


def m_n(n: int, w: float) -> float:
    """Shorthand for the profile function ``M_n(w)``."""
    return profile_eval(ProfileParams.for_dimension(n), w)


def profile_series_eval(n: int, x: float, K: int = DEFAULT_SERIES_ORDER,
                        tolerance: float = DEFAULT_TOLERANCE) -> float:
    """``1 - M_n(x)`` summed from the exponential series truncated at K terms.

    Raises
    ------
    SeriesTruncationError
        If the tail estimate after K terms exceeds ``tolerance``.
    """
    if n < 2:
        raise ValueError("the exponential series needs n >= 2")
    if x < 0:
        raise ValueError("x must be nonnegative")
    series = TaylorProfile.build(2.0 / n, K)
    value, tail = series.evaluate(math.exp(-2.0 * x / n))
    if tail > tolerance:
        raise SeriesTruncationError(
            f"K={K} leaves a tail bound {tail:.3e} > {tolerance:.1e} at x={x}", tail
        )
    return value


def profile_bound_q(n: int, w: float) -> float:
    """Upper bound ``Q_n(w) = (e^{2w/n} - 1) / (e^{2w/n} - (n-2)/n)`` for ``M_n``."""
    if w < 0:
        raise ValueError("w must be nonnegative")
    em1 = math.expm1(2.0 * w / n)
    return em1 / (em1 + 2.0 / n)


def profile_bound_q_complement(n: int, w: float) -> float:
    """``1 - Q_n(w)`` without cancellation."""
    em1 = math.expm1(2.0 * w / n)
    return (2.0 / n) / (em1 + 2.0 / n)


# ---------------------------------------------------------------------------
# T_n and its inverse
# ---------------------------------------------------------------------------


def t_n(n: int, xi: float) -> float:
    """``T_n(xi) = n int_0^xi tanh(t)**(n-1) dt``."""
    if xi < 0:
        raise ValueError("xi must be nonnegative")
    if n == 1 or xi == 0:
        return float(xi)
    # n * (xi - int (1 - tanh^{n-1})) avoids integrating a plateau near 1
    deficit, _ = _quad_checked(lambda t: 1.0 - math.tanh(t) ** (n - 1), 0.0, xi, what="T_n")
    return n * (xi - deficit)


def t_n_inverse(n: int, w: float) -> float:
    """The unique ``xi >= 0`` with ``T_n(xi) = w``."""
    if w < 0:
        raise ValueError("w must be nonnegative")
    if w == 0:
        return 0.0
    if n == 1:
        return float(w)
    from scipy.optimize import brentq

    hi = max(1.0, w / n)
    while t_n(n, hi) < w:
        hi *= 2.0
    return brentq(lambda xi: t_n(n, xi) - w, 0.0, hi, xtol=1e-15, rtol=1e-15, maxiter=200)


# ---------------------------------------------------------------------------
# phi_alpha
# ---------------------------------------------------------------------------



def phi_eval(alpha: float, t: float, route: str = "auto", K: int | None = None,
             tolerance: float = DEFAULT_TOLERANCE) -> float:
    """``phi_alpha(t) = 1 - F_alpha(-log(t) / alpha)`` and its continuation to t <= 0.

    ``route="composition"`` uses the profile evaluator (``0 < t <= 1``);
    ``route="series"`` sums the Taylor series at 0 (``|t| < 1``, ``alpha <= 1``),
    growing the truncation order until the tail estimate meets ``tolerance``.
    ``auto`` takes the series for ``t < 0.25`` and the composition otherwise.
    """
    if t > 1:
        raise ValueError(f"phi_alpha is defined for t <= 1, got {t}")
    if route == "auto":
        route = "series" if t < _AUTO_SERIES_CUTOFF else "composition"
    if route == "composition":
        if t <= 0:
            raise ValueError("composition route needs t > 0")
        if t == 1:
            return 1.0
        return evaluator_for(alpha).complement(-math.log(t) / alpha)
    if route != "series":
        raise ValueError(f"unknown route {route!r}")
    if abs(t) >= 1:
        raise SeriesTruncationError(f"series route needs |t| < 1, got t={t}", math.inf)
    order = K or DEFAULT_SERIES_ORDER
    while True:
        value, tail = TaylorProfile.build(alpha, order).evaluate(t)
        if tail <= tolerance or K is not None:
            break
        if order >= MAX_SERIES_ORDER:
            raise SeriesTruncationError(
                f"tail bound {tail:.3e} above {tolerance:.1e} at t={t} with K={order}", tail
            )
        order = min(2 * order, MAX_SERIES_ORDER)
    return value


# ---------------------------------------------------------------------------
# H_k polynomials and complete monotonicity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HPolynomial:
    """``H_k`` with ``F^{(k+2)} = alpha t (1-t) H_k(t) / F^{k+1}``, ``t = F**alpha``."""

    k: int
    coeffs: tuple

    @property
    def poly(self) -> Polynomial:
        return Polynomial(self.coeffs)

    def __call__(self, t):
        return self.poly(t)

    def associated(self) -> np.ndarray:
        """Coefficients of ``(1+z)^k H_k(1/(1+z))`` in ascending powers of z.

        Equal signs across these coefficients certify the sign of ``H_k`` on
        ``[0, 1]``.
        """
        out = Polynomial([0.0])
        for j, c in enumerate(self.coeffs):
            out = out + c * Polynomial([1.0, 1.0]) ** (self.k - j)
        return np.pad(out.coef, (0, self.k + 1 - len(out.coef)))


def h_polynomials(alpha: float, k_max: int) -> list[HPolynomial]:
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    t = Polynomial([0.0, 1.0])
    h = Polynomial([-1.0])
    out = [HPolynomial(0, tuple(h.coef))]
    for k in range(k_max):
        lin = (k + 1 - 2 * alpha) * t - (k + 1 - alpha)
        h = lin * h + alpha * t * (1 - t) * h.deriv()
        coef = np.pad(h.coef, (0, max(0, k + 2 - len(h.coef))))[: k + 2]
        out.append(HPolynomial(k + 1, tuple(float(c) for c in coef)))
    return out


def forward_difference(values: np.ndarray, k: int) -> np.ndarray:
    """k-th forward difference of equally spaced samples."""
    return np.diff(values, n=k) if k else np.asarray(values)


def complete_monotonicity_check(alpha: float, grid, k_max: int = 8, h: float = 0.25,
                                tolerance: float = DEFAULT_TOLERANCE) -> VerificationReport:
    """Sign test ``(-1)^k Delta_h^k (1 - F_alpha)(x) >= -2^k tolerance``.

    Violations are collected in ``report.details``; the worst value is the
    minimum of ``(-1)^k Delta_h^k / 2^k`` so that ``passed`` compares it
    against ``-tolerance`` uniformly in k.
    """
    grid = np.asarray(list(grid), dtype=float)
    if grid.size == 0 or h <= 0 or k_max < 1:
        raise ValueError("need a nonempty grid, h > 0 and k_max >= 1")
    ev = evaluator_for(alpha, tolerance)
    worst = math.inf
    details = []
    checks = 0
    for x in grid:
        samples = np.array([ev.complement(x + j * h) for j in range(k_max + 1)])
        for k in range(1, k_max + 1):
            d = float(np.diff(samples[: k + 1], n=k)[0]) * (-1) ** k
            scaled = d / 2.0**k
            checks += 1
            worst = min(worst, scaled)
            if scaled < -tolerance:
                details.append({"x": float(x), "k": k, "signed_difference": d})
    return VerificationReport(
        name="complete-monotonicity",
        params={"alpha": alpha, "h": h, "k_max": k_max, "grid_min": float(grid.min()),
                "grid_max": float(grid.max()), "points": int(grid.size)},
        samples=checks,
        worst=worst,
        tolerance=tolerance,
        kind="slack",
        details=details,
    )


def subadditivity_check(alpha: float, grid, rel_tol: float = 1e-9) -> VerificationReport:
    """``(1-F)(x) (1-F)(y) <= (1-F)(x+y) (1 + rel_tol)`` over ``grid x grid``.

    The worst value is the smallest relative margin ``(rhs - lhs) / max(lhs, rhs)``
    with the ``1 + rel_tol`` factor already folded into ``rhs``; it passes
    when nonnegative.
    """
    grid = [float(x) for x in grid]
    ev = evaluator_for(alpha)
    comp = {x: ev.complement(x) for x in grid}
    worst = math.inf
    details = []
    for x in grid:
        for y in grid:
            lhs = comp[x] * comp[y]
            rhs = ev.complement(x + y) * (1.0 + rel_tol)
            margin = (rhs - lhs) / max(abs(rhs), abs(lhs), 1e-300)
            worst = min(worst, margin)
            if margin < 0:
                details.append({"x": x, "y": y, "lhs": lhs, "rhs": rhs})
    return VerificationReport(name="subadditivity", params={"alpha": alpha, "rel_tol": rel_tol},
                              samples=len(grid) ** 2, worst=worst, tolerance=0.0, kind="slack",
                              details=details)
