"""Moment sequences, their exponential transform, and Hankel positivity.

A sequence ``c_0, c_1, ...`` stands for the formal series
``c(z) = sum_k c_k z^{-(k+1)}``.  Internally everything is a power series in
``u = 1/z`` with ``c(z) = u * C(u)``, ``C(u) = sum_k c_k u^k``.

Arithmetic is exact (``fractions.Fraction``) unless a sequence is explicitly
built in float mode; the two are never mixed implicitly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np


class ArityError(ValueError):
    """The sequence is too short for the requested order."""


class NonInvertibleSeriesError(ValueError):
    pass


class ArithmeticModeError(TypeError):
    pass


@dataclass(frozen=True)
class MomentSequence:
    """Coefficients ``c_0..c_K`` together with their arithmetic mode."""

    coeffs: tuple
    exact: bool = True

    def __post_init__(self):
        if self.exact:
            conv = []
            for c in self.coeffs:
                if isinstance(c, float):
                    raise ArithmeticModeError("float coefficient in an exact sequence; convert explicitly")
                conv.append(Fraction(c))
        else:
            conv = [float(c) for c in self.coeffs]
            if not all(math.isfinite(c) for c in conv):
                raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coeffs", tuple(conv))

    def __len__(self) -> int:
        return len(self.coeffs)

    def __getitem__(self, k):
        return self.coeffs[k]

    def __iter__(self):
        return iter(self.coeffs)

    @property
    def K(self) -> int:
        return len(self.coeffs) - 1

    def to_float(self) -> MomentSequence:
        return MomentSequence(tuple(float(c) for c in self.coeffs), exact=False)

    def scaled(self, factor) -> MomentSequence:
        return self._like([factor * c for c in self.coeffs])

    def _like(self, coeffs) -> MomentSequence:
        return MomentSequence(tuple(coeffs), exact=self.exact)

    def to_json(self) -> list:
        return [str(c) for c in self.coeffs] if self.exact else list(self.coeffs)

    @classmethod
    def zeros(cls, length: int, exact: bool = True) -> MomentSequence:
        return cls((0,) * length, exact=exact)


def parse_sequence(text: str, exact: bool = True) -> MomentSequence:
    """Parse ``"1, 1/2, 1/3"``, a JSON array, or a path to a file holding either.

    Decimal tokens such as ``0.25`` become exact rationals in exact mode.
    """
    text = text.strip()
    if not text.startswith("[") and "," not in text and Path(text).is_file():
        text = Path(text).read_text().strip()
    if text.startswith("["):
        items = json.loads(text)
        if not isinstance(items, list):
            raise ValueError("expected a JSON array")
        tokens = [str(x) for x in items]
    else:
        tokens = [t.strip() for t in text.split(",") if t.strip()]
    if not tokens:
        raise ValueError("empty sequence")
    if exact:
        return MomentSequence(tuple(Fraction(t) for t in tokens), exact=True)
    return MomentSequence(tuple(float(Fraction(t)) if "/" in t else float(t) for t in tokens),
                          exact=False)


# ---------------------------------------------------------------------------
# power series in u, truncated to a fixed length
# ---------------------------------------------------------------------------


def _zero(exact: bool):
    return Fraction(0) if exact else 0.0


def series_mul(a, b, N):
    out = []
    for n in range(N):
        s = 0
        for k in range(max(0, n - len(b) + 1), min(n, len(a) - 1) + 1):
            s += a[k] * b[n - k]
        out.append(s)
    return out


def series_inv(p, N):
    if p[0] == 0:
        raise NonInvertibleSeriesError("constant term vanishes; series is not invertible")
    inv0 = 1 / p[0]
    e = [inv0]
    for n in range(1, N):
        s = 0
        for k in range(1, min(n, len(p) - 1) + 1):
            s += p[k] * e[n - k]
        e.append(-s * inv0)
    return e


def series_exp(p, N):
    """``exp(P)`` for ``P(0) = 0`` from ``E' = P' E``."""
    if p and p[0] != 0:
        raise ValueError("series_exp expects a vanishing constant term")
    e = [1 + 0 * p[0]] if p else [1]
    for n in range(1, N):
        s = 0
        for k in range(1, min(n, len(p) - 1) + 1):
            s += k * p[k] * e[n - k]
        e.append(s / n)
    return e


def series_log(q, N):
    """``log(Q)`` for ``Q(0) = 1`` from ``L' = Q'/Q``."""
    if q[0] != 1:
        raise ValueError("series_log expects constant term 1")
    l = [0 * q[0]]
    for n in range(1, N):
        qn = q[n] if n < len(q) else 0
        s = n * qn
        for k in range(1, n):
            s -= k * l[k] * (q[n - k] if n - k < len(q) else 0)
        l.append(s / n)
    return l


# ---------------------------------------------------------------------------
# exponential transform
# ---------------------------------------------------------------------------


def exp_transform_sequence(s: MomentSequence) -> MomentSequence:
    """Coefficients of ``1 - exp(-s(z))`` through ``z^{-(K+1)}``."""
    N = len(s) + 1
    p = [_zero(s.exact)] + [-c for c in s]  # -u S(u)
    e = series_exp(p, N)
    return s._like([-e[k + 1] for k in range(len(s))])


def inverse_exp_transform(a: MomentSequence) -> MomentSequence:
    """Coefficients of ``-log(1 - a(z))``; inverts :func:`exp_transform_sequence`."""
    N = len(a) + 1
    one = Fraction(1) if a.exact else 1.0
    q = [one] + [-c for c in a]  # 1 - u A(u)
    l = series_log(q, N)
    return a._like([-l[k + 1] for k in range(len(a))])


# ---------------------------------------------------------------------------
# Hankel forms
# ---------------------------------------------------------------------------


@dataclass
class HankelReport:
    """Leading Hankel determinants ``det(a_{i+j})_{0..m}`` and psd flags, m = 0..M."""

    determinants: list
    psd: list
    exact: bool
    margins: list = field(default_factory=list)
    sequence: MomentSequence | None = None

    @property
    def all_psd(self) -> bool:
        return all(self.psd)

    def to_dict(self) -> dict:
        fmt = str if self.exact else float
        return {"determinants": [fmt(d) for d in self.determinants], "psd": list(self.psd),
                "exact": self.exact, "margins": [fmt(m) for m in self.margins]}


def hankel_matrix(a: MomentSequence, m: int):
    return [[a[i + j] for j in range(m + 1)] for i in range(m + 1)]


def _exact_det(mat) -> Fraction:
    n = len(mat)
    A = [row[:] for row in mat]
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if A[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            A[col], A[piv] = A[piv], A[col]
            det = -det
        det *= A[col][col]
        for r in range(col + 1, n):
            f = A[r][col] / A[col][col]
            if f:
                for c in range(col, n):
                    A[r][c] -= f * A[col][c]
    return det


def _exact_psd(mat) -> tuple[bool, Fraction]:
    """Symmetric elimination; returns ``(is_psd, smallest pivot)``.

    A negative pivot, or a zero pivot whose row is not identically zero,
    certifies indefiniteness.  The margin is the smallest pivot, or -1 when a
    zero pivot with a nonzero row occurs.
    """
    n = len(mat)
    A = [row[:] for row in mat]
    margin = None
    for k in range(n):
        p = A[k][k]
        margin = p if margin is None else min(margin, p)
        if p < 0:
            return False, margin
        if p == 0:
            if any(A[k][j] != 0 for j in range(k + 1, n)):
                return False, Fraction(-1)
            continue
        for i in range(k + 1, n):
            f = A[i][k] / p
            if f:
                for j in range(k + 1, n):
                    A[i][j] -= f * A[k][j]
    return True, margin if margin is not None else Fraction(0)


def hankel_determinants(a: MomentSequence, M: int) -> HankelReport:
    if M < 0:
        raise ValueError("M must be >= 0")
    if len(a) < 2 * M + 1:
        raise ArityError(f"need at least {2 * M + 1} coefficients for M={M}, got {len(a)}")
    dets, psd, margins = [], [], []
    for m in range(M + 1):
        H = hankel_matrix(a, m)
        if a.exact:
            dets.append(_exact_det(H))
            ok, margin = _exact_psd(H)
        else:
            Hf = np.array(H, dtype=float)
            dets.append(float(np.linalg.det(Hf)))
            eig = np.linalg.eigvalsh(Hf)
            margin = float(eig[0])
            ok = margin >= -1e-10 * float(np.linalg.norm(Hf, 2))
        psd.append(bool(ok) and (not psd or psd[-1]))
        margins.append(margin)
    return HankelReport(determinants=dets, psd=psd, exact=a.exact, margins=margins)


def psd_margin(a: MomentSequence, M: int):
    """Smallest pivot (exact) or eigenvalue (float) over the Hankel forms up to M."""
    return min(hankel_determinants(a, M).margins)


# ---------------------------------------------------------------------------
# J-fraction
# ---------------------------------------------------------------------------


@dataclass
class JFraction:
    """``a(z) = alpha_0 / (z + beta_1 - alpha_1 / (z + beta_2 - ...))``.

    ``terminated`` is True when the series is reproduced exactly by a finite
    fraction (a vanishing ``alpha``); ``depth`` is the largest m for which
    ``alpha_0..alpha_m`` were obtained.
    """

    alphas: list
    betas: list
    depth: int
    terminated: bool = False
    reason: str = ""

    def determinant_products(self) -> list:
        """``alpha_0^{m+1} alpha_1^m ... alpha_m`` for m = 0..depth."""
        out = []
        for m in range(len(self.alphas)):
            prod = 1
            for i in range(m + 1):
                prod *= self.alphas[i] ** (m + 1 - i)
            out.append(prod)
        return out

    def expand(self, length: int, exact: bool = True) -> MomentSequence:
        """Re-expand the (truncated) fraction into ``length`` moments."""
        zero = _zero(exact)
        one = zero + 1
        N = length + 1
        tail = [zero] * N  # remainder R(z) below the current level, as a series in u
        for i in range(len(self.alphas) - 1, -1, -1):
            beta = self.betas[i] if i < len(self.betas) else zero
            # level value: alpha u / (1 + beta u - u * R)
            denom = [one] + [zero] * (N - 1)
            if N > 1:
                denom[1] += beta
            for k in range(N - 1):
                denom[k + 1] -= tail[k]
            num = [zero, self.alphas[i]] + [zero] * (N - 2)
            level = series_mul(num, series_inv(denom, N), N)
            tail = level
        return MomentSequence(tuple(tail[1 : length + 1]), exact=exact)


def j_fraction(a: MomentSequence, depth: int) -> JFraction:
    """Peel off ``alpha_i, beta_{i+1}`` by repeated inversion.

    ``2 * depth + 1`` coefficients determine ``alpha_0..alpha_depth``; fewer
    coefficients stop the expansion early.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    c = list(a.coeffs)
    alphas, betas = [], []
    while len(alphas) <= depth:
        if not c:
            return JFraction(alphas, betas, len(alphas) - 1, reason="input exhausted")
        if c[0] == 0:
            if all(x == 0 for x in c):
                alphas.append(c[0])
                return JFraction(alphas, betas, len(alphas) - 1, terminated=True,
                                 reason="finite fraction")
            return JFraction(alphas, betas, len(alphas) - 1,
                             reason="vanishing Hankel determinant")
        alpha = c[0]
        alphas.append(alpha)
        if len(alphas) > depth or len(c) < 2:
            break
        e = series_inv([x / alpha for x in c], len(c))
        betas.append(e[1])
        c = [-x for x in e[2:]]
    return JFraction(alphas, betas, len(alphas) - 1)


# ---------------------------------------------------------------------------
# shifts and the L-sequence test
# ---------------------------------------------------------------------------


def reciprocal_shift(a: MomentSequence, c) -> MomentSequence:
    """``b`` with ``1/b(z) = 1/a(z) + c``, i.e. ``B = A / (1 + c u A)``."""
    if a.exact and isinstance(c, float):
        raise ArithmeticModeError("float shift applied to an exact sequence")
    if a[0] == 0:
        raise NonInvertibleSeriesError("a_0 = 0: a(z) has no formal reciprocal")
    N = len(a)
    one = Fraction(1) if a.exact else 1.0
    denom = [one] + [c * x for x in a.coeffs[: N - 1]]
    return a._like(series_mul(list(a.coeffs), series_inv(denom, N), N))


def l_sequence_transform(s: MomentSequence) -> MomentSequence:
    """``b(z) = M_1(s(z)/2) = (1 - v)/(1 + v)`` with ``v = exp(-s(z))``.

    With ``1 - v = u A`` this is ``B = A / (2 - u A)``.
    """
    a = exp_transform_sequence(s)
    N = len(a)
    two = Fraction(2) if s.exact else 2.0
    denom = [two] + [-x for x in a.coeffs[: N - 1]]
    return s._like(series_mul(list(a.coeffs), series_inv(denom, N), N))


def l_sequence_check(s: MomentSequence, M: int) -> HankelReport:
    """Necessary L-sequence condition through order M: Hankel forms of b are psd.

    The transformed sequence b is attached as ``report.sequence``.
    """
    if len(s) < 2 * M + 1:
        raise ArityError(f"need at least {2 * M + 1} coefficients for M={M}, got {len(s)}")
    b = l_sequence_transform(s)
    report = hankel_determinants(b, M)
    report.sequence = b
    return report
