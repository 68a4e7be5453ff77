"""Finite-difference checks of sub/harmonicity off the support.

Two fields are examined for a density rho in R^n:

* ``E``-form: ``log(1 - E_rho)`` (n = 2) or ``(1 - E_rho)^{(n-2)/n} / (n-2)``;
* ``M``-form: ``log M_2(V_rho)`` (n = 2) or ``M_n(V_rho)^{(n-2)/n}``.

For n = 2 both coincide because ``M_2(V) = 1 - exp(-V) = 1 - E_rho``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .potential import (Density, Kernel, e_rho, gradient_integrals, householder_to_axis,
                        j_functional, v_rho, vector_integral)
from .profile import ProfileParams, SeriesTruncationError, evaluator_for, phi_eval
from .report import InequalitySlack, VerificationReport

DEFECT_FLOOR = 1e-5
MAX_STEP = 0.05


class StencilError(ValueError):
    """The finite-difference stencil reaches into the support."""


class FieldKind(str, Enum):
    E = "E"
    M = "M"


@dataclass(frozen=True)
class LaplacianEstimate:
    value: float
    stencil_h: float
    richardson_error: float
    integral_error: float = 0.0

    @property
    def budget(self) -> float:
        """Additive error budget: Richardson plus propagated quadrature error."""
        return self.richardson_error + self.integral_error


def _second_difference(field, x, h, f0):
    total = 0.0
    for i in range(len(x)):
        e = np.zeros(len(x))
        e[i] = h
        total += field(x + e) + field(x - e) - 2.0 * f0
    return total / (h * h)


def fd_laplacian(field, x, h: float, rho: Density | None = None) -> LaplacianEstimate:
    """Central-difference Laplacian at steps h and h/2, Richardson-extrapolated.

    If ``rho`` is given the stencil must stay at least ``h`` away from its
    support.
    """
    x = np.asarray(x, dtype=float)
    if not h > 0:
        raise ValueError("h must be positive")
    if rho is not None and rho.support_distance(x) < 2.0 * h:
        raise StencilError(f"stencil of half-width {h} at {x.tolist()} is too close to the support")
    f0 = field(x)
    coarse = _second_difference(field, x, h, f0)
    fine = _second_difference(field, x, h / 2.0, f0)
    return LaplacianEstimate(value=(4.0 * fine - coarse) / 3.0, stencil_h=h,
                             richardson_error=abs(fine - coarse))


def default_step(rho: Density, x) -> float:
    return min(MAX_STEP, rho.support_distance(x) / 8.0)


def field_function(rho: Density, form):
    """The scalar field of the requested form as a function of a point."""
    form = FieldKind(form)
    n = rho.dim
    if n == 2:
        # both forms reduce to log(1 - exp(-V))
        return lambda x: math.log(-math.expm1(-v_rho(rho, x)))
    if form is FieldKind.E:
        return lambda x: (-math.expm1(-2.0 * v_rho(rho, x) / n)) ** ((n - 2) / n) / (n - 2)
    ev = evaluator_for(ProfileParams.for_dimension(n))
    return lambda x: ev(v_rho(rho, x)) ** ((n - 2) / n)


def _field_sensitivity(rho: Density, form, V: float) -> float:
    """``|dF/dV|`` at V, used to propagate quadrature error into the field."""
    n = rho.dim
    if n == 2:
        return math.exp(-V) / -math.expm1(-V)
    if FieldKind(form) is FieldKind.E:
        one_minus_e = -math.expm1(-2.0 * V / n)
        return (2.0 / n) * math.exp(-2.0 * V / n) * one_minus_e ** (-2.0 / n) / n
    ev = evaluator_for(ProfileParams.for_dimension(n))
    m = ev(V)
    return ((n - 2) / n) * m ** (-2.0 / n) * (1.0 - m ** (2.0 / n))


def subharmonic_defect(rho: Density, x, form, h: float | None = None) -> LaplacianEstimate:
    """Laplacian of the chosen field at an exterior point ``x``."""
    x = np.asarray(x, dtype=float)
    h = h or default_step(rho, x)
    est = fd_laplacian(field_function(rho, form), x, h, rho)
    if rho.grid is None:
        return est
    J = j_functional(rho, Kernel.G, x)
    noise = _field_sensitivity(rho, form, J.value) * J.abs_error_estimate * 4 * rho.dim / h**2
    return LaplacianEstimate(est.value, est.stencil_h, est.richardson_error, noise)


def m_form_laplacian(rho: Density, x) -> float:
    """Laplacian of the M-form from the integrals A, B (no differencing).

    ``2(n-2)(1 - m^{2/n}) m^{(n-2)/n - 2} (m B - |A|^2)`` for n >= 3 and
    ``4 (1 - m) / m^2 (m B - |A|^2)`` for n = 2, where ``m = M_n(V_rho(x))``.
    """
    n = rho.dim
    A, B = gradient_integrals(rho, x)
    m = evaluator_for(ProfileParams.for_dimension(n))(v_rho(rho, x))
    bracket = m * B - float(A @ A)
    if n == 2:
        return 4.0 * (1.0 - m) / m**2 * bracket
    return 2.0 * (n - 2) * (1.0 - m ** (2.0 / n)) * m ** ((n - 2) / n - 2.0) * bracket


def sign_bracket(rho: Density, x) -> float:
    """``M_n(V) B - |A|^2``, whose sign is the sign of the M-form Laplacian."""
    A, B = gradient_integrals(rho, x)
    m = evaluator_for(ProfileParams.for_dimension(rho.dim))(v_rho(rho, x))
    return m * B - float(A @ A)


def pointwise_inequality_check(rho: Density, x, route: str = "vector",
                               tol: float = 1e-6) -> InequalitySlack:
    """``(1 - (n-2)/n E) |A|^2 <= (1 - E) B`` at an exterior point.

    ``route="rotated"`` moves x to the origin and rotates A onto ``+e_1`` so
    the vector integral becomes the scalar ``J(zeta_1 |zeta|^{-(n+2)} rho_1)``
    (ball densities only).
    """
    n = rho.dim
    x = np.asarray(x, dtype=float)
    w = v_rho(rho, x)
    E = math.exp(-2.0 * w / n)
    one_minus_e = -math.expm1(-2.0 * w / n)
    if route == "vector":
        A, B = gradient_integrals(rho, x)
        a_norm2 = float(A @ A)
    elif route == "rotated":
        shifted = rho.translated(-x)
        vec, _ = vector_integral(shifted, Kernel.PHI_INV, np.zeros(n))
        rho1 = shifted.rotated(householder_to_axis(vec)) if np.any(vec) else shifted
        a_norm2 = j_functional(rho1, Kernel.PHI_INV).value ** 2
        B = j_functional(rho1, Kernel.G_INV).value
    else:
        raise ValueError(f"unknown route {route!r}")
    lhs = (1.0 - (n - 2) / n * E) * a_norm2
    rhs = one_minus_e * B
    return InequalitySlack(lhs=lhs, rhs=rhs, w=w, tol=tol)


def composed_transform(rho: Density, x) -> float:
    """``1 - M_n(V_rho(x))``."""
    ev = evaluator_for(ProfileParams.for_dimension(rho.dim))
    return ev.complement(v_rho(rho, x))


def composed_identity_gap(rho: Density, x) -> tuple[float, str]:
    """``|1 - M_n(V) - phi_{2/n}(E)|`` with phi from its Taylor series.

    Falls back to the composition route (and says so) when the series would
    need more than the maximal truncation order.
    """
    n = rho.dim
    big_e = composed_transform(rho, x)
    E = e_rho(rho, x)
    try:
        phi = phi_eval(2.0 / n, E, route="series")
        route = "series"
    except SeriesTruncationError:
        phi = phi_eval(2.0 / n, E, route="composition")
        route = "composition"
    return abs(big_e - phi), route


def exterior_points(rho: Density, count: int, seed: int = 0, factors=(1.5, 2.0, 4.0)) -> np.ndarray:
    """Points on spheres of radii ``factors * circumradius`` about the centroid."""
    rng = np.random.default_rng(seed)
    centroid, radius = rho.bounding_sphere()
    dirs = rng.standard_normal((count, rho.dim))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = np.array([factors[i % len(factors)] for i in range(count)]) * radius
    return centroid + dirs * radii[:, None]


def subharmonic_suite(rho: Density, form, points: int = 100, seed: int = 0,
                      floor: float = DEFECT_FLOOR, pts=None, mapper=map) -> VerificationReport:
    """Check ``Laplacian >= -(budget + floor)`` at sampled exterior points."""
    pts = exterior_points(rho, points, seed) if pts is None else pts
    worst = math.inf
    rows = []
    f = field_function(rho, form)
    estimates = list(mapper(lambda x: subharmonic_defect(rho, x, form), pts))
    for x, est in zip(pts, estimates):
        margin = est.value + est.budget
        worst = min(worst, margin)
        rows.append({"x": " ".join(f"{c:.12g}" for c in x), "field": f(x), "laplacian": est.value,
                     "error": est.budget, "pass": margin >= -floor})
    return VerificationReport(name=f"subharmonic-{FieldKind(form).value}",
                              params={"n": rho.dim, "form": FieldKind(form).value, "seed": seed},
                              samples=len(rows), worst=worst, tolerance=floor, kind="slack",
                              details=rows)


def harmonic_ball_suite(n: int, R: float = 1.0, points: int = 50, seed: int = 0,
                        mapper=map) -> VerificationReport:
    """``|Laplacian of the M-form| <= 3 * richardson_error`` outside a centred ball."""
    rho = Density.ball(np.zeros(n), R)
    pts = exterior_points(rho, points, seed, factors=(2.0, 3.0, 4.0))
    f = field_function(rho, FieldKind.M)
    worst = math.inf
    rows = []
    estimates = list(mapper(lambda x: subharmonic_defect(rho, x, FieldKind.M), pts))
    for x, est in zip(pts, estimates):
        margin = 3.0 * est.richardson_error - abs(est.value)
        worst = min(worst, margin)
        rows.append({"x": " ".join(f"{c:.12g}" for c in x), "field": f(x), "laplacian": est.value,
                     "error": est.richardson_error, "pass": margin >= 0})
    return VerificationReport(name="harmonic-ball", params={"n": n, "R": R, "seed": seed},
                              samples=len(rows), worst=worst, tolerance=0.0, kind="slack",
                              details=rows)
