"""The extremal problem for ``Phi(rho) = J(phi rho)^2 / J(f rho)``.

Under the constraint ``J(g rho) = w`` the maximum of ``Phi`` is ``M_n(w)``,
attained by the ball ``D(alpha, tau)`` centred at ``(tau, 0, ..., 0)`` with
radius ``sqrt(tau^2 - alpha^2)``.  Everything here is evaluated at the origin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .potential import Ball, Density, Kernel, j_functional
from .profile import m_n, t_n_inverse
from .report import InequalitySlack, VerificationReport, merge_slacks

CLOSED_FORM_TOL = 1e-6
GRID_TOL = 1e-4


class DegenerateDensityError(ValueError):
    pass


def _tol_for(rho: Density) -> float:
    return CLOSED_FORM_TOL if rho.grid is None else GRID_TOL


@dataclass(frozen=True)
class ExtremalBall:
    """The maximizer for given ``(n, w)``, normalized so that ``J(f chi) = 1``."""

    n: int
    w: float
    xi: float
    alpha_param: float
    tau: float

    @property
    def center(self) -> tuple:
        return (self.tau,) + (0.0,) * (self.n - 1)

    @property
    def radius(self) -> float:
        # sqrt(tau^2 - alpha^2) = alpha sinh(xi), without the cancellation
        return self.alpha_param * math.sinh(self.xi)

    def density(self) -> Density:
        return Density(self.n, (Ball(self.center, self.radius, 1.0),))


def extremal_ball(n: int, w: float) -> ExtremalBall:
    if n < 2:
        raise ValueError("n must be >= 2")
    if not w > 0:
        raise ValueError("w must be positive")
    xi = t_n_inverse(n, w)
    alpha = math.sqrt(math.cosh(xi) ** (n - 2) / math.sinh(xi) ** n)
    return ExtremalBall(n=n, w=w, xi=xi, alpha_param=alpha, tau=alpha * math.cosh(xi))


def phi_functional(rho: Density) -> float:
    """``Phi(rho) = J(phi rho)^2 / J(f rho)`` at the origin."""
    denom = j_functional(rho, Kernel.F).value
    if denom <= 0:
        raise DegenerateDensityError("J(f rho) vanishes; the density is zero a.e.")
    return j_functional(rho, Kernel.PHI).value ** 2 / denom


def verify_main_inequality(rho: Density, tol: float | None = None) -> InequalitySlack:
    """``J(phi rho)^2 <= M_n(J(g rho)) J(f rho)``."""
    n = rho.dim
    w = j_functional(rho, Kernel.G).value
    lhs = j_functional(rho, Kernel.PHI).value ** 2
    rhs = m_n(n, w) * j_functional(rho, Kernel.F).value
    return InequalitySlack(lhs=lhs, rhs=rhs, w=w, tol=tol or _tol_for(rho))


def verify_inverted_inequality(rho: Density, tol: float | None = None) -> InequalitySlack:
    """``J(x_1 |x|^{-(n+2)} rho)^2 <= M_n(J(g rho)) J(|x|^{-(n+2)} rho)``."""
    n = rho.dim
    w = j_functional(rho, Kernel.G).value
    lhs = j_functional(rho, Kernel.PHI_INV).value ** 2
    rhs = m_n(n, w) * j_functional(rho, Kernel.G_INV).value
    return InequalitySlack(lhs=lhs, rhs=rhs, w=w, tol=tol or _tol_for(rho))


def bathtub_level_set_check(alpha_param: float, tau: float, samples: int, n: int = 3,
                            seed: int = 0) -> VerificationReport:
    """Compare membership in ``D(alpha, tau)`` with ``x_1/(|x|^2+alpha^2) > 1/(2 tau)``.

    Points are drawn uniformly from a box around the ball that also covers
    part of the half-space ``x_1 <= 0``.  Points within 1e-12 of the
    threshold are skipped.
    """
    if not tau > alpha_param > 0:
        raise ValueError("need tau > alpha > 0")
    rng = np.random.default_rng(seed)
    radius = math.sqrt(tau * tau - alpha_param * alpha_param)
    lo = np.full(n, -radius * 1.5)
    hi = np.full(n, radius * 1.5)
    lo[0], hi[0] = -0.5 * tau, tau + 1.5 * radius
    pts = lo + (hi - lo) * rng.random((samples, n))
    r2 = np.sum(pts**2, axis=1)
    h = pts[:, 0] / (r2 + alpha_param**2)
    threshold = 1.0 / (2.0 * tau)
    center = np.zeros(n)
    center[0] = tau
    in_ball = np.sum((pts - center) ** 2, axis=1) < radius**2
    decided = np.abs(h - threshold) > 1e-12
    mismatches = int(np.sum((in_ball != (h > threshold)) & decided))
    return VerificationReport(
        name="bathtub",
        params={"alpha": alpha_param, "tau": tau, "n": n, "seed": seed,
                "skipped_ties": int(np.sum(~decided)), "inside": int(np.sum(in_ball))},
        samples=int(np.sum(decided)),
        worst=float(mismatches),
        tolerance=0.0,
        kind="defect",
    )


def random_inequality_suite(n: int, samples: int, seed: int = 0, inverted: bool = False,
                            tol: float = CLOSED_FORM_TOL, mapper=map) -> VerificationReport:
    """Slacks of the (inverted) inequality over seeded random ball densities.

    Each sample draws from its own child of ``SeedSequence(seed)``, so the
    result does not depend on evaluation order.
    """
    from .potential import random_ball_density

    children = np.random.SeedSequence(seed).spawn(samples)
    check = verify_inverted_inequality if inverted else verify_main_inequality

    def one(ss):
        return check(random_ball_density(np.random.default_rng(ss), n), tol)

    slacks = list(mapper(one, children))
    name = "inverted-inequality" if inverted else "inequality"
    return merge_slacks(name, {"n": n, "seed": seed}, slacks, tol)


def extremal_report(n: int, w: float) -> VerificationReport:
    """``|Phi(D) - M_n(w)|`` for the closed-form extremal ball."""
    ball = extremal_ball(n, w)
    rho = ball.density()
    defect = abs(phi_functional(rho) - m_n(n, w))
    return VerificationReport(name="extremal",
                              params={"n": n, "w": w, "xi": ball.xi, "alpha": ball.alpha_param,
                                      "tau": ball.tau, "constraint": j_functional(rho, Kernel.G).value},
                              samples=1, worst=defect, tolerance=1e-10, kind="defect")
