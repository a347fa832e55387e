"""Generalized Riccati ODE system and stationary characteristic functions.

In the scaled time tau the complex exponent phi_tau = f_tau + i*g_tau solves

    df/dtau = -f + B * Im psi(phi),    f_0 = u,
    dg/dtau = -g - B * Re psi(phi),    g_0 = 0,

with psi the closed-form Levy exponent.  The solution does not depend on the
reversion speed, so one solve serves every component: the log characteristic
function is i*u*xmin + A * R * integral of psi(phi_tau) dtau, with R replaced
by R_n for the finite embedding.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import log

import numpy as np
from scipy.integrate import solve_ivp

from .mixing import discrete_inverse_mean, inverse_mean
from .moments import SupCbiParams
from .tempered_levy import TemperedStableMeasure, levy_exponent, levy_moment


class IntegrabilityError(RuntimeError):
    """Raised when g_tau reaches -b (invalid measure/B combination)."""


@dataclass(frozen=True)
class RiccatiTrajectory:
    """Solution of the scaled Riccati system until |phi| < tol."""

    taus: np.ndarray
    f: np.ndarray
    g: np.ndarray
    u: float
    tol: float
    psi_integral: complex  # integral of psi(phi_tau) dtau over (0, inf)
    sol: object  # dense OdeSolution for residual checks

    @property
    def phi(self) -> np.ndarray:
        return self.f + 1j * self.g


def _rhs(measure: TemperedStableMeasure, B: float):
    def rhs(_tau, y):
        f, g = y[0], y[1]
        psi = levy_exponent(measure, f + 1j * g)
        return [-f + B * psi.imag, -g - B * psi.real, psi.real, psi.imag]

    return rhs


def solve_riccati(
    measure: TemperedStableMeasure, B: float, u: float, tol: float = 1e-10
) -> RiccatiTrajectory:
    """Integrate the scaled Riccati system from phi_0 = u until |phi| < tol.

    The running integral of psi(phi_tau) is carried as two extra state
    components so the solver's error control covers it.
    """
    if B < 0:
        raise ValueError(f"self-excitation scale B must be >= 0, got {B}")
    if not tol > 0:
        raise ValueError(f"tol must be > 0, got {tol}")
    D = 1.0 - B * levy_moment(measure, 1)
    if D <= 0:
        raise ValueError(f"stationarity requires D = 1 - B*M_1 > 0, got {D}")
    if u == 0.0:
        taus = np.array([0.0])
        zero = np.zeros(1)
        return RiccatiTrajectory(
            taus=taus, f=zero, g=zero, u=0.0, tol=tol, psi_integral=0j, sol=None
        )

    def decayed(_tau, y):
        return np.hypot(y[0], y[1]) - tol

    decayed.terminal = True

    def integrability(_tau, y):
        return y[1] + measure.b

    integrability.terminal = True

    tau_max = 4.0 * (log(max(abs(u), 1.0)) - log(tol) + 5.0) / D
    res = solve_ivp(
        _rhs(measure, B),
        (0.0, tau_max),
        [u, 0.0, 0.0, 0.0],
        method="RK45",
        rtol=1e-8,
        atol=tol * 1e-2,
        events=[decayed, integrability],
        dense_output=True,
    )
    if len(res.t_events[1]) > 0:
        raise IntegrabilityError(
            f"Im(phi) reached -b = {-measure.b}: measure/B combination invalid"
        )
    if len(res.t_events[0]) == 0:
        raise RuntimeError(
            f"Riccati trajectory did not decay below tol={tol} by tau={tau_max}"
        )
    return RiccatiTrajectory(
        taus=res.t,
        f=res.y[0],
        g=res.y[1],
        u=u,
        tol=tol,
        psi_integral=complex(res.y[2, -1], res.y[3, -1]),
        sol=res.sol,
    )


def log_charfn(params: SupCbiParams, u: float, tol: float = 1e-10) -> complex:
    """Log C(u) of the continuous superposition at a stationary state."""
    if u == 0.0:
        return 0j
    traj = solve_riccati(params.measure, params.B, u, tol)
    r = inverse_mean(params.mixing)
    return 1j * u * params.xmin + params.A * r * traj.psi_integral


def stationary_charfn(params: SupCbiParams, u: float, tol: float = 1e-10) -> complex:
    """C(u) of the continuous superposition at a stationary state."""
    return np.exp(log_charfn(params, u, tol))


def log_discrete_charfn(
    A, B, measure: TemperedStableMeasure, part, xmin, u: float, tol: float = 1e-10
) -> complex:
    """Log C_n(u) of the finite embedding."""
    if u == 0.0:
        return 0j
    traj = solve_riccati(measure, B, u, tol)
    return 1j * u * xmin + A * discrete_inverse_mean(part) * traj.psi_integral


def charfn_cumulants(params: SupCbiParams, h: float = 1e-3, tol: float = 1e-12):
    """First four cumulants by central finite differences of Log C at 0.

    Uses the conjugate symmetry Log C(-u) = conj(Log C(u)), so three solves
    (u = h/2, h, 2h) give fourth-order stencils for kappa_1, kappa_2 and
    Richardson-extrapolated stencils for kappa_3, kappa_4.
    """
    if not h > 0:
        raise ValueError(f"h must be > 0, got {h}")
    vals = {s: log_charfn(params, s * h, tol) for s in (0.5, 1.0, 2.0)}

    def stencil(step, small, big):
        a1, a2 = small.imag, big.imag
        b1, b2 = small.real, big.real
        k1 = (8.0 * a1 - a2) / (6.0 * step)
        k2 = (b2 - 16.0 * b1) / (6.0 * step**2)
        k3 = (2.0 * a1 - a2) / step**3
        k4 = 2.0 * (b2 - 4.0 * b1) / step**4
        return k1, k2, k3, k4

    coarse = stencil(h, vals[1.0], vals[2.0])
    fine = stencil(h / 2.0, vals[0.5], vals[1.0])
    # kappa_1/kappa_2 stencils are O(h^4); kappa_3/kappa_4 are O(h^2) and
    # get one Richardson step
    return (
        fine[0],
        fine[1],
        (4.0 * fine[2] - coarse[2]) / 3.0,
        (4.0 * fine[3] - coarse[3]) / 3.0,
    )


def sensitivity_deviation(
    measure: TemperedStableMeasure, B: float, u: float = 1e-4
) -> float:
    """Max deviation of the small-u trajectory f_tau/u from exp(-D*tau).

    The linearization of the Riccati system at phi = 0 decays at rate D, so
    this measures how well the solver reproduces that sensitivity.
    """
    traj = solve_riccati(measure, B, u, tol=1e-14)
    D = 1.0 - B * levy_moment(measure, 1)
    return float(np.max(np.abs(traj.f / u - np.exp(-D * traj.taus))))


def discrete_charfn(
    A, B, measure: TemperedStableMeasure, part, xmin, u: float, tol: float = 1e-10
) -> complex:
    """C_n(u) of the finite embedding; shares one Riccati solve across cells
    via the speed rescaling of the trajectory."""
    if u == 0.0:
        return 1.0 + 0j
    traj = solve_riccati(measure, B, u, tol)
    r_n = discrete_inverse_mean(part)
    return np.exp(1j * u * xmin + A * r_n * traj.psi_integral)
