"""Energy-cost figures of merit and the characteristic time scales.

Two cost measures are compared across protocols:

* average field intensity ``I(tau) = int_0^1 Omega^2(s) ds`` (amplifier
  constant set to 1), where ``Omega^2`` is the squared transverse drive, and
* the action-like norm ``Sigma(tau) = int_0^tau sqrt(Tr H^2) dt``.

Crossover times where optimal driving becomes cheaper than the adiabatic
protocol are located by bisection; for the linear schedule they also have
closed forms, exposed as ``closed_*`` helpers for cross-checking.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .errors import BracketError, StructuralError
from .protocols import (
    LINEAR,
    LZParams,
    Protocol,
    ProtocolSpec,
    Schedule,
    eigenpair,
    hamiltonian,
    pauli_series,
    rabi,
)
from . import qops

DEFAULT_BRACKET = (1e-4, 10.0)
GL_NODES = 64


@dataclass(frozen=True)
class CostReport:
    tau: float
    i_ad: float
    i_sa: float
    i_opsa: float
    sigma_ad: float
    sigma_sa: float
    sigma_opsa: float


def _tan_ratio_minus_one(x: float) -> float:
    """``tan(x)/x - 1`` without cancellation for small ``x``."""
    if x < 1e-3:
        x2 = x * x
        return x2 / 3 + 2 * x2 * x2 / 15 + 17 * x2 ** 3 / 315
    return math.tan(x) / x - 1.0


def _log_sec_tan_over(x: float) -> float:
    """``ln(sec x + tan x) / x``, tending to 1 as ``x -> 0``."""
    if x < 1e-4:
        return 1.0 + x * x / 6
    return math.log(1.0 / math.cos(x) + math.tan(x)) / x


def _spec(kind: Protocol, params: LZParams, schedule: Schedule) -> ProtocolSpec:
    return ProtocolSpec(kind, params, schedule)


def _check_closed_form(spec: ProtocolSpec):
    if not spec.schedule.is_linear:
        raise StructuralError("closed forms exist only for the linear schedule")
    if spec.kind is Protocol.GENERALIZED_TQD:
        raise StructuralError("no closed form for generalized phases")


def intensity_density(spec: ProtocolSpec, s) -> np.ndarray:
    """Squared transverse drive ``Omega_x^2 + Omega_y^2`` along ``s``."""
    _, cx, cy, _ = pauli_series(spec, s)
    return np.asarray(cx) ** 2 + np.asarray(cy) ** 2


def avg_intensity_closed(spec: ProtocolSpec) -> float:
    _check_closed_form(spec)
    p = spec.params
    i_ad = p.delta ** 2 * _tan_ratio_minus_one(p.theta0)
    i_op = p.theta0 ** 2 / (4.0 * p.tau ** 2)
    return {Protocol.ADIABATIC: i_ad, Protocol.OPTIMAL_TQD: i_op,
            Protocol.TRADITIONAL_TQD: i_ad + i_op}[spec.kind]


def avg_intensity_quad(spec: ProtocolSpec) -> float:
    """Adaptive-quadrature value of the average intensity."""
    value, _ = integrate.quad(lambda s: float(intensity_density(spec, s)[0]), 0.0, 1.0,
                              epsabs=0.0, epsrel=1e-13, limit=200)
    return float(value)


def avg_intensity(spec: ProtocolSpec) -> float:
    """Time-averaged field intensity with the amplifier constant set to 1.

    Uses the closed forms for the linear schedule and quadrature otherwise.
    """
    if spec.schedule.is_linear and spec.kind is not Protocol.GENERALIZED_TQD:
        return avg_intensity_closed(spec)
    return avg_intensity_quad(spec)


def relative_intensities(params: LZParams, tau: float = None, schedule: Schedule = LINEAR) -> tuple:
    """``(i_ad, i_sa, i_opsa)`` normalized to the adiabatic intensity."""
    p = params if tau is None else params.with_tau(tau)
    ad = avg_intensity(_spec(Protocol.ADIABATIC, p, schedule))
    op = avg_intensity(_spec(Protocol.OPTIMAL_TQD, p, schedule))
    if ad <= 0:
        raise StructuralError("adiabatic intensity vanishes; relative intensities undefined")
    ratio = op / ad
    return 1.0, 1.0 + ratio, ratio


def sigma_cost(spec: ProtocolSpec, nodes: int = GL_NODES) -> float:
    """``int_0^tau sqrt(Tr H^2) dt`` by Gauss-Legendre quadrature in ``s``."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    s = 0.5 * (x + 1.0)
    c0, cx, cy, cz = (np.asarray(c) for c in pauli_series(spec, s))
    norm = np.sqrt(2.0 * (c0 ** 2 + cx ** 2 + cy ** 2 + cz ** 2))
    return float(0.5 * np.dot(w, norm) * spec.params.tau)


def sigma_cost_quad(spec: ProtocolSpec) -> float:
    """Adaptive-quadrature oracle for :func:`sigma_cost` using explicit matrices."""
    value, _ = integrate.quad(lambda s: math.sqrt(qops.hs_norm_sq(hamiltonian(spec, s))),
                              0.0, 1.0, epsabs=0.0, epsrel=1e-13, limit=200)
    return float(value * spec.params.tau)


def sigma_cost_closed(spec: ProtocolSpec) -> float:
    _check_closed_form(spec)
    p = spec.params
    if spec.kind is Protocol.ADIABATIC:
        return p.tau * math.sqrt(2.0) * p.delta * _log_sec_tan_over(p.theta0)
    if spec.kind is Protocol.OPTIMAL_TQD:
        return p.theta0 / math.sqrt(2.0)
    raise StructuralError("no closed form for the traditional protocol")


def cost_report(params: LZParams, tau: float = None, schedule: Schedule = LINEAR) -> CostReport:
    p = params if tau is None else params.with_tau(tau)
    i_ad, i_sa, i_op = relative_intensities(p, schedule=schedule)
    sig = {k: sigma_cost(_spec(k, p, schedule))
           for k in (Protocol.ADIABATIC, Protocol.TRADITIONAL_TQD, Protocol.OPTIMAL_TQD)}
    return CostReport(p.tau, i_ad, i_sa, i_op, sig[Protocol.ADIABATIC],
                      sig[Protocol.TRADITIONAL_TQD], sig[Protocol.OPTIMAL_TQD])


def adiabaticity_integrand(params: LZParams, s: float, schedule: Schedule = LINEAR) -> float:
    """``|<E_-| d_s H_0 |E_+>| / g^2`` at one value of ``s`` (units of ms)."""
    theta = float(schedule.theta(params, s))
    d_omega = params.delta * float(schedule.dtheta(params, s)) / math.cos(theta) ** 2
    e_plus, v_plus, e_minus, v_minus = eigenpair(params, s, schedule)
    d_h0 = -d_omega * qops.SIGMA_X
    element = np.vdot(v_minus, d_h0 @ v_plus)
    return float(abs(element) / (e_plus - e_minus) ** 2)


def tau_adiabatic(params: LZParams, schedule: Schedule = LINEAR, grid: int = 2001) -> float:
    """Adiabatic time scale: maximum of :func:`adiabaticity_integrand` over ``s``."""
    s = np.linspace(0.0, 1.0, grid)
    values = np.array([adiabaticity_integrand(params, sv, schedule) for sv in s])
    i = int(np.argmax(values))
    best = float(values[i])
    if 0 < i < grid - 1 and values[i] > max(values[i - 1], values[i + 1]):
        res = optimize.minimize_scalar(lambda x: -adiabaticity_integrand(params, x, schedule),
                                       bracket=(s[i - 1], s[i], s[i + 1]), method="golden",
                                       tol=1e-12)
        if 0.0 <= res.x <= 1.0:
            best = max(best, -float(res.fun))
    return best


def closed_tau_adiabatic(params: LZParams) -> float:
    return params.theta0 / (4.0 * params.delta)


def closed_tau_boundary_intensity(params: LZParams) -> float:
    return params.theta0 / (2.0 * params.delta * math.sqrt(_tan_ratio_minus_one(params.theta0)))


def closed_tau_boundary_sigma(params: LZParams) -> float:
    return params.theta0 / (2.0 * params.delta * _log_sec_tan_over(params.theta0))


def _bisect(objective, bracket, expand: bool) -> float:
    lo, hi = bracket
    f_lo, f_hi = objective(lo), objective(hi)
    for _ in range(12 if expand else 0):
        if f_lo * f_hi < 0:
            break
        lo, hi = lo / 10.0, hi * 10.0
        f_lo, f_hi = objective(lo), objective(hi)
    if f_lo * f_hi >= 0:
        raise BracketError(
            f"no sign change on [{lo:g}, {hi:g}] ms (values {f_lo:.3g}, {f_hi:.3g}); "
            "widen the bracket"
        )
    return float(optimize.bisect(objective, lo, hi, xtol=1e-16, rtol=4 * np.finfo(float).eps,
                                 maxiter=400))


def intensity_crossing_objective(params: LZParams, schedule: Schedule = LINEAR):
    return lambda tau: relative_intensities(params, tau, schedule)[2] - 1.0


def sigma_crossing_objective(params: LZParams, schedule: Schedule = LINEAR):
    def objective(tau):
        p = params.with_tau(tau)
        ad = sigma_cost(_spec(Protocol.ADIABATIC, p, schedule))
        return sigma_cost(_spec(Protocol.OPTIMAL_TQD, p, schedule)) / ad - 1.0
    return objective


def tau_boundary_intensity(params: LZParams, schedule: Schedule = LINEAR,
                           bracket=DEFAULT_BRACKET, expand: bool = False) -> float:
    """Total time at which optimal driving needs the same intensity as the adiabatic one.

    With ``expand`` the bracket is widened by decades until the sign changes.
    """
    rabi(params, 1.0, schedule)
    return _bisect(intensity_crossing_objective(params, schedule), bracket, expand)


def tau_boundary_sigma(params: LZParams, schedule: Schedule = LINEAR,
                       bracket=DEFAULT_BRACKET, expand: bool = False) -> float:
    """Total time at which ``Sigma_OpSA = Sigma_Ad``."""
    rabi(params, 1.0, schedule)
    return _bisect(sigma_crossing_objective(params, schedule), bracket, expand)
