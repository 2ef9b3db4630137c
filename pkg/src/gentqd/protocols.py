"""Landau-Zener Hamiltonians and their transitionless-driving counterparts.

The reference (adiabatic) Hamiltonian is

    H_0(s) = -Delta sigma_z - Omega_R(s) sigma_x,   Omega_R(s) = Delta tan(theta(s)),

with normalized time ``s = t / tau`` and mixing angle ``theta(s)``. Its
instantaneous eigenstates are rotated about ``y`` by ``theta(s)``, so the
counter-diabatic term is the ``sigma_y`` field ``theta'(s) / (2 tau)``.

Generalized driving adds an arbitrary real phase ``theta_n(t)`` per level:

    H_GSA(t) = i sum_n |d_t n><n| - sum_n theta_n(t) |n><n|.

A state starting in ``|k_0>`` then evolves as ``exp(i int theta_k) |k_t>``.
Level index 0 always labels the ``|E_+>`` branch, which is the ground level
of ``H_0`` for ``Delta > 0``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from . import qops
from .errors import DegeneracyError, DivergenceError, StructuralError, TrackingError

DEGENERACY_TOL = 1e-9


@dataclass(frozen=True)
class LZParams:
    """Physical parameters: detuning ``delta`` (rad/ms), final mixing angle
    ``theta0`` (rad) and total time ``tau`` (ms)."""

    delta: float
    theta0: float
    tau: float

    def __post_init__(self):
        for name in ("delta", "theta0", "tau"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise StructuralError(f"{name} must be finite, got {value}")
        if self.delta <= 0:
            raise StructuralError(f"delta must be positive, got {self.delta}")
        if self.theta0 < 0:
            raise StructuralError(f"theta0 must be non-negative, got {self.theta0}")
        if self.tau <= 0:
            raise StructuralError(f"tau must be positive, got {self.tau}")

    @classmethod
    def from_khz(cls, delta_khz: float, theta0: float, tau: float) -> "LZParams":
        return cls(2.0 * math.pi * delta_khz, theta0, tau)

    def with_tau(self, tau: float) -> "LZParams":
        return LZParams(self.delta, self.theta0, tau)


@dataclass(frozen=True)
class Schedule:
    """Mixing-angle profile ``theta(s) = theta0 * shape(s)``.

    ``shape`` must satisfy ``shape(0) = 0`` and ``shape(1) = 1``; ``dshape`` is
    its derivative. Both are applied to numpy arrays.
    """

    name: str
    shape: Callable[[np.ndarray], np.ndarray]
    dshape: Callable[[np.ndarray], np.ndarray]

    def theta(self, params: LZParams, s):
        return params.theta0 * self.shape(np.asarray(s, dtype=float))

    def dtheta(self, params: LZParams, s):
        """Derivative of the mixing angle with respect to ``s``."""
        s = np.asarray(s, dtype=float)
        return params.theta0 * np.broadcast_to(self.dshape(s), s.shape)

    @property
    def is_linear(self) -> bool:
        return self.name == "linear"


LINEAR = Schedule("linear", lambda s: s, lambda s: np.ones_like(s))


class PhaseKind(enum.Enum):
    ADIABATIC = "adiabatic"
    NULL = "null"
    GEOMETRIC = "geometric"
    CUSTOM = "custom"


@dataclass(frozen=True)
class PhaseChoice:
    """Gauge phases ``theta_n(t)`` of generalized transitionless driving.

    ``ADIABATIC`` reproduces traditional driving (``-E_n + i<n|d_t n>``),
    ``GEOMETRIC`` is the energy-optimal choice ``i<d_t n|n>``, ``NULL`` sets
    every phase to zero and ``CUSTOM`` calls ``func(n, t)`` with level index
    ``n`` and time ``t`` in ms.
    """

    kind: PhaseKind
    func: Optional[Callable[[int, float], float]] = field(default=None, compare=False)

    @classmethod
    def adiabatic(cls) -> "PhaseChoice":
        return cls(PhaseKind.ADIABATIC)

    @classmethod
    def null(cls) -> "PhaseChoice":
        return cls(PhaseKind.NULL)

    @classmethod
    def geometric(cls) -> "PhaseChoice":
        return cls(PhaseKind.GEOMETRIC)

    @classmethod
    def custom(cls, func: Callable[[int, float], float]) -> "PhaseChoice":
        return cls(PhaseKind.CUSTOM, func)

    def __post_init__(self):
        if (self.kind is PhaseKind.CUSTOM) != (self.func is not None):
            raise StructuralError("a phase function is required exactly for CUSTOM phases")

    def values(self, energies, vecs, dvecs, t: float) -> np.ndarray:
        """Real phases for every level given the frame and its time derivative."""
        n_levels = vecs.shape[1]
        if self.kind is PhaseKind.NULL:
            return np.zeros(n_levels)
        if self.kind is PhaseKind.CUSTOM:
            return np.array([float(self.func(n, t)) for n in range(n_levels)])
        # <n|dn> per level
        berry = np.einsum("in,in->n", vecs.conj(), dvecs)
        if self.kind is PhaseKind.ADIABATIC:
            theta = -np.asarray(energies) + 1j * berry
        else:
            theta = 1j * berry.conj()
        return theta.real


class Protocol(enum.Enum):
    ADIABATIC = "adiabatic"
    TRADITIONAL_TQD = "traditional_tqd"
    OPTIMAL_TQD = "optimal_tqd"
    GENERALIZED_TQD = "generalized_tqd"


@dataclass(frozen=True)
class ProtocolSpec:
    """Which Hamiltonian family drives the qubit."""

    kind: Protocol
    params: LZParams
    schedule: Schedule = LINEAR
    phases: Optional[PhaseChoice] = None

    def __post_init__(self):
        if isinstance(self.kind, str):
            object.__setattr__(self, "kind", Protocol(self.kind))
        if self.kind is Protocol.GENERALIZED_TQD and self.phases is None:
            raise StructuralError("generalized_tqd requires a PhaseChoice")

    def with_tau(self, tau: float) -> "ProtocolSpec":
        return ProtocolSpec(self.kind, self.params.with_tau(tau), self.schedule, self.phases)


def _scalar_or_array(x, s):
    return float(x) if np.ndim(s) == 0 else x


def mixing_angle(params: LZParams, s, schedule: Schedule = LINEAR):
    return _scalar_or_array(schedule.theta(params, s), s)


def _checked_angle(params: LZParams, s, schedule: Schedule) -> np.ndarray:
    theta = np.asarray(schedule.theta(params, s), dtype=float)
    if np.any(np.abs(theta) >= math.pi / 2):
        raise DivergenceError(
            f"mixing angle reaches {np.max(np.abs(theta)):.6g} >= pi/2; Rabi frequency diverges"
        )
    return theta


def rabi(params: LZParams, s, schedule: Schedule = LINEAR):
    """Rabi frequency ``Delta tan(theta(s))`` in rad/ms."""
    theta = _checked_angle(params, s, schedule)
    return _scalar_or_array(params.delta * np.tan(theta), s)


def h0(params: LZParams, s, schedule: Schedule = LINEAR) -> np.ndarray:
    omega = rabi(params, s, schedule)
    return qops.from_pauli(0.0, -omega, 0.0, -params.delta)


def eigenpair(params: LZParams, s, schedule: Schedule = LINEAR):
    """Analytic eigensystem of ``h0``.

    Returns ``(E_plus, v_plus, E_minus, v_minus)`` with
    ``v_plus = (cos theta/2, sin theta/2)`` at energy ``-Delta sec theta`` and
    ``v_minus = (-sin theta/2, cos theta/2)`` at ``+Delta sec theta``.
    """
    theta = float(_checked_angle(params, s, schedule))
    sec = 1.0 / math.cos(theta)
    c, sn = math.cos(theta / 2), math.sin(theta / 2)
    v_plus = np.array([c, sn], dtype=np.complex128)
    v_minus = np.array([-sn, c], dtype=np.complex128)
    return -params.delta * sec, v_plus, params.delta * sec, v_minus


def gap(params: LZParams, s, schedule: Schedule = LINEAR):
    """Spectral gap ``2 Delta sec theta(s)``, i.e. twice the effective Rabi frequency."""
    theta = _checked_angle(params, s, schedule)
    return _scalar_or_array(2.0 * params.delta / np.cos(theta), s)


def cd_amplitude(params: LZParams, s, schedule: Schedule = LINEAR):
    """Counter-diabatic Rabi frequency ``theta'(s) / (2 tau)`` in rad/ms."""
    return _scalar_or_array(schedule.dtheta(params, s) / (2.0 * params.tau), s)


def h_cd(params: LZParams, s, schedule: Schedule = LINEAR) -> np.ndarray:
    return qops.from_pauli(0.0, 0.0, cd_amplitude(params, s, schedule), 0.0)


def h_sa(params: LZParams, s, schedule: Schedule = LINEAR) -> np.ndarray:
    return h0(params, s, schedule) + h_cd(params, s, schedule)


def h_opsa(params: LZParams, s, schedule: Schedule = LINEAR) -> np.ndarray:
    """Energy-optimal generalized driving; for this model it is ``h_cd`` itself."""
    return h_cd(params, s, schedule)


def _lz_frame(params: LZParams, s: float, schedule: Schedule):
    theta = float(schedule.theta(params, s))
    rate = float(schedule.dtheta(params, s)) / params.tau
    c, sn = math.cos(theta / 2), math.sin(theta / 2)
    vecs = np.array([[c, -sn], [sn, c]], dtype=np.complex128)
    dvecs = 0.5 * rate * np.array([[-sn, -c], [c, -sn]], dtype=np.complex128)
    return theta, vecs, dvecs


def gsa_lz(params: LZParams, s: float, phases: PhaseChoice, schedule: Schedule = LINEAR) -> np.ndarray:
    """Generalized driving Hamiltonian from the analytic Landau-Zener eigenframe."""
    theta, vecs, dvecs = _lz_frame(params, s, schedule)
    if phases.kind is PhaseKind.ADIABATIC:
        _checked_angle(params, s, schedule)
        sec = 1.0 / math.cos(theta)
        energies = np.array([-params.delta * sec, params.delta * sec])
    else:
        energies = None
    return _generalized(vecs, dvecs, energies, phases, s * params.tau)


def _generalized(vecs, dvecs, energies, phases: PhaseChoice, t: float) -> np.ndarray:
    theta = phases.values(energies, vecs, dvecs, t)
    h = 1j * dvecs @ vecs.conj().T - (vecs * theta) @ vecs.conj().T
    return 0.5 * (h + h.conj().T)


def _track_frames(hs: np.ndarray):
    n_samples, dim = hs.shape[0], hs.shape[1]
    energies = np.empty((n_samples, dim))
    frames = np.empty((n_samples, dim, dim), dtype=np.complex128)
    for k in range(n_samples):
        vals, vecs = qops.eig_herm(hs[k])
        if dim > 1 and np.min(np.diff(vals)) < DEGENERACY_TOL:
            raise DegeneracyError(f"degenerate spectrum at sample {k}: {vals}")
        if k > 0:
            overlap = np.abs(frames[k - 1].conj().T @ vecs)
            perm = np.argmax(overlap, axis=1)
            matched = overlap[np.arange(dim), perm]
            if len(set(perm.tolist())) != dim or np.min(matched) <= 1 / math.sqrt(2):
                raise TrackingError(
                    f"cannot match eigenframes between samples {k - 1} and {k}; "
                    "sample the trajectory more densely"
                )
            vals, vecs = vals[perm], vecs[:, perm]
            ph = np.einsum("in,in->n", frames[k - 1].conj(), vecs)
            vecs = vecs * (ph.conj() / np.abs(ph))
        energies[k] = vals
        frames[k] = vecs
    return energies, frames


def gsa_general(times, hs, phases: PhaseChoice) -> np.ndarray:
    """Generalized driving Hamiltonian for a sampled Hamiltonian trajectory.

    Parameters
    ----------
    times : array_like, shape (K,)
        Strictly increasing sample times in ms, ``K >= 3``.
    hs : array_like, shape (K, N, N)
        Hermitian Hamiltonians at those times.
    phases : PhaseChoice
        Level phases; level ``n`` is the eigenvector that starts as the
        ``n``-th lowest at ``times[0]`` and is followed by maximal overlap.

    Returns
    -------
    numpy.ndarray, shape (K, N, N)
        Hermitian (symmetrized) Hamiltonians. Frame derivatives use second
        order finite differences, so the error is ``O(dt^2)``.

    Raises
    ------
    DegeneracyError
        If two eigenvalues at a sample are closer than ``1e-9``.
    TrackingError
        If adjacent frames do not overlap unambiguously.
    """
    times = np.asarray(times, dtype=float)
    hs = np.asarray(hs, dtype=np.complex128)
    if hs.ndim != 3 or hs.shape[0] != times.shape[0] or hs.shape[1] != hs.shape[2]:
        raise StructuralError(f"hs shape {hs.shape} incompatible with {times.shape[0]} samples")
    if times.shape[0] < 3:
        raise StructuralError("at least three samples are required")
    if np.any(np.diff(times) <= 0):
        raise StructuralError("sample times must be strictly increasing")
    energies, frames = _track_frames(hs)
    dframes = np.gradient(frames, times, axis=0, edge_order=2)
    return np.stack([
        _generalized(frames[k], dframes[k], energies[k], phases, times[k])
        for k in range(times.shape[0])
    ])


def target_state(params: LZParams, s, schedule: Schedule = LINEAR) -> np.ndarray:
    """Instantaneous ``|E_+(s)>`` with the global phase dropped."""
    return eigenpair(params, s, schedule)[1]


def target_states(params: LZParams, s, schedule: Schedule = LINEAR) -> np.ndarray:
    """Vectorized :func:`target_state`, shape ``(len(s), 2)``."""
    theta = _checked_angle(params, s, schedule)
    return np.stack([np.cos(theta / 2), np.sin(theta / 2)], axis=-1).astype(np.complex128)


def accumulated_phase(params: LZParams, phases: PhaseChoice, s: float = 1.0,
                      level: int = 0, schedule: Schedule = LINEAR) -> float:
    """``int_0^{s tau} theta_level(t) dt`` for generalized driving on the LZ model.

    The driven state is ``exp(i * result) |level_t>``.
    """
    def integrand(t):
        sv = t / params.tau
        _, vecs, dvecs = _lz_frame(params, sv, schedule)
        energies = None
        if phases.kind is PhaseKind.ADIABATIC:
            sec = 1.0 / math.cos(float(_checked_angle(params, sv, schedule)))
            energies = np.array([-params.delta * sec, params.delta * sec])
        return phases.values(energies, vecs, dvecs, t)[level]

    value, _ = integrate.quad(integrand, 0.0, s * params.tau, epsabs=1e-13, epsrel=1e-12, limit=200)
    return float(value)


def pauli_series(spec: ProtocolSpec, s) -> tuple:
    """Pauli coefficients ``(c0, cx, cy, cz)`` of the driving Hamiltonian on an ``s`` grid."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    p, sched = spec.params, spec.schedule
    zeros = np.zeros_like(s)
    if spec.kind is Protocol.OPTIMAL_TQD:
        return zeros, zeros, cd_amplitude(p, s, sched), zeros
    if spec.kind is Protocol.GENERALIZED_TQD:
        return qops.pauli_coefficients(np.stack([gsa_lz(p, sv, spec.phases, sched) for sv in s]))
    omega = rabi(p, s, sched)
    cy = cd_amplitude(p, s, sched) if spec.kind is Protocol.TRADITIONAL_TQD else zeros
    return zeros, -omega, cy, np.full_like(s, -p.delta)


def hamiltonian_series(spec: ProtocolSpec, s) -> np.ndarray:
    """Driving Hamiltonians stacked on an ``s`` grid, shape ``(len(s), 2, 2)``."""
    return qops.from_pauli(*pauli_series(spec, s))


def hamiltonian(spec: ProtocolSpec, s: float) -> np.ndarray:
    p, sched = spec.params, spec.schedule
    if spec.kind is Protocol.ADIABATIC:
        return h0(p, s, sched)
    if spec.kind is Protocol.TRADITIONAL_TQD:
        return h_sa(p, s, sched)
    if spec.kind is Protocol.OPTIMAL_TQD:
        return h_opsa(p, s, sched)
    return gsa_lz(p, s, spec.phases, sched)
