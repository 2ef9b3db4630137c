"""Time evolution of the driven qubit.

Three propagators share one time grid ``t_k = k tau / steps``:

* :func:`propagate_unitary` applies the exact exponential of the Hamiltonian
  sampled at each step midpoint.
* :func:`propagate_lindblad` integrates the dephasing master equation

      d rho / dt = -i [H, rho] + gamma (sigma_z rho sigma_z - rho)

  with the classical fixed-step Runge-Kutta scheme.
* :func:`propagate_stochastic` averages pure trajectories driven by
  ``H + xi(t) sigma_z`` with white Gaussian ``xi``. Its ensemble mean
  converges to the master equation and serves as an independent check on it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import qops
from .errors import IntegratorError, StructuralError
from .protocols import ProtocolSpec, pauli_series, target_states

MIN_UNITARY_STEPS = 100
MIN_ENSEMBLE = 100
STABILITY_LIMIT = 0.05
TRACE_TOL = 1e-6
PSD_FAIL_TOL = 1e-6


@dataclass(frozen=True)
class NoiseConfig:
    gamma: float
    ensemble_size: int = 1
    rng_seed: int = 0

    def __post_init__(self):
        if not math.isfinite(self.gamma) or self.gamma < 0:
            raise StructuralError(f"gamma must be a non-negative rate, got {self.gamma}")
        if self.ensemble_size < 1:
            raise StructuralError(f"ensemble_size must be >= 1, got {self.ensemble_size}")


@dataclass(frozen=True)
class EvolutionResult:
    """Sampled trajectory of one propagation.

    ``states`` holds state vectors, shape ``(len(times), 2)``, for unitary
    runs and density matrices, shape ``(len(times), 2, 2)``, otherwise.
    ``fidelity_stderr`` is only set for stochastic ensembles.
    """

    spec: ProtocolSpec
    times: np.ndarray
    states: np.ndarray
    final_fidelity: float
    fidelity_stderr: Optional[float] = None

    @property
    def is_pure(self) -> bool:
        return self.states.ndim == 2

    @property
    def s(self) -> np.ndarray:
        return self.times / self.spec.params.tau

    def density_matrices(self) -> np.ndarray:
        if self.is_pure:
            return np.einsum("ki,kj->kij", self.states, self.states.conj())
        return self.states

    def fidelities(self) -> np.ndarray:
        """Instantaneous fidelity against ``|E_+(s)>`` at every sample."""
        targets = target_states(self.spec.params, self.s, self.spec.schedule)
        if self.is_pure:
            return np.abs(np.einsum("ki,ki->k", targets.conj(), self.states))
        overlap = np.einsum("ki,kij,kj->k", targets.conj(), self.states, targets).real
        return np.sqrt(np.clip(overlap, 0.0, 1.0))

    def populations(self) -> np.ndarray:
        rho = self.density_matrices()
        return np.stack([rho[:, 0, 0].real, rho[:, 1, 1].real], axis=-1)

    def coherence(self) -> np.ndarray:
        return np.abs(self.density_matrices()[:, 0, 1])

    def trace(self) -> np.ndarray:
        return np.trace(self.density_matrices(), axis1=1, axis2=2).real

    def purity(self) -> np.ndarray:
        rho = self.density_matrices()
        return np.einsum("kij,kji->k", rho, rho).real


def _final_fidelity(spec: ProtocolSpec, state: np.ndarray) -> float:
    target = target_states(spec.params, 1.0, spec.schedule)
    if state.ndim == 1:
        return float(min(abs(np.vdot(target, state)), 1.0))
    return qops.fidelity(state, target)


def _initial_state(psi0):
    if psi0 is None:
        return np.array(qops.KET_0)
    return qops.check_state(psi0)


def _coefficients(spec: ProtocolSpec, s) -> tuple:
    return tuple(np.asarray(c, dtype=float) for c in pauli_series(spec, s))


def propagate_unitary(spec: ProtocolSpec, steps: int, psi0=None) -> EvolutionResult:
    """Schroedinger evolution with exact midpoint exponentials.

    Each step applies ``exp(-i H(t_k + dt/2) dt)``, so the norm is preserved to
    rounding. The initial state defaults to ``|0>``.
    """
    if steps < MIN_UNITARY_STEPS:
        raise StructuralError(f"steps must be >= {MIN_UNITARY_STEPS}, got {steps}")
    tau = spec.params.tau
    dt = tau / steps
    s_mid = (np.arange(steps) + 0.5) / steps
    props = qops.su2_propagator(*_coefficients(spec, s_mid), dt)
    states = np.empty((steps + 1, 2), dtype=np.complex128)
    states[0] = _initial_state(psi0)
    for k in range(steps):
        states[k + 1] = props[k] @ states[k]
    times = np.arange(steps + 1) * dt
    return EvolutionResult(spec, times, states, _final_fidelity(spec, states[-1]))


def spectral_radius(spec: ProtocolSpec, samples: int = 2001) -> float:
    """Largest ``|eigenvalue|`` of the driving Hamiltonian over ``s`` in [0, 1]."""
    c0, cx, cy, cz = _coefficients(spec, np.linspace(0.0, 1.0, samples))
    return float(np.max(np.abs(c0) + np.sqrt(cx * cx + cy * cy + cz * cz)))


def lindblad_min_steps(spec: ProtocolSpec, gamma: float, limit: float = STABILITY_LIMIT) -> int:
    """Smallest step count satisfying ``dt * max(|H|, gamma) < limit``."""
    rate = max(spectral_radius(spec), gamma)
    return int(math.floor(spec.params.tau * rate / limit)) + 1


def _liouvillians(c0, cx, cy, cz, gamma: float) -> np.ndarray:
    # row-major vec: vec(A rho B) = kron(A, B.T) vec(rho)
    hs = qops.from_pauli(c0, cx, cy, cz)
    eye = np.eye(2)
    coherent = np.einsum("kij,ab->kiajb", hs, eye) - np.einsum("ij,kba->kiajb", eye, hs)
    coherent = coherent.reshape(hs.shape[0], 4, 4)
    dissipator = gamma * (np.kron(qops.SIGMA_Z, qops.SIGMA_Z) - np.eye(4))
    return -1j * coherent + dissipator


def _rk4_step_maps(a, b, c, h: float) -> np.ndarray:
    # one RK4 step of v' = L(t) v written as a matrix: a = L(t), b = L(t + h/2), c = L(t + h)
    ba = b @ a
    bb = b @ b
    cb = c @ b
    bba = bb @ a
    ident = np.eye(a.shape[-1])
    return (ident
            + h / 6 * (a + 4 * b + c)
            + h ** 2 / 6 * (ba + bb + cb)
            + h ** 3 / 12 * (bba + cb @ b)
            + h ** 4 / 24 * (c @ bba))


def propagate_lindblad(spec: ProtocolSpec, noise: NoiseConfig, steps: int, rho0=None) -> EvolutionResult:
    """Integrate the dephasing master equation with classical RK4.

    Parameters
    ----------
    spec : ProtocolSpec
    noise : NoiseConfig
        Only ``gamma`` (1/ms) is used.
    steps : int
        Number of fixed steps; must satisfy ``dt * max(|H|, gamma) < 0.05``
        (see :func:`lindblad_min_steps`).
    rho0 : array_like, optional
        Initial density matrix, ``|0><0|`` by default.

    Raises
    ------
    StructuralError
        If the step count violates the stability bound.
    IntegratorError
        If the trace drifts by more than 1e-6 or an eigenvalue drops below -1e-6.
    """
    tau = spec.params.tau
    needed = lindblad_min_steps(spec, noise.gamma)
    if steps < needed:
        raise StructuralError(f"steps={steps} violates the stability bound; use at least {needed}")
    dt = tau / steps
    nodes = _coefficients(spec, np.arange(2 * steps + 1) / (2 * steps))
    gens = _liouvillians(*nodes, noise.gamma)
    maps = _rk4_step_maps(gens[0:-1:2], gens[1::2], gens[2::2], dt)

    rho = np.array(qops.projector(qops.KET_0) if rho0 is None else qops.check_density(rho0))
    states = np.empty((steps + 1, 2, 2), dtype=np.complex128)
    states[0] = rho
    vec = rho.reshape(4)
    for k in range(steps):
        m = (maps[k] @ vec).reshape(2, 2)
        m = 0.5 * (m + m.conj().T)
        states[k + 1] = m
        vec = m.reshape(4)

    traces = np.trace(states, axis1=1, axis2=2).real
    if np.max(np.abs(traces - 1.0)) > TRACE_TOL:
        raise IntegratorError(f"trace drifted to {traces[np.argmax(np.abs(traces - 1.0))]}")
    min_eig = float(np.min(np.linalg.eigvalsh(states)[:, 0]))
    if min_eig < -PSD_FAIL_TOL:
        raise IntegratorError(f"density matrix lost positivity (eigenvalue {min_eig:.3g}); reduce the step")
    times = np.arange(steps + 1) * dt
    return EvolutionResult(spec, times, states, _final_fidelity(spec, states[-1]))


def trajectory_seeds(seed: int, n: int) -> list:
    """Independent per-trajectory generators, stable under reordering."""
    return [np.random.default_rng(child) for child in np.random.SeedSequence(seed).spawn(n)]


def propagate_stochastic(spec: ProtocolSpec, noise: NoiseConfig, steps: int, psi0=None) -> EvolutionResult:
    """Ensemble of pure trajectories under ``H(t) + xi(t) sigma_z``.

    ``xi`` is held constant within a step and drawn from
    ``Normal(0, sqrt(gamma / dt))``, so each step multiplies the coherence by
    ``exp(-2 gamma dt)`` on average, matching the master equation. The result
    carries the ensemble-averaged density matrix at every step and the
    standard error of the final fidelity.
    """
    if noise.ensemble_size < MIN_ENSEMBLE:
        raise StructuralError(f"ensemble_size must be >= {MIN_ENSEMBLE}, got {noise.ensemble_size}")
    if steps < MIN_UNITARY_STEPS:
        raise StructuralError(f"steps must be >= {MIN_UNITARY_STEPS}, got {steps}")
    m = noise.ensemble_size
    tau = spec.params.tau
    dt = tau / steps
    c0, cx, cy, cz = _coefficients(spec, (np.arange(steps) + 0.5) / steps)
    sigma = math.sqrt(noise.gamma / dt)
    # column j is trajectory j's own stream
    kicks = np.stack([g.standard_normal(steps) for g in trajectory_seeds(noise.rng_seed, m)], axis=1)
    kicks *= sigma

    psi = np.tile(_initial_state(psi0), (m, 1))
    states = np.empty((steps + 1, 2, 2), dtype=np.complex128)
    states[0] = np.einsum("mi,mj->ij", psi, psi.conj()) / m
    for k in range(steps):
        u = qops.su2_propagator(c0[k], cx[k], cy[k], cz[k] + kicks[k], dt)
        psi = np.einsum("mij,mj->mi", u, psi)
        states[k + 1] = np.einsum("mi,mj->ij", psi, psi.conj()) / m

    target = target_states(spec.params, 1.0, spec.schedule)
    overlaps = np.abs(psi @ target.conj()) ** 2
    fid = float(np.sqrt(min(overlaps.mean(), 1.0)))
    stderr = float(overlaps.std(ddof=1) / math.sqrt(m) / (2.0 * max(fid, 1e-12)))
    times = np.arange(steps + 1) * dt
    return EvolutionResult(spec, times, states, fid, stderr)
