"""Dense complex linear algebra for qubit operators and states.

Operators, pure states and density matrices are plain ``numpy`` arrays of
dtype ``complex128``. Time is measured in milliseconds and angular
frequencies in rad/ms throughout the package.

The 2x2 propagator uses the Pauli closed form

    exp(-i (c0 I + a.sigma) t) = e^{-i c0 t} [cos(|a| t) I - i sin(|a| t) a.sigma / |a|]

and larger operators fall back to ``scipy.linalg.expm``.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import NumericalIntegrityError, StructuralError

HERMITIAN_RTOL = 1e-12
PSD_TOL = 1e-8


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=np.complex128)
    arr.flags.writeable = False
    return arr


IDENTITY = _frozen([[1, 0], [0, 1]])
SIGMA_X = _frozen([[0, 1], [1, 0]])
SIGMA_Y = _frozen([[0, -1j], [1j, 0]])
SIGMA_Z = _frozen([[1, 0], [0, -1]])

KET_0 = _frozen([1, 0])
KET_1 = _frozen([0, 1])


def _as_square(a, name: str = "operator") -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise StructuralError(f"{name} must be a non-empty square matrix, got shape {a.shape}")
    return a


def is_hermitian(h, rtol: float = HERMITIAN_RTOL) -> bool:
    h = _as_square(h)
    scale = max(1.0, float(np.max(np.abs(h))))
    return bool(np.max(np.abs(h - h.conj().T)) <= rtol * scale)


def dagger(a) -> np.ndarray:
    return np.asarray(a).conj().swapaxes(-1, -2)


def commutator(a, b) -> np.ndarray:
    """Return ``ab - ba``."""
    a = _as_square(a, "a")
    b = _as_square(b, "b")
    if a.shape != b.shape:
        raise StructuralError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a @ b - b @ a


def pauli_coefficients(h) -> tuple:
    """Split a (stack of) 2x2 Hermitian operator(s) as ``c0 I + cx X + cy Y + cz Z``.

    Works elementwise on arrays of shape ``(..., 2, 2)``; returns four real
    arrays (or floats).
    """
    h = np.asarray(h, dtype=np.complex128)
    if h.shape[-2:] != (2, 2):
        raise StructuralError(f"expected 2x2 operator(s), got shape {h.shape}")
    c0 = 0.5 * (h[..., 0, 0] + h[..., 1, 1]).real
    cz = 0.5 * (h[..., 0, 0] - h[..., 1, 1]).real
    off = 0.5 * (h[..., 0, 1] + h[..., 1, 0].conj())
    return c0, off.real, -off.imag, cz


def from_pauli(c0, cx, cy, cz) -> np.ndarray:
    """Inverse of :func:`pauli_coefficients`; broadcasts over array inputs."""
    c0, cx, cy, cz = np.broadcast_arrays(*(np.asarray(c, dtype=float) for c in (c0, cx, cy, cz)))
    out = np.empty(c0.shape + (2, 2), dtype=np.complex128)
    out[..., 0, 0] = c0 + cz
    out[..., 1, 1] = c0 - cz
    out[..., 0, 1] = cx - 1j * cy
    out[..., 1, 0] = cx + 1j * cy
    return out


def su2_propagator(c0, ax, ay, az, t) -> np.ndarray:
    """``exp(-i (c0 I + a.sigma) t)`` from Pauli coefficients; broadcasts."""
    t = np.asarray(t, dtype=float)
    norm = np.sqrt(ax * ax + ay * ay + az * az)
    cos = np.cos(norm * t)
    # sin(|a| t) / |a|, well defined as |a| -> 0
    sinc = t * np.sinc(norm * t / np.pi)
    phase = np.exp(-1j * c0 * t)
    out = np.empty(np.broadcast(c0, ax, ay, az, t).shape + (2, 2), dtype=np.complex128)
    out[..., 0, 0] = cos - 1j * sinc * az
    out[..., 1, 1] = cos + 1j * sinc * az
    out[..., 0, 1] = -1j * sinc * (ax - 1j * ay)
    out[..., 1, 0] = -1j * sinc * (ax + 1j * ay)
    return out * phase[..., None, None]


def expm_su2(h, t) -> np.ndarray:
    """Closed-form ``exp(-i h t)`` for a stack of 2x2 Hermitian operators.

    ``h`` has shape ``(..., 2, 2)``; ``t`` broadcasts against the leading
    dimensions.
    """
    return su2_propagator(*pauli_coefficients(h), t)


def expm_herm(h, t: float) -> np.ndarray:
    """Exact propagator ``U = exp(-i h t)`` of a Hermitian operator.

    Parameters
    ----------
    h : array_like
        Hermitian matrix in rad/ms.
    t : float
        Duration in ms.

    Returns
    -------
    numpy.ndarray
        Unitary matrix of the same shape as ``h``.
    """
    h = _as_square(h)
    if not is_hermitian(h):
        raise StructuralError("expm_herm requires a Hermitian operator")
    if h.shape == (2, 2):
        return expm_su2(h, t)
    return scipy.linalg.expm(-1j * float(t) * h)


def eig_herm(h) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and gauge-fixed orthonormal eigenvectors (columns).

    Each eigenvector is multiplied by a phase so that its largest-magnitude
    component (the first one, on ties) is real and positive.
    """
    h = _as_square(h)
    if not is_hermitian(h):
        raise StructuralError("eig_herm requires a Hermitian operator")
    vals, vecs = np.linalg.eigh(0.5 * (h + h.conj().T))
    return vals, gauge_fix(vecs)


def gauge_fix(vecs) -> np.ndarray:
    vecs = np.array(vecs, dtype=np.complex128)
    mags = np.abs(vecs)
    for k in range(vecs.shape[1]):
        col = mags[:, k]
        idx = int(np.flatnonzero(col >= col.max() - 1e-12)[0])
        vecs[:, k] *= np.conj(vecs[idx, k]) / col[idx]
        vecs[idx, k] = vecs[idx, k].real
    return vecs


def hs_norm_sq(h) -> float:
    """``Tr{h^2}`` for Hermitian ``h`` (squared Hilbert-Schmidt norm)."""
    h = _as_square(h)
    return float(np.sum(np.abs(h) ** 2))


def normalize(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=np.complex128)
    return psi / np.linalg.norm(psi)


def projector(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=np.complex128)
    return np.outer(psi, psi.conj())


def check_state(psi, tol: float = 1e-10) -> np.ndarray:
    psi = np.asarray(psi, dtype=np.complex128)
    if psi.ndim != 1:
        raise StructuralError(f"state must be a vector, got shape {psi.shape}")
    if abs(np.vdot(psi, psi).real - 1.0) > tol:
        raise NumericalIntegrityError("state is not normalized")
    return psi


def check_density(rho, tol: float = 1e-10, psd_tol: float = PSD_TOL) -> np.ndarray:
    """Validate Hermiticity, unit trace and positivity of a density matrix."""
    rho = _as_square(rho, "density matrix")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise NumericalIntegrityError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > tol:
        raise NumericalIntegrityError(f"density matrix trace {np.trace(rho).real} != 1")
    if np.linalg.eigvalsh(rho)[0] < -psd_tol:
        raise NumericalIntegrityError("density matrix has a negative eigenvalue")
    return rho


def fidelity(rho, psi) -> float:
    """Bures-type fidelity ``sqrt(<psi|rho|psi>)`` against a pure target."""
    rho = _as_square(rho, "rho")
    psi = np.asarray(psi, dtype=np.complex128)
    if psi.shape != (rho.shape[0],):
        raise StructuralError(f"state of shape {psi.shape} does not match rho {rho.shape}")
    overlap = float(np.vdot(psi, rho @ psi).real)
    if overlap < -PSD_TOL:
        raise NumericalIntegrityError(f"negative overlap <psi|rho|psi> = {overlap}")
    return float(np.sqrt(min(max(overlap, 0.0), 1.0)))
