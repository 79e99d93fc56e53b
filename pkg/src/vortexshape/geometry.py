"""Hopf map between C^2 and R^3, the su(2) <-> R^3 identification, and the
C^2/R^3 vector identities used by the higher levels.

A spinor is a complex array of shape ``(2,)`` holding ``(z, u)``; a batch of
spinors is ``(2, N)`` (one column per vortex).  Vectors in R^3 are float
arrays of shape ``(3,)`` or ``(N, 3)``.
"""
from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike, NDArray

FloatArray = NDArray[np.float64]
ComplexArray = NDArray[np.complex128]

# Basis of su(2): tau_k = -(i/2) sigma_k, so that [tau_1, tau_2] = tau_3 (cyclic).
PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=np.complex128,
)
TAU = -0.5j * PAULI


def hopf_project(phi: ArrayLike) -> FloatArray:
    """Map ``(z, u)`` to ``(2 Re(z̄u), 2 Im(z̄u), |z|² - |u|²)``.

    Accepts a single spinor ``(2,)`` or a batch ``(2, N)``; a batch maps to
    an ``(N, 3)`` array.
    """
    phi = np.asarray(phi, dtype=np.complex128)
    z, u = phi[0], phi[1]
    w = np.conj(z) * u
    x = np.stack([2.0 * w.real, 2.0 * w.imag, np.abs(z) ** 2 - np.abs(u) ** 2], axis=-1)
    return x


def hopf_lift(x: ArrayLike, theta: float = 0.0) -> ComplexArray:
    """Return a spinor in the Hopf fiber over ``x``; ``theta`` moves along the fiber.

    The section is ``z = sqrt((|x|+x3)/2)``, ``u = (x1+i x2)/(2z)``, switching
    to ``u = sqrt((|x|-x3)/2)``, ``z = (x1-i x2)/(2u)`` near the south pole.
    """
    x = np.asarray(x, dtype=np.float64)
    r = float(np.linalg.norm(x))
    if r == 0.0:
        raise ValueError("degenerate point: cannot lift the zero vector")
    x1, x2, x3 = x
    phase = np.exp(1j * theta)
    if x3 > -r + 1e-12 * r:
        z = np.sqrt((r + x3) / 2.0)
        u = (x1 + 1j * x2) / (2.0 * z)
    else:
        u = np.sqrt((r - x3) / 2.0)
        z = (x1 - 1j * x2) / (2.0 * u)
    return np.array([z * phase, u * phase], dtype=np.complex128)


def hopf_lift_all(X: ArrayLike, thetas: ArrayLike | None = None) -> ComplexArray:
    """Lift an ``(N, 3)`` configuration column by column into a ``(2, N)`` matrix."""
    X = np.asarray(X, dtype=np.float64)
    if thetas is None:
        thetas = np.zeros(len(X))
    return np.stack([hopf_lift(xi, th) for xi, th in zip(X, thetas)], axis=1)


def pair_identities(phi_a: ArrayLike, phi_b: ArrayLike) -> tuple[float, float]:
    """Dot product and squared distance of the projections, computed in C^2.

    ``dot = 2|φa*φb|² - ‖φa‖²‖φb‖²`` and
    ``dist2 = (‖φa‖² + ‖φb‖²)² - 4|φa*φb|²``.
    """
    phi_a = np.asarray(phi_a, dtype=np.complex128)
    phi_b = np.asarray(phi_b, dtype=np.complex128)
    ip2 = abs(np.vdot(phi_a, phi_b)) ** 2
    na = np.vdot(phi_a, phi_a).real
    nb = np.vdot(phi_b, phi_b).real
    return 2.0 * ip2 - na * nb, (na + nb) ** 2 - 4.0 * ip2


def triple_product_c2(phi_a: ArrayLike, phi_b: ArrayLike, phi_c: ArrayLike) -> complex:
    """Return ``(φa*φb)(φc*φa)(φb*φc)``.

    Its imaginary part is a quarter of the triple product of the projected
    vectors; on a common 3-sphere of radius sqrt(R) its real part is
    ``(R/2)(|φa*φb|² + |φc*φa|² + |φb*φc|² - R²)``.
    """
    a = np.asarray(phi_a, dtype=np.complex128)
    b = np.asarray(phi_b, dtype=np.complex128)
    c = np.asarray(phi_c, dtype=np.complex128)
    return complex(np.vdot(a, b) * np.vdot(c, a) * np.vdot(b, c))


def su2_vec(xi: ArrayLike) -> ComplexArray:
    """R^3 -> su(2), ``xi ↦ Σ xi_k tau_k``."""
    xi = np.asarray(xi, dtype=np.float64)
    return np.tensordot(xi, TAU, axes=1)


def su2_unvec(m: ArrayLike, tol: float = 1e-12) -> FloatArray:
    """Inverse of :func:`su2_vec`; rejects matrices outside su(2)."""
    m = np.asarray(m, dtype=np.complex128)
    if m.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
    scale = max(1.0, float(np.abs(m).max()))
    if abs(np.trace(m)) > tol * scale:
        raise ValueError("matrix is not traceless")
    if np.abs(m + m.conj().T).max() > tol * scale:
        raise ValueError("matrix is not anti-Hermitian")
    # <tau_j, tau_k> = 2 tr(tau_j^* tau_k) = delta_jk
    return np.array([2.0 * np.trace(t.conj().T @ m).real for t in TAU])


def su2_inner(a: ArrayLike, b: ArrayLike) -> float:
    """The inner product ``2 tr(a* b)`` (real part)."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    return float(2.0 * np.trace(a.conj().T @ b).real)
