"""Lifted vortex dynamics on C^{2 x N} and its momentum maps.

A lifted state ``Phi`` is a complex ``(2, N)`` matrix whose columns are the
spinors ``φ_i = (z_i, u_i)``.  On the constraint set ``‖φ_i‖² = R`` the Hopf
projection of each column is the vortex position on the sphere of radius R.
"""
from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike

from .errors import LiftedCollision
from .geometry import ComplexArray, FloatArray, hopf_project
from .liepoisson import AlgebraPoint
from .sphere import Circulations


def as_lifted(Phi: ArrayLike, c: Circulations) -> ComplexArray:
    Phi = np.asarray(Phi, dtype=np.complex128)
    if Phi.shape != (2, c.N):
        raise ValueError(f"expected a lifted state of shape (2, {c.N}), got {Phi.shape}")
    return Phi


def check_lifted(Phi: ArrayLike, c: Circulations, tol: float = 1e-9) -> ComplexArray:
    """Validate shape and the ``‖φ_i‖² = R`` constraint."""
    Phi = as_lifted(Phi, c)
    n2 = np.sum(np.abs(Phi) ** 2, axis=0)
    bad = np.flatnonzero(np.abs(n2 - c.R) > tol * c.R)
    if bad.size:
        raise ValueError(f"column {bad[0] + 1} has ‖φ‖² = {n2[bad[0]]!r}, expected R = {c.R!r}")
    return Phi


def _pair_data(Phi: ComplexArray, c: Circulations):
    n2 = np.sum(np.abs(Phi) ** 2, axis=0)
    G = Phi.conj().T @ Phi  # G[i, j] = φ_i* φ_j
    nsum = n2[:, None] + n2[None, :]
    D = nsum**2 - 4.0 * np.abs(G) ** 2
    n = c.N
    if n > 1:
        iu = np.triu_indices(n, 1)
        k = np.argmin(D[iu])
        if D[iu][k] <= 0.0:
            raise LiftedCollision(int(iu[0][k]), int(iu[1][k]), float(D[iu][k]))
    return n2, G, nsum, D


def hamiltonian_lifted(Phi: ArrayLike, c: Circulations) -> float:
    """``H = -(1/4πR²) Σ_{i<j} Γ_iΓ_j ln[(‖φ_i‖²+‖φ_j‖²)² - 4|φ_i*φ_j|²]``."""
    Phi = as_lifted(Phi, c)
    if c.N < 2:
        return 0.0
    _, _, _, D = _pair_data(Phi, c)
    iu = np.triu_indices(c.N, 1)
    gg = np.outer(c.gamma, c.gamma)[iu]
    return float(-np.sum(gg * np.log(D[iu])) / (4.0 * np.pi * c.R**2))


def wirtinger_grad(Phi: ArrayLike, c: Circulations) -> ComplexArray:
    """``∂H/∂φ_i*`` as a ``(2, N)`` matrix, with ``dH = 2 Re <∂H/∂φ*, dφ>``."""
    Phi = as_lifted(Phi, c)
    n = c.N
    if n < 2:
        return np.zeros_like(Phi)
    _, G, nsum, D = _pair_data(Phi, c)
    np.fill_diagonal(D, np.inf)
    w = np.outer(c.gamma, c.gamma) / D
    # Σ_j w_ij [2(n_i+n_j) φ_i - 4 (φ_j*φ_i) φ_j]
    a = 2.0 * np.sum(w * nsum, axis=1)
    # column i of Phi @ (w * G) is Σ_j w_ij (φ_j*φ_i) φ_j
    b = 4.0 * Phi @ (w * G)
    return -(Phi * a[None, :] - b) / (4.0 * np.pi * c.R**2)


def rhs_lifted(Phi: ArrayLike, c: Circulations) -> ComplexArray:
    """Lifted vector field ``φ̇_i = -(iR / 2Γ_i) ∂H/∂φ_i*``.

    The factor R makes the Hopf projection reproduce the sphere dynamics for
    every radius; at R = 1 it is invisible.
    """
    g = wirtinger_grad(Phi, c)
    return -0.5j * c.R * g / c.gamma[None, :]


def pack_lifted(Phi: ArrayLike) -> FloatArray:
    Phi = np.asarray(Phi, dtype=np.complex128)
    return np.concatenate([Phi.real.ravel(), Phi.imag.ravel()])


def unpack_lifted(y: ArrayLike, n: int) -> ComplexArray:
    y = np.asarray(y, dtype=np.float64)
    h = 2 * n
    return (y[:h] + 1j * y[h:]).reshape(2, n)


def rhs_lifted_real(y: FloatArray, c: Circulations) -> FloatArray:
    return pack_lifted(rhs_lifted(unpack_lifted(y, c.N), c))


def project_lifted(Phi: ArrayLike, c: Circulations) -> FloatArray:
    """Hopf projection of every column, as an ``(N, 3)`` array."""
    return hopf_project(as_lifted(Phi, c))


def momentum_J(Phi: ArrayLike, c: Circulations) -> FloatArray:
    """Torus momentum map ``-(2/R)(Γ_1‖φ_1‖², ..., Γ_N‖φ_N‖²)``."""
    Phi = as_lifted(Phi, c)
    return -2.0 / c.R * c.gamma * np.sum(np.abs(Phi) ** 2, axis=0)


def momentum_K(Phi: ArrayLike, c: Circulations) -> ComplexArray:
    """U(2) momentum map ``-(i/R) Φ D_Γ Φ*``."""
    Phi = as_lifted(Phi, c)
    return -1j / c.R * (Phi * c.gamma[None, :]) @ Phi.conj().T


def momentum_L(Phi: ArrayLike, c: Circulations) -> AlgebraPoint:
    """U(D_Γ) momentum map ``-(i/R) Φ*Φ``.

    In coordinates ``λ_i = (√2/R)‖φ_i‖²`` and ``λ_ij = (2/R) φ_i*φ_j``.
    """
    Phi = as_lifted(Phi, c)
    return AlgebraPoint(2.0 / c.R * (Phi.conj().T @ Phi))


def momentum_M(phi: ArrayLike, gamma: float, R: float) -> FloatArray:
    """Per-vortex SU(2) momentum map ``(γ/R) hopf_project(φ)``."""
    return gamma / R * hopf_project(phi)


__all__ = [
    "as_lifted",
    "check_lifted",
    "hamiltonian_lifted",
    "wirtinger_grad",
    "rhs_lifted",
    "rhs_lifted_real",
    "pack_lifted",
    "unpack_lifted",
    "project_lifted",
    "momentum_J",
    "momentum_K",
    "momentum_L",
    "momentum_M",
]
