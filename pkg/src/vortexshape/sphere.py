"""Point vortex dynamics on the sphere of radius R embedded in R^3.

States are ``(N, 3)`` float arrays of positions.  All functions are pure.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from numpy.typing import ArrayLike

from .errors import VortexCollision
from .geometry import FloatArray

COLLISION_EPS = 1e-8  # chord threshold, in units of R
RENORM_TOL = 1e-10  # radius drift (units of R) that triggers renormalization


@dataclass(frozen=True)
class Circulations:
    """Vortex strengths and the sphere radius."""

    gamma: FloatArray
    R: float = 1.0
    D: FloatArray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        g = np.array(self.gamma, dtype=np.float64).reshape(-1)
        if g.size < 1:
            raise ValueError("need at least one vortex")
        if not np.all(np.isfinite(g)) or np.any(g == 0.0):
            raise ValueError("every circulation must be finite and nonzero")
        if not (np.isfinite(self.R) and self.R > 0):
            raise ValueError("sphere radius R must be positive")
        g.flags.writeable = False
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "R", float(self.R))
        object.__setattr__(self, "D", np.diag(g))

    @property
    def N(self) -> int:
        return self.gamma.size


def check_state(X: ArrayLike, c: Circulations, tol: float = 1e-9) -> FloatArray:
    """Validate shape and radii of a sphere configuration and return it as an array."""
    X = np.asarray(X, dtype=np.float64)
    if X.shape != (c.N, 3):
        raise ValueError(f"expected positions of shape ({c.N}, 3), got {X.shape}")
    r = np.linalg.norm(X, axis=1)
    bad = np.flatnonzero(np.abs(r - c.R) > tol * c.R)
    if bad.size:
        raise ValueError(f"vortex {bad[0] + 1} is off the sphere: |x| = {r[bad[0]]!r}, R = {c.R!r}")
    return X


def project_to_sphere(X: ArrayLike, R: float, tol: float = RENORM_TOL) -> tuple[FloatArray, int]:
    """Rescale positions whose radius drifted more than ``tol * R``.

    Returns the (possibly) corrected positions and the number of vortices touched.
    """
    X = np.array(X, dtype=np.float64)
    r = np.linalg.norm(X, axis=1)
    drift = np.abs(r - R) > tol * R
    if drift.any():
        X[drift] *= (R / r[drift])[:, None]
    return X, int(drift.sum())


def _chord2(X: FloatArray, R: float) -> FloatArray:
    diff = X[:, None, :] - X[None, :, :]
    l2 = np.einsum("ijk,ijk->ij", diff, diff)
    n = len(X)
    if n > 1:
        iu = np.triu_indices(n, 1)
        k = np.argmin(l2[iu])
        if l2[iu][k] <= (COLLISION_EPS * R) ** 2:
            i, j = iu[0][k], iu[1][k]
            raise VortexCollision(int(i), int(j), float(np.sqrt(l2[i, j])))
    return l2


def rhs_sphere(X: ArrayLike, c: Circulations) -> FloatArray:
    """Velocities ``ẋ_i = (1/2πR) Σ_j Γ_j (x_j × x_i) / |x_i - x_j|²``."""
    X = np.asarray(X, dtype=np.float64)
    l2 = _chord2(X, c.R)
    np.fill_diagonal(l2, np.inf)
    # cross[i, j] = x_j × x_i
    cross = np.cross(X[None, :, :], X[:, None, :])
    w = c.gamma[None, :] / l2
    return np.einsum("ij,ijk->ik", w, cross) / (2.0 * np.pi * c.R)


def hamiltonian_sphere(X: ArrayLike, c: Circulations, form: str = "r3") -> float:
    """Vortex Hamiltonian.

    ``form="r3"`` uses ``ln |x_i - x_j|²``; ``form="s2"`` uses
    ``ln 2(R² - x_i·x_j)``, which agrees on the sphere.
    """
    X = np.asarray(X, dtype=np.float64)
    if form == "r3":
        arg = _chord2(X, c.R)
    elif form == "s2":
        _chord2(X, c.R)
        arg = 2.0 * (c.R**2 - X @ X.T)
    else:
        raise ValueError(f"unknown form {form!r}")
    n = c.N
    if n < 2:
        return 0.0
    iu = np.triu_indices(n, 1)
    gg = np.outer(c.gamma, c.gamma)[iu]
    return float(-np.sum(gg * np.log(arg[iu])) / (4.0 * np.pi * c.R**2))


def grad_hamiltonian_r3(X: ArrayLike, c: Circulations) -> FloatArray:
    """Gradient of the R^3 Hamiltonian with respect to each ``x_i``."""
    X = np.asarray(X, dtype=np.float64)
    l2 = _chord2(X, c.R)
    np.fill_diagonal(l2, np.inf)
    diff = X[:, None, :] - X[None, :, :]
    w = np.outer(c.gamma, c.gamma) / l2
    return -np.einsum("ij,ijk->ik", w, diff) / (2.0 * np.pi * c.R**2)


def moment_of_vorticity(X: ArrayLike, c: Circulations) -> FloatArray:
    """The conserved vector ``(1/R) Σ Γ_i x_i``."""
    X = np.asarray(X, dtype=np.float64)
    return c.gamma @ X / c.R


def signed_volume(X: FloatArray, i: int, j: int, k: int) -> float:
    return float(np.dot(X[i], np.cross(X[j], X[k])))


def relative_rhs(X: ArrayLike, c: Circulations) -> dict[tuple[int, int], float]:
    """Time derivatives of the squared chords, keyed by 0-based pairs ``(i, j)``, ``i < j``.

    ``d ℓ_ij²/dt = (1/πR) Σ_k Γ_k V_ijk (1/ℓ_jk² - 1/ℓ_ki²)``.
    """
    X = np.asarray(X, dtype=np.float64)
    l2 = _chord2(X, c.R)
    n = c.N
    out = {}
    for i, j in combinations(range(n), 2):
        acc = 0.0
        for k in range(n):
            if k == i or k == j:
                continue
            acc += c.gamma[k] * signed_volume(X, i, j, k) * (1.0 / l2[j, k] - 1.0 / l2[k, i])
        out[(i, j)] = acc / (np.pi * c.R)
    return out


def poisson_bracket_r3(gradF: ArrayLike, gradH: ArrayLike, X: ArrayLike, c: Circulations) -> float:
    """``Σ_i (R/Γ_i) x_i · (∂F/∂x_i × ∂H/∂x_i)``."""
    gradF = np.asarray(gradF, dtype=np.float64)
    gradH = np.asarray(gradH, dtype=np.float64)
    X = np.asarray(X, dtype=np.float64)
    terms = np.einsum("ik,ik->i", X, np.cross(gradF, gradH))
    return float(np.sum(c.R / c.gamma * terms))
