"""Energy-Casimir stability analysis of the tetrahedron relative equilibrium.

The Lyapunov candidate is

    𝓔 = 𝓗 + (1/πR²) [ Φ(C₂ - C₂|ₑ)/8 + 3 Ψ(f₁₂, f₁₃, f₂₃)/256 ]

evaluated in the real shape chart
``(s₁, s₂, s₃, Re μ₁₂, Im μ₁₂, Re μ₁₃, Im μ₁₃, Re μ₂₃, Im μ₂₃)``.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.typing import ArrayLike

from .errors import DomainError
from .geometry import FloatArray
from .shape import (
    ShapePoint,
    casimir_shape_c2,
    f_constraints,
    grad_casimir_shape_c2,
    grad_f_constraints,
    grad_shape_hamiltonian,
    shape_hamiltonian,
)
from .sphere import Circulations

SQRT3 = np.sqrt(3.0)
MINOR_RTOL = 1e-5
HESSIAN_STEP = 1e-4
GRADIENT_STEP = 1e-6


def tetrahedron_equilibrium() -> ShapePoint:
    """``s_i = 4/3`` and ``μ₁₂ = -μ₁₃ = μ₂₃ = 8i/(3√3)``."""
    m = 8.0 / (3.0 * SQRT3)
    return ShapePoint(np.full(3, 4.0 / 3.0), np.array([1j * m, -1j * m, 1j * m]))


def tetrahedron_configuration(R: float = 1.0) -> FloatArray:
    """A regular tetrahedron on the sphere of radius R realizing :func:`tetrahedron_equilibrium`."""
    s2, s6 = np.sqrt(2.0), np.sqrt(6.0)
    X = np.array(
        [
            [2.0 * s2, 0.0, -1.0],
            [-s2, s6, -1.0],
            [-s2, -s6, -1.0],
            [0.0, 0.0, 3.0],
        ]
    )
    return X * (R / 3.0)


@dataclass(frozen=True)
class EnergyCasimirSpec:
    """The two free functions of the Lyapunov candidate, their derivatives, and their jets at 0."""

    phi: Callable[[float], float]
    psi: Callable[[FloatArray], float]
    phi_prime: Callable[[float], float]
    psi_grad: Callable[[FloatArray], FloatArray]
    phi_prime0: float
    phi_second0: float
    psi_grad0: FloatArray
    psi_hess0: FloatArray

    @classmethod
    def quadratic(
        cls,
        phi_slope: float = -1.5,
        phi_curvature: float = 0.0,
        psi_weights: Sequence[float] = (1.0, 1.0, 1.0),
        psi_linear: Sequence[float] = (0.0, 0.0, 0.0),
    ) -> "EnergyCasimirSpec":
        """``Φ(x) = a x + b x²/2`` and ``Ψ(y) = Σ w_k y_k² + Σ c_k y_k``."""
        w = np.asarray(psi_weights, dtype=np.float64)
        lin = np.asarray(psi_linear, dtype=np.float64)
        return cls(
            phi=lambda x: phi_slope * x + 0.5 * phi_curvature * x * x,
            psi=lambda y: float(np.dot(w, np.square(y)) + np.dot(lin, y)),
            phi_prime=lambda x: phi_slope + phi_curvature * x,
            psi_grad=lambda y: 2.0 * w * np.asarray(y) + lin,
            phi_prime0=phi_slope,
            phi_second0=phi_curvature,
            psi_grad0=lin,
            psi_hess0=np.diag(2.0 * w),
        )

    def is_critical_family(self, tol: float = 1e-12) -> bool:
        return abs(self.phi_prime0 + 1.5) <= tol and bool(np.all(np.abs(self.psi_grad0) <= tol))


DEFAULT_SPEC = EnergyCasimirSpec.quadratic()


def _require_tetrahedron(c: Circulations) -> None:
    if c.N != 4:
        raise DomainError("tetrahedron analysis requires N=4")


def energy_casimir(zeta: ShapePoint, c: Circulations, spec: EnergyCasimirSpec = DEFAULT_SPEC) -> float:
    _require_tetrahedron(c)
    if zeta.N != 4:
        raise DomainError("tetrahedron analysis requires N=4")
    c2e = casimir_shape_c2(tetrahedron_equilibrium(), c)
    f = f_constraints(zeta)
    fv = np.array([f[(0, 1)], f[(0, 2)], f[(1, 2)]])
    extra = spec.phi(casimir_shape_c2(zeta, c) - c2e) / 8.0 + 3.0 * spec.psi(fv) / 256.0
    return shape_hamiltonian(zeta, c) + extra / (np.pi * c.R**2)


def grad_energy_casimir(zeta: ShapePoint, c: Circulations, spec: EnergyCasimirSpec = DEFAULT_SPEC) -> FloatArray:
    """Analytic chart gradient of :func:`energy_casimir`."""
    _require_tetrahedron(c)
    c2e = casimir_shape_c2(tetrahedron_equilibrium(), c)
    f = f_constraints(zeta)
    fv = np.array([f[(0, 1)], f[(0, 2)], f[(1, 2)]])
    extra = spec.phi_prime(casimir_shape_c2(zeta, c) - c2e) / 8.0 * grad_casimir_shape_c2(zeta, c)
    extra = extra + 3.0 / 256.0 * (np.asarray(spec.psi_grad(fv)) @ grad_f_constraints(zeta))
    return grad_shape_hamiltonian(zeta, c) + extra / (np.pi * c.R**2)


def _chart_fn(c: Circulations, spec: EnergyCasimirSpec):
    return lambda y: energy_casimir(ShapePoint.from_vector(y, 4), c, spec)


def _chart_grad(c: Circulations, spec: EnergyCasimirSpec):
    return lambda y: grad_energy_casimir(ShapePoint.from_vector(y, 4), c, spec)


def numerical_gradient(fn, y: FloatArray, step: float = GRADIENT_STEP) -> FloatArray:
    g = np.empty(y.size)
    for k in range(y.size):
        h = step * max(1.0, abs(y[k]))
        e = np.zeros(y.size)
        e[k] = h
        g[k] = (fn(y + e) - fn(y - e)) / (2.0 * h)
    return g


def _second_differences(fn, y: FloatArray, steps: FloatArray) -> FloatArray:
    n = y.size
    H = np.empty((n, n))
    f0 = fn(y)
    for a in range(n):
        ea = np.zeros(n)
        ea[a] = steps[a]
        H[a, a] = (fn(y + ea) - 2.0 * f0 + fn(y - ea)) / steps[a] ** 2
        for b in range(a + 1, n):
            eb = np.zeros(n)
            eb[b] = steps[b]
            val = (fn(y + ea + eb) - fn(y + ea - eb) - fn(y - ea + eb) + fn(y - ea - eb)) / (4.0 * steps[a] * steps[b])
            H[a, b] = H[b, a] = val
    return H


def _gradient_differences(grad, y: FloatArray, steps: FloatArray) -> FloatArray:
    n = y.size
    H = np.empty((n, n))
    for a in range(n):
        e = np.zeros(n)
        e[a] = steps[a]
        H[a] = (grad(y + e) - grad(y - e)) / (2.0 * steps[a])
    return H


def numerical_hessian(fn, y: FloatArray, step: float = HESSIAN_STEP, grad=None) -> FloatArray:
    """Central second differences with one Richardson refinement, symmetrized.

    With ``grad`` given, the second differences are taken of the analytic
    gradient, which keeps roundoff at ``eps/h`` instead of ``eps/h²``.
    """
    steps = step * np.maximum(1.0, np.abs(y))
    if grad is None:
        coarse = _second_differences(fn, y, steps)
        fine = _second_differences(fn, y, 0.5 * steps)
    else:
        coarse = _gradient_differences(grad, y, steps)
        fine = _gradient_differences(grad, y, 0.5 * steps)
    H = (4.0 * fine - coarse) / 3.0
    return 0.5 * (H + H.T)


def hessian_minors_closed(gamma: ArrayLike, psi_hess_diag: ArrayLike = (2.0, 2.0, 2.0)) -> FloatArray:
    """Closed-form leading principal minors ``d₁..d₉`` of ``A``.

    Valid when ``Φ''(0) = 0`` and the Hessian of Ψ at 0 is diagonal.
    """
    g = np.asarray(gamma, dtype=np.float64)
    if g.shape != (4,):
        raise DomainError("tetrahedron analysis requires N=4")
    if np.any(g == 0.0):
        raise DomainError("every circulation must be nonzero")
    g1, g2, g3, g4 = g
    p1, p2, p3 = np.asarray(psi_hess_diag, dtype=np.float64)
    prod = g1 * g2 * g3 * g4
    d1 = g1 * (g2 + g3 + g4)
    d2 = g1 * g2 * (g3 + g4) * (g1 + g2 + g3 + g4)
    d3 = (
        g1
        * g2
        * g3
        * (g1**2 * g4 + g4 * (g2 + g3 + g4) ** 2 + 2.0 * g1 * (g4 * (g3 + g4) + g2 * (2.0 * g3 + g4)))
    )
    d4 = d3 * p1 / 3.0
    d5 = d2 * prod * p1
    d6 = d5 * p2 / 3.0
    d7 = d1 * prod**2 * p1 * p2
    d8 = d7 * p3 / 3.0
    d9 = (d7 / d1) * prod * p3
    return np.array([d1, d2, d3, d4, d5, d6, d7, d8, d9])


def leading_minors(A: FloatArray) -> FloatArray:
    return np.array([np.linalg.det(A[:k, :k]) for k in range(1, A.shape[0] + 1)])


@dataclass
class StabilityReport:
    gamma: FloatArray
    R: float
    gradient_norm: float
    hessian: FloatArray
    scaled_hessian: FloatArray
    eigenvalues: FloatArray
    minors: FloatArray
    closed_minors: FloatArray | None
    minor_relative_errors: FloatArray | None
    minors_match: bool | None
    verdict: str
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        def arr(x):
            return None if x is None else np.asarray(x).tolist()

        return {
            "gamma": arr(self.gamma),
            "R": self.R,
            "gradient_norm": self.gradient_norm,
            "hessian": arr(self.hessian),
            "scaled_hessian": arr(self.scaled_hessian),
            "eigenvalues": arr(self.eigenvalues),
            "minors": arr(self.minors),
            "closed_minors": arr(self.closed_minors),
            "minor_relative_errors": arr(self.minor_relative_errors),
            "minors_match": self.minors_match,
            "verdict": self.verdict,
            "notes": list(self.notes),
        }

    def table(self) -> str:
        lines = [
            f"gamma = {np.asarray(self.gamma).tolist()}  R = {self.R}",
            f"gradient norm at equilibrium: {self.gradient_norm:.3e}",
            "eigenvalues of A: " + " ".join(f"{v:.6g}" for v in self.eigenvalues),
            f"{'k':>2}  {'numeric d_k':>16}  {'closed d_k':>16}  {'rel. error':>10}",
        ]
        for k in range(len(self.minors)):
            closed = "" if self.closed_minors is None else f"{self.closed_minors[k]:16.8g}"
            err = "" if self.minor_relative_errors is None else f"{self.minor_relative_errors[k]:10.2e}"
            lines.append(f"{k + 1:>2}  {self.minors[k]:16.8g}  {closed:>16}  {err:>10}")
        lines.append(f"verdict: {self.verdict}")
        lines.extend(f"note: {n}" for n in self.notes)
        return "\n".join(lines)


def analyze_tetrahedron(
    gamma: ArrayLike,
    R: float = 1.0,
    spec: EnergyCasimirSpec = DEFAULT_SPEC,
    step: float = HESSIAN_STEP,
    hessian_from: str = "gradient",
) -> StabilityReport:
    """Energy-Casimir report at the tetrahedron.

    ``hessian_from="gradient"`` differentiates the analytic gradient of 𝓔;
    ``"values"`` uses second differences of 𝓔 itself.
    """
    c = Circulations(gamma, R)
    _require_tetrahedron(c)
    if not spec.is_critical_family():
        raise DomainError("not a critical point family: need Φ'(0) = -3/2 and DΨ(0) = 0")
    fn = _chart_fn(c, spec)
    y0 = tetrahedron_equilibrium().vector()
    grad = numerical_gradient(fn, y0)
    if hessian_from not in ("gradient", "values"):
        raise ValueError(f"unknown hessian_from {hessian_from!r}")
    H = numerical_hessian(fn, y0, step, _chart_grad(c, spec) if hessian_from == "gradient" else None)
    A = (256.0 / 9.0) * np.pi * c.R**2 * H
    eig = np.linalg.eigvalsh(A)
    minors = leading_minors(A)
    notes: list[str] = []
    closed = errs = match = None
    hess_psi = np.asarray(spec.psi_hess0, dtype=np.float64)
    if spec.phi_second0 == 0.0 and np.allclose(hess_psi, np.diag(np.diag(hess_psi)), atol=0.0):
        closed = hessian_minors_closed(c.gamma, np.diag(hess_psi))
        # closed minors can vanish for mixed signs; floor the denominator on the overall scale
        floor = MINOR_RTOL * float(np.max(np.abs(closed)))
        errs = np.abs(minors - closed) / np.maximum(np.abs(closed), floor)
        match = bool(np.all(errs <= MINOR_RTOL))
        if not match:
            bad = [int(k) + 1 for k in np.flatnonzero(errs > MINOR_RTOL)]
            notes.append(f"numeric minors differ from closed forms for d{bad}; verdict uses eigenvalues")
    else:
        notes.append("closed-form minors need Φ''(0) = 0 and a diagonal Ψ Hessian; skipped")
    verdict = "stable" if eig.min() > 0 else "inconclusive"
    return StabilityReport(
        gamma=c.gamma.copy(),
        R=c.R,
        gradient_norm=float(np.linalg.norm(grad)),
        hessian=H,
        scaled_hessian=A,
        eigenvalues=eig,
        minors=minors,
        closed_minors=closed,
        minor_relative_errors=errs,
        minors_match=match,
        verdict=verdict,
        notes=notes,
    )


def analyze_sweep(
    gammas: Sequence[ArrayLike],
    R: float = 1.0,
    spec: EnergyCasimirSpec = DEFAULT_SPEC,
    max_workers: int | None = None,
) -> list[StabilityReport]:
    """Analyze independent Γ samples concurrently; results keep the input order."""
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(lambda g: analyze_tetrahedron(g, R, spec), gammas))
