"""Lie-Poisson dynamics on the dual of u(N) with the Γ-modified bracket.

Points of the dual (and algebra elements) are stored through their extended
entry matrix ``E``: a Hermitian N x N matrix with ``E[i, i] = sqrt(2) λ_i``
and ``E[i, j] = λ_ij``, so that the anti-Hermitian matrix is ``-(i/2) E``.
The real coordinate vector is ordered
``(λ_1, ..., λ_N, Re λ_12, Im λ_12, Re λ_13, Im λ_13, ..., Im λ_{N-1,N})``,
which is also the order of the orthonormal basis ``D_i, E_ij, F_ij``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np
from numpy.typing import ArrayLike
from scipy.linalg import expm

from .errors import LogDomainError
from .geometry import ComplexArray, FloatArray
from .sphere import Circulations

SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class AlgebraPoint:
    """An element of u(N)_Γ or of its dual, held as the extended-entry matrix."""

    ext: ComplexArray

    def __post_init__(self):
        e = np.array(self.ext, dtype=np.complex128)
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise ValueError(f"extended-entry matrix must be square, got {e.shape}")
        e = 0.5 * (e + e.conj().T)
        e.flags.writeable = False
        object.__setattr__(self, "ext", e)

    @property
    def N(self) -> int:
        return self.ext.shape[0]

    @property
    def lam(self) -> FloatArray:
        return np.diag(self.ext).real / SQRT2

    def entry(self, i: int, j: int) -> complex:
        """λ_ij for any i, j (``λ_ji = conj(λ_ij)``, ``λ_ii = sqrt(2) λ_i``)."""
        return complex(self.ext[i, j])

    def matrix(self) -> ComplexArray:
        return -0.5j * self.ext

    def vector(self) -> FloatArray:
        n = self.N
        iu = np.triu_indices(n, 1)
        off = self.ext[iu]
        return np.concatenate([self.lam, np.column_stack([off.real, off.imag]).ravel()])

    @classmethod
    def from_matrix(cls, m: ArrayLike) -> "AlgebraPoint":
        return cls(2j * np.asarray(m, dtype=np.complex128))

    @classmethod
    def from_vector(cls, v: ArrayLike) -> "AlgebraPoint":
        v = np.asarray(v, dtype=np.float64)
        n = int(round(np.sqrt(v.size)))
        if n * n != v.size:
            raise ValueError(f"coordinate vector length {v.size} is not a perfect square")
        e = np.zeros((n, n), dtype=np.complex128)
        e[np.diag_indices(n)] = SQRT2 * v[:n]
        iu = np.triu_indices(n, 1)
        off = v[n:].reshape(-1, 2)
        e[iu] = off[:, 0] + 1j * off[:, 1]
        e[(iu[1], iu[0])] = off[:, 0] - 1j * off[:, 1]
        return cls(e)

    @classmethod
    def from_coords(cls, lam: ArrayLike, off: dict[tuple[int, int], complex]) -> "AlgebraPoint":
        lam = np.asarray(lam, dtype=np.float64)
        n = lam.size
        e = np.diag(SQRT2 * lam).astype(np.complex128)
        for (i, j), val in off.items():
            if not i < j:
                raise ValueError(f"off-diagonal coordinates need i < j, got {(i, j)}")
            e[i, j] = val
            e[j, i] = np.conj(val)
        return cls(e)


AlgebraElement = AlgebraPoint


def inner(a: ArrayLike, b: ArrayLike) -> float:
    """``<a, b> = 2 tr(a* b)`` on anti-Hermitian matrices."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    return float(2.0 * np.vdot(a, b).real)


@lru_cache(maxsize=None)
def basis(n: int) -> ComplexArray:
    """The orthonormal basis ``D_i, (E_ij, F_ij)_{i<j}`` as an ``(n², n, n)`` array."""
    out = []
    for i in range(n):
        m = np.zeros((n, n), dtype=np.complex128)
        m[i, i] = -1j / SQRT2
        out.append(m)
    for i, j in combinations(range(n), 2):
        e = np.zeros((n, n), dtype=np.complex128)
        e[i, j] = e[j, i] = -0.5j
        f = np.zeros((n, n), dtype=np.complex128)
        f[i, j], f[j, i] = 0.5, -0.5
        out += [e, f]
    b = np.array(out)
    b.flags.writeable = False
    return b


def coordinate_index(n: int, i: int, j: int | None = None) -> int:
    """Position of ``λ_i`` (``j is None``) or ``Re λ_ij`` (``i < j``) in the coordinate vector."""
    if j is None:
        return i
    if not 0 <= i < j < n:
        raise IndexError(f"invalid off-diagonal index {(i, j)} for N={n}")
    k = i * n - i * (i + 1) // 2 + (j - i - 1)
    return n + 2 * k


def _check_pair(a: AlgebraPoint, b: AlgebraPoint, gamma: FloatArray) -> None:
    if a.N != b.N or a.N != len(gamma):
        raise ValueError(f"dimension mismatch: {a.N}, {b.N}, {len(gamma)} circulations")


def bracket_matrix(x: ComplexArray, y: ComplexArray, gamma: ArrayLike) -> ComplexArray:
    dinv = 1.0 / np.asarray(gamma, dtype=np.float64)
    return (x * dinv) @ y - (y * dinv) @ x


def bracket_gamma(xi: AlgebraElement, eta: AlgebraElement, gamma: ArrayLike) -> AlgebraElement:
    """``[ξ, η]_Γ = ξ D⁻¹ η - η D⁻¹ ξ``."""
    gamma = np.asarray(gamma, dtype=np.float64)
    _check_pair(xi, eta, gamma)
    return AlgebraPoint.from_matrix(bracket_matrix(xi.matrix(), eta.matrix(), gamma))


def ad_star(xi: AlgebraElement, lam: AlgebraPoint, gamma: ArrayLike) -> AlgebraPoint:
    """``ad*_ξ λ = λ ξ D⁻¹ - D⁻¹ ξ λ``."""
    gamma = np.asarray(gamma, dtype=np.float64)
    _check_pair(xi, lam, gamma)
    dinv = 1.0 / gamma
    x, m = xi.matrix(), lam.matrix()
    return AlgebraPoint.from_matrix(m @ (x * dinv) - (dinv[:, None] * x) @ m)


def group_element(xi: AlgebraElement, gamma: ArrayLike) -> ComplexArray:
    """``exp(ξ D⁻¹)``, an element of U(D_Γ)."""
    dinv = 1.0 / np.asarray(gamma, dtype=np.float64)
    return expm(xi.matrix() * dinv)


def Ad_star(U: ArrayLike, lam: AlgebraPoint) -> AlgebraPoint:
    U = np.asarray(U, dtype=np.complex128)
    return AlgebraPoint.from_matrix(U.conj().T @ lam.matrix() @ U)


@lru_cache(maxsize=64)
def _structure(gamma: tuple[float, ...]) -> FloatArray:
    # S[k, a, b] = -<B_k, [B_a, B_b]_Γ>, so that P_ab(λ) = Σ_k v_k S[k, a, b]
    n = len(gamma)
    B = basis(n)
    dinv = 1.0 / np.asarray(gamma)
    BD = B * dinv[None, None, :]
    comm = np.einsum("aij,bjk->abik", BD, B)
    comm = comm - comm.transpose(1, 0, 2, 3)
    S = -2.0 * np.einsum("kij,abij->kab", B.conj(), comm).real
    S.flags.writeable = False
    return S


def lie_poisson_tensor(lam: AlgebraPoint, gamma: ArrayLike) -> FloatArray:
    """Real Poisson tensor ``P_ab = {v_a, v_b}`` in the coordinate vector ``v``."""
    S = _structure(tuple(float(g) for g in np.asarray(gamma).ravel()))
    if S.shape[0] != lam.N**2:
        raise ValueError("dimension mismatch between λ and circulations")
    return np.tensordot(lam.vector(), S, axes=1)


def lp_bracket_gradients(gf: ArrayLike, gh: ArrayLike, lam: AlgebraPoint, gamma: ArrayLike) -> complex:
    """``{f, h}`` from coordinate gradients (complex gradients allowed)."""
    P = lie_poisson_tensor(lam, gamma)
    return complex(np.asarray(gf) @ P @ np.asarray(gh))


def coordinate_gradient(n: int, coord: tuple) -> ComplexArray:
    """Gradient of the coordinate function ``('lam', i)`` or ``('lam', i, j)``.

    Complex entries ``λ_ij`` with ``i >= j`` follow the extended convention.
    """
    g = np.zeros(n * n, dtype=np.complex128)
    if coord[0] != "lam" or len(coord) not in (2, 3):
        raise ValueError(f"invalid coordinate {coord!r}")
    if len(coord) == 2:
        i = coord[1]
        if not 0 <= i < n:
            raise IndexError(f"invalid index {i} for N={n}")
        g[i] = 1.0
        return g
    _, i, j = coord
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"invalid index {(i, j)} for N={n}")
    if i == j:
        g[i] = SQRT2
    elif i < j:
        k = coordinate_index(n, i, j)
        g[k], g[k + 1] = 1.0, 1j
    else:
        k = coordinate_index(n, j, i)
        g[k], g[k + 1] = 1.0, -1j
    return g


def lp_bracket_coords(a: tuple, b: tuple, gamma: ArrayLike):
    """Closed-form bracket of two coordinate functions, as a function of λ.

    Coordinates are ``('lam', i)`` for ``λ_i`` or ``('lam', i, j)`` for the
    complex entry ``λ_ij`` (any i, j).  Returns ``f(λ: AlgebraPoint) -> complex``.
    """
    gamma = np.asarray(gamma, dtype=np.float64)
    n = len(gamma)
    for coord in (a, b):
        coordinate_gradient(n, coord)  # validates
    delta = lambda p, q: 1.0 if p == q else 0.0  # noqa: E731

    def lam_ij(ij):
        return ij[1:] if len(ij) == 3 else None

    if len(a) == 2 and len(b) == 2:
        return lambda lam: 0j
    if len(a) == 3 and len(b) == 2:
        flipped = lp_bracket_coords(b, a, gamma)
        return lambda lam: -flipped(lam)
    if len(a) == 2:
        i = a[1]
        j, k = lam_ij(b)

        def f(lam: AlgebraPoint) -> complex:
            return -1j / (SQRT2 * gamma[i]) * (delta(i, j) * lam.entry(i, k) - delta(i, k) * lam.entry(j, i))

        return f
    i, j = lam_ij(a)
    k, l = lam_ij(b)

    def g(lam: AlgebraPoint) -> complex:
        return 1j * (delta(i, l) * lam.entry(k, j) / gamma[i] - delta(j, k) * lam.entry(i, l) / gamma[j])

    return g


def _pair_terms(lam: AlgebraPoint, c: Circulations):
    n = lam.N
    iu = np.triu_indices(n, 1)
    lv = lam.lam
    ssum = lv[iu[0]] + lv[iu[1]]
    off = lam.ext[iu]
    q = 0.5 * ssum**2 - np.abs(off) ** 2
    return iu, ssum, off, q


def collective_h(lam: AlgebraPoint, c: Circulations) -> float:
    """Collective Hamiltonian ``h`` with ``h ∘ L = H``."""
    if lam.N != c.N:
        raise ValueError("dimension mismatch between λ and circulations")
    if c.N < 2:
        return 0.0
    iu, _, _, q = _pair_terms(lam, c)
    arg = c.R**2 * q
    bad = np.flatnonzero(arg <= 0)
    if bad.size:
        k = bad[0]
        raise LogDomainError(f"pair ({iu[0][k] + 1},{iu[1][k] + 1})", float(arg[k]))
    gg = c.gamma[iu[0]] * c.gamma[iu[1]]
    return float(-np.sum(gg * np.log(arg)) / (4.0 * np.pi * c.R**2))


def grad_h(lam: AlgebraPoint, c: Circulations) -> AlgebraElement:
    """Analytic functional derivative ``δh/δλ`` as an algebra element."""
    n = c.N
    if n < 2:
        return AlgebraPoint(np.zeros((n, n)))
    iu, ssum, off, q = _pair_terms(lam, c)
    if np.any(q <= 0):
        collective_h(lam, c)  # raises with the offending pair
    w = -(c.gamma[iu[0]] * c.gamma[iu[1]]) / (4.0 * np.pi * c.R**2 * q)
    dl = np.zeros(n)
    np.add.at(dl, iu[0], w * ssum)
    np.add.at(dl, iu[1], w * ssum)
    e = np.diag(SQRT2 * dl).astype(np.complex128)
    # ξ_ij = ∂h/∂Re λ_ij + i ∂h/∂Im λ_ij = -2 w λ_ij
    e[iu] = -2.0 * w * off
    e[(iu[1], iu[0])] = np.conj(e[iu])
    return AlgebraPoint(e)


def grad_h_fd(lam: AlgebraPoint, c: Circulations, step: float = 1e-6) -> AlgebraElement:
    """Central-difference ``δh/δλ``; debugging fallback for :func:`grad_h`."""
    v = lam.vector()
    g = np.empty_like(v)
    for k in range(v.size):
        e = np.zeros_like(v)
        e[k] = step
        g[k] = (collective_h(AlgebraPoint.from_vector(v + e), c) - collective_h(AlgebraPoint.from_vector(v - e), c)) / (
            2 * step
        )
    return AlgebraPoint.from_vector(g)


def lp_rhs(lam: AlgebraPoint, c: Circulations) -> AlgebraPoint:
    """Lie-Poisson vector field ``λ̇ = ad*_{δh/δλ} λ``."""
    return ad_star(grad_h(lam, c), lam, c.gamma)


def lp_rhs_vector(v: FloatArray, c: Circulations) -> FloatArray:
    return lp_rhs(AlgebraPoint.from_vector(v), c).vector()


def casimir(lam: AlgebraPoint, j: int, c: Circulations | ArrayLike, imag_tol: float = 1e-12) -> float:
    """``C_j = tr((i D_Γ λ)^j)``."""
    if j < 1:
        raise ValueError("Casimir order must be >= 1")
    gamma = c.gamma if isinstance(c, Circulations) else np.asarray(c, dtype=np.float64)
    A = 1j * gamma[:, None] * lam.matrix()
    val = np.trace(np.linalg.matrix_power(A, j))
    scale = max(1.0, float(np.linalg.norm(A, 2)) ** j)
    if abs(val.imag) > imag_tol * scale * lam.N:
        raise ArithmeticError(f"Casimir C_{j} has imaginary part {val.imag:.3e}")
    return float(val.real)


def casimir_gradient(lam: AlgebraPoint, j: int, gamma: ArrayLike) -> FloatArray:
    """Gradient of ``C_j`` in the coordinate vector: ``j tr(A^{j-1} i D B_a)``."""
    gamma = np.asarray(gamma, dtype=np.float64)
    A = 1j * gamma[:, None] * lam.matrix()
    Aj = np.linalg.matrix_power(A, j - 1)
    B = basis(lam.N)
    dA = 1j * gamma[None, :, None] * B
    return (j * np.einsum("ij,aji->a", Aj, dA)).real


def faddeev_leverrier(A: ArrayLike) -> ComplexArray:
    """Coefficients ``c_1..c_N`` with ``det(xI - A) = x^N - c_1 x^{N-1} - ... - c_N``."""
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"matrix must be square, got shape {A.shape}")
    n = A.shape[0]
    eye = np.eye(n)
    coeffs = np.empty(n, dtype=np.result_type(A.dtype, np.float64))
    B = eye
    for k in range(1, n + 1):
        Ak = A @ B
        coeffs[k - 1] = np.trace(Ak) / k
        B = Ak - coeffs[k - 1] * eye
    return coeffs


def cayley_hamilton_residual(A: ArrayLike, coeffs: ArrayLike) -> float:
    """Norm of ``A^N - c_1 A^{N-1} - ... - c_N I``."""
    A = np.asarray(A)
    n = A.shape[0]
    acc = np.linalg.matrix_power(A, n).astype(np.result_type(A, np.asarray(coeffs)))
    for k, ck in enumerate(coeffs, start=1):
        acc = acc - ck * np.linalg.matrix_power(A, n - k)
    return float(np.linalg.norm(acc))


def reconstruct_power_sum(lower: ArrayLike, n: int, top_coefficient: complex = 0.0) -> complex:
    """Rebuild ``p_n = tr(A^n)`` from ``p_1..p_{n-1}`` and ``c_n``.

    ``c_1..c_{n-1}`` follow from the lower power sums (Newton's identities,
    the trace form of the Faddeev-LeVerrier recursion); then the trace of the
    Cayley-Hamilton identity gives ``p_n = Σ c_k p_{n-k} + n c_n``.  The top
    coefficient is ``(-1)^{n+1} det A``; it vanishes whenever ``rank A < n``,
    which is the case for every λ coming from ``n >= 3`` vortices.
    """
    p = np.asarray(lower, dtype=np.complex128)
    if p.size != n - 1:
        raise ValueError(f"need {n - 1} lower power sums, got {p.size}")
    cs = []
    for k in range(1, n):
        ck = (p[k - 1] - sum(cs[m - 1] * p[k - m - 1] for m in range(1, k))) / k
        cs.append(ck)
    pn = sum(cs[k - 1] * p[n - k - 1] for k in range(1, n)) + n * top_coefficient
    return complex(pn)
