"""Shape coordinates of the vortex configuration modulo rotations.

With the last vortex (index ``N-1``, 0-based) as the reference,

    s_i  = |λ_{i,N}|²,              0 <= i < N-1
    μ_ij = λ_ij conj(λ_iN) λ_jN,    0 <= i < j < N-1

The real chart used for integration and Poisson tensors is
``(s_0, ..., s_{N-2}, Re μ_01, Im μ_01, Re μ_02, Im μ_02, ...)`` with pairs in
lexicographic order.  Extended entries follow ``μ_ji = conj(μ_ij)`` and
``μ_ii = 2 s_i``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np
from numpy.typing import ArrayLike

from .errors import DomainError, LogDomainError, ShapeUndefined
from .geometry import ComplexArray, FloatArray
from .liepoisson import AlgebraPoint, coordinate_index, lie_poisson_tensor
from .sphere import Circulations, _chord2

SHAPE_EPS = 1e-10


@lru_cache(maxsize=None)
def shape_pairs(m: int) -> tuple[tuple[int, int], ...]:
    return tuple(combinations(range(m), 2))


@dataclass(frozen=True)
class ShapePoint:
    s: FloatArray
    mu: ComplexArray

    def __post_init__(self):
        s = np.array(self.s, dtype=np.float64).reshape(-1)
        mu = np.array(self.mu, dtype=np.complex128).reshape(-1)
        m = s.size
        if m < 1:
            raise ValueError("a shape needs at least two vortices")
        if mu.size != m * (m - 1) // 2:
            raise ValueError(f"expected {m * (m - 1) // 2} μ entries for N={m + 1}, got {mu.size}")
        s.flags.writeable = False
        mu.flags.writeable = False
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "mu", mu)

    @property
    def N(self) -> int:
        return self.s.size + 1

    def pairs(self) -> tuple[tuple[int, int], ...]:
        return shape_pairs(self.s.size)

    def mu_ext(self, i: int, j: int) -> complex:
        if i == j:
            return complex(2.0 * self.s[i])
        if i < j:
            return complex(self.mu[pair_index(self.s.size, i, j)])
        return complex(np.conj(self.mu[pair_index(self.s.size, j, i)]))

    def mu_matrix(self) -> ComplexArray:
        """Hermitian ``(N-1, N-1)`` matrix of extended μ entries."""
        m = self.s.size
        out = np.diag(2.0 * self.s).astype(np.complex128)
        if m > 1:
            iu = np.triu_indices(m, 1)
            out[iu] = self.mu
            out[(iu[1], iu[0])] = np.conj(self.mu)
        return out

    def mu_dict(self) -> dict[tuple[int, int], complex]:
        return {p: complex(v) for p, v in zip(self.pairs(), self.mu)}

    def vector(self) -> FloatArray:
        return np.concatenate([self.s, np.column_stack([self.mu.real, self.mu.imag]).ravel()])

    @classmethod
    def from_vector(cls, v: ArrayLike, N: int) -> "ShapePoint":
        v = np.asarray(v, dtype=np.float64)
        m = N - 1
        if v.size != m * m:
            raise ValueError(f"shape chart for N={N} has {m * m} coordinates, got {v.size}")
        off = v[m:].reshape(-1, 2)
        return cls(v[:m], off[:, 0] + 1j * off[:, 1])


def pair_index(m: int, i: int, j: int) -> int:
    if not 0 <= i < j < m:
        raise IndexError(f"invalid shape pair {(i, j)} for N={m + 1}")
    return i * m - i * (i + 1) // 2 + (j - i - 1)


def chart_index(N: int, coord: tuple) -> int:
    """Position of ``('s', i)``, ``('remu', i, j)`` or ``('immu', i, j)`` in the real chart."""
    m = N - 1
    kind = coord[0]
    if kind == "s":
        i = coord[1]
        if not 0 <= i < m:
            raise IndexError(f"invalid s index {i} for N={N}")
        return i
    if kind in ("remu", "immu"):
        return m + 2 * pair_index(m, coord[1], coord[2]) + (kind == "immu")
    raise ValueError(f"invalid shape coordinate {coord!r}")


def coordinate_gradient(N: int, coord: tuple) -> ComplexArray:
    """Chart gradient of a coordinate; ``('mu', i, j)`` is complex (``i > j`` means the conjugate)."""
    g = np.zeros((N - 1) ** 2, dtype=np.complex128)
    if coord[0] == "mu":
        _, i, j = coord
        if i == j:
            g[chart_index(N, ("s", i))] = 2.0
        elif i < j:
            g[chart_index(N, ("remu", i, j))] = 1.0
            g[chart_index(N, ("immu", i, j))] = 1j
        else:
            g[chart_index(N, ("remu", j, i))] = 1.0
            g[chart_index(N, ("immu", j, i))] = -1j
        return g
    g[chart_index(N, coord)] = 1.0
    return g


# --- conversions -----------------------------------------------------------


def shape_from_lambda(lam: AlgebraPoint) -> ShapePoint:
    e = lam.ext
    n = lam.N
    if n < 2:
        raise ValueError("shape coordinates need N >= 2")
    last = e[: n - 1, n - 1]
    s = np.abs(last) ** 2
    mu = [e[i, j] * np.conj(last[i]) * last[j] for i, j in shape_pairs(n - 1)]
    return ShapePoint(s, np.array(mu, dtype=np.complex128))


def lambda_from_shape(zeta: ShapePoint) -> AlgebraPoint:
    """Gauge-fixed λ with ``λ_i = √2``, ``λ_iN = √s_i`` real and ``λ_ij = μ_ij / √(s_i s_j)``."""
    n, m = zeta.N, zeta.N - 1
    if np.any(zeta.s <= 0):
        raise DomainError("shape has a nonpositive s_i")
    rs = np.sqrt(zeta.s)
    e = np.eye(n, dtype=np.complex128) * 2.0
    e[:m, m] = rs
    e[m, :m] = rs
    for (i, j), v in zip(zeta.pairs(), zeta.mu):
        e[i, j] = v / (rs[i] * rs[j])
        e[j, i] = np.conj(e[i, j])
    return AlgebraPoint(e)


def shape_from_sphere(X: ArrayLike, c: Circulations) -> ShapePoint:
    """Shape coordinates from chords and signed volumes of an ``(N, 3)`` configuration."""
    X = np.asarray(X, dtype=np.float64)
    n = c.N
    if X.shape != (n, 3):
        raise ValueError(f"expected positions of shape ({n}, 3), got {X.shape}")
    if n < 2:
        raise ValueError("shape coordinates need N >= 2")
    R = c.R
    lam2 = 4.0 - _chord2(X, R) / R**2
    iu = np.triu_indices(n, 1)
    k = np.argmin(lam2[iu])
    if lam2[iu][k] <= SHAPE_EPS:
        raise ShapeUndefined(int(iu[0][k]), int(iu[1][k]))
    m = n - 1
    s = lam2[:m, m]
    xn = X[m]
    mu = []
    for i, j in shape_pairs(m):
        re = lam2[i, j] + s[i] + s[j] - 4.0
        im = 2.0 * np.dot(X[i], np.cross(X[j], xn)) / R**3
        mu.append(re + 1j * im)
    return ShapePoint(s, np.array(mu, dtype=np.complex128))


# --- functions on shape space ----------------------------------------------


def check_shape(zeta: ShapePoint, eps: float = SHAPE_EPS) -> ShapePoint:
    """Reject shapes outside ``s_i ∈ (ε, 4-ε)``, ``|μ_ij| >= ε``."""
    bad = np.flatnonzero((zeta.s <= eps) | (zeta.s >= 4.0 - eps))
    if bad.size:
        raise DomainError(f"inadmissible shape: s_{bad[0] + 1} = {zeta.s[bad[0]]!r} outside (0, 4)")
    small = np.flatnonzero(np.abs(zeta.mu) < eps)
    if small.size:
        i, j = zeta.pairs()[small[0]]
        raise DomainError(f"inadmissible shape: |μ_{i + 1}_{j + 1}| below {eps}")
    return zeta


def _require_positive_s(zeta: ShapePoint) -> None:
    if np.any(zeta.s <= 0):
        i = int(np.flatnonzero(zeta.s <= 0)[0])
        raise DomainError(f"s_{i + 1} must be positive, got {zeta.s[i]!r}")


def f_constraints(zeta: ShapePoint) -> dict[tuple[int, int], float]:
    """``f_ij = Re μ_ij - |μ_ij|²/(s_i s_j) - s_i - s_j + 4``, keyed by 0-based pairs."""
    _require_positive_s(zeta)
    s = zeta.s
    out = {}
    for (i, j), v in zip(zeta.pairs(), zeta.mu):
        out[(i, j)] = float(v.real - abs(v) ** 2 / (s[i] * s[j]) - s[i] - s[j] + 4.0)
    return out


def project_constraints(zeta: ShapePoint) -> ShapePoint:
    """Solve ``f_ij = 0`` for Re μ_ij, taking the root closest to the current value."""
    _require_positive_s(zeta)
    s = zeta.s
    mu = zeta.mu.copy()
    for k, (i, j) in enumerate(zeta.pairs()):
        p = s[i] * s[j]
        b = mu[k].imag
        # a² - p a + b² + p(s_i + s_j - 4) = 0
        disc = p * p - 4.0 * (b * b + p * (s[i] + s[j] - 4.0))
        if disc < 0:
            raise DomainError(f"constraint f_{i + 1}_{j + 1} = 0 has no real solution")
        roots = 0.5 * (p + np.array([-1.0, 1.0]) * np.sqrt(disc))
        a = roots[np.argmin(np.abs(roots - mu[k].real))]
        mu[k] = a + 1j * b
    return ShapePoint(s, mu)


def _log_args(zeta: ShapePoint, c: Circulations):
    _require_positive_s(zeta)
    s, R = zeta.s, c.R
    pairs = zeta.pairs()
    q = np.array([abs(v) ** 2 / (s[i] * s[j]) for (i, j), v in zip(pairs, zeta.mu)])
    pair_arg = R**2 * (4.0 - q)
    last_arg = R**2 * (4.0 - s)
    for k, a in enumerate(pair_arg):
        if a <= 0:
            i, j = pairs[k]
            raise LogDomainError(f"pair ({i + 1},{j + 1})", float(a))
    for i, a in enumerate(last_arg):
        if a <= 0:
            raise LogDomainError(f"pair ({i + 1},{zeta.N})", float(a))
    return pairs, q, pair_arg, last_arg


def shape_hamiltonian(zeta: ShapePoint, c: Circulations) -> float:
    if zeta.N != c.N:
        raise ValueError("dimension mismatch between shape and circulations")
    pairs, _, pair_arg, last_arg = _log_args(zeta, c)
    g = c.gamma
    acc = sum(g[i] * g[j] * np.log(a) for (i, j), a in zip(pairs, pair_arg))
    acc += g[-1] * np.sum(g[:-1] * np.log(last_arg))
    return float(-acc / (4.0 * np.pi * c.R**2))


def grad_shape_hamiltonian(zeta: ShapePoint, c: Circulations) -> FloatArray:
    """Analytic gradient of the shape Hamiltonian in the real chart."""
    pairs, q, _, _ = _log_args(zeta, c)
    g, s, m = c.gamma, zeta.s, zeta.N - 1
    pref = -1.0 / (4.0 * np.pi * c.R**2)
    out = np.zeros(m * m)
    out[:m] = pref * g[-1] * g[:-1] * (-1.0 / (4.0 - s))
    for k, ((i, j), v) in enumerate(zip(pairs, zeta.mu)):
        w = pref * g[i] * g[j] / (4.0 - q[k])
        out[i] += w * q[k] / s[i]
        out[j] += w * q[k] / s[j]
        out[m + 2 * k] = w * (-2.0 * v.real / (s[i] * s[j]))
        out[m + 2 * k + 1] = w * (-2.0 * v.imag / (s[i] * s[j]))
    return out


def casimir_shape_c2(zeta: ShapePoint, c: Circulations) -> float:
    _require_positive_s(zeta)
    g, s = c.gamma, zeta.s
    acc = float(np.sum(g**2))
    for (i, j), v in zip(zeta.pairs(), zeta.mu):
        acc += 0.5 * g[i] * g[j] * abs(v) ** 2 / (s[i] * s[j])
    acc += 0.5 * g[-1] * float(np.sum(g[:-1] * s))
    return acc


def grad_f_constraints(zeta: ShapePoint) -> FloatArray:
    """Chart gradients of the ``f_ij``; row k belongs to the k-th pair."""
    _require_positive_s(zeta)
    s, m = zeta.s, zeta.N - 1
    out = np.zeros((len(zeta.mu), m * m))
    for k, ((i, j), v) in enumerate(zip(zeta.pairs(), zeta.mu)):
        p = s[i] * s[j]
        q = abs(v) ** 2 / p
        out[k, i] = q / s[i] - 1.0
        out[k, j] = q / s[j] - 1.0
        out[k, m + 2 * k] = 1.0 - 2.0 * v.real / p
        out[k, m + 2 * k + 1] = -2.0 * v.imag / p
    return out


def grad_casimir_shape_c2(zeta: ShapePoint, c: Circulations) -> FloatArray:
    _require_positive_s(zeta)
    g, s, m = c.gamma, zeta.s, zeta.N - 1
    out = np.zeros(m * m)
    out[:m] = 0.5 * g[-1] * g[:-1]
    for k, ((i, j), v) in enumerate(zip(zeta.pairs(), zeta.mu)):
        p = s[i] * s[j]
        w = g[i] * g[j]
        q = abs(v) ** 2 / p
        out[i] -= 0.5 * w * q / s[i]
        out[j] -= 0.5 * w * q / s[j]
        out[m + 2 * k] = w * v.real / p
        out[m + 2 * k + 1] = w * v.imag / p
    return out


# --- Poisson structure -----------------------------------------------------


def shape_jacobian(lam: AlgebraPoint) -> FloatArray:
    """Derivative of the real shape chart with respect to the λ coordinate vector."""
    n, m = lam.N, lam.N - 1
    e = lam.ext
    J = np.zeros((m * m, n * n))
    last = e[:m, m]

    def put_complex(row_re, col_re, deriv_re, deriv_im):
        # deriv_* = d μ / d(Re λ), d μ / d(Im λ)
        J[row_re, col_re] += deriv_re.real
        J[row_re, col_re + 1] += deriv_im.real
        J[row_re + 1, col_re] += deriv_re.imag
        J[row_re + 1, col_re + 1] += deriv_im.imag

    for i in range(m):
        col = coordinate_index(n, i, m)
        J[i, col] = 2.0 * last[i].real
        J[i, col + 1] = 2.0 * last[i].imag
    for k, (i, j) in enumerate(shape_pairs(m)):
        row = m + 2 * k
        g1 = np.conj(last[i]) * last[j]  # holomorphic in λ_ij
        put_complex(row, coordinate_index(n, i, j), g1, 1j * g1)
        g2 = e[i, j] * np.conj(last[i])  # holomorphic in λ_jN
        put_complex(row, coordinate_index(n, j, m), g2, 1j * g2)
        g3 = e[i, j] * last[j]  # antiholomorphic in λ_iN
        put_complex(row, coordinate_index(n, i, m), g3, -1j * g3)
    return J


def shape_poisson_tensor(zeta: ShapePoint, c: Circulations) -> FloatArray:
    """Pushforward ``J P Jᵀ`` of the Lie-Poisson tensor at the gauge-fixed λ."""
    if zeta.N != c.N:
        raise ValueError("dimension mismatch between shape and circulations")
    lam = lambda_from_shape(zeta)
    J = shape_jacobian(lam)
    T = J @ lie_poisson_tensor(lam, c.gamma) @ J.T
    return 0.5 * (T - T.T)


def shape_bracket(a: tuple, b: tuple, zeta: ShapePoint, c: Circulations) -> complex:
    """Bracket of two shape coordinates from the pushforward tensor.

    Coordinates: ``('s', i)``, ``('remu', i, j)``, ``('immu', i, j)`` or the
    complex ``('mu', i, j)`` (0-based; ``N-1`` is the reference vortex).
    """
    T = shape_poisson_tensor(zeta, c)
    ga = coordinate_gradient(zeta.N, a)
    gb = coordinate_gradient(zeta.N, b)
    return complex(ga @ T @ gb)


def shape_bracket_closed(a: tuple, b: tuple, zeta: ShapePoint, c: Circulations) -> complex:
    """Closed-form brackets of ``s`` and ``μ`` coordinates.

    Covers ``{s, s}``, every ``{s, μ}`` pattern, and the ``{μ, μ}`` patterns
    sharing exactly one index (``i = l``, ``j = m`` or ``j = l``).  Other
    patterns raise ``NotImplementedError``; use :func:`shape_bracket`.
    """
    g = c.gamma
    gN = g[-1]
    s = zeta.s
    mu = zeta.mu_ext
    I = 1j
    if a[0] == "mu" and b[0] == "s":
        return -shape_bracket_closed(b, a, zeta, c)
    if a[0] == "s" and b[0] == "s":
        return complex(2.0 / gN * mu(a[1], b[1]).imag)
    if a[0] == "s" and b[0] == "mu":
        i, (k, l) = a[1], b[1:]
        if k > l:
            return complex(np.conj(shape_bracket_closed(a, ("mu", l, k), zeta, c)))
        if k == l:
            return 2.0 * shape_bracket_closed(a, ("s", k), zeta, c)
        if i == k:
            return I * (abs(mu(k, l)) ** 2 / (gN * s[l]) - s[k] * s[l] / g[k] - 2.0 * (1 / gN - 1 / g[k]) * mu(k, l))
        if i == l:
            return I * (
                s[l] * (s[k] / g[l] - abs(mu(k, l)) ** 2 / (s[k] * s[l] * gN)) - 2.0 * (1 / g[l] - 1 / gN) * mu(k, l)
            )
        return I * mu(k, l) / gN * (mu(l, i) / s[l] - mu(i, k) / s[k])
    if a[0] == "mu" and b[0] == "mu":
        (i, j), (l, m_) = a[1:], b[1:]
        if not (i < j and l < m_):
            raise NotImplementedError("closed forms need i < j and l < m")
        if i == l and j != m_:
            m = m_
            return I * (
                (s[j] * mu(i, m) - s[m] * mu(i, j)) / g[i]
                + (abs(mu(i, m)) ** 2 * mu(i, j) / s[m] - abs(mu(i, j)) ** 2 * mu(i, m) / s[j]) / (gN * s[i])
            )
        if j == m_ and i != l:
            return I * (
                (s[l] * mu(i, j) - s[i] * mu(l, j)) / g[j]
                + (abs(mu(i, j)) ** 2 * mu(l, j) / s[i] - abs(mu(j, l)) ** 2 * mu(i, j) / s[l]) / (gN * s[j])
            )
        if j == l:
            m = m_
            return I * (
                2.0 * (1 / g[j] - 1 / gN) * mu(i, j) * mu(j, m) / s[j]
                - s[j] / g[j] * mu(i, m)
                + mu(i, j) * mu(m, i) * mu(j, m) / (gN * s[i] * s[m])
            )
        if m_ == i:
            return -shape_bracket_closed(b, a, zeta, c)
        raise NotImplementedError(f"no closed form for the index pattern {a}, {b}")
    raise ValueError(f"invalid shape coordinates {a!r}, {b!r}")


def shape_rhs(zeta: ShapePoint, c: Circulations) -> FloatArray:
    """Shape vector field in the real chart: ``T ∇𝓗``."""
    return shape_poisson_tensor(zeta, c) @ grad_shape_hamiltonian(zeta, c)


def shape_rhs_vector(y: FloatArray, c: Circulations) -> FloatArray:
    return shape_rhs(ShapePoint.from_vector(y, c.N), c)
