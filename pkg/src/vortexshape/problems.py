"""Ready-to-integrate problems for each level of description, and the
cross-level comparisons built on them.

Every level starts from a sphere configuration ``X`` of shape ``(N, 3)``:

* ``sphere``     state ``X.ravel()``
* ``lifted``     state ``(Re Φ, Im Φ)`` of a Hopf lift of ``X``
* ``liepoisson`` state the λ coordinate vector of ``momentum_L(Φ)``
* ``shape``      state the real shape chart of ``shape_from_sphere(X)``
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike

from . import lifted as lf
from . import liepoisson as lp
from . import shape as sh
from . import sphere as sp
from .geometry import FloatArray, hopf_lift_all, hopf_project
from .timeint import IntegratorConfig, Monitor, PostStep, TrajectoryRecord, integrate

LEVELS = ("sphere", "lifted", "liepoisson", "shape")


@dataclass
class Problem:
    level: str
    c: sp.Circulations
    y0: FloatArray
    rhs: Callable[[FloatArray], FloatArray]
    monitors: dict[str, Monitor]
    state_columns: list[str]
    post_step: PostStep | None = None

    def run(self, cfg: IntegratorConfig) -> TrajectoryRecord:
        return integrate(self.rhs, self.y0, cfg, self.monitors, self.post_step)

    @property
    def columns(self) -> list[str]:
        return ["t", *self.state_columns, *self.monitors]


def _pair_names(n: int, fmt: str) -> list[str]:
    return [fmt.format(i + 1, j + 1) for i, j in combinations(range(n), 2)]


def sphere_monitors(c: sp.Circulations) -> dict[str, Monitor]:
    n = c.N

    def X(y):
        return y.reshape(n, 3)

    mons: dict[str, Monitor] = {"H": lambda y: sp.hamiltonian_sphere(X(y), c)}
    for k in range(3):
        mons[f"I_{k + 1}"] = lambda y, k=k: sp.moment_of_vorticity(X(y), c)[k]
    return mons


def sphere_problem(X0: ArrayLike, c: sp.Circulations, renormalize: bool = True) -> Problem:
    X0 = sp.check_state(X0, c)
    n = c.N

    def post(y):
        Xn, cnt = sp.project_to_sphere(y.reshape(n, 3), c.R, sp.RENORM_TOL)
        return Xn.ravel(), cnt

    cols = [f"x{i + 1}_{k + 1}" for i in range(n) for k in range(3)]
    return Problem(
        "sphere",
        c,
        X0.ravel().copy(),
        lambda y: sp.rhs_sphere(y.reshape(n, 3), c).ravel(),
        sphere_monitors(c),
        cols,
        post if renormalize else None,
    )


def lifted_monitors(c: sp.Circulations) -> dict[str, Monitor]:
    n = c.N

    def P(y):
        return lf.unpack_lifted(y, n)

    mons: dict[str, Monitor] = {"H": lambda y: lf.hamiltonian_lifted(P(y), c)}
    for i in range(n):
        mons[f"J_{i + 1}"] = lambda y, i=i: lf.momentum_J(P(y), c)[i]
    mons["K_11_im"] = lambda y: lf.momentum_K(P(y), c)[0, 0].imag
    mons["K_22_im"] = lambda y: lf.momentum_K(P(y), c)[1, 1].imag
    mons["K_12_re"] = lambda y: lf.momentum_K(P(y), c)[0, 1].real
    mons["K_12_im"] = lambda y: lf.momentum_K(P(y), c)[0, 1].imag
    return mons


def lifted_problem(X0: ArrayLike, c: sp.Circulations, phases: ArrayLike | None = None) -> Problem:
    X0 = sp.check_state(X0, c)
    n = c.N
    Phi0 = hopf_lift_all(X0, phases)
    cols = (
        [f"re_z{i + 1}" for i in range(n)]
        + [f"re_u{i + 1}" for i in range(n)]
        + [f"im_z{i + 1}" for i in range(n)]
        + [f"im_u{i + 1}" for i in range(n)]
    )
    return Problem(
        "lifted",
        c,
        lf.pack_lifted(Phi0),
        lambda y: lf.rhs_lifted_real(y, c),
        lifted_monitors(c),
        cols,
    )


def liepoisson_monitors(c: sp.Circulations) -> dict[str, Monitor]:
    A = lp.AlgebraPoint.from_vector
    mons: dict[str, Monitor] = {"H": lambda y: lp.collective_h(A(y), c)}
    for j in range(1, c.N + 1):
        mons[f"C{j}"] = lambda y, j=j: lp.casimir(A(y), j, c)
    return mons


def liepoisson_problem(X0: ArrayLike, c: sp.Circulations, phases: ArrayLike | None = None) -> Problem:
    X0 = sp.check_state(X0, c)
    n = c.N
    lam0 = lf.momentum_L(hopf_lift_all(X0, phases), c)
    cols = [f"lam_{i + 1}" for i in range(n)]
    for i, j in combinations(range(n), 2):
        cols += [f"re_lam_{i + 1}_{j + 1}", f"im_lam_{i + 1}_{j + 1}"]
    return Problem(
        "liepoisson",
        c,
        lam0.vector(),
        lambda y: lp.lp_rhs_vector(y, c),
        liepoisson_monitors(c),
        cols,
    )


def shape_monitors(c: sp.Circulations) -> dict[str, Monitor]:
    n = c.N

    def Z(y):
        return sh.ShapePoint.from_vector(y, n)

    c1 = float(np.sum(c.gamma))
    mons: dict[str, Monitor] = {
        "H": lambda y: sh.shape_hamiltonian(Z(y), c),
        "C1": lambda y: c1,
        "C2": lambda y: sh.casimir_shape_c2(Z(y), c),
    }
    for i, j in sh.shape_pairs(n - 1):
        mons[f"f_{i + 1}_{j + 1}"] = lambda y, p=(i, j): sh.f_constraints(Z(y))[p]
    return mons


def shape_columns(n: int) -> list[str]:
    cols = [f"s_{i + 1}" for i in range(n - 1)]
    for i, j in sh.shape_pairs(n - 1):
        cols += [f"re_mu_{i + 1}_{j + 1}", f"im_mu_{i + 1}_{j + 1}"]
    return cols


def shape_problem_from_point(zeta0: sh.ShapePoint, c: sp.Circulations, project: bool = False) -> Problem:
    if c.N < 2:
        raise ValueError("the shape level needs N >= 2")
    sh.check_shape(zeta0)
    n = c.N

    def post(y):
        z = sh.project_constraints(sh.ShapePoint.from_vector(y, n))
        return z.vector(), 1

    return Problem(
        "shape",
        c,
        zeta0.vector(),
        lambda y: sh.shape_rhs_vector(y, c),
        shape_monitors(c),
        shape_columns(n),
        post if project else None,
    )


def shape_problem(X0: ArrayLike, c: sp.Circulations, project: bool = False) -> Problem:
    X0 = sp.check_state(X0, c)
    return shape_problem_from_point(sh.shape_from_sphere(X0, c), c, project)


def make_problem(level: str, X0: ArrayLike, c: sp.Circulations, **kw) -> Problem:
    builders = {
        "sphere": sphere_problem,
        "lifted": lifted_problem,
        "liepoisson": liepoisson_problem,
        "shape": shape_problem,
    }
    if level not in builders:
        raise ValueError(f"unknown level {level!r}; expected one of {', '.join(LEVELS)}")
    return builders[level](X0, c, **kw)


# --- initial configurations -------------------------------------------------


def random_configuration(n: int, R: float = 1.0, seed: int = 0) -> FloatArray:
    """``n`` points uniform on the sphere: normalized Gaussians from numpy's PCG64 ``default_rng(seed)``."""
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, 3))
    return R * X / np.linalg.norm(X, axis=1)[:, None]


def ring_configuration(n: int, colatitude: float, R: float = 1.0) -> FloatArray:
    """``n`` equally spaced points on the circle at the given colatitude (radians)."""
    phi = 2.0 * np.pi * np.arange(n) / n
    st, ct = np.sin(colatitude), np.cos(colatitude)
    return R * np.column_stack([st * np.cos(phi), st * np.sin(phi), np.full(n, ct)])


# --- cross-level comparisons ------------------------------------------------


@dataclass
class Comparison:
    name: str
    deviation: float
    times: FloatArray
    halt_reason: str | None = None

    def ok(self, tol: float) -> bool:
        return self.halt_reason is None and self.deviation <= tol


def _grid_cfg(cfg: IntegratorConfig, sample_dt: float) -> IntegratorConfig:
    return IntegratorConfig(
        method=cfg.method,
        t_end=cfg.t_end,
        dt=cfg.dt,
        rtol=cfg.rtol,
        atol=cfg.atol,
        sample_dt=sample_dt,
        max_steps=cfg.max_steps,
    )


def _compare(name, ta, A, tb, B, halt) -> Comparison:
    m = min(len(ta), len(tb))
    if m == 0 or not np.allclose(ta[:m], tb[:m], rtol=0, atol=1e-12):
        raise RuntimeError(f"{name}: sample grids do not match")
    dev = float(np.max(np.abs(A[:m] - B[:m]))) if m else 0.0
    if halt is None and len(ta) != len(tb):
        halt = "trajectories have different lengths"
    return Comparison(name, dev, ta[:m], halt)


def reduction_chain(
    X0: ArrayLike, c: sp.Circulations, cfg: IntegratorConfig = IntegratorConfig(), sample_dt: float = 0.1
) -> Comparison:
    """Sup-norm distance between the projected lifted flow and the sphere flow."""
    grid = _grid_cfg(cfg, sample_dt)
    rs = sphere_problem(X0, c).run(grid)
    rl = lifted_problem(X0, c).run(grid)
    proj = np.array([hopf_project(lf.unpack_lifted(y, c.N)).ravel() for y in rl.states])
    return _compare("sphere vs projected lifted", rs.times, rs.states, rl.times, proj, rs.halt_reason or rl.halt_reason)


def shape_equivalence(
    X0: ArrayLike, c: sp.Circulations, cfg: IntegratorConfig = IntegratorConfig(), sample_dt: float = 0.1
) -> Comparison:
    """Sup-norm distance between shapes extracted from the sphere flow and the shape flow."""
    if c.N < 2:
        return Comparison("sphere-extracted vs shape-level", 0.0, np.zeros(1))
    grid = _grid_cfg(cfg, sample_dt)
    rs = sphere_problem(X0, c).run(grid)
    rz = shape_problem(X0, c).run(grid)
    extracted = np.array([sh.shape_from_sphere(y.reshape(c.N, 3), c).vector() for y in rs.states])
    return _compare(
        "sphere-extracted vs shape-level", rs.times, extracted, rz.times, rz.states, rs.halt_reason or rz.halt_reason
    )


def commuting_diagram(
    X0: ArrayLike, c: sp.Circulations, cfg: IntegratorConfig = IntegratorConfig(), sample_dt: float = 0.1
) -> Comparison:
    """Sup-norm distance between ``momentum_L`` of the lifted flow and the Lie-Poisson flow."""
    grid = _grid_cfg(cfg, sample_dt)
    rl = lifted_problem(X0, c).run(grid)
    rp = liepoisson_problem(X0, c).run(grid)
    mapped = np.array([lf.momentum_L(lf.unpack_lifted(y, c.N), c).vector() for y in rl.states])
    return _compare("L(lifted) vs Lie-Poisson", rl.times, mapped, rp.times, rp.states, rl.halt_reason or rp.halt_reason)
