from __future__ import annotations

import numpy as np
import pytest

from vortexshape.geometry import hopf_lift_all
from vortexshape.sphere import Circulations

# sub-results collected by test_acceptance.py, one pass/fail line per criterion in the terminal summary
ACCEPTANCE_TITLES = {
    1: "reduction chain",
    2: "shape equivalence",
    3: "conservation",
    4: "Casimir algebra",
    5: "bracket axioms",
    6: "tetrahedron equilibrium",
    7: "Hessian minors",
    8: "stability verdicts",
    9: "relative motion residual",
    10: "spinor identities",
    11: "integrator order",
}
ACCEPTANCE_RESULTS: dict[int, list[tuple[str, bool, str]]] = {}


def record_acceptance(criterion: int, part: str, ok: bool, detail: str) -> str:
    ACCEPTANCE_RESULTS.setdefault(criterion, []).append((part, bool(ok), detail))
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion} ({ACCEPTANCE_TITLES[criterion]}) {part}: {detail}"
    print(line)
    return line


def random_sphere(rng: np.random.Generator, n: int, R: float = 1.0) -> np.ndarray:
    X = rng.standard_normal((n, 3))
    return R * X / np.linalg.norm(X, axis=1)[:, None]


def random_gamma(rng: np.random.Generator, n: int, signs: str = "mixed") -> np.ndarray:
    g = rng.uniform(0.5, 2.0, n)
    if signs == "mixed":
        g *= rng.choice([-1.0, 1.0], n)
    elif signs == "negative":
        g = -g
    return g


def random_lift(rng: np.random.Generator, X: np.ndarray) -> np.ndarray:
    return hopf_lift_all(X, rng.uniform(0, 2 * np.pi, len(X)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def unit3():
    return Circulations([1.0, -0.7, 1.3], 1.0)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k, title in ACCEPTANCE_TITLES.items():
        parts = ACCEPTANCE_RESULTS.get(k)
        if not parts:
            terminalreporter.write_line(f"[----] {k:>2}. {title}: not run")
            continue
        ok = all(p[1] for p in parts)
        detail = "; ".join(f"{name} {'ok' if good else 'FAILED'} ({d})" for name, good, d in parts)
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {k:>2}. {title}: {detail}")
