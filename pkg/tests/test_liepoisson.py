from __future__ import annotations

import numpy as np
import pytest
from conftest import random_gamma, random_lift, random_sphere

from vortexshape.errors import LogDomainError
from vortexshape.lifted import momentum_L, rhs_lifted
from vortexshape.liepoisson import (
    AlgebraPoint,
    Ad_star,
    ad_star,
    basis,
    bracket_gamma,
    casimir,
    casimir_gradient,
    cayley_hamilton_residual,
    collective_h,
    coordinate_gradient,
    coordinate_index,
    faddeev_leverrier,
    grad_h,
    grad_h_fd,
    group_element,
    inner,
    lie_poisson_tensor,
    lp_bracket_coords,
    lp_bracket_gradients,
    lp_rhs,
    reconstruct_power_sum,
)
from vortexshape.sphere import Circulations, hamiltonian_sphere
from vortexshape.stability import tetrahedron_configuration

S2 = np.sqrt(2.0)


def random_point(rng, n) -> AlgebraPoint:
    return AlgebraPoint.from_vector(rng.standard_normal(n * n))


def physical_point(rng, n, R=1.0):
    c = Circulations(random_gamma(rng, n), R)
    X = random_sphere(rng, n, R)
    return momentum_L(random_lift(rng, X), c), c, X


def test_basis_is_orthonormal():
    for n in (1, 2, 4):
        B = basis(n)
        G = np.array([[inner(a, b) for b in B] for a in B])
        assert np.allclose(G, np.eye(n * n), atol=1e-15)
        assert np.allclose(B + B.conj().transpose(0, 2, 1), 0)


def test_vector_round_trip(rng):
    v = rng.standard_normal(16)
    p = AlgebraPoint.from_vector(v)
    assert np.allclose(p.vector(), v)
    B = basis(4)
    assert np.allclose(p.matrix(), np.tensordot(v, B, axes=1))
    assert np.allclose([inner(b, p.matrix()) for b in B], v)
    with pytest.raises(ValueError):
        AlgebraPoint.from_vector(np.zeros(5))


def test_from_coords_and_entries():
    p = AlgebraPoint.from_coords([1.0, 2.0], {(0, 1): 3 - 4j})
    assert np.allclose(p.lam, [1, 2])
    assert p.entry(0, 1) == 3 - 4j and p.entry(1, 0) == 3 + 4j
    assert np.isclose(p.entry(1, 1), 2 * S2)
    with pytest.raises(ValueError):
        AlgebraPoint.from_coords([1.0, 2.0], {(1, 0): 1j})


def test_coordinate_index():
    assert coordinate_index(3, 2) == 2
    assert [coordinate_index(3, *p) for p in [(0, 1), (0, 2), (1, 2)]] == [3, 5, 7]
    with pytest.raises(IndexError):
        coordinate_index(3, 2, 1)


def test_bracket_reduces_to_commutator_for_unit_gamma(rng):
    a, b = random_point(rng, 3), random_point(rng, 3)
    br = bracket_gamma(a, b, np.ones(3)).matrix()
    assert np.allclose(br, a.matrix() @ b.matrix() - b.matrix() @ a.matrix())


def test_bracket_example_E12_F12():
    g = np.array([2.0, 3.0])
    B = [AlgebraPoint.from_matrix(m) for m in basis(2)]
    D1, D2, E12, F12 = B
    br = bracket_gamma(E12, F12, g).matrix()
    expected = (D2.matrix() / g[0] - D1.matrix() / g[1]) / S2
    assert np.allclose(br, expected)


def test_bracket_antisymmetry_and_jacobi(rng):
    g = random_gamma(rng, 3)
    a, b, c = (random_point(rng, 3) for _ in range(3))

    def br(x, y):
        return bracket_gamma(x, y, g)

    assert np.allclose(br(a, b).matrix(), -br(b, a).matrix())
    jac = br(a, br(b, c)).matrix() + br(b, br(c, a)).matrix() + br(c, br(a, b)).matrix()
    assert np.allclose(jac, 0, atol=1e-12)


def test_ad_star_duality(rng):
    g = random_gamma(rng, 4)
    lam, xi, eta = (random_point(rng, 4) for _ in range(3))
    lhs = inner(ad_star(xi, lam, g).matrix(), eta.matrix())
    rhs = inner(lam.matrix(), bracket_gamma(xi, eta, g).matrix())
    assert np.isclose(lhs, rhs, rtol=1e-12)


def test_bracket_is_minus_pairing_with_algebra_bracket(rng):
    g = random_gamma(rng, 3)
    lam = random_point(rng, 3)
    gf, gh = rng.standard_normal((2, 9))
    xf, xh = AlgebraPoint.from_vector(gf), AlgebraPoint.from_vector(gh)
    expected = -inner(lam.matrix(), bracket_gamma(xf, xh, g).matrix())
    assert np.isclose(lp_bracket_gradients(gf, gh, lam, g), expected, rtol=1e-12)


def test_Ad_star_generates_ad_star(rng):
    g = random_gamma(rng, 3)
    lam, xi = random_point(rng, 3), random_point(rng, 3)
    h = 1e-6
    Up = group_element(AlgebraPoint(h * xi.ext), g)
    Um = group_element(AlgebraPoint(-h * xi.ext), g)
    fd = (Ad_star(Up, lam).vector() - Ad_star(Um, lam).vector()) / (2 * h)
    assert np.allclose(fd, ad_star(xi, lam, g).vector(), atol=1e-8)


def test_group_element_preserves_D(rng):
    g = random_gamma(rng, 3)
    U = group_element(random_point(rng, 3), g)
    D = np.diag(g)
    assert np.allclose(U @ D @ U.conj().T, D, atol=1e-12)


def test_casimirs_invariant_under_coadjoint_action(rng):
    g = random_gamma(rng, 4)
    lam = random_point(rng, 4)
    lam2 = Ad_star(group_element(random_point(rng, 4), g), lam)
    for j in range(1, 5):
        assert np.isclose(casimir(lam2, j, g), casimir(lam, j, g), rtol=1e-10, atol=1e-10)


def test_lie_poisson_tensor_properties(rng):
    g = random_gamma(rng, 3)
    lam = random_point(rng, 3)
    P = lie_poisson_tensor(lam, g)
    assert np.allclose(P, -P.T)
    for j in (1, 2, 3):
        assert np.allclose(P @ casimir_gradient(lam, j, g), 0, atol=1e-11)


def test_lp_bracket_coordinate_examples(rng):
    g = np.array([1.5, -0.7, 2.0])
    lam = random_point(rng, 3)
    f = lp_bracket_coords(("lam", 0), ("lam", 0, 1), g)
    assert np.isclose(f(lam), -1j / (S2 * g[0]) * lam.entry(0, 1))
    f = lp_bracket_coords(("lam", 0, 1), ("lam", 1, 2), g)
    assert np.isclose(f(lam), -1j / g[1] * lam.entry(0, 2))
    assert lp_bracket_coords(("lam", 0), ("lam", 2), g)(lam) == 0


def test_lp_bracket_closed_form_matches_tensor(rng):
    g = random_gamma(rng, 3)
    lam = random_point(rng, 3)
    coords = [("lam", i) for i in range(3)] + [("lam", i, j) for i in range(3) for j in range(3) if i != j]
    for a in coords:
        for b in coords:
            ga, gb = coordinate_gradient(3, a), coordinate_gradient(3, b)
            assert np.isclose(lp_bracket_coords(a, b, g)(lam), lp_bracket_gradients(ga, gb, lam, g), atol=1e-13)


def test_coordinate_gradient_validation():
    with pytest.raises(ValueError):
        coordinate_gradient(3, ("mu", 0, 1))
    with pytest.raises(IndexError):
        coordinate_gradient(3, ("lam", 3))


def test_collective_hamiltonian_pulls_back(rng):
    for R in (1.0, 1.9):
        lam, c, X = physical_point(rng, 4, R)
        assert np.isclose(collective_h(lam, c), hamiltonian_sphere(X, c), rtol=1e-12, atol=1e-13)


def test_tetrahedron_energy():
    R = 1.6
    g = np.array([1.0, 2.0, -0.5, 1.5])
    c = Circulations(g, R)
    X = tetrahedron_configuration(R)
    lam = momentum_L(random_lift(np.random.default_rng(1), X), c)
    pair_sum = sum(g[i] * g[j] for i in range(4) for j in range(i + 1, 4))
    expected = -pair_sum * np.log(8 * R**2 / 3) / (4 * np.pi * R**2)
    assert np.isclose(collective_h(lam, c), expected, rtol=1e-12)


def test_collective_h_log_domain():
    c = Circulations([1.0, 1.0])
    lam = AlgebraPoint.from_coords([S2, S2], {(0, 1): 2.5})
    with pytest.raises(LogDomainError, match=r"\(1,2\)"):
        collective_h(lam, c)


def test_grad_h_matches_finite_differences(rng):
    lam, c, _ = physical_point(rng, 4, 1.3)
    assert np.allclose(grad_h(lam, c).vector(), grad_h_fd(lam, c).vector(), atol=1e-8)


def test_lp_rhs_is_pushforward_of_lifted_flow(rng):
    R = 1.4
    c = Circulations(random_gamma(rng, 4), R)
    Phi = random_lift(rng, random_sphere(rng, 4, R))
    v = rhs_lifted(Phi, c)
    h = 1e-6
    fd = (momentum_L(Phi + h * v, c).vector() - momentum_L(Phi - h * v, c).vector()) / (2 * h)
    assert np.allclose(lp_rhs(momentum_L(Phi, c), c).vector(), fd, atol=1e-8)


def test_lp_rhs_equals_tensor_times_gradient(rng):
    lam, c, _ = physical_point(rng, 3)
    P = lie_poisson_tensor(lam, c.gamma)
    assert np.allclose(lp_rhs(lam, c).vector(), P @ grad_h(lam, c).vector(), atol=1e-12)


def test_casimir_closed_forms(rng):
    lam, c, _ = physical_point(rng, 4, 1.2)
    g = c.gamma
    assert np.isclose(casimir(lam, 1, c), np.sum(g))
    off = sum(g[i] * g[j] * abs(lam.entry(i, j)) ** 2 for i in range(4) for j in range(i + 1, 4))
    assert np.isclose(casimir(lam, 2, c), 0.5 * np.sum(g**2 * lam.lam**2) + 0.5 * off)
    with pytest.raises(ValueError):
        casimir(lam, 0, c)


def test_casimir_gradient_matches_finite_differences(rng):
    g = random_gamma(rng, 3)
    lam = random_point(rng, 3)
    v = lam.vector()
    h = 1e-6
    for j in (1, 2, 3):
        fd = np.array(
            [
                (casimir(AlgebraPoint.from_vector(v + h * e), j, g) - casimir(AlgebraPoint.from_vector(v - h * e), j, g))
                / (2 * h)
                for e in np.eye(9)
            ]
        )
        assert np.allclose(casimir_gradient(lam, j, g), fd, rtol=1e-6, atol=1e-7)


def test_faddeev_leverrier_examples():
    assert np.allclose(faddeev_leverrier(np.eye(2)), [2, -1])
    assert np.allclose(faddeev_leverrier(np.diag([1.0, 2.0])), [3, -2])
    with pytest.raises(ValueError):
        faddeev_leverrier(np.zeros((2, 3)))


def test_faddeev_leverrier_cayley_hamilton(rng):
    for n in (2, 3, 5):
        A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        cs = faddeev_leverrier(A)
        assert cayley_hamilton_residual(A, cs) <= 1e-10 * np.linalg.norm(A) ** n
        # c_n = (-1)^{n+1} det A
        assert np.isclose(cs[-1], (-1) ** (n + 1) * np.linalg.det(A))


def test_reconstruct_power_sum_general_matrix(rng):
    A = rng.standard_normal((4, 4))
    p = [np.trace(np.linalg.matrix_power(A, k)) for k in range(1, 5)]
    cn = faddeev_leverrier(A)[-1]
    assert np.isclose(reconstruct_power_sum(p[:3], 4, cn), p[3])
    with pytest.raises(ValueError):
        reconstruct_power_sum(p[:2], 4)
