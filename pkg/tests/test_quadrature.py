import numpy as np
import pytest
from scipy import integrate

from twophase.quadrature import (abel_matrix, basis_weight, cumulative_hat_integrals, exponents,
                                 graded_nodes, hat_integrals, jacobi_moments, sqrt_weights)


def hat(nodes, j):
    e = np.zeros(nodes.size)
    e[j] = 1.0
    return lambda s: np.interp(s, nodes, e)


def test_graded_nodes():
    nd = graded_nodes(8, 2.0)
    assert nd.size == 9 and nd[0] == 0.0 and nd[-1] == 2.0 and nd[4] == pytest.approx(1.0)
    assert np.allclose(nd + nd[::-1], 2.0)
    assert nd[1] < nd[4] - nd[3]
    with pytest.raises(ValueError):
        graded_nodes(7, 1.0)


def test_exponents():
    assert exponents("both") == (-0.5, -0.5)
    assert exponents((-0.8, -0.7)) == (-0.8, -0.7)
    with pytest.raises(ValueError):
        exponents("bogus")
    with pytest.raises(ValueError):
        exponents((-1.0, 0.0))


def test_sqrt_weights_exact_for_linear():
    t = np.sort(np.concatenate([[0.0, 1.0], np.random.default_rng(1).uniform(0, 1, 30)]))
    W = sqrt_weights(t)
    F = 2.0 - 3.0 * t
    exact = 2.0 * 2.0 * np.sqrt(t) - 3.0 * (4.0 / 3.0) * t ** 1.5
    assert np.allclose(W @ F, exact, atol=1e-13)
    assert np.all(np.triu(W, 1) == 0.0)


@pytest.mark.parametrize("p,q", [(0.0, -0.5), (0.5, -0.5), (-0.5, 0.0), (1.5, 0.25)])
def test_jacobi_moments_against_quadrature(p, q):
    n = 5
    w = jacobi_moments(n, p, q)
    F = lambda u: np.cos(u) + 0.0 * u
    Fl = lambda u: np.interp(u, np.arange(n + 1), F(np.arange(n + 1.0)))
    ref = integrate.quad(lambda u: Fl(u) * u ** p * (n - u) ** q, 0, n, points=list(range(1, n)),
                         limit=200)[0]
    assert w @ F(np.arange(n + 1.0)) == pytest.approx(ref, rel=1e-9)


@pytest.mark.parametrize("weight", ["none", "both", "left", "right", (-0.8, -0.7)])
@pytest.mark.parametrize("side", ["left", "right"])
def test_abel_matrix_entries_against_quadrature(weight, side):
    nodes = graded_nodes(6, 1.0)
    pts = np.array([0.137, 0.5, 0.81])
    kern = lambda t, s: np.exp(-(t - s) ** 2) * (1.0 + s)
    A = abel_matrix(pts, nodes, side, kernel=kern, weight=weight)
    for p, t in enumerate(pts):
        for j in (0, 2, 3, 6):
            phi = hat(nodes, j)
            f = lambda s: kern(t, s) * basis_weight(s, 1.0, weight) * phi(s)
            lo, hi = (0.0, t) if side == "left" else (t, 1.0)
            inner = [x for x in nodes if lo < x < hi]
            ref = integrate.quad(lambda s: f(s) / np.sqrt(abs(t - s)), lo, hi, points=inner or None,
                                 limit=400, epsabs=1e-13)[0]
            assert A[p, j] == pytest.approx(ref, rel=1e-7, abs=1e-10)


@pytest.mark.parametrize("weight", ["none", "both", (-0.8, -0.7)])
def test_hat_integrals_and_cumulative(weight):
    nodes = graded_nodes(8, 1.0)
    c = hat_integrals(nodes, weight)
    for j in (0, 4, 8):
        ref = integrate.quad(lambda s: basis_weight(s, 1.0, weight) * hat(nodes, j)(s), 0, 1,
                             points=list(nodes[1:-1]), limit=400)[0]
        assert c[j] == pytest.approx(ref, rel=1e-8)
    pts = np.array([0.0, 0.3, 0.77, 1.0])
    C = cumulative_hat_integrals(pts, nodes, weight)
    assert np.allclose(C[-1], c, rtol=1e-10, atol=1e-14)
    assert np.all(C[0] == 0.0)
    ref = integrate.quad(lambda s: basis_weight(s, 1.0, weight) * hat(nodes, 3)(s), 0, 0.3,
                         points=[x for x in nodes if 0 < x < 0.3], limit=400)[0]
    assert C[1, 3] == pytest.approx(ref, rel=1e-8, abs=1e-14)
