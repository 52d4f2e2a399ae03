import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from twophase.errors import DomainError, ValidationError
from twophase.phase_model import (MonotoneFunction, PhaseLaw, branch_inverse, entropy_F, entropy_G,
                                  phi)

REF = PhaseLaw.reference()


def test_reference_law_values():
    assert (REF.gamma0, REF.gamma1, REF.gamma2) == (-1.0, 1.0, 1.0)
    assert REF.A == 0.0 and REF.B == 1.0
    assert phi(REF, np.array([-1.0, 0.0, 0.5, 1.0, 2.0])).tolist() == [0.0, 1.0, 0.5, 0.0, 1.0]


def test_from_critical_is_continuous_with_given_critical_values():
    law = PhaseLaw.from_critical(b=-0.3, c=0.7, A=-1.0, B=2.0, gamma1=0.5, gamma2=3.0)
    assert phi(law, law.b) == pytest.approx(2.0)
    assert phi(law, law.c) == pytest.approx(-1.0)
    assert law.gamma0 == pytest.approx(-3.0)
    eps = 1e-9
    assert phi(law, law.b - eps) == pytest.approx(phi(law, law.b + eps), abs=1e-7)
    assert phi(law, law.c - eps) == pytest.approx(phi(law, law.c + eps), abs=1e-7)


@pytest.mark.parametrize("kwargs", [
    dict(gamma0=-1, gamma1=0, gamma2=1, delta0=1, delta1=1, delta2=-1, b=0, c=1),
    dict(gamma0=1, gamma1=1, gamma2=1, delta0=1, delta1=1, delta2=-1, b=0, c=1),
    dict(gamma0=-1, gamma1=1, gamma2=1, delta0=1, delta1=1, delta2=-1, b=1, c=0),
    dict(gamma0=-1, gamma1=1, gamma2=1, delta0=1, delta1=1.5, delta2=-1, b=0, c=1),
])
def test_invalid_laws_are_rejected(kwargs):
    with pytest.raises(ValidationError):
        PhaseLaw(**{k: float(v) for k, v in kwargs.items()})


def test_serialization_roundtrip(tmp_path):
    law = PhaseLaw.from_critical(0.0, 1.0, 0.0, 1.5, 1.0, 2.0)
    assert PhaseLaw.from_dict(law.to_dict()) == law
    law.dump(tmp_path / "law.json")
    assert PhaseLaw.load(tmp_path / "law.json") == law
    assert json.loads((tmp_path / "law.json").read_text())["gamma2"] == 2.0
    with pytest.raises(ValidationError):
        PhaseLaw.from_dict({**law.to_dict(), "A": 0.0})
    with pytest.raises(ValidationError):
        PhaseLaw.from_dict({"gamma0": -1.0})


@pytest.mark.parametrize("i,v", [(1, 0.3), (0, 0.3), (2, 0.3), (1, -5.0), (2, 7.0)])
def test_branch_inverse_roundtrip(i, v):
    u = branch_inverse(REF, i, v)
    assert phi(REF, u) == pytest.approx(v)
    br = REF.branch(i)
    assert br.u_lo <= u <= br.u_hi


def test_branch_inverse_outside_range():
    with pytest.raises(DomainError):
        branch_inverse(REF, 0, 1.5)
    with pytest.raises(DomainError):
        branch_inverse(REF, 2, -0.1)
    with pytest.raises(DomainError):
        REF.branch(3)


def test_monotone_function_validation_and_shapes():
    with pytest.raises(ValidationError):
        MonotoneFunction([0.0, 1.0], [1.0, 0.0])
    with pytest.raises(ValidationError):
        MonotoneFunction([1.0, 0.0], [0.0, 1.0])
    g = MonotoneFunction.ramp(0.4)
    assert g(0.2) == 0.0 and g(1.4) == pytest.approx(1.0) and g(3.4) == pytest.approx(3.0)
    assert MonotoneFunction.constant(2.0)(np.zeros(3)).tolist() == [2.0, 2.0, 2.0]
    n = MonotoneFunction.normalized_identity(0.0, 2.0)
    assert n(1.0) == pytest.approx(0.5) and n(-2.0) == pytest.approx(-1.0)


@pytest.mark.parametrize("g", [MonotoneFunction.ramp(0.3), MonotoneFunction.constant(1.0),
                               MonotoneFunction.normalized_identity(0.0, 1.0)])
@pytest.mark.parametrize("u", [-0.7, 0.2, 0.9, 1.0, 1.8])
def test_entropy_G_matches_quadrature(g, u):
    law = PhaseLaw.from_critical(0.0, 1.0, 0.0, 1.0, 1.0, 2.0)
    ref = integrate.quad(lambda s: g(phi(law, s)), law.c, u, points=[0.0, 1.0], limit=200)[0]
    assert entropy_G(law, g, u) == pytest.approx(ref, abs=1e-12)


def test_entropy_G_callable_g_and_monotonicity_check():
    law = REF
    val = entropy_G(law, np.tanh, 1.7)
    ref = integrate.quad(lambda s: np.tanh(phi(law, s)), 1.0, 1.7)[0]
    assert val == pytest.approx(ref, rel=1e-9)
    with pytest.raises(ValidationError):
        entropy_G(law, lambda s: -s, 1.7)


def test_entropy_F():
    assert entropy_F(lambda s: s, 2.0, 0.0) == pytest.approx(2.0)
    assert np.allclose(entropy_F(np.cos, np.array([0.0, np.pi / 2]), 0.0), [0.0, 1.0])


@settings(max_examples=60, deadline=None)
@given(w=st.floats(0.01, 0.99), kink=st.floats(-0.5, 1.5), g2=st.floats(0.3, 4.0))
def test_interface_integral_of_g_is_nonpositive(w, kink, g2):
    """For phi(u1) = phi(u2) = w with u1 unstable and u2 stable, int_u1^u2 (g(phi) - g(w)) <= 0."""
    law = PhaseLaw.from_critical(0.0, 1.0, 0.0, 1.0, 1.0, g2)
    u1 = branch_inverse(law, 0, w)
    u2 = branch_inverse(law, 2, w)
    g = MonotoneFunction.ramp(kink)
    val = entropy_G(law, g, u2, k=u1) - g(w) * (u2 - u1)
    assert val <= 1e-12


@settings(max_examples=80, deadline=None)
@given(u=st.floats(-3.0, 4.0), k=st.floats(-1.0, 2.0), w=st.floats(-0.5, 1.5))
def test_piecewise_G_matches_quadrature(u, k, w):
    law = PhaseLaw.from_critical(0.0, 1.0, 0.0, 1.0, 0.5, 2.0)
    g = MonotoneFunction.ramp(w)
    kinks = [0.0, 1.0, (w - law.delta1) / law.gamma1, (w - law.delta0) / law.gamma0,
             (w - law.delta2) / law.gamma2]
    lo, hi = sorted((k, u))
    inner = [x for x in kinks if lo < x < hi]
    ref = integrate.quad(lambda s: g(phi(law, s)), k, u, points=inner or None, limit=200, epsabs=1e-13)[0]
    assert entropy_G(law, g, u, k=k) == pytest.approx(ref, abs=1e-9)
