import numpy as np
import pytest

from twophase.curves import Interface, SideData
from twophase.errors import DataError, ValidationError
from twophase.phase_model import PhaseLaw

LAW = PhaseLaw.reference()


def test_interface_families_and_roundtrip():
    q = Interface.quadratic(-0.3, 0.1, T=2.0)
    assert q(2.0) == pytest.approx(-0.2) and q.derivative(2.0) == pytest.approx(0.1)
    assert q.K == pytest.approx(-0.2)
    back = Interface.from_dict(q.to_dict())
    assert back.T == 2.0 and back(1.3) == pytest.approx(q(1.3))
    s = Interface.from_nodes([0, 0.5, 1.0], [0, -0.1, -0.3])
    assert Interface.from_dict(s.to_dict())(0.7) == pytest.approx(s(0.7))
    with pytest.raises(ValidationError):
        Interface.from_nodes([0.1, 0.5, 1.0], [0, 0, 0])
    with pytest.raises(ValidationError):
        Interface.from_dict({"family": "cubic"})


def test_rescaled_and_reflected():
    xi = Interface.quadratic(-0.5, 0.2)
    r = xi.rescaled(2.0)
    assert r.T == 2.0 and r(1.0) == pytest.approx(xi(0.5)) and r.derivative(1.0) == pytest.approx(xi.derivative(0.5) / 2)
    f = xi.reflected(3.0)
    assert f(0.0) == pytest.approx(0.0) and f(3.0) == pytest.approx(xi.K - xi(0.0))
    assert f.derivative(1.5) == pytest.approx(xi.derivative(0.5) / 3.0)


def test_check_reports_velocity():
    nodes = np.linspace(0, 1, 11)
    assert Interface.linear(-0.25).check(nodes)["nonincreasing"]
    rep = Interface.quadratic(-0.5, 0.5).check(nodes)
    assert not rep["nonincreasing"] and rep["max_velocity_time"] == 1.0
    assert Interface.linear(1.0).holder_quotient(nodes) == 0.0


def test_side_data_validation():
    desc = {"u0": {"family": "exponential", "base": 1.3, "amp": 0.2},
            "uT": {"family": "erf", "base": 0.5, "amp": 0.1}}
    side = SideData.from_dict(desc, K=-0.2)
    rep = side.validate(LAW)
    assert rep["inf_u0"] == pytest.approx(1.3, abs=1e-6)
    assert side.u0_prime_mirror()(0.0) == pytest.approx(-side.duT(-0.2))
    bad = SideData.from_dict({**desc, "u0": {"family": "constant", "base": 0.9}})
    with pytest.raises(ValidationError):
        bad.validate(LAW)
    edge = SideData.from_dict({**desc, "u0": {"family": "constant", "base": 1.0}})
    with pytest.raises(ValidationError):
        edge.validate(LAW)
    edge.validate(LAW, strict=False)
    with pytest.raises(ValidationError):
        SideData.from_dict({**desc, "uT": {"family": "constant", "base": 1.2}}).validate(LAW)


def test_non_integrable_derivative_rejected():
    grow = lambda x: 1.0 / (1.0 + np.asarray(x, dtype=float))
    side = SideData(lambda x: 2.0 + np.log1p(x), grow, lambda x: 0.5 + 0 * x, lambda x: 0 * x)
    with pytest.raises(DataError):
        side.validate(LAW, strict=True)


def test_sampled_profile():
    x = np.linspace(0, 5, 11)
    desc = {"u0": {"family": "samples", "x": x.tolist(), "values": (1.5 + 0.2 * np.exp(-x)).tolist()},
            "uT": {"family": "constant", "base": 0.5}}
    side = SideData.from_dict(desc)
    assert side.u0(2.0) == pytest.approx(1.5 + 0.2 * np.exp(-2.0), abs=2e-3)
    assert side.du0(7.0) == 0.0
    with pytest.raises(ValidationError):
        SideData.from_dict({"u0": {"family": "bogus"}, "uT": desc["uT"]})
