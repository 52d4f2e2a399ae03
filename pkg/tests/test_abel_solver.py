import dataclasses
import json

import numpy as np
import pytest

from twophase.abel_assembly import assemble, dominant_system, endpoint_exponents
from twophase.abel_solver import (SolveReport, WeightedDensity, probe_null_space, solve_dominant,
                                  solve_full)
from twophase.curves import Interface, SideData
from twophase.errors import SingularSystemError, ValidationError
from twophase.phase_model import PhaseLaw
from twophase.quadrature import graded_nodes

TT = np.linspace(0.05, 0.95, 181)


def test_one_sided_sqrt_density():
    """int_0^t sqrt(s) / sqrt(t - s) ds = (pi/2) t."""
    s = dominant_system(1.0, -1.0, graded_nodes(128, 1.0), weight="none", right_coef=0.0,
                        h=lambda t: np.pi / 2 * t)
    d = solve_dominant(s, regularization=0.0)
    assert np.linalg.norm(d(TT) - np.sqrt(TT)) / np.linalg.norm(np.sqrt(TT)) < 1e-4


def test_two_sided_constant_density():
    s = dominant_system(1.0, -1.0, graded_nodes(128, 1.0), weight="both",
                        h=lambda t: 2 * np.sqrt(t) - 2 * np.sqrt(1 - t))
    d, rep = solve_full(s)
    assert np.max(np.abs(d(TT) - 1.0)) < 2e-3
    assert rep.residual < 1e-4 and rep.near_null == 0


def test_rank_deficient_system_needs_regularization():
    s = dominant_system(1.0, -1.0, np.linspace(0, 1, 9), h=lambda t: t)
    left, right = s.left.copy(), s.right.copy()
    left[:, 4] = right[:, 4] = 0.0
    s = dataclasses.replace(s, left=left, right=right)
    with pytest.raises(SingularSystemError) as exc:
        solve_full(s, regularization=0.0)
    assert exc.value.condition > 1e14
    d, rep = solve_full(s)
    assert rep.near_null == 1 and abs(d.coeffs[4]) < 1e-9
    assert len(probe_null_space(s).adjoint_defects) == 1


def test_forcing_shape_and_regularization_checked():
    s = dominant_system(1.0, -1.0, np.linspace(0, 1, 9))
    with pytest.raises(ValidationError):
        solve_full(s, h=np.ones(3))
    with pytest.raises(ValidationError):
        solve_full(s, regularization=-1.0)
    with pytest.raises(ValidationError):
        solve_dominant(assemble(PhaseLaw.reference(), Interface.constant(),
                                SideData.from_dict({"u0": {"family": "constant", "base": 1.5},
                                                    "uT": {"family": "constant", "base": 0.5}}), n=8))


def test_homogeneous_solution_is_pinned_by_terminal_value():
    """With the adapted weight the dominant operator has a one-dimensional kernel."""
    law = PhaseLaw.reference()
    nodes = graded_nodes(128, 1.0)
    s = dominant_system(1.0, -1.0, nodes, weight=endpoint_exponents(law),
                        h=lambda t: 2 * np.sqrt(t) - 2 * np.sqrt(1 - t))
    sv = np.array(solve_full(s)[1].singular_values)
    assert sv[-1] / sv[0] < 1e-3 * sv[-2] / sv[0]
    for target in (1.0, 3.0):
        d, rep = solve_full(s, terminal=target)
        assert d.m(np.array([1.0]))[0] == pytest.approx(target, abs=1e-10)
        assert rep.residual < 1e-3
        assert rep.condition < 1e4


def test_roundtrip_on_data_driven_system():
    law = PhaseLaw.from_critical(0.0, 1.0, 0.0, 1.0, 1.0, 2.0)
    xi = Interface.linear(-0.25)
    side = SideData.from_dict({"u0": {"family": "exponential", "base": 1.35, "amp": -0.1},
                               "uT": {"family": "exponential", "base": 0.5, "amp": 0.05}}, K=xi.K)
    s = assemble(law, xi, side, n=64, weight="adapted")
    ref = WeightedDensity.interpolate(lambda t: np.sin(np.pi * t), s.nodes, s.weight, s.m0)
    d, rep = solve_full(s, s.apply(ref.coeffs), terminal=float(ref.m(np.array([1.0]))[0]))
    tt = np.linspace(0.1, 0.9, 161)
    assert np.linalg.norm(d(tt) - ref(tt)) / np.linalg.norm(ref(tt)) < 1e-6


def test_weighted_density_integral_and_csv(tmp_path):
    nodes = graded_nodes(64, 1.0)
    d = WeightedDensity.interpolate(lambda t: 1.0 + 0.0 * t, nodes, "both", m0=0.5)
    assert d.m(np.array([0.0, 1.0])) == pytest.approx([0.5, 1.5], abs=2e-3)
    assert d.integral(np.array([0.5]))[0] == pytest.approx(0.5, abs=1e-3)
    d.write_csv(tmp_path / "m.csv")
    lines = (tmp_path / "m.csv").read_text().splitlines()
    assert lines[0] == "t,m_prime,m" and len(lines) == 66
    assert "nan" not in "".join(lines)


def test_report_json(tmp_path):
    rep = SolveReport(1e-5, 10.0, 0, singular_values=[np.float64(2.0)])
    rep.write(tmp_path / "r.json")
    assert json.loads((tmp_path / "r.json").read_text())["singular_values"] == [2.0]
