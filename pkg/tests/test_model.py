"""Parameter reduction identities and invariants."""

import math

import pytest

from polariton_lab.model import (
    Grid,
    PhysicalParams,
    canonical_params,
    derive_groups,
)


def test_params_validation():
    with pytest.raises(ValueError):
        PhysicalParams(beta=0.1, epsilon=0.1, length_L=0.0)
    with pytest.raises(ValueError):
        PhysicalParams(beta=0.1, epsilon=0.1, xi3_bar=-1.0)
    with pytest.raises(ValueError):
        PhysicalParams(beta=float("nan"), epsilon=0.1)
    # either sign of beta and epsilon is legal
    PhysicalParams(beta=-0.1, epsilon=0.2)
    PhysicalParams(beta=0.1, epsilon=-0.2)


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid(1, 64)
    g = Grid(100, 50)
    assert g.dt(2.0) == 0.02
    assert g.dz(5.0) == 0.1


def test_groups_kappa_identities_machine_precision():
    p = PhysicalParams(beta=0.7, epsilon=0.05, xi3_bar=3.1, jx_bar=2.4,
                      length_L=1.7, time_T=0.9)
    g = derive_groups(p, omega_T=0.5, q_L=4.0)
    assert g.a_coupling == -(-2.0 * p.beta * p.epsilon * p.xi3_bar * p.jx_bar)
    eps_xi3_T = p.epsilon * p.xi3_bar * p.time_T
    eps_jx_L = p.epsilon * p.jx_bar * p.length_L
    assert math.isclose(g.kappa_c, 2.0 * g.beta_J * eps_xi3_T, rel_tol=1e-15)
    assert math.isclose(g.kappa_c, 2.0 * g.beta_xi3_T * eps_jx_L, rel_tol=1e-15)
    assert math.copysign(1.0, g.a_coupling) == math.copysign(1.0, p.beta * p.epsilon)


def test_groups_scan_edge_kappa_c_two():
    # beta = eps, means chosen so kappa_c = 2 at the right edge of the scan
    p = PhysicalParams(beta=1.0, epsilon=1.0, xi3_bar=1.0, jx_bar=1.0)
    g = derive_groups(p, omega_T=0.5, q_L=4.0)
    assert g.kappa_c == 2.0
    assert math.isclose(g.kappa_c, 2.0 * g.beta_J * (p.epsilon * p.xi3_bar * p.time_T),
                        rel_tol=1e-15)


def test_groups_decoupled_and_sign_cases():
    p0 = PhysicalParams(beta=0.0, epsilon=0.3)
    g0 = derive_groups(p0, 0.5, 0.0)
    assert g0.a_coupling == 0.0 and g0.kappa_c == 0.0
    p_blue = PhysicalParams(beta=-0.2, epsilon=0.2)
    g_blue = derive_groups(p_blue, 0.5, 0.0)
    assert g_blue.a_coupling < 0.0


def test_derive_groups_pure():
    p = PhysicalParams(beta=0.3, epsilon=0.1, xi3_bar=2.0, jx_bar=0.5)
    a = derive_groups(p, 0.5, 4.0)
    b = derive_groups(p, 0.5, 4.0)
    assert a == b


def test_scaling_invariance_exact_for_power_of_two():
    p = PhysicalParams(beta=0.3, epsilon=0.11, xi3_bar=1.3, jx_bar=0.7,
                      length_L=1.9, time_T=0.6)
    c = 8.0
    scaled = PhysicalParams(beta=p.beta, epsilon=p.epsilon, xi3_bar=p.xi3_bar,
                           jx_bar=p.jx_bar / c, length_L=p.length_L * c,
                           time_T=p.time_T)
    g0 = derive_groups(p, 0.5, 4.0)
    g1 = derive_groups(scaled, 0.5, 4.0)
    assert g1.kappa_c == g0.kappa_c
    assert g1.beta_J == g0.beta_J


def test_rejects_non_finite_mode_choices():
    p = PhysicalParams(beta=0.1, epsilon=0.1)
    with pytest.raises(ValueError):
        derive_groups(p, float("inf"), 0.0)
    with pytest.raises(ValueError):
        derive_groups(p, 0.5, float("nan"))


def test_canonical_embedding_round_trip():
    for kc, r in [(2.0, 10.0), (0.5, 3.0), (-1.5, 4.0)]:
        p = canonical_params(kc, r)
        g = derive_groups(p, 0.5, 4.0)
        assert math.isclose(g.kappa_c, kc, rel_tol=1e-14, abs_tol=1e-300)
        assert math.isclose(abs(g.ratio_r), r, rel_tol=1e-14)
    with pytest.raises(ValueError):
        canonical_params(1.0, -2.0)
