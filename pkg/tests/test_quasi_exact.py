from fractions import Fraction

import mpmath
import numpy as np
import pytest

from anharmonic.errors import NoMinimum, ValidationError
from anharmonic.numeric import FLOAT, NumericContext, to_fraction
from anharmonic.numerov import ShootingConfig, solve_eigenvalue
from anharmonic.quasi_exact import (
    closed_form_potential,
    physical_potential,
    quasi_exact_config,
    quasi_exact_corrections,
)
from anharmonic.series import compute_series

from oracles import quasi_exact_eq101

F = Fraction


@pytest.mark.parametrize("v4, v6, v2, energy", [(6, 1, 6, 3), (16, 4, 10, 4)])
def test_config(v4, v6, v2, energy):
    cfg = quasi_exact_config(v4, v6)
    assert cfg.exact
    assert cfg.v2 == v2 and cfg.energy == energy
    assert cfg.potential.mass == F(1, 2)
    assert cfg.potential.omega_squared == 4 * v2


def test_config_errors():
    with pytest.raises(NoMinimum):
        quasi_exact_config(0, 1)
    with pytest.raises(ValidationError):
        quasi_exact_config(6, 0)
    with pytest.raises(NoMinimum):
        physical_potential(0, 1, 1)


def test_irrational_sqrt_v6():
    cfg = quasi_exact_config(10, 2)
    assert not cfg.exact
    assert abs(float(cfg.energy) - 10 / (2 * 2**0.5)) < 1e-15


def test_wavefunction_solves_equation():
    # -psi'' + V psi = E psi for the closed-form ground state
    cfg = quasi_exact_config(6, 1)
    x = np.linspace(-2, 2, 41)
    h = 1e-3
    psi = cfg.wavefunction(x)
    d2 = (cfg.wavefunction(x + h) - 2 * psi + cfg.wavefunction(x - h)) / h**2
    v = 6 * x**2 + 6 * x**4 + x**6
    assert np.allclose(-d2 + v * psi, 3 * psi, atol=1e-5)


def test_corrections_examples(rational):
    assert [to_fraction(e) for e in quasi_exact_corrections(1, 0, 0, ctx=rational)] == [1, 0, 0, 0, 0, 0]
    got = [to_fraction(e) for e in quasi_exact_corrections(1, 1, 0, ctx=rational)]
    assert got == [1, F(3, 2), F(-21, 4), F(333, 8), F(-30885, 64), F(916731, 128)]
    mp = NumericContext(FLOAT, 64)
    e3 = quasi_exact_corrections(6, 6, 1, K=3, ctx=mp)[2]
    with mpmath.workdps(70):
        ref = 3 * (-7 * 36 + 5 * 6) / (4 * mpmath.mpf(6) ** mpmath.mpf(2.5))
    assert abs(float(e3) - float(ref)) < 1e-15
    with pytest.raises(ValidationError):
        quasi_exact_corrections(1, 1, 1, K=7)


@pytest.mark.parametrize("v2, v4, v6", [(6, 6, 1), (10, 16, 4), (F(1, 3), F(2, 5), F(7, 3))])
def test_engine_matches_closed_forms(v2, v4, v6):
    mp = NumericContext(FLOAT, 64)
    _, s = compute_series(closed_form_potential(v2, v4, v6), 0, 6, ctx=mp)
    ref = quasi_exact_eq101(v2, v4, v6)
    with mpmath.workdps(80):
        for a, b in zip(s.orders, ref):
            assert abs(mpmath.mpf(mp.format(a)) - b) <= mpmath.mpf("1e-25") * abs(b)


def test_physical_potential_first_order(rational):
    # first-order shift V4 <x^4> with <x^4> = 3 / (4 V2) in the -U'' + V2 x^2 ground state
    _, s = compute_series(physical_potential(4, F(1, 3), 0), 0, 2, ctx=rational)
    assert to_fraction(s.orders[1]) == F(1, 3) * F(3, 16)


@pytest.mark.parametrize("v4, v6", [(6, 1), (16, 4)])
def test_numerov_confirms_energy(v4, v6):
    cfg = quasi_exact_config(v4, v6)
    res = solve_eigenvalue(cfg.potential, 0, ShootingConfig())
    assert abs(res.energy - float(cfg.energy)) < 1e-8
