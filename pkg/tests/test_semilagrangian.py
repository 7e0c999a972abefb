from __future__ import annotations

import math

import numpy as np
import pytest

from hjnet import arc
from hjnet.errors import ConvexityRequired
from hjnet.hamiltonian import eikonal_power, tabulated, tilted_quadratic
from hjnet.semilagrangian import lagrangian, sl_oracle_rho


def test_lagrangian_quadratic():
    # conjugate of p^2/2 - 1/2 is q^2/2 + 1/2
    q = np.linspace(-1, 1, 5)
    L = lagrangian(tilted_quadratic(0.0, 0.5), 0.3, q, P=10.0)
    assert np.allclose(L, 0.5 * q**2 + 0.5, atol=1e-9)


def test_eikonal_limit_case():
    assert sl_oracle_rho(eikonal_power(1, 1.0), 1.0, 0.0) == pytest.approx(1 - math.exp(-1), abs=1e-2)


def test_quadratic_far_below():
    spec = tilted_quadratic(0.0, 0.5)
    assert sl_oracle_rho(spec, 1.0, -10.0) == pytest.approx(arc.rho_edge(spec, 1.0, -10.0), abs=1e-2)


def test_clamped_above_alpha_under():
    spec = eikonal_power(2, [0.3, 1.0])
    under, over = arc.alpha_under(spec, 0.5), arc.alpha_over(spec, 0.5)
    assert sl_oracle_rho(spec, 0.5, under + 1.0) == pytest.approx(over, abs=1e-2)


def test_rejects_nonconvex():
    t = tabulated(np.ones((2, 3)), p_max=1.0)
    with pytest.raises(ConvexityRequired):
        sl_oracle_rho(t, 1.0, 0.0)
