"""Grid construction and the damped Newton solver."""

import numpy as np
import pytest

from saddlecheck.grid import (NODE_AXIS, NODE_DIAGONAL, NODE_INTERIOR,
                              NODE_OUTER, NODE_OUTSIDE, build_grid)
from saddlecheck.params import DimensionParams, st_to_yz
from saddlecheck.scalars import hh_supersolution
from saddlecheck.solver import (SolverConfig, compute_derivatives,
                                impose_boundary, newton_solve,
                                residual_yz_form, sine_gordon_saddle,
                                validate_exact)


def test_build_grid_validation():
    with pytest.raises(ValueError):
        build_grid(12.0, 0.3)          # spacing too coarse
    with pytest.raises(ValueError):
        build_grid(4.0, 0.1)           # radius too small
    with pytest.raises(ValueError):
        build_grid(12.0, 0.07)         # R/h not an integer


def test_node_classification():
    g = build_grid(12.0, 0.1)
    assert g.N == 120
    kind = g.kind
    assert np.all(kind[np.tril_indices(g.N + 1)] != NODE_OUTSIDE)
    # diagonal and outer edge are fixed; axis and interior are unknowns
    assert np.all(kind.diagonal() == NODE_DIAGONAL)
    assert np.all(kind[g.N, :g.N] == NODE_OUTER)
    assert kind[5, 0] == NODE_AXIS and kind[5, 3] == NODE_INTERIOR
    assert g.n_unknowns == g.ii.size
    assert np.all(g.unknown_index[g.ii, g.jj] == np.arange(g.n_unknowns))


def test_sine_gordon_convergence_rate():
    out = validate_exact(build_grid(12.0, 0.1))
    assert out["rate"] == pytest.approx(2.0, abs=0.2)


def test_sine_gordon_vanishes_on_cone():
    s = np.linspace(0.0, 10.0, 50)
    assert np.allclose(sine_gordon_saddle(s, s), 0.0, atol=1e-12)


def test_newton_converges_and_is_deterministic(solved):
    sol = solved(4, 12.0, 0.1)
    assert sol.residual_norm < SolverConfig().newton_tol
    again = newton_solve(DimensionParams(m=4), SolverConfig(),
                         build_grid(12.0, 0.1))
    assert np.array_equal(sol.u, again.u)


def test_solution_shape_and_bounds(sol_m4_coarse):
    sol = sol_m4_coarse
    u = sol.u
    tri = sol.grid.mask_triangle
    S, T = sol.grid.meshgrid()
    assert np.all(u[tri & (S > T)] > 0.0)
    assert np.all(u <= 1.0)
    # odd reflection across the cone
    assert np.array_equal(u, -u.T)
    # below the product supersolution
    y, z = st_to_yz(S, T)
    assert np.all(u[tri] <= np.asarray(hh_supersolution(y, z))[tri] + 1e-12)


def test_impose_boundary_idempotent(sol_m4_coarse):
    g = sol_m4_coarse.grid
    once = impose_boundary(sol_m4_coarse.u, g)
    assert np.array_equal(once, impose_boundary(once, g))


def test_derivative_fields_consistent(sol_m4_coarse):
    sol = sol_m4_coarse
    # rotated first derivatives agree with the chain rule away from edges
    inner = np.zeros_like(sol.u, dtype=bool)
    inner[2:-2, 2:-2] = True
    inner &= sol.grid.mask_triangle & ~sol.onesided_band
    lhs = sol.u_y[inner]
    rhs = (sol.u_s[inner] + sol.u_t[inner]) / np.sqrt(2.0)
    assert np.max(np.abs(lhs - rhs)) < 5e-3   # both second order, offset grids
    # second derivatives symmetric in the mixed partial: u_st == u_ts by
    # construction of the cross stencil
    assert sol.u_st is not None and np.all(np.isfinite(sol.u_st[inner]))


def test_residual_rotated_frame(sol_m4_coarse):
    res, mask = residual_yz_form(sol_m4_coarse)
    # the rotated-frame residual is a discretization difference, O(h^2)
    assert np.max(np.abs(res[mask])) < 5e-2


def test_monotone_in_m(solved):
    # stronger drift flattens the solution: u_m=5 <= u_m=4 pointwise
    u4 = solved(4, 12.0, 0.1).u
    u5 = solved(5, 12.0, 0.1).u
    tri = build_grid(12.0, 0.1).mask_triangle
    assert np.all(u5[tri] <= u4[tri] + 1e-10)
