"""Block-midpoint and multiple-shooting solver checks."""

import numpy as np
import pytest

from bubblefield.bvp_core import (ExtendedBoundary, LinearBVP, Mesh,
                                  solve_block_midpoint,
                                  solve_multiple_shooting)
from bubblefield.errors import MeshTooCoarse, SingularSystem


def scalar_bvp(a_coef, q_coef, left, right, d):
    return LinearBVP(dim=1,
                     A=lambda t: [[a_coef]],
                     q=lambda t: [q_coef],
                     B_a=[[left]], B_b=[[right]], d=[d])


def exponential_bvp():
    # y' = y on [0, 1], y(0) = 1  ->  y(1) = e
    return scalar_bvp(1.0, 0.0, 1.0, 0.0, 1.0)


class TestMesh:
    def test_uniform(self):
        m = Mesh.uniform(0.0, 1.0, 4)
        assert m.n_intervals == 4
        np.testing.assert_allclose(m.h, 0.25)
        np.testing.assert_allclose(m.midpoints, [0.125, 0.375, 0.625, 0.875])

    def test_too_coarse(self):
        with pytest.raises(MeshTooCoarse):
            Mesh(np.array([0.0]))
        with pytest.raises(MeshTooCoarse):
            Mesh.uniform(0.0, 1.0, 0)

    def test_not_increasing(self):
        with pytest.raises(ValueError):
            Mesh(np.array([0.0, 1.0, 0.5]))


class TestBlockMidpoint:
    def test_constant_solution(self):
        # zero dynamics, y(0) = c  ->  y identically c
        bvp = scalar_bvp(0.0, 0.0, 1.0, 0.0, 3.75)
        traj = solve_block_midpoint(bvp, Mesh.uniform(0.0, 2.0, 17))
        np.testing.assert_allclose(traj.values, 3.75, rtol=0, atol=1e-13)

    def test_exponential(self):
        traj = solve_block_midpoint(exponential_bvp(), Mesh.uniform(0, 1, 1000))
        assert abs(traj.values[-1, 0] - np.e) <= 1e-5

    def test_second_order_convergence(self):
        errs = []
        for n in (250, 500, 1000):
            traj = solve_block_midpoint(exponential_bvp(),
                                        Mesh.uniform(0, 1, n))
            errs.append(abs(traj.values[-1, 0] - np.e))
        for coarse, fine in zip(errs, errs[1:]):
            assert 3.6 <= coarse / fine <= 4.4

    def test_affine_exactness(self):
        # y1' = y2, y2' = 0 with y1(0) = 0, y1(1) = 1  ->  y1(t) = t
        bvp = LinearBVP(dim=2,
                        A=lambda t: [[0.0, 1.0], [0.0, 0.0]],
                        q=lambda t: [0.0, 0.0],
                        B_a=[[1.0, 0.0], [0.0, 0.0]],
                        B_b=[[0.0, 0.0], [1.0, 0.0]],
                        d=[0.0, 1.0])
        mesh = Mesh.uniform(0.0, 1.0, 37)
        traj = solve_block_midpoint(bvp, mesh)
        np.testing.assert_allclose(traj.values[:, 0], mesh.nodes,
                                   rtol=1e-12, atol=1e-12)

    def test_affine_exactness_random_systems(self):
        # the scheme is exact whenever the true solution is affine in t
        rng = np.random.RandomState(7)
        for _ in range(20):
            n = rng.randint(1, 4)
            A0 = rng.randn(n, n)
            c0, c1 = rng.randn(n), rng.randn(n)
            # pick q so that y(t) = c0 + c1 t solves y' = A0 y + q(t)
            bvp = LinearBVP(dim=n,
                            A=lambda t, A0=A0: A0,
                            q=lambda t, A0=A0, c0=c0, c1=c1:
                                c1 - A0 @ (c0 + c1 * t),
                            B_a=np.eye(n), B_b=np.zeros((n, n)), d=c0)
            mesh = Mesh.uniform(0.0, 1.5, 29)
            traj = solve_block_midpoint(bvp, mesh)
            exact = c0[None, :] + c1[None, :] * mesh.nodes[:, None]
            err = np.abs(traj.values - exact).max()
            assert err <= 1e-12 * max(1.0, np.abs(exact).max())

    def test_extended_boundary_row(self):
        # y' = 0; boundary row uses the second-to-last node:
        # y(0) + y(t_N) = 4 with constant solution  ->  y = 2
        bvp = scalar_bvp(0.0, 0.0, 1.0, 0.0, 4.0)
        ext = ExtendedBoundary(np.array([[1.0]]))
        traj = solve_block_midpoint(bvp, Mesh.uniform(0, 1, 10), ext=ext)
        np.testing.assert_allclose(traj.values, 2.0, atol=1e-13)

    def test_residual_small(self):
        traj = solve_block_midpoint(exponential_bvp(), Mesh.uniform(0, 1, 100))
        assert traj.residual <= 1e-10

    def test_singular_boundary(self):
        # both boundary matrices zero -> rank-deficient system
        bvp = scalar_bvp(0.0, 0.0, 0.0, 0.0, 1.0)
        with pytest.raises(SingularSystem):
            solve_block_midpoint(bvp, Mesh.uniform(0, 1, 5))


class TestMultipleShooting:
    def test_pure_quadrature(self):
        # y' = 1, y(0) = 0  ->  y(t) = t
        bvp = scalar_bvp(0.0, 1.0, 1.0, 0.0, 0.0)
        mesh = Mesh.uniform(0.0, 1.0, 64)
        traj = solve_multiple_shooting(bvp, mesh)
        np.testing.assert_allclose(traj.values[:, 0], mesh.nodes, atol=1e-12)

    def test_exponential(self):
        traj = solve_multiple_shooting(exponential_bvp(),
                                       Mesh.uniform(0, 1, 1000))
        assert abs(traj.values[-1, 0] - np.e) <= 1e-5

    def test_terminal_condition(self):
        # y' = y with y(1) = e  ->  y(0) = 1
        bvp = scalar_bvp(1.0, 0.0, 0.0, 1.0, np.e)
        traj = solve_multiple_shooting(bvp, Mesh.uniform(0, 1, 200))
        assert abs(traj.values[0, 0] - 1.0) <= 1e-8

    def test_cross_solver_agreement(self):
        rng = np.random.RandomState(3)
        cases = [exponential_bvp(),
                 scalar_bvp(0.0, 1.0, 1.0, 0.0, 0.0)]
        # a rotation system with terminal condition on one component
        cases.append(LinearBVP(
            dim=2,
            A=lambda t: [[0.0, 1.0], [-1.0, 0.0]],
            q=lambda t: [0.0, np.sin(t)],
            B_a=[[1.0, 0.0], [0.0, 0.0]],
            B_b=[[0.0, 0.0], [0.0, 1.0]],
            d=[1.0, 0.5]))
        for bvp in cases:
            mesh = Mesh.uniform(0.0, 1.0, 1000)
            ymid = solve_block_midpoint(bvp, mesh).values
            yshoot = solve_multiple_shooting(bvp, mesh).values
            assert np.abs(ymid - yshoot).max() <= 1e-4
