"""Ellipse fit and mirroring checks."""

import numpy as np
import pytest

from bubblefield.errors import DegenerateProfile
from bubblefield.shape_fit import (EllipseParams, fit_ellipse,
                                   mirror_axisymmetric, sample_ellipse)


def semicircle(n=257):
    s = np.linspace(0.0, np.pi, n)
    return np.stack([np.sin(s), 1.0 - np.cos(s)], axis=-1)


class TestFitEllipse:
    def test_unit_semicircle(self):
        fit = fit_ellipse(semicircle())
        assert fit.a == pytest.approx(1.0, abs=1e-4)
        assert fit.b == pytest.approx(1.0, abs=1e-12)
        assert fit.center[1] == pytest.approx(1.0, abs=1e-12)

    def test_sample_and_recover(self):
        fit = fit_ellipse(sample_ellipse(0.6, 0.9, n=257))
        assert fit.a == pytest.approx(0.6, abs=1e-6)
        assert fit.b == pytest.approx(0.9, abs=1e-6)

    def test_fit_recover_sweep(self):
        rng = np.random.RandomState(11)
        for _ in range(50):
            a, b = rng.uniform(0.1, 5.0, size=2)
            fit = fit_ellipse(sample_ellipse(a, b, n=4097))
            assert fit.a == pytest.approx(a, rel=1e-6)
            assert fit.b == pytest.approx(b, rel=1e-6)

    def test_scale_equivariance(self):
        pts = sample_ellipse(0.7, 1.3, n=129)
        base = fit_ellipse(pts)
        for lam in (0.25, 2.0, 17.5):
            scaled = fit_ellipse(lam * pts)
            assert scaled.a == pytest.approx(lam * base.a, rel=1e-12)
            assert scaled.b == pytest.approx(lam * base.b, rel=1e-12)

    def test_degenerate(self):
        with pytest.raises(DegenerateProfile):
            fit_ellipse(np.zeros((5, 2)))
        with pytest.raises(DegenerateProfile):
            fit_ellipse(np.stack([np.linspace(0, 1, 5), np.zeros(5)], axis=-1))
        with pytest.raises(DegenerateProfile):
            EllipseParams(a=0.0, b=1.0, center=(0, 0))


class TestMirror:
    def test_point_count(self):
        pts = semicircle(101)
        closed = mirror_axisymmetric(pts)
        assert closed.shape == (2 * 101 - 2, 2)

    def test_closure_on_axis(self):
        # endpoints on the axis coincide with their reflections
        closed = mirror_axisymmetric(semicircle(101))
        first = closed[0]
        top = closed[100]
        assert abs(2 * first[0]) <= 1e-12
        assert abs(2 * top[0]) <= 1e-12
        # wrap-around edge is one sample spacing, not a gap
        gap = np.hypot(*(closed[0] - closed[-1]))
        assert gap <= 2 * np.pi / 100

    def test_counterclockwise(self):
        closed = mirror_axisymmetric(semicircle(101))
        x, y = closed[:, 0], closed[:, 1]
        area2 = np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
        assert area2 > 0

    def test_consistency_with_fit(self):
        pts = sample_ellipse(0.45, 1.2, n=513)
        closed = mirror_axisymmetric(pts)
        fit_half = fit_ellipse(pts)
        fit_closed = fit_ellipse(closed)
        assert fit_closed.a == pytest.approx(fit_half.a, rel=1e-12)
        assert fit_closed.b == pytest.approx(fit_half.b, rel=1e-12)
        assert closed[:, 0].max() == pytest.approx(fit_half.a, rel=1e-12)
        span = closed[:, 1].max() - closed[:, 1].min()
        assert span == pytest.approx(2 * fit_half.b, rel=1e-12)
