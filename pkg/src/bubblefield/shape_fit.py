"""Ellipse extraction from half-profiles and axisymmetric mirroring.

The fit is diameter-based: the horizontal semi-axis is the maximum radial
extent of the half-shape, the vertical semi-axis is half the height. This
is exact for true ellipse meridians and deterministic for everything else.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateProfile

_EPS = 1e-12


@dataclass(frozen=True)
class EllipseParams:
    """Semi-axes and center of a fitted bubble shape."""

    a: float                       # horizontal semi-axis
    b: float                       # vertical semi-axis
    center: tuple[float, float]    # (x_c, y_c)

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise DegenerateProfile("semi-axes must be positive")


def _profile_rz(profile) -> np.ndarray:
    """Accept a BubbleProfile, an (n, 2) point array, or (n, 3) samples."""
    if hasattr(profile, "values"):
        pts = np.asarray(profile.values, dtype=float)[:, :2]
    else:
        pts = np.asarray(profile, dtype=float)
        if pts.ndim != 2 or pts.shape[1] < 2:
            raise DegenerateProfile("need an (n, >=2) point array")
        pts = pts[:, :2]
    if pts.shape[0] < 2:
        raise DegenerateProfile("need at least 2 samples")
    return pts


def fit_ellipse(profile) -> EllipseParams:
    """Fit (a, b, center) to a half-profile or a mirrored closed curve.

    a = max |x| over the samples, b = half the vertical range, center on
    the symmetry axis at mid-height.
    """
    pts = _profile_rz(profile)
    x, y = pts[:, 0], pts[:, 1]
    a = np.abs(x).max()
    ymin, ymax = y.min(), y.max()
    if a < _EPS or (ymax - ymin) < _EPS:
        raise DegenerateProfile("profile has no radial or vertical extent")
    return EllipseParams(a=float(a), b=float(0.5 * (ymax - ymin)),
                         center=(0.0, float(0.5 * (ymin + ymax))))


def mirror_axisymmetric(profile) -> np.ndarray:
    """Close the half-profile by reflecting (r, z) -> (-r, z).

    Returns a counterclockwise closed point list; the two shared endpoint
    samples appear once, so the output has 2n - 2 points.
    """
    pts = _profile_rz(profile)
    x, y = pts[:, 0], pts[:, 1]
    if np.abs(x).max() < _EPS or (y.max() - y.min()) < _EPS:
        raise DegenerateProfile("profile has no radial or vertical extent")
    mirrored = np.stack([-x[-2:0:-1], y[-2:0:-1]], axis=-1)
    return np.concatenate([pts, mirrored], axis=0)


def sample_ellipse(a: float, b: float, n: int = 128,
                   center: tuple[float, float] = (0.0, 0.0)) -> np.ndarray:
    """Sample a half-ellipse meridian (x >= 0), pole to pole, n points."""
    t = np.linspace(-np.pi / 2, np.pi / 2, n)
    return np.stack([center[0] + a * np.cos(t), center[1] + b * np.sin(t)],
                    axis=-1)
