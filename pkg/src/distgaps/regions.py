"""Planar domains: membership tests, bounding boxes, and measures.

All regions are centered at the origin.  ``PolarLobes`` is the two-sided
wedge pair used by the construction: radii strictly between ``0.9*R`` and
``R - 1`` (with ``R = n**(4/7)``), and circular angular distance to the
nearest of the directions {0, pi} strictly below ``0.5*(R - r)**(-1/4)``.
The lobes widen toward the outer radius and never wrap (max half-width 0.5
radian), so the two antipodal wedges are disjoint.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy.integrate import quad

from .errors import ConfigError, ConvergenceError

# Below this construction parameter the lobes degenerate (the annulus
# 0.9*R < r < R-1 becomes too thin for the separation guarantees).
N_MIN = 10_000

_QUAD_REL_TOL = 1e-4


@dataclass(frozen=True)
class Density:
    """Constant density per unit area."""

    value: float

    def __post_init__(self) -> None:
        if not (self.value >= 0.0 and math.isfinite(self.value)):
            raise ConfigError(f"density must be finite and >= 0, got {self.value}")


@dataclass(frozen=True)
class Rectangle:
    """Axis-aligned rectangle [-half_width, half_width] x [-half_height, half_height]."""

    half_width: float
    half_height: float

    def __post_init__(self) -> None:
        if not (self.half_width > 0 and self.half_height > 0):
            raise ConfigError("rectangle half-extents must be positive")


@dataclass(frozen=True)
class Disk:
    """Closed disk of the given radius around the origin."""

    radius: float

    def __post_init__(self) -> None:
        if not self.radius > 0:
            raise ConfigError("disk radius must be positive")


@dataclass(frozen=True)
class PolarLobes:
    """Antipodal wedge pair parameterized by the construction size n."""

    n_param: int

    def __post_init__(self) -> None:
        if self.n_param < N_MIN:
            raise ConfigError(f"PolarLobes requires n >= {N_MIN}, got {self.n_param}")

    @property
    def outer_radius(self) -> float:
        return float(self.n_param) ** (4.0 / 7.0)


@dataclass(frozen=True)
class CustomRegion:
    """Arbitrary region given by a vectorized membership predicate.

    ``contains_fn`` maps an (N, 2) array to an (N,) boolean array.  ``area``
    is optional; measuring a CustomRegion without it raises.
    """

    contains_fn: Callable[[np.ndarray], np.ndarray]
    box: Rectangle
    area: float | None = None


Region = Union[Rectangle, Disk, PolarLobes, CustomRegion]


def _as_points(p) -> tuple[np.ndarray, bool]:
    pts = np.asarray(p, dtype=float)
    scalar = pts.ndim == 1
    if scalar:
        pts = pts[None, :]
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ConfigError(f"expected points of shape (N, 2), got {pts.shape}")
    return pts, scalar


def contains(region: Region, p) -> bool | np.ndarray:
    """Membership test; closed for Rectangle/Disk, strict for PolarLobes."""
    pts, scalar = _as_points(p)
    x, y = pts[:, 0], pts[:, 1]
    if isinstance(region, Rectangle):
        out = (np.abs(x) <= region.half_width) & (np.abs(y) <= region.half_height)
    elif isinstance(region, Disk):
        out = x * x + y * y <= region.radius * region.radius
    elif isinstance(region, PolarLobes):
        R = region.outer_radius
        r = np.hypot(x, y)
        radial = (r > 0.9 * R) & (r < R - 1.0)
        out = np.zeros(len(pts), dtype=bool)
        if radial.any():
            theta = np.arctan2(y[radial], x[radial])
            axis_dist = np.minimum(np.abs(theta), np.pi - np.abs(theta))
            out[radial] = axis_dist < 0.5 * (R - r[radial]) ** -0.25
    elif isinstance(region, CustomRegion):
        out = np.asarray(region.contains_fn(pts), dtype=bool)
    else:
        raise ConfigError(f"unknown region type {type(region)!r}")
    return bool(out[0]) if scalar else out


def area(region: Region) -> float:
    """Area under unit density."""
    if isinstance(region, Rectangle):
        return 4.0 * region.half_width * region.half_height
    if isinstance(region, Disk):
        return math.pi * region.radius**2
    if isinstance(region, PolarLobes):
        return _lobes_area(region)
    if isinstance(region, CustomRegion):
        if region.area is None:
            raise ConfigError("CustomRegion has no area; supply one to measure it")
        return region.area
    raise ConfigError(f"unknown region type {type(region)!r}")


def measure(region: Region, density: Density) -> float:
    """Total mass density.value * Area(region)."""
    return density.value * area(region)


def _lobes_area(region: PolarLobes) -> float:
    # Angular measure at radius r is 4 * 0.5*(R-r)^(-1/4): two lobes, each
    # two-sided.  The theta-extent is analytic, so only the radial direction
    # is integrated (adaptive 1-D quadrature).
    R = region.outer_radius
    val, err = quad(
        lambda r: 2.0 * (R - r) ** -0.25 * r,
        0.9 * R,
        R - 1.0,
        epsrel=1e-10,
        limit=200,
    )
    if not (val > 0.0) or err > _QUAD_REL_TOL * val:
        raise ConvergenceError(
            f"lobes area quadrature did not reach rel error {_QUAD_REL_TOL}: "
            f"value={val}, err={err}"
        )
    return val


def bounding_box(region: Region) -> Rectangle:
    """Minimal axis-aligned box for Rectangle/Disk; conservative for lobes."""
    if isinstance(region, Rectangle):
        return region
    if isinstance(region, Disk):
        return Rectangle(region.radius, region.radius)
    if isinstance(region, PolarLobes):
        R = region.outer_radius
        # widest half-angle is 0.5 rad, reached at the outer edge r = R-1
        return Rectangle(R - 1.0, (R - 1.0) * math.sin(0.5))
    if isinstance(region, CustomRegion):
        return region.box
    raise ConfigError(f"unknown region type {type(region)!r}")


def diameter_upper_bound(region: Region) -> float:
    """Upper bound on the distance between any two region points (exact for
    Rectangle/Disk, bbox diagonal otherwise)."""
    if isinstance(region, Disk):
        return 2.0 * region.radius
    if isinstance(region, Rectangle):
        return 2.0 * math.hypot(region.half_width, region.half_height)
    if isinstance(region, PolarLobes):
        return 2.0 * (region.outer_radius - 1.0)
    box = bounding_box(region)
    return 2.0 * math.hypot(box.half_width, box.half_height)


def rect_domain(n: int) -> Rectangle:
    """The construction's strip: |x| <= n^(3/7), |y| <= 0.99*n^(4/7)."""
    if n < N_MIN:
        raise ConfigError(f"construction parameter must be >= {N_MIN}, got {n}")
    return Rectangle(float(n) ** (3.0 / 7.0), 0.99 * float(n) ** (4.0 / 7.0))


def lobe_domain(n: int) -> PolarLobes:
    """The construction's antipodal wedge pair."""
    return PolarLobes(n)


def region_to_dict(region: Region) -> dict:
    """Tagged serialization {kind, parameters} used in run records."""
    if isinstance(region, Rectangle):
        return {"kind": "rectangle", "half_width": region.half_width,
                "half_height": region.half_height}
    if isinstance(region, Disk):
        return {"kind": "disk", "radius": region.radius}
    if isinstance(region, PolarLobes):
        return {"kind": "polar_lobes", "n_param": region.n_param}
    raise ConfigError(f"region {type(region).__name__} is not serializable")


def region_from_dict(d: dict) -> Region:
    kind = d.get("kind")
    if kind == "rectangle":
        return Rectangle(float(d["half_width"]), float(d["half_height"]))
    if kind == "disk":
        return Disk(float(d["radius"]))
    if kind == "polar_lobes":
        return PolarLobes(int(d["n_param"]))
    raise ConfigError(f"unknown region kind {kind!r}")
