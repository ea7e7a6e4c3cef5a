"""Reference frames, bearings, and depth quantization.

The horizontal frame is east/north with north aligned to geomagnetic
north; the vertical axis is depth in meters, increasing downward from
the water surface (depth 0).  A bearing is an (azimuth, elevation) pair
in degrees: azimuth clockwise from north in [0, 360), elevation in
[-90, +90] with positive values pointing toward the surface.  At
elevation +-90 the azimuth is canonically 0.

Depth quantization models a sounder whose resolution degrades linearly
with depth, delta(z) = delta0 + kappa*z.  Bucket boundaries are spaced
one local resolution apart, i.e. bucket(z) = floor(integral_0^z dz'/delta(z')),
so two depths share a bucket exactly when the sounder cannot tell them
apart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "GeometryError",
    "Position",
    "Bearing",
    "DepthCode",
    "DepthModel",
    "distance",
    "bearing_from_to",
    "unit_vector",
    "angle_between",
    "quantize_depth",
]


class GeometryError(ValueError):
    """Degenerate or out-of-domain geometric input."""


@dataclass(frozen=True)
class Position:
    """A point in the east/north/depth frame, meters. Depth grows downward."""

    east: float
    north: float
    depth: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.east) and math.isfinite(self.north)
                and math.isfinite(self.depth)):
            raise GeometryError(
                f"non-finite position ({self.east}, {self.north}, {self.depth})")
        if self.depth < 0.0:
            raise GeometryError(f"negative depth {self.depth}")


@dataclass(frozen=True)
class Bearing:
    """An emission/reception direction: azimuth and elevation in degrees.

    Azimuth is measured clockwise from geomagnetic north in [0, 360);
    elevation in [-90, +90], positive toward the surface.  Vertical
    bearings (elevation +-90) carry the canonical azimuth 0.
    """

    azimuth: float
    elevation: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.azimuth) and math.isfinite(self.elevation)):
            raise GeometryError("non-finite bearing")
        if not 0.0 <= self.azimuth < 360.0:
            raise GeometryError(f"azimuth {self.azimuth} outside [0, 360)")
        if not -90.0 <= self.elevation <= 90.0:
            raise GeometryError(f"elevation {self.elevation} outside [-90, 90]")
        if abs(self.elevation) == 90.0 and self.azimuth != 0.0:
            object.__setattr__(self, "azimuth", 0.0)


@dataclass(frozen=True)
class DepthCode:
    """Quantized depth: bucket index plus the sounder resolution there."""

    bucket: int
    resolution_at_depth: float


@dataclass(frozen=True)
class DepthModel:
    """Linear depth-sounding resolution delta(z) = delta0 + kappa*z."""

    delta0: float = 0.5
    kappa: float = 0.005

    def __post_init__(self) -> None:
        if self.delta0 <= 0.0:
            raise GeometryError(f"delta0 must be positive, got {self.delta0}")
        if self.kappa < 0.0:
            raise GeometryError(f"kappa must be non-negative, got {self.kappa}")

    def resolution(self, depth: float) -> float:
        return self.delta0 + self.kappa * depth

    def bucket(self, depth: float) -> int:
        """Bucket index of a depth; monotone non-decreasing in depth."""
        if depth < 0.0:
            raise GeometryError(f"negative depth {depth}")
        if self.kappa == 0.0:
            return int(depth / self.delta0)
        # closed form of integral_0^z dz'/(delta0 + kappa z')
        return int(math.log1p(self.kappa * depth / self.delta0) / self.kappa)


def quantize_depth(depth: float, model: DepthModel) -> DepthCode:
    """Quantize a depth under the given resolution model.

    Two depths receive the same code exactly when they are closer than
    the local sounding resolution allows distinguishing.
    """
    return DepthCode(model.bucket(depth), model.resolution(depth))


def distance(a: Position, b: Position) -> float:
    """Euclidean distance in meters."""
    return math.sqrt((b.east - a.east) ** 2 + (b.north - a.north) ** 2
                     + (b.depth - a.depth) ** 2)


def bearing_from_to(origin: Position, target: Position) -> Bearing:
    """Bearing under which `target` is seen from `origin`.

    Raises GeometryError for coincident points (degenerate bearing).
    """
    de = target.east - origin.east
    dn = target.north - origin.north
    rise = origin.depth - target.depth  # positive toward the surface
    run = math.hypot(de, dn)
    if run == 0.0 and rise == 0.0:
        raise GeometryError("degenerate bearing between coincident points")
    if run == 0.0:
        return Bearing(0.0, 90.0 if rise > 0 else -90.0)
    azimuth = math.degrees(math.atan2(de, dn)) % 360.0
    if azimuth >= 360.0:  # guard the float wrap at exactly 360
        azimuth = 0.0
    elevation = math.degrees(math.atan2(rise, run))
    return Bearing(azimuth, elevation)


def unit_vector(bearing: Bearing) -> tuple[float, float, float]:
    """Unit (east, north, depth) vector of a bearing; depth axis points down."""
    az = math.radians(bearing.azimuth)
    el = math.radians(bearing.elevation)
    run = math.cos(el)
    return (run * math.sin(az), run * math.cos(az), -math.sin(el))


def angle_between(u: tuple[float, float, float],
                  v: tuple[float, float, float]) -> float:
    """Angle between two direction vectors, radians in [0, pi]."""
    nu = math.sqrt(u[0] ** 2 + u[1] ** 2 + u[2] ** 2)
    nv = math.sqrt(v[0] ** 2 + v[1] ** 2 + v[2] ** 2)
    if nu == 0.0 or nv == 0.0:
        raise GeometryError("zero-length direction vector")
    c = (u[0] * v[0] + u[1] * v[1] + u[2] * v[2]) / (nu * nv)
    return math.acos(max(-1.0, min(1.0, c)))
