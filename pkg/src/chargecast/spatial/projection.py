"""Local equirectangular projection between WGS84 degrees and planar meters.

The study domains are a few kilometres across, so a tangent-plane
approximation about the domain centroid keeps distortion far below 0.1% and
the inverse mapping is exact algebra.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import UserInputError

EARTH_RADIUS_M = 6_371_000.0


@dataclass(frozen=True)
class LocalProjection:
    """Equirectangular projection centred at (lon0, lat0) in degrees."""

    lon0: float
    lat0: float

    @property
    def meters_per_deg_lon(self) -> float:
        return EARTH_RADIUS_M * np.cos(np.deg2rad(self.lat0)) * np.pi / 180.0

    @property
    def meters_per_deg_lat(self) -> float:
        return EARTH_RADIUS_M * np.pi / 180.0

    def to_xy(self, lonlat) -> np.ndarray:
        lonlat = np.asarray(lonlat, dtype=float).reshape(-1, 2)
        x = (lonlat[:, 0] - self.lon0) * self.meters_per_deg_lon
        y = (lonlat[:, 1] - self.lat0) * self.meters_per_deg_lat
        return np.column_stack([x, y])

    def to_lonlat(self, xy) -> np.ndarray:
        xy = np.asarray(xy, dtype=float).reshape(-1, 2)
        lon = self.lon0 + xy[:, 0] / self.meters_per_deg_lon
        lat = self.lat0 + xy[:, 1] / self.meters_per_deg_lat
        return np.column_stack([lon, lat])


@dataclass(frozen=True)
class PlanarPoints:
    """Planar point set in meters plus the projection that produced it."""

    xy: np.ndarray  # (n, 2)
    projection: LocalProjection

    @property
    def n_points(self) -> int:
        return self.xy.shape[0]


def project_coords(lonlat) -> PlanarPoints:
    """Project lon/lat degrees onto a local plane centred at their centroid."""
    lonlat = np.asarray(lonlat, dtype=float)
    if lonlat.ndim != 2 or lonlat.shape[1] != 2:
        raise UserInputError("lonlat must have shape (n, 2)")
    if not np.all(np.isfinite(lonlat)):
        raise UserInputError("lonlat must be finite")
    if np.any(np.abs(lonlat[:, 1]) > 89.0):
        raise UserInputError("latitudes must lie within +/-89 degrees")
    projection = LocalProjection(
        lon0=float(lonlat[:, 0].mean()), lat0=float(lonlat[:, 1].mean())
    )
    return PlanarPoints(xy=projection.to_xy(lonlat), projection=projection)
