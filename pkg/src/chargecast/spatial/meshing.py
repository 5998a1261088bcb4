"""Triangulated meshes for the continuous spatial field.

``build_mesh`` produces a two-zone triangulation: a fine inner zone covering
the convex hull of the (cutoff-merged) observation sites and a coarser
extension ring that pushes the mesh boundary away from the data to damp
boundary effects. Construction is fully deterministic: greedy cutoff merging
in input order, lattice seeding, then batched refinement (circumcenter
insertion with a longest-edge-midpoint fallback) until both zone edge-length
budgets hold.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.spatial import Delaunay, cKDTree
from shapely import contains_xy
from shapely.geometry import MultiPoint, Point

from ..errors import NumericalError, UserInputError
from .projection import LocalProjection, PlanarPoints

INNER_ZONE = 0
EXTENSION_ZONE = 1

_MIN_TRIANGLE_AREA = 1e-6  # m^2
_BARY_TOL = 1e-9


@dataclass(frozen=True)
class Mesh:
    """Planar triangulation with an inner-domain / extension classification."""

    vertices: np.ndarray  # (V, 2) meters
    triangles: np.ndarray  # (T, 3) vertex indices, counterclockwise
    triangle_zone: np.ndarray  # (T,) INNER_ZONE or EXTENSION_ZONE
    site_vertices: np.ndarray  # indices of vertices that are merged input sites
    neighbors: np.ndarray  # (T, 3); entry k = triangle across edge opposite vertex k
    projection: LocalProjection | None = None

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_triangles(self) -> int:
        return self.triangles.shape[0]

    def triangle_areas(self) -> np.ndarray:
        return _signed_areas(self.vertices, self.triangles)

    def edge_lengths(self) -> np.ndarray:
        """Per-triangle edge lengths; column k is the edge opposite vertex k."""
        return _edge_lengths(self.vertices, self.triangles)


def _signed_areas(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    a = vertices[triangles[:, 0]]
    b = vertices[triangles[:, 1]]
    c = vertices[triangles[:, 2]]
    return 0.5 * ((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (c[:, 0] - a[:, 0]) * (b[:, 1] - a[:, 1]))


def _edge_lengths(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    p = vertices[triangles]  # (T, 3, 2)
    out = np.empty((triangles.shape[0], 3))
    for k in range(3):
        d = p[:, (k + 1) % 3, :] - p[:, (k + 2) % 3, :]
        out[:, k] = np.hypot(d[:, 0], d[:, 1])
    return out


def _orient_ccw(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    areas = _signed_areas(vertices, triangles)
    flipped = triangles.copy()
    neg = areas < 0
    flipped[neg, 1], flipped[neg, 2] = triangles[neg, 2], triangles[neg, 1]
    return flipped


def _triangle_adjacency(triangles: np.ndarray) -> np.ndarray:
    """Neighbor triangle across each edge; -1 on the boundary."""
    edge_owner: dict[tuple[int, int], tuple[int, int]] = {}
    neighbors = -np.ones((triangles.shape[0], 3), dtype=int)
    for t, tri in enumerate(triangles):
        for k in range(3):
            u, v = int(tri[(k + 1) % 3]), int(tri[(k + 2) % 3])
            key = (min(u, v), max(u, v))
            if key in edge_owner:
                t2, k2 = edge_owner.pop(key)
                neighbors[t, k] = t2
                neighbors[t2, k2] = t
            else:
                edge_owner[key] = (t, k)
    return neighbors


def _circumcenters(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    a = vertices[triangles[:, 0]]
    b = vertices[triangles[:, 1]]
    c = vertices[triangles[:, 2]]
    d = 2.0 * (
        a[:, 0] * (b[:, 1] - c[:, 1])
        + b[:, 0] * (c[:, 1] - a[:, 1])
        + c[:, 0] * (a[:, 1] - b[:, 1])
    )
    a2 = (a**2).sum(axis=1)
    b2 = (b**2).sum(axis=1)
    c2 = (c**2).sum(axis=1)
    ux = (a2 * (b[:, 1] - c[:, 1]) + b2 * (c[:, 1] - a[:, 1]) + c2 * (a[:, 1] - b[:, 1])) / d
    uy = (a2 * (c[:, 0] - b[:, 0]) + b2 * (a[:, 0] - c[:, 0]) + c2 * (b[:, 0] - a[:, 0])) / d
    return np.column_stack([ux, uy])


def _merge_by_cutoff(xy: np.ndarray, cutoff: float) -> np.ndarray:
    """Greedy merge in input order: a point within `cutoff` of an accepted
    site is absorbed by it."""
    kept: list[np.ndarray] = []
    for row in xy:
        if any(np.hypot(*(row - s)) < cutoff for s in kept):
            continue
        kept.append(row)
    return np.array(kept).reshape(-1, 2)


def _triangular_lattice(bounds: tuple[float, float, float, float], spacing: float) -> np.ndarray:
    minx, miny, maxx, maxy = bounds
    row_h = spacing * np.sqrt(3.0) / 2.0
    ys = np.arange(miny - spacing, maxy + spacing, row_h)
    points = []
    for r, y in enumerate(ys):
        shift = 0.5 * spacing if r % 2 else 0.0
        xs = np.arange(minx - spacing + shift, maxx + spacing, spacing)
        points.append(np.column_stack([xs, np.full(xs.shape, y)]))
    return np.vstack(points) if points else np.empty((0, 2))


def _resample_ring(exterior, spacing: float) -> np.ndarray:
    length = exterior.length
    n = max(int(np.ceil(length / spacing)), 8)
    ts = np.arange(n) * (length / n)
    pts = [exterior.interpolate(t) for t in ts]
    return np.array([[p.x, p.y] for p in pts])


def build_mesh(
    points: PlanarPoints | np.ndarray,
    inner_edge: float = 200.0,
    outer_edge: float = 2000.0,
    cutoff: float = 100.0,
    max_refine_rounds: int = 40,
) -> Mesh:
    """Two-zone triangulation of the observation sites.

    Steps: (1) merge input points closer than ``cutoff`` (greedy in input
    order); (2) Delaunay-triangulate the merged sites together with lattice
    seeds and a convex-hull boundary ring offset by ``outer_edge``; (3) insert
    circumcenters (midpoint fallback) of any triangle whose longest edge
    exceeds its zone budget, re-triangulating until none remain. The output is
    an unconstrained Delaunay triangulation of the final point set.
    """
    if isinstance(points, PlanarPoints):
        xy = points.xy
        projection = points.projection
    else:
        xy = np.asarray(points, dtype=float)
        projection = None
    if xy.ndim != 2 or xy.shape[1] != 2:
        raise UserInputError("points must have shape (n, 2)")
    if not (0 < inner_edge <= outer_edge):
        raise UserInputError("need 0 < inner_edge <= outer_edge")

    sites = _merge_by_cutoff(xy, cutoff)
    if sites.shape[0] < 3:
        raise UserInputError(
            f"cutoff merging left {sites.shape[0]} site(s); need at least 3"
        )
    inner_poly = MultiPoint([tuple(s) for s in sites]).convex_hull
    if inner_poly.area <= 0:
        raise UserInputError("merged sites are collinear; cannot build a 2-D mesh")
    collar_poly = inner_poly.buffer(inner_edge, quad_segs=8)
    outer_poly = inner_poly.buffer(outer_edge, quad_segs=8)

    fine_spacing = 0.85 * inner_edge
    coarse_spacing = 0.85 * outer_edge
    ring = _resample_ring(outer_poly.exterior, 0.9 * outer_edge)

    fine = _triangular_lattice(collar_poly.bounds, fine_spacing)
    fine = fine[contains_xy(collar_poly, fine[:, 0], fine[:, 1])]
    coarse = _triangular_lattice(outer_poly.bounds, coarse_spacing)
    keep = contains_xy(outer_poly.buffer(-0.3 * coarse_spacing), coarse[:, 0], coarse[:, 1])
    keep &= ~contains_xy(collar_poly.buffer(0.3 * fine_spacing), coarse[:, 0], coarse[:, 1])
    coarse = coarse[keep]

    # drop seeds crowding the authoritative site vertices
    if fine.size:
        tree = cKDTree(sites)
        dist, _ = tree.query(fine)
        fine = fine[dist > 0.45 * fine_spacing]

    all_points = np.vstack([sites, fine, coarse, ring])
    n_sites = sites.shape[0]

    for _ in range(max_refine_rounds):
        tri = Delaunay(all_points)
        simplices = tri.simplices
        verts = tri.points
        centroids = verts[simplices].mean(axis=1)
        inner_mask = contains_xy(inner_poly, centroids[:, 0], centroids[:, 1])
        limits = np.where(inner_mask, inner_edge, outer_edge)
        lengths = _edge_lengths(verts, simplices)
        worst = lengths.max(axis=1)
        bad = np.flatnonzero(worst > limits * (1.0 + 1e-9))
        if bad.size == 0:
            break
        centers = _circumcenters(verts, simplices[bad])
        tree = cKDTree(all_points)
        candidates: list[np.ndarray] = []
        for row, t in enumerate(bad):
            c = centers[row]
            guard = 0.3 * limits[t]
            use_center = (
                np.all(np.isfinite(c))
                and outer_poly.covers(Point(c))
                and tree.query(c)[0] > guard
            )
            if not use_center:
                k = int(np.argmax(lengths[t]))
                u, v = simplices[t, (k + 1) % 3], simplices[t, (k + 2) % 3]
                c = 0.5 * (verts[u] + verts[v])
            if tree.query(c)[0] < 1e-9:
                continue
            if candidates and np.min(np.hypot(*(np.array(candidates) - c).T)) < 1e-9:
                continue
            candidates.append(c)
        if not candidates:
            raise NumericalError("mesh refinement stalled without progress")
        all_points = np.vstack([all_points, np.array(candidates)])
    else:
        raise NumericalError(
            f"mesh refinement did not satisfy edge budgets in {max_refine_rounds} rounds"
        )

    triangles = _orient_ccw(tri.points, tri.simplices)
    areas = _signed_areas(tri.points, triangles)
    degenerate = np.flatnonzero(areas <= _MIN_TRIANGLE_AREA)
    if degenerate.size:
        raise NumericalError(f"degenerate triangle(s) in mesh: {degenerate.tolist()}")
    centroids = tri.points[triangles].mean(axis=1)
    zone = np.where(
        contains_xy(inner_poly, centroids[:, 0], centroids[:, 1]),
        INNER_ZONE,
        EXTENSION_ZONE,
    ).astype(np.uint8)
    return Mesh(
        vertices=np.asarray(tri.points, dtype=float),
        triangles=triangles,
        triangle_zone=zone,
        site_vertices=np.arange(n_sites),
        neighbors=_triangle_adjacency(triangles),
        projection=projection,
    )


def rectangular_mesh(
    x_range: tuple[float, float], y_range: tuple[float, float], spacing: float
) -> Mesh:
    """Structured triangulation of a rectangle (all triangles inner zone)."""
    xs = np.arange(x_range[0], x_range[1] + 0.5 * spacing, spacing)
    ys = np.arange(y_range[0], y_range[1] + 0.5 * spacing, spacing)
    nx, ny = len(xs), len(ys)
    if nx < 2 or ny < 2:
        raise UserInputError("rectangular_mesh needs at least a 2x2 grid")
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    vertices = np.column_stack([gx.ravel(), gy.ravel()])
    triangles = []
    for i in range(nx - 1):
        for j in range(ny - 1):
            v00 = i * ny + j
            v10 = (i + 1) * ny + j
            v01 = i * ny + j + 1
            v11 = (i + 1) * ny + j + 1
            triangles.append([v00, v10, v01])
            triangles.append([v10, v11, v01])
    tris = _orient_ccw(vertices, np.array(triangles, dtype=int))
    return Mesh(
        vertices=vertices,
        triangles=tris,
        triangle_zone=np.zeros(len(tris), dtype=np.uint8),
        site_vertices=np.empty(0, dtype=int),
        neighbors=_triangle_adjacency(tris),
        projection=None,
    )


def _barycentric(vertices: np.ndarray, tri: np.ndarray, point: np.ndarray) -> np.ndarray:
    a, b, c = vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]
    m = np.column_stack([b - a, c - a])
    lam = np.linalg.solve(m, point - a)
    return np.array([1.0 - lam[0] - lam[1], lam[0], lam[1]])


def locate_point(mesh: Mesh, point: np.ndarray, start_triangle: int) -> tuple[int, np.ndarray] | None:
    """Walking point location: follow the most-negative barycentric coordinate
    across triangle adjacencies; fall back to a full scan if the walk cycles.

    Returns ``(triangle_index, barycentric_weights)`` or None when the point
    lies outside the mesh hull (tolerance 1e-9).
    """
    t = start_triangle
    for _ in range(mesh.n_triangles + 1):
        bary = _barycentric(mesh.vertices, mesh.triangles[t], point)
        if np.all(bary >= -_BARY_TOL):
            return t, bary
        step = int(np.argmin(bary))
        nxt = mesh.neighbors[t, step]
        if nxt < 0:
            return None
        t = nxt
    for t in range(mesh.n_triangles):  # cycle guard: exhaustive rescue
        bary = _barycentric(mesh.vertices, mesh.triangles[t], point)
        if np.all(bary >= -_BARY_TOL):
            return t, bary
    return None


def projection_matrix(mesh: Mesh, locations: PlanarPoints | np.ndarray) -> sp.csr_matrix:
    """Sparse barycentric interpolation matrix (n_locations x n_vertices).

    Each row holds the barycentric weights of a location within its containing
    triangle; rows sum to one exactly. Locations outside the mesh hull raise.
    """
    xy = locations.xy if isinstance(locations, PlanarPoints) else np.asarray(locations, dtype=float)
    xy = xy.reshape(-1, 2)
    tree = cKDTree(mesh.vertices)
    _, nearest_vertex = tree.query(xy)
    vertex_to_triangle = np.zeros(mesh.n_vertices, dtype=int)
    for t, tri in enumerate(mesh.triangles):
        for v in tri:
            vertex_to_triangle[v] = t
    rows, cols, vals = [], [], []
    for i, point in enumerate(xy):
        hit = locate_point(mesh, point, int(vertex_to_triangle[nearest_vertex[i]]))
        if hit is None:
            raise UserInputError(f"location {i} lies outside the mesh hull")
        t, bary = hit
        bary = np.clip(bary, 0.0, None)
        bary = bary / bary.sum()
        bary[-1] = 1.0 - bary[0] - bary[1]  # exact row sum
        rows.extend([i, i, i])
        cols.extend(int(v) for v in mesh.triangles[t])
        vals.extend(bary.tolist())
    return sp.csr_matrix((vals, (rows, cols)), shape=(xy.shape[0], mesh.n_vertices))


def write_mesh_csv(mesh: Mesh, vertices_path: Path | str, triangles_path: Path | str) -> None:
    with open(vertices_path, "w", newline="") as handle:
        writer = csv.writer(handle)
        if mesh.projection is not None:
            writer.writerow(["vertex", "x_m", "y_m", "lon", "lat"])
            lonlat = mesh.projection.to_lonlat(mesh.vertices)
            for i, ((x, y), (lon, lat)) in enumerate(zip(mesh.vertices, lonlat)):
                writer.writerow([i, repr(float(x)), repr(float(y)), repr(float(lon)), repr(float(lat))])
        else:
            writer.writerow(["vertex", "x_m", "y_m"])
            for i, (x, y) in enumerate(mesh.vertices):
                writer.writerow([i, repr(float(x)), repr(float(y))])
    with open(triangles_path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["triangle", "v0", "v1", "v2", "zone"])
        for t, tri in enumerate(mesh.triangles):
            writer.writerow([t, int(tri[0]), int(tri[1]), int(tri[2]), int(mesh.triangle_zone[t])])


def mesh_geojson(mesh: Mesh) -> dict:
    """Triangulation as a WGS84 GeoJSON FeatureCollection."""
    if mesh.projection is None:
        raise UserInputError("mesh has no geographic projection; cannot emit GeoJSON")
    lonlat = mesh.projection.to_lonlat(mesh.vertices)
    features = []
    for t, tri in enumerate(mesh.triangles):
        ring = [[float(lonlat[v, 0]), float(lonlat[v, 1])] for v in tri]
        ring.append(ring[0])
        features.append(
            {
                "type": "Feature",
                "geometry": {"type": "Polygon", "coordinates": [ring]},
                "properties": {"triangle": int(t), "zone": int(mesh.triangle_zone[t])},
            }
        )
    return {"type": "FeatureCollection", "features": features}


def write_mesh_geojson(mesh: Mesh, path: Path | str) -> None:
    Path(path).write_text(json.dumps(mesh_geojson(mesh), sort_keys=True), encoding="utf-8")
