"""Axially symmetric domains and the product quadrature rules on them.

A domain is described by a planar region D+ in the open upper half-plane
{(u, v): v > 0}; the solid of revolution over the unit sphere of directions
sweeps it to an axially symmetric body in R^(m+1) that stays off the real
axis.  Three rules are built once per domain:

* a midpoint rule on a uniform cell grid over D+ (cell centers double as
  collocation points for the discrete operators),
* a composite Gauss-Legendre rule along the planar boundary of D+,
* a full-sphere rule on S^(m-1) with antipodal node pairing.

Volume nodes are the products (planar cell) x (sphere node); the dV weight
carries the revolution factor v^(m-1) while the dmu weight drops it, which
realizes the weighted measure |x_vec|^(1-m) dV exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma, roots_gegenbauer

from .algebra import CliffordAlgebra, Multivector


class DomainError(ValueError):
    """Region violates the axial-domain requirements (e.g. touches the real axis)."""


def sphere_surface_area(m):
    """Surface area of the unit sphere S^(m-1) in R^m."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return 2.0 * math.pi ** (m / 2.0) / gamma(m / 2.0)


@dataclass(frozen=True)
class Rectangle:
    """Axis-aligned planar rectangle [u0,u1] x [v0,v1] strictly above v = 0."""

    u0: float
    u1: float
    v0: float
    v1: float

    def validate(self):
        if not (self.u1 > self.u0 and self.v1 > self.v0):
            raise DomainError("rectangle has empty interior")
        if self.v0 <= 0.0:
            raise DomainError("rectangle must lie strictly in the upper half-plane")

    @property
    def bbox(self):
        return self.u0, self.u1, self.v0, self.v1

    def area(self):
        return (self.u1 - self.u0) * (self.v1 - self.v0)


@dataclass(frozen=True)
class Disk:
    """Planar disk of given center (uc, vc) and radius, strictly above v = 0."""

    uc: float
    vc: float
    radius: float

    def validate(self):
        if self.radius <= 0.0:
            raise DomainError("disk radius must be positive")
        if self.vc - self.radius <= 0.0:
            raise DomainError("disk must lie strictly in the upper half-plane")

    @property
    def bbox(self):
        r = self.radius
        return self.uc - r, self.uc + r, self.vc - r, self.vc + r

    def area(self):
        return math.pi * self.radius**2


@dataclass(frozen=True)
class SlicePoint:
    """Point u + v*I of R^(m+1) off the real axis, in slice coordinates.

    `direction` is the unit vector I as a plain (m,) array; v must be > 0.
    """

    u: float
    v: float
    direction: np.ndarray

    def __post_init__(self):
        d = np.array(self.direction, dtype=float).reshape(-1)
        if self.v <= 0.0:
            raise ValueError("slice points require v > 0")
        n = np.linalg.norm(d)
        if abs(n - 1.0) > 1e-12:
            raise ValueError("direction must be a unit vector")
        d.setflags(write=False)
        object.__setattr__(self, "direction", d)

    @property
    def m(self):
        return self.direction.size

    @property
    def z(self):
        """Planar coordinates as the complex number u + i v."""
        return complex(self.u, self.v)

    def to_multivector(self, algebra):
        return Multivector.from_paravector(
            algebra, self.u, self.v * self.direction
        )

    @classmethod
    def from_multivector(cls, mv, tol=1e-12):
        if not mv.is_paravector(tol):
            raise ValueError("not a paravector")
        vec = mv.vector_part
        v = float(np.linalg.norm(vec))
        if v <= tol:
            raise ValueError("point lies on the real axis")
        return cls(mv.scalar_part, v, vec / v)


def direction_multivector(algebra, direction):
    """Embed a unit direction as a grade-1 multivector, validating |I| = 1."""
    d = np.asarray(direction, dtype=float).reshape(-1)
    if d.size != algebra.m:
        raise ValueError("direction dimension does not match algebra")
    if abs(np.linalg.norm(d) - 1.0) > 1e-12:
        raise ValueError("direction must be a unit vector")
    return Multivector.from_vector(algebra, d)


# -- sphere rules ----------------------------------------------------------


def _circle_rule(n):
    if n < 2 or n % 2:
        raise DomainError("m=2 sphere rule needs an even node count >= 2")
    theta = 2.0 * math.pi * (np.arange(n) + 0.5) / n
    nodes = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    weights = np.full(n, 2.0 * math.pi / n)
    antipode = (np.arange(n) + n // 2) % n
    upper = theta < math.pi
    return nodes, weights, antipode, upper


def _sphere_rule(m, n):
    """Nodes/weights on S^(m-1) with exact antipodal pairing.

    m=1: the two points +-e1.  m=2: uniform midpoint angles.  m>=3: product of
    Gauss-Gegenbauer rules in the polar cosines and a uniform azimuth with
    2n points.  The hemisphere flag marks nodes with positive last polar
    cosine (m>=3) / angle in (0, pi) (m=2) / +e1 (m=1).
    """
    if m == 1:
        nodes = np.array([[1.0], [-1.0]])
        weights = np.array([1.0, 1.0])
        return nodes, weights, np.array([1, 0]), np.array([True, False])
    if m == 2:
        return _circle_rule(n)
    if n < 2 or n % 2:
        raise DomainError("m>=3 sphere rule needs an even polar count >= 2")
    nodes, weights, antipode, upper = _sphere_rule(m - 1, n)
    # polar layer: x = (sin(phi) * y, cos(phi)), weight (1 - t^2)^((m-3)/2) dt
    t, wt = roots_gegenbauer(n, (m - 2) / 2.0)
    order = np.argsort(t)
    t, wt = t[order], wt[order]
    s = np.sqrt(1.0 - t * t)
    sub = nodes.shape[0]
    new_nodes = np.zeros((n * sub, m))
    new_w = np.zeros(n * sub)
    new_anti = np.zeros(n * sub, dtype=int)
    for i in range(n):
        rows = slice(i * sub, (i + 1) * sub)
        new_nodes[rows, : m - 1] = s[i] * nodes
        new_nodes[rows, m - 1] = t[i]
        new_w[rows] = wt[i] * weights
        # Gegenbauer nodes are symmetric: -t[i] = t[n-1-i]
        new_anti[rows] = (n - 1 - i) * sub + antipode
    new_upper = new_nodes[:, m - 1] > 0.0
    return new_nodes, new_w, new_anti, new_upper


# -- planar rules ----------------------------------------------------------


def _circle_cell_area(uc, vc, radius, a, b, c, d):
    """Area of disk((uc, vc), radius) intersected with the box [a,b]x[c,d].

    The column height h(x) = |[c,d] ∩ [vc-g, vc+g]| with g = sqrt(r^2-(x-uc)^2)
    is piecewise smooth; integrate each smooth piece with Gauss-Legendre after
    splitting at the abscissas where a clip switches or the circle ends.
    """
    lo, hi = max(a, uc - radius), min(b, uc + radius)
    if hi <= lo:
        return 0.0
    cuts = {lo, hi}
    for tau in (c, d):
        dy = tau - vc
        if abs(dy) < radius:
            dx = math.sqrt(radius**2 - dy**2)
            for x in (uc - dx, uc + dx):
                if lo < x < hi:
                    cuts.add(x)
    xs = sorted(cuts)
    gl_x, gl_w = np.polynomial.legendre.leggauss(16)
    total = 0.0
    for x0, x1 in zip(xs[:-1], xs[1:]):
        mid, half = 0.5 * (x0 + x1), 0.5 * (x1 - x0)
        x = mid + half * gl_x
        g = np.sqrt(np.maximum(radius**2 - (x - uc) ** 2, 0.0))
        h = np.minimum(d, vc + g) - np.maximum(c, vc - g)
        total += half * np.sum(gl_w * np.maximum(h, 0.0))
    return total


def _cell_weights(region, centers_u, centers_v, hu, hv):
    """Per-cell quadrature weight: full area for rectangles, clipped for disks."""
    nu, nv = centers_u.size, centers_v.size
    if isinstance(region, Rectangle):
        return np.full((nu, nv), hu * hv)
    uu, vv = np.meshgrid(centers_u, centers_v, indexing="ij")
    dist = np.hypot(uu - region.uc, vv - region.vc)
    rad = 0.5 * math.hypot(hu, hv)
    w = np.zeros((nu, nv))
    w[dist <= region.radius - rad] = hu * hv
    border = (dist < region.radius + rad) & (dist > region.radius - rad)
    for iu, iv in np.argwhere(border):
        u, v = uu[iu, iv], vv[iu, iv]
        w[iu, iv] = _circle_cell_area(
            region.uc,
            region.vc,
            region.radius,
            u - hu / 2,
            u + hu / 2,
            v - hv / 2,
            v + hv / 2,
        )
    return w


def _rectangle_boundary(region, panels, gauss_pts=4):
    """Composite Gauss-Legendre nodes, outward normals and weights per edge."""
    x, w = np.polynomial.legendre.leggauss(gauss_pts)
    pts, nrm, wts = [], [], []

    def edge(p0, p1, normal):
        p0 = np.asarray(p0, float)
        p1 = np.asarray(p1, float)
        length = np.linalg.norm(p1 - p0)
        for i in range(panels):
            a = p0 + (p1 - p0) * i / panels
            b = p0 + (p1 - p0) * (i + 1) / panels
            mid = 0.5 * (a + b)
            half = 0.5 * (b - a)
            for t, ww in zip(x, w):
                pts.append(mid + t * half)
                nrm.append(normal)
                wts.append(ww * length / (2 * panels))

    u0, u1, v0, v1 = region.u0, region.u1, region.v0, region.v1
    edge((u0, v0), (u1, v0), (0.0, -1.0))
    edge((u1, v0), (u1, v1), (1.0, 0.0))
    edge((u1, v1), (u0, v1), (0.0, 1.0))
    edge((u0, v1), (u0, v0), (-1.0, 0.0))
    return np.array(pts), np.array(nrm), np.array(wts)


def _disk_boundary(region, panels, gauss_pts=4):
    x, w = np.polynomial.legendre.leggauss(gauss_pts)
    pts, nrm, wts = [], [], []
    for i in range(4 * panels):
        a = 2 * math.pi * i / (4 * panels)
        b = 2 * math.pi * (i + 1) / (4 * panels)
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        for t, ww in zip(x, w):
            ang = mid + t * half
            n = np.array([math.cos(ang), math.sin(ang)])
            pts.append([region.uc + region.radius * n[0], region.vc + region.radius * n[1]])
            nrm.append(n)
            wts.append(ww * half * region.radius)
    return np.array(pts), np.array(nrm), np.array(wts)


class AxialDomainQuadrature:
    """Quadrature data for one axially symmetric domain.

    Immutable after construction.  Planar cells are stored on the full
    bounding-box grid; cells outside a disk region carry zero weight.
    """

    def __init__(self, region, m, planar_n, boundary_n, sphere_n):
        region.validate()
        if planar_n < 2 or boundary_n < 2 or (m >= 2 and sphere_n < 2):
            raise DomainError("resolutions must be >= 2")
        self.region = region
        self.m = m
        self.algebra = CliffordAlgebra(m)
        self.planar_n = planar_n
        self.boundary_n = boundary_n
        self.sphere_n = sphere_n

        u0, u1, v0, v1 = region.bbox
        self.hu = (u1 - u0) / planar_n
        self.hv = (v1 - v0) / planar_n
        self.centers_u = u0 + (np.arange(planar_n) + 0.5) * self.hu
        self.centers_v = v0 + (np.arange(planar_n) + 0.5) * self.hv
        self.cell_w = _cell_weights(region, self.centers_u, self.centers_v, self.hu, self.hv)

        if isinstance(region, Rectangle):
            pts, nrm, wts = _rectangle_boundary(region, boundary_n)
        else:
            pts, nrm, wts = _disk_boundary(region, boundary_n)
        self.boundary_pts = pts
        self.boundary_normals = nrm
        self.boundary_w = wts

        nodes, sw, anti, upper = _sphere_rule(m, sphere_n)
        self.sphere_nodes = nodes
        self.sphere_w = sw
        self.antipode = anti
        self.hemisphere = upper
        self.n_sphere = nodes.shape[0]

        alg = self.algebra
        self.sphere_mv = alg.embed_vector(nodes)            # (nk, dim)
        self.sphere_lmul = alg.lmul_matrices(self.sphere_mv)  # (nk, dim, dim)

        for arr in (self.cell_w, self.centers_u, self.centers_v, nodes, sw):
            arr.setflags(write=False)

    # -- basic geometry ----------------------------------------------------

    @property
    def n_planar(self):
        return self.planar_n * self.planar_n

    @property
    def n_nodes(self):
        return self.n_planar * self.n_sphere

    @property
    def omega(self):
        return sphere_surface_area(self.m)

    def grid(self):
        """Planar cell centers as (nu, nv) meshes."""
        return np.meshgrid(self.centers_u, self.centers_v, indexing="ij")

    def planar_inside(self, u, v):
        if isinstance(self.region, Rectangle):
            r = self.region
            return (r.u0 < u < r.u1) and (r.v0 < v < r.v1)
        return math.hypot(u - self.region.uc, v - self.region.vc) < self.region.radius

    def distance_to_boundary(self, u, v):
        """Unsigned planar distance from (u, v) to the boundary of D+."""
        if isinstance(self.region, Rectangle):
            r = self.region
            return min(abs(u - r.u0), abs(r.u1 - u), abs(v - r.v0), abs(r.v1 - v))
        return abs(self.region.radius - math.hypot(u - self.region.uc, v - self.region.vc))

    def interior_cell_mask(self, margin_cells=1):
        """Planar cells at least `margin_cells` cells away from the boundary."""
        uu, vv = self.grid()
        h = max(self.hu, self.hv)
        if isinstance(self.region, Rectangle):
            r = self.region
            dist = np.minimum.reduce(
                [uu - r.u0, r.u1 - uu, vv - r.v0, r.v1 - vv]
            )
        else:
            dist = self.region.radius - np.hypot(uu - self.region.uc, vv - self.region.vc)
        return dist >= margin_cells * h

    # -- node streams ------------------------------------------------------

    def volume_nodes(self):
        """Flat list of (point, dV-weight, dmu-weight) over active cells x sphere.

        Points are (m+1,) arrays (x0, x1..xm); only cells with positive planar
        weight are listed.
        """
        uu, vv = self.grid()
        keep = self.cell_w > 0.0
        u = uu[keep]
        v = vv[keep]
        w = self.cell_w[keep]
        pts = (
            np.concatenate(
                [
                    np.broadcast_to(u[:, None, None], u.shape + (self.n_sphere, 1)),
                    v[:, None, None] * self.sphere_nodes[None, :, :],
                ],
                axis=2,
            )
        ).reshape(-1, self.m + 1)
        dmu = (w[:, None] * self.sphere_w[None, :]).reshape(-1)
        dv = (w[:, None] * v[:, None] ** (self.m - 1) * self.sphere_w[None, :]).reshape(-1)
        return pts, dv, dmu

    def boundary_nodes(self):
        """Flat list of (point, outward unit normal paravector, dsigma-weight)."""
        pts2 = self.boundary_pts
        nrm2 = self.boundary_normals
        s = self.boundary_w
        nb = pts2.shape[0]
        nk = self.n_sphere
        pts = np.concatenate(
            [
                np.broadcast_to(pts2[:, :1], (nb, 1))[:, None, :].repeat(nk, axis=1),
                pts2[:, None, 1:2] * self.sphere_nodes[None, :, :],
            ],
            axis=2,
        ).reshape(-1, self.m + 1)
        normals = np.concatenate(
            [
                np.broadcast_to(nrm2[:, :1], (nb, 1))[:, None, :].repeat(nk, axis=1),
                nrm2[:, None, 1:2] * self.sphere_nodes[None, :, :],
            ],
            axis=2,
        ).reshape(-1, self.m + 1)
        dsig = (
            s[:, None] * pts2[:, 1:2] ** (self.m - 1) * self.sphere_w[None, :]
        ).reshape(-1)
        return pts, normals, dsig

    def node_dmu_weights(self):
        """dmu weight per (iu, iv, k) grid node, zero outside the region."""
        return self.cell_w[:, :, None] * self.sphere_w[None, None, :]

    def node_dv_weights(self):
        v = self.centers_v[None, :, None] ** (self.m - 1)
        return self.cell_w[:, :, None] * v * self.sphere_w[None, None, :]

    def slice_point(self, iu, iv, k):
        return SlicePoint(
            float(self.centers_u[iu]),
            float(self.centers_v[iv]),
            self.sphere_nodes[k],
        )

    def nearest_cell(self, u, v):
        iu = int(np.clip(round((u - self.centers_u[0]) / self.hu), 0, self.planar_n - 1))
        iv = int(np.clip(round((v - self.centers_v[0]) / self.hv), 0, self.planar_n - 1))
        return iu, iv


def build_domain(region, m=2, planar_n=32, boundary_n=8, sphere_n=8):
    """Build the quadrature package for an axially symmetric domain."""
    return AxialDomainQuadrature(region, m, planar_n, boundary_n, sphere_n)
