"""Slice function representations and the calculus on them.

Three representations cover everything the operator layer needs: exact
power series q^n a_n with right Clifford coefficients (slice monogenic by
construction), compactly supported smooth bumps with even planar profile,
and grids of sampled values over a domain's volume nodes.

On slice coordinates the slice Cauchy-Riemann operator reduces to
G = d/du + I d/dv and its conjugate to Gbar = d/du - I d/dv, which is how
both the analytic and the finite-difference derivative paths are written.
"""

from __future__ import annotations

import math

import numpy as np

from .algebra import Multivector
from .geometry import AxialDomainQuadrature, SlicePoint, direction_multivector


class StencilError(IndexError):
    """Central difference stencil does not fit inside the grid."""


class PolynomialSliceFunction:
    """f(q) = sum_n q^n a_n with right multivector coefficients a_n."""

    def __init__(self, coeffs):
        if not coeffs:
            raise ValueError("need at least one coefficient")
        alg = coeffs[0].algebra
        if any(c.algebra is not alg for c in coeffs):
            raise ValueError("coefficients from different algebras")
        self.algebra = alg
        self.coeffs = list(coeffs)

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def _combine(self, re_pows, im_pows):
        """sum_n Re(z^n) a_n + I * sum_n Im(z^n) a_n at stacked planar points."""
        alg = self.algebra
        A = np.zeros(re_pows.shape[1:] + (alg.dim,))
        B = np.zeros_like(A)
        for n, c in enumerate(self.coeffs):
            A += re_pows[n][..., None] * c.coeffs
            B += im_pows[n][..., None] * c.coeffs
        return A, B

    def evaluate_arrays(self, u, v, directions):
        """Values at points u + v*I, vectorized; directions has shape (..., m)."""
        z = np.asarray(u, dtype=float) + 1j * np.asarray(v, dtype=float)
        pows = np.stack([z**n for n in range(len(self.coeffs))])
        A, B = self._combine(pows.real, pows.imag)
        alg = self.algebra
        I = alg.embed_vector(directions)
        return A + alg.mul(I, B)

    def __call__(self, point: SlicePoint):
        vals = self.evaluate_arrays(
            np.array(point.u), np.array(point.v), point.direction
        )
        return Multivector(self.algebra, vals)

    def gbar_derivative(self):
        """Coefficients of Gbar f = sum 2 n q^(n-1) a_n (slice coordinates)."""
        if self.degree == 0:
            return PolynomialSliceFunction([Multivector.scalar(self.algebra, 0.0)])
        return PolynomialSliceFunction(
            [2.0 * n * c for n, c in enumerate(self.coeffs)][1:]
        )


def _bump(t):
    """exp(-1/(1-t^2)) inside |t| < 1, exactly zero outside."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - t[inside] ** 2))
    return out


def _bump_deriv(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    ti = t[inside]
    out[inside] = np.exp(-1.0 / (1.0 - ti**2)) * (-2.0 * ti) / (1.0 - ti**2) ** 2
    return out


class BumpSliceFunction:
    """c times a smooth bump in (u, v^2), supported in a rectangle of D+.

    The profile is even in v, so the induced stem function satisfies the
    reality condition and the function is a genuine slice function; it and
    all derivatives vanish identically outside the support rectangle.
    """

    def __init__(self, u0, u1, v0, v1, c: Multivector):
        if not (u1 > u0 and v1 > v0 > 0.0):
            raise ValueError("bump support must be a rectangle in the upper half-plane")
        self.u0, self.u1, self.v0, self.v1 = float(u0), float(u1), float(v0), float(v1)
        self.c = c
        self.algebra = c.algebra

    def _profile(self, u, v):
        tu = (2.0 * np.asarray(u) - self.u0 - self.u1) / (self.u1 - self.u0)
        w = np.asarray(v) ** 2
        tw = (2.0 * w - self.v0**2 - self.v1**2) / (self.v1**2 - self.v0**2)
        return _bump(tu) * _bump(tw)

    def _profile_grad(self, u, v):
        du_scale = 2.0 / (self.u1 - self.u0)
        dw_scale = 2.0 / (self.v1**2 - self.v0**2)
        tu = (2.0 * np.asarray(u) - self.u0 - self.u1) / (self.u1 - self.u0)
        w = np.asarray(v) ** 2
        tw = (2.0 * w - self.v0**2 - self.v1**2) / (self.v1**2 - self.v0**2)
        eta_u = _bump_deriv(tu) * du_scale * _bump(tw)
        eta_v = _bump(tu) * _bump_deriv(tw) * dw_scale * 2.0 * np.asarray(v)
        return eta_u, eta_v

    @property
    def peak_point(self):
        """Planar point where the profile attains its maximum e^-2."""
        return 0.5 * (self.u0 + self.u1), math.sqrt(0.5 * (self.v0**2 + self.v1**2))

    def evaluate_arrays(self, u, v, directions):
        eta = self._profile(u, v)
        return eta[..., None] * self.c.coeffs

    def __call__(self, point: SlicePoint):
        return Multivector(self.algebra, self.evaluate_arrays(point.u, point.v, None))

    def derivative_arrays(self, u, v, directions, conjugated=False):
        """G or Gbar of the bump, in closed form: (d_u eta +- I d_v eta) c."""
        eta_u, eta_v = self._profile_grad(u, v)
        alg = self.algebra
        I = alg.embed_vector(directions)
        sign = -1.0 if conjugated else 1.0
        return eta_u[..., None] * self.c.coeffs + sign * alg.mul(
            I, eta_v[..., None] * self.c.coeffs
        )


def make_bump(support, c: Multivector, domain: AxialDomainQuadrature):
    """Bump with the given support rectangle, at least two cells inside D+."""
    u0, u1, v0, v1 = support
    margin = 2.0 * max(domain.hu, domain.hv)
    corners = [(u0, v0), (u0, v1), (u1, v0), (u1, v1)]
    for (u, v) in corners:
        if not domain.planar_inside(u, v) or domain.distance_to_boundary(u, v) < margin:
            raise ValueError("bump support must sit >= 2 cells inside the region")
    return BumpSliceFunction(u0, u1, v0, v1, c)


class GridField:
    """Multivector values sampled on a domain's volume-node grid.

    values has shape (nu, nv, nk, 2^m); entries over zero-weight cells are
    carried along but never enter weighted sums.
    """

    def __init__(self, domain: AxialDomainQuadrature, values):
        values = np.asarray(values, dtype=float)
        expected = (domain.planar_n, domain.planar_n, domain.n_sphere, domain.algebra.dim)
        if values.shape != expected:
            raise ValueError(f"expected values of shape {expected}, got {values.shape}")
        self.domain = domain
        self.values = values

    @classmethod
    def sample(cls, domain, f):
        """Sample a slice function, constant, or callable(u, v, direction)->coeffs."""
        return cls(domain, sample_node_values(domain, f))

    def copy(self):
        return GridField(self.domain, self.values.copy())

    def __add__(self, other):
        return GridField(self.domain, self.values + other.values)

    def __sub__(self, other):
        return GridField(self.domain, self.values - other.values)

    def __mul__(self, scalar):
        return GridField(self.domain, self.values * scalar)

    __rmul__ = __mul__

    def at(self, iu, iv, k):
        return Multivector(self.domain.algebra, self.values[iu, iv, k])


def sample_node_values(domain, f):
    """Node values (nu, nv, nk, dim) for any supported input kind."""
    alg = domain.algebra
    nu = nv = domain.planar_n
    nk = domain.n_sphere
    uu, vv = domain.grid()
    if isinstance(f, GridField):
        if f.domain is not domain:
            raise ValueError("grid field belongs to a different domain")
        return f.values
    if isinstance(f, Multivector):
        return np.broadcast_to(f.coeffs, (nu, nv, nk, alg.dim)).copy()
    if isinstance(f, (int, float)):
        return np.broadcast_to(alg.scalar(f), (nu, nv, nk, alg.dim)).copy()
    if isinstance(f, (PolynomialSliceFunction, BumpSliceFunction)):
        u = np.broadcast_to(uu[:, :, None], (nu, nv, nk))
        v = np.broadcast_to(vv[:, :, None], (nu, nv, nk))
        dirs = np.broadcast_to(domain.sphere_nodes[None, None], (nu, nv, nk, domain.m))
        return f.evaluate_arrays(u, v, dirs)
    if callable(f):
        out = np.empty((nu, nv, nk, alg.dim))
        for k in range(nk):
            out[:, :, k, :] = f(uu, vv, domain.sphere_nodes[k])
        return out
    raise TypeError(f"cannot sample input of type {type(f)!r}")


def evaluate(f, point: SlicePoint):
    """Evaluate a polynomial or bump slice function at one point."""
    return f(point)


def representation_formula(f_plus, f_minus, I, I_x):
    """Reconstruct f(u + v I_x) from the two slice values f(u +- v I).

    I and I_x are unit grade-1 multivectors; returns
    (1 - I_x I)/2 * f_plus + (1 + I_x I)/2 * f_minus.
    """
    alg = f_plus.algebra
    for d in (I, I_x):
        if abs(d.norm() - 1.0) > 1e-12 or np.any(d.coeffs[0] != 0.0) or np.any(
            d.coeffs[alg.m + 1 :] != 0.0
        ):
            raise ValueError("directions must be unit grade-1 vectors")
    one = Multivector.scalar(alg, 1.0)
    prod = I_x * I
    alpha = (one - prod) * 0.5
    beta = (one + prod) * 0.5
    return alpha * f_plus + beta * f_minus


def star_product(f: PolynomialSliceFunction, g: PolynomialSliceFunction):
    """Coefficient convolution c_n = sum_k a_k b_(n-k) of two power series."""
    alg = f.algebra
    if g.algebra is not alg:
        raise ValueError("operands from different algebras")
    n = f.degree + g.degree + 1
    out = [Multivector.scalar(alg, 0.0) for _ in range(n)]
    for i, a in enumerate(f.coeffs):
        for j, b in enumerate(g.coeffs):
            out[i + j] = out[i + j] + a * b
    return PolynomialSliceFunction(out)


def apply_G_analytic(f: PolynomialSliceFunction, point: SlicePoint, conjugated=False):
    """G f (zero for power series) or Gbar f = sum 2n q^(n-1) a_n at a point."""
    if not conjugated:
        return Multivector.scalar(f.algebra, 0.0)
    return f.gbar_derivative()(point)


def apply_G_fd(field: GridField, cell, conjugated=False, richardson=False):
    """Central-difference G or Gbar of a grid field at cell (iu, iv, k).

    The stencil is du +- I_k dv along the fixed slice; `richardson` combines
    the one- and two-cell stencils for fourth-order accuracy.
    """
    iu, iv, k = cell
    dom = field.domain
    need = 2 if richardson else 1
    n = dom.planar_n
    if not (need <= iu < n - need and need <= iv < n - need):
        raise StencilError("stencil does not fit at this cell")
    vals = field.values

    def central(step):
        du = (vals[iu + step, iv, k] - vals[iu - step, iv, k]) / (2 * step * dom.hu)
        dv = (vals[iu, iv + step, k] - vals[iu, iv - step, k]) / (2 * step * dom.hv)
        return du, dv

    du, dv = central(1)
    if richardson:
        du2, dv2 = central(2)
        du = (4.0 * du - du2) / 3.0
        dv = (4.0 * dv - dv2) / 3.0
    alg = dom.algebra
    idv = alg.mul(dom.sphere_mv[k], dv)
    out = du - idv if conjugated else du + idv
    return Multivector(alg, out)


def grid_G_fd(field: GridField, conjugated=False, richardson=False):
    """Whole-grid central-difference G/Gbar; returns (GridField, valid mask)."""
    dom = field.domain
    vals = field.values
    n = dom.planar_n
    need = 2 if richardson else 1
    out = np.zeros_like(vals)
    valid = np.zeros((n, n), dtype=bool)
    valid[need : n - need, need : n - need] = True

    def central(step):
        du = np.full_like(vals, np.nan)
        dv = np.full_like(vals, np.nan)
        du[step:-step, :, :, :] = (vals[2 * step :] - vals[: -2 * step]) / (
            2 * step * dom.hu
        )
        dv[:, step:-step, :, :] = (vals[:, 2 * step :] - vals[:, : -2 * step]) / (
            2 * step * dom.hv
        )
        return du, dv

    du, dv = central(1)
    if richardson:
        du2, dv2 = central(2)
        du = (4.0 * du - du2) / 3.0
        dv = (4.0 * dv - dv2) / 3.0
    idv = np.einsum("kab,uvkb->uvka", dom.sphere_lmul, np.nan_to_num(dv))
    sign = -1.0 if conjugated else 1.0
    out = np.nan_to_num(du) + sign * idv
    out[~valid] = 0.0
    return GridField(dom, out), valid
