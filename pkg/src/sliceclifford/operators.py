"""Quadrature evaluation and discrete assembly of the singular integral operators.

Every operator here is a volume or boundary integral whose kernel, restricted
to a source on the slice of I and a target with direction I', decomposes over
the basis {1, I', I, I'I} with real coefficients built from two scalar complex
kernels: one with the pole at the target's planar point (own pole) and one at
its mirror image (mirror pole).  The quadrature therefore factors into planar
kernel sums times sphere-node reductions of the integrand, which is both the
pointwise evaluation path (dense planar rows) and the assembled path (FFT
convolutions on the uniform cell grid, since the own-pole kernel is a planar
convolution and the mirror-pole kernel a reflected one).

Principal values follow the midpoint desingularization rule: collocation
points are cell centers and any source cell whose center lies within half a
cell diagonal of the target's singular sphere is dropped; on the centered
square the odd symmetry of the kernels makes the dropped contribution vanish
to leading order.
"""

from __future__ import annotations

import math
import struct
import warnings
from functools import lru_cache

import numpy as np
from scipy.signal import fftconvolve

from .algebra import Multivector
from .functions import GridField, grid_G_fd, sample_node_values
from .geometry import AxialDomainQuadrature, SlicePoint, sphere_surface_area
from .kernels import direct_slots


class AccuracyWarning(UserWarning):
    """Evaluation point is within one cell of the domain boundary."""


class ConvergenceError(RuntimeError):
    """Iteration failed to converge; carries the last iterate value."""

    def __init__(self, message, last_value=None):
        super().__init__(message)
        self.last_value = last_value


_VOLUME_KINDS = {
    # kind: (kernel power, conjugated, prefactor numerator)
    "T": (1, False, -1.0),
    "Tbar": (1, True, -1.0),
    "Pi": (2, False, -2.0),
    "Piplus": (2, True, -2.0),
}
_BOUNDARY_KINDS = {
    "F": (1, False, 1.0),
    "Fbar": (1, True, 1.0),
}


def _prefactor(kind, m):
    num = (_VOLUME_KINDS.get(kind) or _BOUNDARY_KINDS[kind])[2]
    return num / (math.pi * sphere_surface_area(m))


def _pow_kernel(dz, power, mask=None):
    out = np.zeros_like(dz, dtype=complex)
    ok = dz != 0.0
    if mask is not None:
        ok &= ~mask
    out[ok] = 1.0 / dz[ok] ** power
    return out


# -- sphere reductions -------------------------------------------------------


def _reduce_sphere(domain, values, need_vd):
    """F0 = sum_k s_k f, F1 = sum_k s_k I_k f, and optionally V_d = sum_k s_k I_kd f.

    values has shape (..., nk, dim); reductions drop the sphere axis.
    """
    sw = domain.sphere_w
    F0 = np.einsum("...kb,k->...b", values, sw)
    F1 = np.einsum("kab,...kb,k->...a", domain.sphere_lmul, values, sw)
    Vd = None
    if need_vd:
        Vd = np.einsum("kd,...kb,k->d...b", domain.sphere_nodes, values, sw)
    return F0, F1, Vd


def _target_lmul(domain, dirs):
    """Left-multiplication matrices for an (nt, m) array of unit directions."""
    return domain.algebra.lmul_matrices(domain.algebra.embed_vector(dirs))


# -- dense (pointwise) evaluation --------------------------------------------


def _dense_combine(kind, domain, P, Q, g0, g1, gv, dirs):
    """Combine slot sums for targets with directions `dirs` ((nt, m) array)."""
    s1, s2, s3, s4 = direct_slots(P, Q)
    conj = (_VOLUME_KINDS.get(kind) or _BOUNDARY_KINDS[kind])[1]
    A = s1 @ g0
    B = s2 @ g0 + s4 @ g1
    C = s3 @ g1
    L = _target_lmul(domain, dirs)
    if not conj:
        out = A + C + np.einsum("tab,tb->ta", L, B)
    else:
        out = A - C - np.einsum("tab,tb->ta", L, B)
        stacked = np.stack([s4 @ gvd for gvd in gv], axis=0)  # (m, nt, dim)
        out = out - 2.0 * np.einsum("td,dtb->tb", dirs, stacked)
    return _prefactor(kind, domain.m) * out


def _volume_sources(domain, f):
    values = sample_node_values(domain, f)
    nu = domain.planar_n
    uu, vv = domain.grid()
    z = (uu + 1j * vv).reshape(-1)
    w = domain.cell_w.reshape(-1)
    return values, z, w


def _volume_pointwise(kind, domain, f, z_targets, dirs):
    """Evaluate a volume operator at arbitrary planar targets (no corrections)."""
    values, z, w = _volume_sources(domain, f)
    power, conj, _ = _VOLUME_KINDS[kind]
    half_diag = 0.5 * math.hypot(domain.hu, domain.hv)
    dz_own = z[None, :] - z_targets[:, None]
    mask = np.abs(dz_own) < half_diag
    P = _pow_kernel(dz_own, power, mask)
    Q = _pow_kernel(z[None, :] - np.conj(z_targets)[:, None], power)
    F0, F1, Vd = _reduce_sphere(domain, values, conj)
    npl = domain.n_planar
    dim = domain.algebra.dim
    g0 = (w[:, None] * F0.reshape(npl, dim))
    g1 = (w[:, None] * F1.reshape(npl, dim))
    gv = None
    if conj:
        gv = [w[:, None] * Vd[d].reshape(npl, dim) for d in range(domain.m)]
    return _dense_combine(kind, domain, P, Q, g0, g1, gv, dirs)


def _boundary_values(domain, f):
    pts = domain.boundary_pts
    nb = pts.shape[0]
    nk = domain.n_sphere
    u = np.broadcast_to(pts[:, 0:1], (nb, nk))
    v = np.broadcast_to(pts[:, 1:2], (nb, nk))
    dirs = np.broadcast_to(domain.sphere_nodes[None], (nb, nk, domain.m))
    if isinstance(f, Multivector):
        return np.broadcast_to(f.coeffs, (nb, nk, domain.algebra.dim)).copy()
    if isinstance(f, (int, float)):
        return np.broadcast_to(domain.algebra.scalar(f), (nb, nk, domain.algebra.dim)).copy()
    if hasattr(f, "evaluate_arrays"):
        return f.evaluate_arrays(u, v, dirs)
    if callable(f):
        out = np.empty((nb, nk, domain.algebra.dim))
        for k in range(nk):
            out[:, k, :] = f(pts[:, 0], pts[:, 1], domain.sphere_nodes[k])
        return out
    raise TypeError("boundary operators need an evaluable input (not a grid field)")


def _boundary_pointwise(kind, domain, f, z_targets, dirs):
    values = _boundary_values(domain, f)
    power, conj, _ = _BOUNDARY_KINDS[kind]
    pts = domain.boundary_pts
    zb = pts[:, 0] + 1j * pts[:, 1]
    nb = pts.shape[0]
    n_tilde = domain.boundary_normals[:, 0] + 1j * domain.boundary_normals[:, 1]
    P = _pow_kernel(zb[None, :] - z_targets[:, None], power) * n_tilde[None, :]
    Q = _pow_kernel(zb[None, :] - np.conj(z_targets)[:, None], power) * n_tilde[None, :]
    F0, F1, Vd = _reduce_sphere(domain, values, conj)
    dim = domain.algebra.dim
    s = domain.boundary_w
    g0 = s[:, None] * F0.reshape(nb, dim)
    g1 = s[:, None] * F1.reshape(nb, dim)
    gv = None
    if conj:
        gv = [s[:, None] * Vd[d].reshape(nb, dim) for d in range(domain.m)]
    return _dense_combine(kind, domain, P, Q, g0, g1, gv, dirs)


def _pi_plus_correction_point(domain, f, q: SlicePoint):
    """(1/omega) full-sphere average of conj(alpha) f(q_I) minus f(q)/2."""
    alg = domain.algebra
    nk = domain.n_sphere
    u = np.full(nk, q.u)
    v = np.full(nk, q.v)
    if hasattr(f, "evaluate_arrays"):
        ring = f.evaluate_arrays(u, v, domain.sphere_nodes)
    elif isinstance(f, Multivector):
        ring = np.broadcast_to(f.coeffs, (nk, alg.dim)).copy()
    elif isinstance(f, (int, float)):
        ring = np.broadcast_to(alg.scalar(f), (nk, alg.dim)).copy()
    else:
        raise TypeError(
            "pi_plus_op needs an evaluable input at arbitrary points; "
            "grid fields are supported at grid nodes only"
        )
    return _pi_plus_correction_ring(domain, ring, q.direction)


def _pi_plus_correction_ring(domain, ring, direction):
    """Correction from the values of f on the sphere orbit of the target."""
    alg = domain.algebra
    omega = sphere_surface_area(domain.m)
    sw = domain.sphere_w
    Lq = alg.lmul_matrices(alg.embed_vector(direction))
    own = np.einsum("kb,k->b", ring, sw)
    mixed = np.einsum("kab,kb,k->a", domain.sphere_lmul, np.einsum("ab,kb->ka", Lq, ring), sw)
    k_self = int(np.argmin(np.linalg.norm(domain.sphere_nodes - direction, axis=1)))
    if np.linalg.norm(domain.sphere_nodes[k_self] - direction) > 1e-9:
        raise ValueError("grid-field correction requires a sphere-node direction")
    fq = ring[k_self]
    return (own - mixed) / (2.0 * omega) - 0.5 * fq


def _warn_near_boundary(domain, u, v):
    if domain.distance_to_boundary(u, v) < max(domain.hu, domain.hv):
        warnings.warn(
            "evaluation point within one cell of the boundary; "
            "quadrature accuracy degrades there",
            AccuracyWarning,
            stacklevel=3,
        )


# -- public pointwise operators ----------------------------------------------


def teodorescu(f, domain, q: SlicePoint, conjugated=False):
    """Volume potential of f at q (right inverse of the slice CR operator)."""
    _warn_near_boundary(domain, q.u, q.v)
    kind = "Tbar" if conjugated else "T"
    out = _volume_pointwise(kind, domain, f, np.array([q.z]), q.direction[None, :])
    return Multivector(domain.algebra, out[0])


def conjugate_teodorescu(f, domain, q: SlicePoint):
    return teodorescu(f, domain, q, conjugated=True)


def pi_op(f, domain, q: SlicePoint):
    """Principal-value Beurling-type transform of f at q."""
    _warn_near_boundary(domain, q.u, q.v)
    out = _volume_pointwise("Pi", domain, f, np.array([q.z]), q.direction[None, :])
    return Multivector(domain.algebra, out[0])


def pi_plus_op(f, domain, q):
    """Conjugated Beurling-type transform (two-sided inverse of pi_op on L^2(dmu)).

    `q` may be a SlicePoint (for inputs evaluable everywhere) or a grid cell
    index (iu, iv, k) for GridField inputs, whose slice-orbit values live on
    the shared planar grid.
    """
    if isinstance(q, tuple):
        iu, iv, k = q
        point = domain.slice_point(iu, iv, k)
        values = sample_node_values(domain, f)
        ring = values[iu, iv]
        corr = _pi_plus_correction_ring(domain, ring, point.direction)
    else:
        point = q
        corr = _pi_plus_correction_point(domain, f, q)
    _warn_near_boundary(domain, point.u, point.v)
    out = _volume_pointwise(
        "Piplus", domain, f, np.array([point.z]), point.direction[None, :]
    )
    return Multivector(domain.algebra, out[0] + corr)


def cauchy_boundary(f, domain, q: SlicePoint, conjugated=False):
    """Boundary (Cauchy-type) integral of f at an interior point q."""
    _warn_near_boundary(domain, q.u, q.v)
    kind = "Fbar" if conjugated else "F"
    out = _boundary_pointwise(kind, domain, f, np.array([q.z]), q.direction[None, :])
    return Multivector(domain.algebra, out[0])


def _slice_sources(domain, f, direction, z_target, power):
    """Planar sources over both half-plane copies of the slice of `direction`."""
    direction = np.asarray(direction, dtype=float).reshape(-1)
    uu, vv = domain.grid()
    z = (uu + 1j * vv).reshape(-1)
    w = domain.cell_w.reshape(-1)
    dim = domain.algebra.dim
    if isinstance(f, GridField):
        k_up = int(np.argmin(np.linalg.norm(domain.sphere_nodes - direction, axis=1)))
        if np.linalg.norm(domain.sphere_nodes[k_up] - direction) > 1e-9:
            raise ValueError("slice operators on grid fields need a sphere-node slice")
        k_dn = domain.antipode[k_up]
        up = f.values[:, :, k_up].reshape(-1, dim)
        dn = f.values[:, :, k_dn].reshape(-1, dim)
    elif hasattr(f, "evaluate_arrays"):
        dirs = np.broadcast_to(direction, (z.size, domain.m))
        up = f.evaluate_arrays(z.real, z.imag, dirs)
        dn = f.evaluate_arrays(z.real, z.imag, -dirs)
    elif isinstance(f, Multivector):
        up = dn = np.broadcast_to(f.coeffs, (z.size, dim))
    elif isinstance(f, (int, float)):
        up = dn = np.broadcast_to(domain.algebra.scalar(f), (z.size, dim))
    else:
        raise TypeError(f"cannot sample input of type {type(f)!r} on a slice")
    half_diag = 0.5 * math.hypot(domain.hu, domain.hv)
    kern_up = _pow_kernel(z - z_target, power, np.abs(z - z_target) < half_diag)
    kern_dn = _pow_kernel(
        np.conj(z) - z_target, power, np.abs(np.conj(z) - z_target) < half_diag
    )
    return w, kern_up, kern_dn, up, dn


def teodorescu_slice(f, domain, direction, z_target):
    """Cauchy transform over the doubled planar copy of one slice.

    `z_target` is a complex number read in the slice plane of `direction`.
    """
    w, kern_up, kern_dn, up, dn = _slice_sources(domain, f, direction, z_target, 1)
    return _slice_combine(domain, direction, w, kern_up, kern_dn, up, dn, -1.0 / (2.0 * math.pi))


def pi_op_slice(f, domain, direction, z_target):
    """Principal-value planar Beurling transform over the doubled slice copy."""
    w, kern_up, kern_dn, up, dn = _slice_sources(domain, f, direction, z_target, 2)
    return _slice_combine(domain, direction, w, kern_up, kern_dn, up, dn, -1.0 / math.pi)


def _slice_combine(domain, direction, w, kern_up, kern_dn, up, dn, pref):
    alg = domain.algebra
    re = (w * kern_up.real) @ up + (w * kern_dn.real) @ dn
    im = (w * kern_up.imag) @ up + (w * kern_dn.imag) @ dn
    I = alg.embed_vector(direction)
    return Multivector(alg, pref * (re + alg.mul(I, im)))


# -- assembled operators ------------------------------------------------------


def _conv_valid(table, field):
    """sum_j table[(offsets)] * field[j] on the shared grid, all targets at once."""
    out = np.empty(field.shape, dtype=complex)
    for b in range(field.shape[-1]):
        out[..., b] = fftconvolve(table, field[..., b], mode="valid")
    return out


class DiscreteOperator:
    """Factorized discrete operator over a domain's collocation grid.

    Volume kinds (T, Tbar, Pi, Piplus) map grid fields to grid fields through
    cached FFT kernel tables; boundary kinds (F, Fbar) map boundary-node data
    to grid fields through dense planar blocks.  `entry(i, j)` materializes
    the contractual Clifford matrix element including quadrature weight and
    principal-value mask; apply() equals the entry-sum plus kind corrections.
    """

    MATERIALIZE_CAP = 200_000  # max nodes for dense dumps (entries per row)

    def __init__(self, kind, domain: AxialDomainQuadrature):
        if kind not in _VOLUME_KINDS and kind not in _BOUNDARY_KINDS:
            raise ValueError(f"unknown operator kind {kind!r}")
        self.kind = kind
        self.domain = domain
        self.is_volume = kind in _VOLUME_KINDS
        spec = _VOLUME_KINDS.get(kind) or _BOUNDARY_KINDS[kind]
        self.power, self.conjugated, _ = spec
        self.pref = _prefactor(kind, domain.m)
        if self.is_volume:
            self._build_tables()
        else:
            self._build_boundary_blocks()

    # volume: FFT kernel tables ------------------------------------------------

    def _build_tables(self):
        dom = self.domain
        n = dom.planar_n
        du = np.arange(-(n - 1), n) * dom.hu
        half_diag = 0.5 * math.hypot(dom.hu, dom.hv)
        dv = np.arange(-(n - 1), n) * dom.hv
        dz = du[:, None] + 1j * dv[None, :]
        own = _pow_kernel(dz, self.power, np.abs(dz) < half_diag)
        v0 = dom.centers_v[0]
        vsum = 2.0 * v0 + np.arange(0, 2 * n - 1) * dom.hv
        dz_m = du[:, None] + 1j * vsum[None, :]
        mirror = _pow_kernel(dz_m, self.power)
        # forward tables (flip conventions give sum_j k(j - i) and k(i + j))
        self._t_own = own[::-1, ::-1]
        self._t_mir = mirror[::-1, :]
        # transposed tables
        self._t_own_T = own
        self._t_mir_T = mirror

    def _volume_apply(self, values, transpose=False):
        dom = self.domain
        alg = dom.algebra
        nu = dom.planar_n
        dim = alg.dim
        sw = dom.sphere_w
        w = dom.cell_w

        if not transpose:
            F0, F1, Vd = _reduce_sphere(dom, values, self.conjugated)
            fields = {"g0": w[..., None] * F0, "g1": w[..., None] * F1}
            if self.conjugated:
                for d in range(dom.m):
                    fields[f"gv{d}"] = w[..., None] * Vd[d]
            conv = {}
            for name, g in fields.items():
                WP = _conv_valid(self._t_own, g)
                WQ = _conv_valid(self._t_mir, g[:, ::-1])
                conv[name] = (WP, WQ)

            def slot(idx, name):
                WP, WQ = conv[name]
                if idx == 1:
                    return 0.5 * (WP.real + WQ.real)
                if idx == 2:
                    return 0.5 * (WP.imag - WQ.imag)
                if idx == 3:
                    return 0.5 * (WP.imag + WQ.imag)
                return 0.5 * (WQ.real - WP.real)

            A = slot(1, "g0") + slot(3, "g1")
            B = slot(2, "g0") + slot(4, "g1")
            if not self.conjugated:
                out = A[:, :, None, :] + np.einsum("kab,uvb->uvka", dom.sphere_lmul, B)
            else:
                A2 = slot(1, "g0") - slot(3, "g1")
                out = A2[:, :, None, :] - np.einsum("kab,uvb->uvka", dom.sphere_lmul, B)
                csum = np.stack([slot(4, f"gv{d}") for d in range(dom.m)])
                out = out - 2.0 * np.einsum("kd,duvb->uvkb", dom.sphere_nodes, csum)
            out = self.pref * out
            if self.kind == "Piplus":
                out += self._piplus_correction(values)
            return out

        # plain real transpose of the forward map
        g = values
        Y_id = np.einsum("uvkb,k->uvb", g, np.ones(dom.n_sphere))
        Y_L = -np.einsum("kab,uvkb->uva", dom.sphere_lmul, g)

        def back(table_P, table_Q, X):
            WP = _conv_valid(table_P, X)
            WQ = _conv_valid(table_Q, X[:, ::-1])
            return WP, WQ

        def slot_back(idx, WP, WQ):
            if idx == 1:
                return 0.5 * (WP.real + WQ.real)
            if idx == 2:
                return 0.5 * (WP.imag - WQ.imag)
            if idx == 3:
                return 0.5 * (WP.imag + WQ.imag)
            return 0.5 * (WQ.real - WP.real)

        if not self.conjugated:
            WP1, WQ1 = back(self._t_own_T, self._t_mir_T, Y_id)
            WP2, WQ2 = back(self._t_own_T, self._t_mir_T, Y_L)
            planar0 = slot_back(1, WP1, WQ1) + slot_back(2, WP2, WQ2)
            planar1 = slot_back(3, WP1, WQ1) + slot_back(4, WP2, WQ2)
            out = (w[..., None] * planar0)[:, :, None, :] * sw[None, None, :, None]
            out = out - np.einsum(
                "kab,uvb,k->uvka", dom.sphere_lmul, w[..., None] * planar1, sw
            )
        else:
            WP1, WQ1 = back(self._t_own_T, self._t_mir_T, Y_id)
            WP2, WQ2 = back(self._t_own_T, self._t_mir_T, Y_L)
            planar0 = slot_back(1, WP1, WQ1) - slot_back(2, WP2, WQ2)
            planar1 = -slot_back(3, WP1, WQ1) - slot_back(4, WP2, WQ2)
            out = (w[..., None] * planar0)[:, :, None, :] * sw[None, None, :, None]
            out = out - np.einsum(
                "kab,uvb,k->uvka", dom.sphere_lmul, w[..., None] * planar1, sw
            )
            # c-term transpose
            for d in range(dom.m):
                Yd = np.einsum("uvkb,k->uvb", g, dom.sphere_nodes[:, d])
                WPd, WQd = back(self._t_own_T, self._t_mir_T, Yd)
                Zd = slot_back(4, WPd, WQd)
                out = out - 2.0 * np.einsum(
                    "uvb,k->uvkb", w[..., None] * Zd, sw * dom.sphere_nodes[:, d]
                )
        out = self.pref * out
        if self.kind == "Piplus":
            out += self._piplus_correction_transpose(g)
        return out

    def _piplus_correction(self, values):
        dom = self.domain
        omega = sphere_surface_area(dom.m)
        sw = dom.sphere_w
        own = np.einsum("uvkb,k->uvb", values, sw)
        out = np.empty_like(values)
        for kp in range(dom.n_sphere):
            g = np.einsum("ab,uvkb->uvka", dom.sphere_lmul[kp], values)
            mixed = np.einsum("kab,uvkb,k->uva", dom.sphere_lmul, g, sw)
            out[:, :, kp, :] = (own - mixed) / (2.0 * omega) - 0.5 * values[:, :, kp, :]
        return out

    def _piplus_correction_transpose(self, g):
        dom = self.domain
        omega = sphere_surface_area(dom.m)
        sw = dom.sphere_w
        gsum = g.sum(axis=2)
        out = (sw[None, None, :, None] * gsum[:, :, None, :]) / (2.0 * omega)
        for k in range(dom.n_sphere):
            h = np.einsum("ab,uvpb->uvpa", dom.sphere_lmul[k], g)  # L_k g_(j k')
            mixed = np.einsum("pab,uvpb->uva", dom.sphere_lmul, h)
            out[:, :, k, :] -= sw[k] * mixed / (2.0 * omega)
        out -= 0.5 * g
        return out

    # boundary: dense planar blocks --------------------------------------------

    def _build_boundary_blocks(self):
        dom = self.domain
        uu, vv = dom.grid()
        zt = (uu + 1j * vv).reshape(-1)
        pts = dom.boundary_pts
        zb = pts[:, 0] + 1j * pts[:, 1]
        n_tilde = dom.boundary_normals[:, 0] + 1j * dom.boundary_normals[:, 1]
        self._P = _pow_kernel(zb[None, :] - zt[:, None], self.power) * n_tilde[None, :]
        self._Q = (
            _pow_kernel(zb[None, :] - np.conj(zt)[:, None], self.power)
            * n_tilde[None, :]
        )

    def _boundary_apply(self, values):
        dom = self.domain
        dim = dom.algebra.dim
        nb = dom.boundary_pts.shape[0]
        F0, F1, Vd = _reduce_sphere(dom, values, self.conjugated)
        s = dom.boundary_w
        g0 = s[:, None] * F0.reshape(nb, dim)
        g1 = s[:, None] * F1.reshape(nb, dim)
        s1, s2, s3, s4 = direct_slots(self._P, self._Q)
        A = s1 @ g0
        B = s2 @ g0 + s4 @ g1
        C = s3 @ g1
        n = dom.planar_n
        if not self.conjugated:
            planarA = (A + C).reshape(n, n, dim)
            planarB = B.reshape(n, n, dim)
            out = planarA[:, :, None, :] + np.einsum(
                "kab,uvb->uvka", dom.sphere_lmul, planarB
            )
        else:
            planarA = (A - C).reshape(n, n, dim)
            planarB = B.reshape(n, n, dim)
            out = planarA[:, :, None, :] - np.einsum(
                "kab,uvb->uvka", dom.sphere_lmul, planarB
            )
            cs = np.stack([(s4 @ (s[:, None] * Vd[d].reshape(nb, dim))) for d in range(dom.m)])
            out = out - 2.0 * np.einsum(
                "kd,dtb->tkb", dom.sphere_nodes, cs
            ).reshape(n, n, dom.n_sphere, dim)
        return self.pref * out

    # public surface ------------------------------------------------------------

    @property
    def n_rows(self):
        return self.domain.n_planar * self.domain.n_sphere

    @property
    def n_cols(self):
        if self.is_volume:
            return self.n_rows
        return self.domain.boundary_pts.shape[0] * self.domain.n_sphere

    def apply(self, f):
        """Apply to a grid field / evaluable input; returns a GridField."""
        dom = self.domain
        if self.is_volume:
            values = sample_node_values(dom, f)
            return GridField(dom, self._volume_apply(values))
        values = f if isinstance(f, np.ndarray) else _boundary_values(dom, f)
        return GridField(dom, self._boundary_apply(values))

    def apply_values(self, values):
        if self.is_volume:
            return self._volume_apply(values)
        return self._boundary_apply(values)

    def apply_transpose(self, values):
        """Plain real transpose of apply_values (volume kinds only)."""
        if not self.is_volume:
            raise NotImplementedError("transpose apply is defined for volume kinds")
        return self._volume_apply(values, transpose=True)

    # contractual matrix-element access ------------------------------------------

    def _node_index(self, i):
        nk = self.domain.n_sphere
        n = self.domain.planar_n
        j, k = divmod(i, nk)
        iu, iv = divmod(j, n)
        return iu, iv, k

    def entry(self, i, j):
        """Clifford matrix element A[i][j] (kernel x quadrature weight x PV mask)."""
        dom = self.domain
        alg = dom.algebra
        iu, iv, kt = self._node_index(i)
        zt = complex(dom.centers_u[iu], dom.centers_v[iv])
        dir_t = dom.sphere_nodes[kt]
        if self.is_volume:
            ju, jv, ks = self._node_index(j)
            zs = complex(dom.centers_u[ju], dom.centers_v[jv])
            half_diag = 0.5 * math.hypot(dom.hu, dom.hv)
            if abs(zs - zt) < half_diag:
                P = np.zeros((1, 1), dtype=complex)
            else:
                P = _pow_kernel(np.array([[zs - zt]]), self.power)
            Q = _pow_kernel(np.array([[zs - np.conj(zt)]]), self.power)
            weight = dom.cell_w[ju, jv] * dom.sphere_w[ks]
            dir_s = dom.sphere_nodes[ks]
        else:
            nb_k = dom.n_sphere
            b, ks = divmod(j, nb_k)
            pts = dom.boundary_pts[b]
            zs = complex(pts[0], pts[1])
            n_tilde = complex(dom.boundary_normals[b, 0], dom.boundary_normals[b, 1])
            P = _pow_kernel(np.array([[zs - zt]]), self.power) * n_tilde
            Q = _pow_kernel(np.array([[zs - np.conj(zt)]]), self.power) * n_tilde
            weight = dom.boundary_w[b] * dom.sphere_w[ks]
            dir_s = dom.sphere_nodes[ks]
        s1, s2, s3, s4 = (float(s[0, 0]) for s in direct_slots(P, Q))
        It = Multivector.from_vector(alg, dir_t)
        Is = Multivector.from_vector(alg, dir_s)
        val = (
            Multivector.scalar(alg, s1)
            + s2 * It
            + s3 * Is
            + s4 * (It * Is)
        )
        if self.conjugated:
            val = val.conjugate()
        return (self.pref * weight) * val

    # binary dump ------------------------------------------------------------------

    def save(self, path):
        """Write the dense Clifford matrix: header then row-major coefficient blocks.

        Header: 8-byte kind tag, int64 m, int64 n_rows, int64 n_cols; body is
        n_rows x n_cols blocks of 2^m little-endian float64 coefficients.
        Corrections (Piplus) are not part of the matrix and are rebuilt from
        the domain on load.
        """
        if self.n_cols > self.MATERIALIZE_CAP:
            raise MemoryError(
                f"node count {self.n_cols} exceeds the materialization cap "
                f"{self.MATERIALIZE_CAP}"
            )
        dim = self.domain.algebra.dim
        with open(path, "wb") as fh:
            fh.write(struct.pack("<8s3q", self.kind.encode().ljust(8), self.domain.m,
                                 self.n_rows, self.n_cols))
            block = np.empty((self.n_cols, dim))
            for i in range(self.n_rows):
                for j in range(self.n_cols):
                    block[j] = self.entry(i, j).coeffs
                fh.write(block.astype("<f8").tobytes())

    @staticmethod
    def load(path, domain):
        """Load a dumped operator as a dense-matrix applier over `domain`."""
        with open(path, "rb") as fh:
            kind_raw, m, n_rows, n_cols = struct.unpack("<8s3q", fh.read(32))
            kind = kind_raw.decode().strip()
            if m != domain.m:
                raise ValueError("dumped operator dimension does not match domain")
            dim = domain.algebra.dim
            body = np.frombuffer(fh.read(), dtype="<f8")
        matrix = body.reshape(n_rows, n_cols, dim)
        return _LoadedOperator(kind, domain, matrix)


class _LoadedOperator:
    """Dense applier for dumped operators; matches DiscreteOperator.apply."""

    def __init__(self, kind, domain, matrix):
        self.kind = kind
        self.domain = domain
        self.matrix = matrix

    def apply(self, f):
        dom = self.domain
        values = sample_node_values(dom, f)
        nk = dom.n_sphere
        dim = dom.algebra.dim
        flat = values.reshape(-1, dim)
        L = dom.algebra.lmul_matrices(self.matrix)
        out = np.einsum("ijab,jb->ia", L, flat)
        out = out.reshape(dom.planar_n, dom.planar_n, nk, dim)
        if self.kind == "Piplus":
            op = DiscreteOperator("Piplus", dom)
            out += op._piplus_correction(values)
        return GridField(dom, out)


def assemble(kind, domain):
    """Materialize a discrete operator (factorized; see DiscreteOperator)."""
    return DiscreteOperator(kind, domain)


# -- weighted norms and inner products -----------------------------------------


def weighted_inner(f: GridField, g: GridField):
    """Clifford-valued inner product sum of conj(f) g against dmu weights."""
    if f.domain is not g.domain:
        raise ValueError("fields live on different domains")
    dom = f.domain
    mu = dom.node_dmu_weights()
    alg = dom.algebra
    prod = alg.mul(alg.conj(f.values), g.values)
    return Multivector(alg, np.einsum("uvkb,uvk->b", prod, mu))


def lp_norm(f: GridField, p=2.0, measure="dmu"):
    """L^p norm of a grid field against the dV or dmu node weights."""
    if p < 1.0:
        raise ValueError("p must be >= 1")
    dom = f.domain
    w = dom.node_dmu_weights() if measure == "dmu" else dom.node_dv_weights()
    mags = np.linalg.norm(f.values, axis=-1)
    return float(np.sum(w * mags**p) ** (1.0 / p))


def _mu_norm2(domain, values):
    mu = domain.node_dmu_weights()
    return float(np.einsum("uvkb,uvk->", values**2, mu))


def operator_norm(op, tol=1e-8, max_iter=10_000, seed=0, method="lanczos", block=8):
    """Largest singular value of the real-linearized operator in L^2(dmu).

    The default path runs Lanczos (scipy ARPACK) on the symmetrized weighted
    operator, which handles the tightly clustered top spectrum of
    Beurling-type operators in a few dozen applies; method="power" runs the
    plain block power iteration on A*A with the same `tol` on the Rayleigh
    quotient (block=1 is the classic single-vector iteration).  Both paths
    are deterministic for a fixed seed.
    """
    if method == "lanczos":
        return _operator_norm_lanczos(op, tol, max_iter, seed)
    return _operator_norm_power(op, tol, max_iter, seed, block)


def _operator_norm_lanczos(op, tol, max_iter, seed):
    from scipy.sparse.linalg import LinearOperator, eigsh

    dom = op.domain
    mu = dom.node_dmu_weights()
    active = mu > 0.0
    shape = (dom.planar_n, dom.planar_n, dom.n_sphere, dom.algebra.dim)
    n = int(np.prod(shape))
    w_flat = np.repeat(mu.reshape(-1), dom.algebra.dim)
    sq = np.sqrt(w_flat)
    inv_sq = np.where(sq > 0, 1.0 / np.where(sq > 0, sq, 1.0), 0.0)
    inv_mu_flat = inv_sq**2

    def sym(x):
        v = (inv_sq * x).reshape(shape)
        y = op.apply_values(v)
        z = op.apply_transpose(mu[..., None] * y).reshape(-1)
        return sq * (inv_mu_flat * z)

    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(n) * (sq > 0)
    if not np.any(v0) or np.linalg.norm(sym(v0)) == 0.0:
        return 0.0
    lam = eigsh(
        LinearOperator((n, n), matvec=sym),
        k=1,
        which="LA",
        v0=v0,
        tol=tol,
        maxiter=max_iter,
        return_eigenvectors=False,
    )[0]
    return math.sqrt(max(lam, 0.0))


def _operator_norm_power(op, tol, max_iter, seed, block):
    dom = op.domain
    mu = dom.node_dmu_weights()
    active = mu > 0.0
    inv_mu = np.where(active, 1.0 / np.where(active, mu, 1.0), 0.0)
    shape = (dom.planar_n, dom.planar_n, dom.n_sphere, dom.algebra.dim)
    n = int(np.prod(shape))
    block = max(1, min(block, n))
    rng = np.random.default_rng(seed)
    w_flat = np.repeat(mu.reshape(-1), dom.algebra.dim)
    active_flat = np.repeat(active.reshape(-1), dom.algebra.dim)

    def orthonormalize(V):
        # mu-weighted thin QR; drops numerically dependent columns
        B = np.sqrt(w_flat)[:, None] * V
        q, r = np.linalg.qr(B)
        keep = np.abs(np.diag(r)) > 1e-300
        q = q[:, keep]
        return np.where(w_flat[:, None] > 0, q / np.sqrt(w_flat)[:, None], 0.0)

    V = rng.standard_normal((n, block)) * active_flat[:, None]
    V = orthonormalize(V)
    if V.shape[1] == 0:
        return 0.0
    lam_prev = None
    lam = 0.0
    for _ in range(max_iter):
        Y = np.stack(
            [op.apply_values(V[:, j].reshape(shape)).reshape(-1) for j in range(V.shape[1])],
            axis=1,
        )
        gram = (np.sqrt(w_flat)[:, None] * Y).T @ (np.sqrt(w_flat)[:, None] * Y)
        lam = float(np.linalg.eigvalsh(gram)[-1])
        if lam == 0.0:
            return 0.0
        if lam_prev is not None and abs(lam - lam_prev) <= tol * max(lam, 1e-300):
            return math.sqrt(lam)
        lam_prev = lam
        Z = np.stack(
            [
                (
                    inv_mu[..., None]
                    * op.apply_transpose((mu[..., None] * Y[:, j].reshape(shape)))
                ).reshape(-1)
                for j in range(Y.shape[1])
            ],
            axis=1,
        )
        Z *= active_flat[:, None]
        V = orthonormalize(Z)
        if V.shape[1] == 0:
            return 0.0
    raise ConvergenceError(
        f"power iteration did not settle in {max_iter} steps", last_value=math.sqrt(lam)
    )


class ScaledIdentityOperator:
    """c times the identity on a domain's grid; test helper for operator_norm."""

    def __init__(self, domain, scale=1.0):
        self.domain = domain
        self.scale = float(scale)

    def apply_values(self, values):
        return self.scale * values

    def apply_transpose(self, values):
        return self.scale * values


# -- theoretical norm constant ---------------------------------------------------


def cprime_integrand(gamma):
    """(ln^2(1/|cos gamma|) + pi^2/4)^2, the unit-circle symbol integrand."""
    g = np.abs(np.cos(gamma))
    out = np.full_like(np.asarray(gamma, dtype=float), np.inf)
    ok = g > 0.0
    out[ok] = (np.log(1.0 / g[ok]) ** 2 + np.pi**2 / 4.0) ** 2
    return out


@lru_cache(maxsize=1)
def cprime_constant():
    """Square root of the circle integral of the symbol bound.

    The integrand has integrable log^4 singularities at gamma = pi/2 and
    3 pi/2; the quarter-period integral is split there and the singular end
    is handled with an exponential substitution before Gauss panels.
    """
    gx, gw = np.polynomial.legendre.leggauss(64)

    def panels(func, a, b, n):
        edges = np.linspace(a, b, n + 1)
        total = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
            total += half * np.sum(gw * func(mid + half * gx))
        return total

    def f(s):
        # distance s from the singular end: ln|cos(pi/2 - s)| = ln sin s
        return (np.log(np.sin(s)) ** 2 + np.pi**2 / 4.0) ** 2

    delta = 0.1
    smooth = panels(f, delta, math.pi / 2.0, 16)
    # s = delta * exp(-t) maps (0, delta] to t in [0, inf)
    tail = panels(lambda t: f(delta * np.exp(-t)) * delta * np.exp(-t), 0.0, 60.0, 24)
    quarter = smooth + tail
    return math.sqrt(4.0 * quarter)


def theoretical_C(p, m):
    """Norm bound (4 (2 pi)^(1/4) sqrt(C') / (omega_(m-1) pi))^(1/p)."""
    if p <= 1.0:
        raise ValueError("the bound is defined for p > 1")
    cp = cprime_constant()
    base = 4.0 * (2.0 * math.pi) ** 0.25 * math.sqrt(cp) / (
        sphere_surface_area(m) * math.pi
    )
    return base ** (1.0 / p)


# -- weighted adjoint of the derivative ------------------------------------------


def adjoint_G_star(field: GridField, cell):
    """Formal dmu-adjoint of the conjugated derivative: -G + (m-1) I/v at a cell."""
    from .functions import apply_G_fd

    iu, iv, k = cell
    dom = field.domain
    alg = dom.algebra
    g = apply_G_fd(field, cell, conjugated=False)
    v = dom.centers_v[iv]
    corr = alg.mul(dom.sphere_mv[k], field.values[iu, iv, k]) * ((dom.m - 1) / v)
    return Multivector(alg, -g.coeffs + corr)
