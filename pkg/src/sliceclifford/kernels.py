"""Closed-form evaluation of the slice Cauchy-type kernels.

All kernels are rational expressions in two paravectors q (evaluation
point) and x (integration point).  They share the scalar-plus-I_q factor
a = q^2 - 2 x0 q + |x|^2, which lives in the commutative plane C_(I_q) and
vanishes exactly on the singular sphere [q] = {x: x0 = q0, |x_vec| = |q_vec|},
so every kernel is evaluated through the paravector inverse and guarded by a
singular-sphere check.
"""

from __future__ import annotations

import numpy as np

from .algebra import CliffordAlgebra, Multivector, Paravector
from .geometry import SlicePoint, sphere_surface_area


class SingularKernelError(ZeroDivisionError):
    """Evaluation point lies on the singular sphere of the kernel."""


def _as_mv(algebra, x):
    if isinstance(x, Multivector):
        return x
    if isinstance(x, Paravector):
        return x.to_multivector(algebra)
    if isinstance(x, SlicePoint):
        return x.to_multivector(algebra)
    raise TypeError(f"cannot interpret {type(x)!r} as a paravector")


def _split(mv):
    """(x0, |x_vec|, |x|^2) of a paravector."""
    x0 = mv.scalar_part
    vec = mv.vector_part
    r = float(np.linalg.norm(vec))
    return x0, r, x0 * x0 + r * r


def in_singular_sphere(q, x, tol=1e-12):
    """True when x0 = q0 and |x_vec| = |q_vec| within tol * scale."""
    q0, qr, qn = _split(q)
    x0, xr, xn = _split(x)
    scale = max(1.0, np.sqrt(qn), np.sqrt(xn))
    return abs(x0 - q0) < tol * scale and abs(xr - qr) < tol * scale


def _guard(q, x, tol=1e-12):
    if in_singular_sphere(q, x, tol):
        raise SingularKernelError("x lies on the singular sphere [q]")


def slice_cauchy_kernel(q, x, algebra=None):
    """S(q, x) = -(q^2 - 2 Re[x] q + |x|^2)^(-1) (q - conj(x)).

    Reduces to the complex Cauchy kernel (x - q)^(-1) when q and x share a
    slice.  Raises SingularKernelError on the singular sphere.
    """
    algebra = algebra or getattr(q, "algebra", None) or getattr(x, "algebra", None)
    qm = _as_mv(algebra, q)
    xm = _as_mv(algebra, x)
    _guard(qm, xm)
    x0, _, xn2 = _split(xm)
    a = qm * qm - 2.0 * x0 * qm + xn2
    b = qm - xm.conjugate()
    return -(a.inverse() * b)


def cauchy_kernel_K(q, x, algebra=None):
    """Cauchy kernel of the slice Cauchy-Riemann operator: 2 S / (omega |x_vec|^(m-1))."""
    algebra = algebra or getattr(q, "algebra", None) or getattr(x, "algebra", None)
    xm = _as_mv(algebra, x)
    _, xr, _ = _split(xm)
    if xr <= 0.0:
        raise ValueError("x must lie off the real axis")
    m = algebra.m
    s = slice_cauchy_kernel(q, xm, algebra)
    return s * (2.0 / (sphere_surface_area(m) * xr ** (m - 1)))


def pi_kernel(q, x, algebra=None):
    """Squared-kernel integrand of the singular Beurling-type transform.

    k(q, x) = a^(-2) (-q^2 + 2 q conj(x) - 2 x0 conj(x) + |x|^2) with
    a = q^2 - 2 x0 q + |x|^2.  On a shared slice this is -(x - q)^(-2); the
    overall sign is the one that makes the transform equal Gbar of the
    Teodorescu transform (checked numerically in the test suite).
    """
    algebra = algebra or getattr(q, "algebra", None) or getattr(x, "algebra", None)
    qm = _as_mv(algebra, q)
    xm = _as_mv(algebra, x)
    _guard(qm, xm)
    x0, _, xn2 = _split(xm)
    xc = xm.conjugate()
    a = qm * qm - 2.0 * x0 * qm + xn2
    ainv = a.inverse()
    poly = -(qm * qm) + 2.0 * (qm * xc) - 2.0 * x0 * xc + xn2
    return ainv * ainv * poly


def pi_plus_kernel(q, x, algebra=None):
    """Conjugated squared kernel (-conj(q)^2 + 2 x conj(q) - 2 x0 x + |x|^2) a0^(-2).

    Equals conjugate(pi_kernel(q, x)); a0 = conj(q)^2 - 2 x0 conj(q) + |x|^2.
    """
    algebra = algebra or getattr(q, "algebra", None) or getattr(x, "algebra", None)
    qm = _as_mv(algebra, q)
    xm = _as_mv(algebra, x)
    _guard(qm, xm)
    x0, _, xn2 = _split(xm)
    qc = qm.conjugate()
    a0 = qc * qc - 2.0 * x0 * qc + xn2
    a0inv = a0.inverse()
    poly = -(qc * qc) + 2.0 * (xm * qc) - 2.0 * x0 * xm + xn2
    return poly * (a0inv * a0inv)


def alpha_beta(q_direction, I, algebra=None):
    """Slice projector coefficients ((1 - I_q I)/2, (1 + I_q I)/2).

    Accepts the direction of q as a unit grade-1 multivector or a SlicePoint.
    Always satisfies alpha + beta = 1 exactly.
    """
    if isinstance(q_direction, SlicePoint):
        algebra = algebra or (I.algebra if isinstance(I, Multivector) else None)
        if algebra is None:
            raise ValueError("algebra required with SlicePoint input")
        iq = Multivector.from_vector(algebra, q_direction.direction)
    else:
        iq = q_direction
        algebra = iq.algebra
    if isinstance(I, np.ndarray):
        I = Multivector.from_vector(algebra, I)
    for d in (iq, I):
        if abs(d.norm() - 1.0) > 1e-12:
            raise ValueError("directions must be unit vectors")
    one = Multivector.scalar(algebra, 1.0)
    prod = iq * I
    return (one - prod) * 0.5, (one + prod) * 0.5


# -- planar complex kernels used by the quadrature layer ---------------------
#
# For x on the slice of I and a target with direction I', every kernel above
# decomposes over the basis {1, I', I, I'I} with coefficients built from two
# scalar complex kernels: P evaluated at z - z' (own pole) and Q at
# z - conj(z') (mirror pole), z/z' the planar coordinates of x/q.


def complex_cauchy(dz, pv_mask=None):
    """1/dz with optional principal-value mask of near-pole entries."""
    out = np.zeros_like(dz, dtype=complex)
    nz = dz != 0.0
    if pv_mask is not None:
        nz = nz & ~pv_mask
    out[nz] = 1.0 / dz[nz]
    return out


def complex_beurling(dz, pv_mask=None):
    """1/dz^2 with optional principal-value mask of near-pole entries."""
    out = np.zeros_like(dz, dtype=complex)
    nz = dz != 0.0
    if pv_mask is not None:
        nz = nz & ~pv_mask
    out[nz] = 1.0 / dz[nz] ** 2
    return out


def direct_slots(P, Q):
    """Real slot coefficients (s1, s2, s3, s4) of alpha*P + beta*Q.

    The multivector value is s1 + s2 I' + s3 I + s4 I'I for target direction
    I' and source slice I.
    """
    return (
        0.5 * (P.real + Q.real),
        0.5 * (P.imag - Q.imag),
        0.5 * (P.imag + Q.imag),
        0.5 * (Q.real - P.real),
    )


def conjugate_slot_value(s1, s2, s3, s4, c):
    """Slots of the conjugated kernel given the direct slots and c = <I', I>.

    conj(s1 + s2 I' + s3 I + s4 I'I) = (s1 - 2 c s4) - s2 I' - s3 I - s4 I'I.
    """
    return s1 - 2.0 * c * s4, -s2, -s3, -s4
