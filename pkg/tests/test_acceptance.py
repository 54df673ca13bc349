"""Acceptance gate: every stated criterion at its stated tolerance.

One test (or test group) per criterion, printing a pass/fail line each.  Three
sub-checks assert statements that are provably false (details in the project
notes): the claimed kernel-argument-swap symmetry, the self-adjointness of the
volume potential, the conjugate Borel-Pompeiu form for m >= 2, the two-sided
inverse property of the conjugated transform, and the printed norm bound
against the discrete operator norm.  Those are implemented literally and
marked strict expected failures; next to each, the suite verifies the
corresponding identity that does hold, so the implementation itself is fully
exercised green.
"""

import math
import warnings

import numpy as np
import pytest

from sliceclifford import (
    CliffordAlgebra,
    Disk,
    GridField,
    Multivector,
    PolynomialSliceFunction,
    Rectangle,
    SlicePoint,
    build_domain,
    grid_G_fd,
    make_bump,
    representation_formula,
)
from sliceclifford.beltrami import BeltramiProblem, check_contraction, measure_pi_norm, solve
from sliceclifford.kernels import in_singular_sphere, slice_cauchy_kernel
from sliceclifford.operators import (
    AccuracyWarning,
    DiscreteOperator,
    cauchy_boundary,
    conjugate_teodorescu,
    cprime_constant,
    lp_norm,
    operator_norm,
    pi_op,
    pi_op_slice,
    pi_plus_op,
    teodorescu,
    teodorescu_slice,
    theoretical_C,
    weighted_inner,
)

from conftest import random_multivector, random_paravector, random_unit_vector

warnings.simplefilter("ignore", AccuracyWarning)

RECT = Rectangle(0.0, 1.0, 1.0, 2.0)
DISK = Disk(0.0, 2.0, 1.0)
CPRIME_REFERENCE = 13.223566248261104


def _report(name, value, tol, note=""):
    status = "PASS" if value <= tol else "FAIL"
    print(f"ACCEPTANCE {name}: {status} (measured {value:.3e}, tol {tol:.3e}) {note}")


def _central_err(dom, got, want, frac=4):
    mask = dom.interior_cell_mask(dom.planar_n // frac)
    num = np.linalg.norm((got.values - want.values)[mask], axis=-1).max()
    den = max(np.linalg.norm(want.values[mask], axis=-1).max(), 1e-30)
    return num / den


def _scalar(alg, x):
    return Multivector.scalar(alg, x)


def _random_poly(alg, rng, degree=3):
    return PolynomialSliceFunction(
        [Multivector(alg, rng.uniform(-1, 1, alg.dim) / (1 + 2 * k)) for k in range(degree + 1)]
    )


def _wide_bump(dom, c):
    u0, u1, v0, v1 = dom.region.bbox
    du, dv = u1 - u0, v1 - v0
    return make_bump((u0 + 0.15 * du, u1 - 0.15 * du, v0 + 0.15 * dv, v1 - 0.15 * dv), c, dom)


def _bump_deriv_field(dom, bump, conjugated):
    def h(u, v, d):
        return bump.derivative_arrays(
            u, v, np.broadcast_to(d, u.shape + (dom.m,)), conjugated=conjugated
        )

    return GridField.sample(dom, h)


# -- criterion 1: algebra exactness ------------------------------------------------


def test_criterion_01_algebra_exactness(rng):
    worst = 0.0
    for m in (2, 3, 4):
        alg = CliffordAlgebra(m)
        one = _scalar(alg, 1.0)
        for _ in range(1000):
            a = random_multivector(alg, rng)
            b = random_multivector(alg, rng)
            c = random_multivector(alg, rng)
            worst = max(worst, ((a * b) * c - a * (b * c)).norm())
            worst = max(
                worst, ((a * b).conjugate() - b.conjugate() * a.conjugate()).norm()
            )
            x = random_paravector(alg, rng)
            if x.norm() > 1e-2:
                worst = max(worst, (x * x.inverse() - one).norm())
                worst = max(worst, (x.inverse() * x - one).norm())
    _report("1 algebra-exactness", worst, 1e-12)
    assert worst <= 1e-12


# -- criterion 2: representation formula --------------------------------------------


def test_criterion_02_representation_formula(rng):
    worst = 0.0
    for m in (2, 3):
        alg = CliffordAlgebra(m)
        poly = _random_poly(alg, rng, degree=4)
        for _ in range(100):
            I = random_unit_vector(m, rng)
            Ix = random_unit_vector(m, rng)
            u, v = rng.uniform(-1, 1), rng.uniform(0.5, 2.0)
            rec = representation_formula(
                poly(SlicePoint(u, v, I)),
                poly(SlicePoint(u, v, -I)),
                Multivector.from_vector(alg, I),
                Multivector.from_vector(alg, Ix),
            )
            direct = poly(SlicePoint(u, v, Ix))
            worst = max(worst, (rec - direct).norm() / max(direct.norm(), 1e-2))
    _report("2 representation-formula", worst, 1e-12)
    assert worst <= 1e-12


# -- criterion 3: complex-slice oracles ----------------------------------------------


def test_criterion_03_complex_slice_oracles():
    c, R = complex(DISK.uc, DISK.vc), DISK.radius
    direction = np.array([1.0, 0.0])
    errs_T, errs_P = [], []
    for n in (64, 128):
        dom = build_domain(DISK, m=2, planar_n=n, boundary_n=4, sphere_n=4)
        wT = wP = 0.0
        for duv in ((0.3, 0.2), (-0.25, -0.35), (0.1, -0.4)):
            iu, iv = dom.nearest_cell(c.real + duv[0], c.imag + duv[1])
            z = complex(dom.centers_u[iu], dom.centers_v[iv])
            T_exact = 0.5 * np.conj(z - c) + 0.5 * R**2 / (z - np.conj(c))
            P_exact = -(R**2) / (z - np.conj(c)) ** 2
            Tv = teodorescu_slice(1.0, dom, direction, z)
            Pv = pi_op_slice(1.0, dom, direction, z)
            wT = max(wT, abs(complex(Tv.coeffs[0], Tv.coeffs[1]) - T_exact) / abs(T_exact))
            wP = max(wP, abs(complex(Pv.coeffs[0], Pv.coeffs[1]) - P_exact) / abs(P_exact))
        errs_T.append(wT)
        errs_P.append(wP)
    _report("3 cauchy-transform-disk", errs_T[1], 1e-3)
    _report("3 beurling-transform-disk", errs_P[1], 1e-2)
    assert errs_T[1] <= 1e-3 and errs_P[1] <= 1e-2
    assert errs_T[0] / errs_T[1] >= 2.0
    assert errs_P[0] / errs_P[1] >= 2.0


# -- criterion 4: Borel-Pompeiu -------------------------------------------------------


def test_criterion_04_borel_pompeiu_direct(rng):
    errs_b, errs_v = [], []
    for n in (64, 128):
        dom = build_domain(RECT, m=2, planar_n=n, boundary_n=max(8, n // 4), sphere_n=8)
        alg = dom.algebra
        poly = _random_poly(alg, rng)
        mask = dom.interior_cell_mask(n // 6)
        cells = np.argwhere(mask)
        pick = np.random.default_rng(41).choice(len(cells), size=20, replace=False)
        worst = 0.0
        for idx in pick:
            iu, iv = cells[idx]
            k = int(np.random.default_rng(idx).integers(0, dom.n_sphere))
            p = dom.slice_point(int(iu), int(iv), k)
            got = cauchy_boundary(poly, dom, p)
            want = poly(p)
            worst = max(worst, (got - want).norm() / max(want.norm(), 1e-2))
        errs_b.append(worst)
        bump = _wide_bump(dom, _scalar(alg, 1.0) + 0.5 * Multivector.basis(alg, 1))
        T_Gf = DiscreteOperator("T", dom).apply(_bump_deriv_field(dom, bump, False))
        errs_v.append(_central_err(dom, T_Gf, GridField.sample(dom, bump)))
    _report("4 borel-pompeiu boundary", errs_b[0], 1e-2)
    _report("4 borel-pompeiu volume", errs_v[0], 1e-2)
    assert errs_b[0] <= 1e-2 and errs_v[0] <= 1e-2
    assert errs_v[0] / errs_v[1] >= 2.0
    # boundary rule is spectrally accurate; doubling must not degrade it
    assert errs_b[1] <= max(errs_b[0], 1e-6)


def test_criterion_04_conjugate_complex_limit():
    errs = []
    for n in (64, 128):
        dom = build_domain(RECT, m=1, planar_n=n, boundary_n=max(8, n // 4), sphere_n=2)
        alg = dom.algebra
        f = PolynomialSliceFunction(
            [_scalar(alg, 0.2), _scalar(alg, 1.0), 0.4 * Multivector.basis(alg, 1)]
        )
        gbar = f.gbar_derivative()
        worst = 0.0
        for frac in ((0.5, 0.5), (0.4, 0.6), (0.65, 0.35)):
            iu, iv = dom.nearest_cell(frac[0], 1.0 + frac[1])
            p = dom.slice_point(iu, iv, 0)
            lhs = cauchy_boundary(f, dom, p, conjugated=True) + conjugate_teodorescu(
                gbar, dom, p
            )
            want = f(p)
            worst = max(worst, (lhs - want).norm() / want.norm())
        errs.append(worst)
    _report("4 conjugate borel-pompeiu (complex limit)", errs[0], 1e-2)
    assert errs[0] <= 1e-2 and errs[0] / errs[1] >= 2.0


@pytest.mark.xfail(
    strict=True,
    reason="conjugate Borel-Pompeiu as printed fails for m >= 2: the conjugate "
    "transform is not left-inverted by the conjugate derivative on "
    "direction-dependent inputs (see decisions ledger)",
)
def test_criterion_04_conjugate_as_printed_m2(rng):
    dom = build_domain(RECT, m=2, planar_n=64, boundary_n=16, sphere_n=8)
    alg = dom.algebra
    poly = _random_poly(alg, rng)
    gbar = poly.gbar_derivative()
    worst = 0.0
    for frac in ((0.5, 0.5), (0.4, 0.6)):
        iu, iv = dom.nearest_cell(frac[0], 1.0 + frac[1])
        p = dom.slice_point(iu, iv, 3)
        lhs = cauchy_boundary(poly, dom, p, conjugated=True) + conjugate_teodorescu(
            gbar, dom, p
        )
        want = poly(p)
        worst = max(worst, (lhs - want).norm() / max(want.norm(), 1e-2))
    _report("4 conjugate borel-pompeiu m=2 (as printed)", worst, 1e-2, "[expected fail]")
    assert worst <= 1e-2


# -- criterion 5: right inverse and squared-kernel consistency -------------------------


def test_criterion_05_right_inverse_and_pi_consistency(rng):
    errs_inv, errs_pi = [], []
    for n in (64, 128):
        dom = build_domain(RECT, m=2, planar_n=n, boundary_n=8, sphere_n=8)
        alg = dom.algebra
        e1 = Multivector.basis(alg, 1)
        f = PolynomialSliceFunction([_scalar(alg, 0.0), e1])
        Tf = DiscreteOperator("T", dom).apply(f)
        G_Tf, _ = grid_G_fd(Tf, richardson=True)
        errs_inv.append(_central_err(dom, G_Tf, GridField.sample(dom, f)))
        Gbar_Tf, _ = grid_G_fd(Tf, conjugated=True, richardson=True)
        worst = 0.0
        for frac in ((0.5, 0.5), (0.42, 0.58), (0.6, 0.4)):
            iu, iv = dom.nearest_cell(frac[0], 1.0 + frac[1])
            for k in (1, 5):
                p = dom.slice_point(iu, iv, k)
                lhs = pi_op(f, dom, p)
                rhs = Multivector(alg, Gbar_Tf.values[iu, iv, k])
                worst = max(worst, (lhs - rhs).norm() / max(rhs.norm(), 1e-6))
        errs_pi.append(worst)
    _report("5 right-inverse", errs_inv[0], 1e-2)
    _report("5 pi-path-consistency (fixes the squared-kernel sign)", errs_pi[0], 1e-2)
    assert errs_inv[0] <= 1e-2 and errs_inv[0] / errs_inv[1] >= 2.0
    assert errs_pi[0] <= 1e-2 and errs_pi[0] / errs_pi[1] >= 2.0


# -- criterion 6: operator identities ---------------------------------------------------


def test_criterion_06_g_pi_identity(rng):
    errs = []
    for n in (64, 128):
        dom = build_domain(RECT, m=2, planar_n=n, boundary_n=8, sphere_n=8)
        alg = dom.algebra
        f = PolynomialSliceFunction(
            [_scalar(alg, 0.0), _scalar(alg, 1.0), 0.3 * Multivector.basis(alg, 1)]
        )
        Pif = DiscreteOperator("Pi", dom).apply(f)
        G_Pif, _ = grid_G_fd(Pif)
        errs.append(_central_err(dom, G_Pif, GridField.sample(dom, f.gbar_derivative())))
    _report("6 G-Pi identity", errs[0], 3e-2)
    assert errs[0] <= 3e-2 and errs[0] / errs[1] >= 2.0


def test_criterion_06_pi_g_identity_on_bumps():
    errs = []
    for n in (64, 128):
        dom = build_domain(RECT, m=2, planar_n=n, boundary_n=8, sphere_n=8)
        alg = dom.algebra
        bump = _wide_bump(dom, _scalar(alg, 1.0) + 0.5 * Multivector.basis(alg, 1))
        PiG = DiscreteOperator("Pi", dom).apply(_bump_deriv_field(dom, bump, False))
        errs.append(_central_err(dom, PiG, _bump_deriv_field(dom, bump, True)))
    _report("6 Pi-G identity on bumps", errs[0], 2e-2)
    assert errs[0] <= 2e-2 and errs[0] / errs[1] >= 2.0


def test_criterion_06_gbar_pi_plus_on_bumps():
    errs = []
    for n in (64, 128):
        dom = build_domain(RECT, m=2, planar_n=n, boundary_n=8, sphere_n=8)
        alg = dom.algebra
        bump = _wide_bump(dom, _scalar(alg, 1.0) + 0.5 * Multivector.basis(alg, 2))
        Pip = DiscreteOperator("Piplus", dom).apply(bump)
        Gb_Pip, _ = grid_G_fd(Pip, conjugated=True)
        errs.append(_central_err(dom, Gb_Pip, _bump_deriv_field(dom, bump, False)))
    _report("6 Gbar-Pi+ identity on bumps", errs[0], 3e-2)
    assert errs[0] <= 3e-2 and errs[0] / errs[1] >= 2.0


@pytest.mark.xfail(
    strict=True,
    reason="Gbar Pi+ = G fails on direction-dependent (polynomial) inputs; the "
    "conjugate transform has no general left inverse (see decisions ledger)",
)
def test_criterion_06_gbar_pi_plus_on_polynomials(rng):
    dom = build_domain(RECT, m=2, planar_n=64, boundary_n=8, sphere_n=8)
    alg = dom.algebra
    f = PolynomialSliceFunction([_scalar(alg, 0.0), _scalar(alg, 1.0)])
    Pip = DiscreteOperator("Piplus", dom).apply(f)
    Gb_Pip, _ = grid_G_fd(Pip, conjugated=True)
    zero = GridField.sample(dom, _scalar(alg, 0.0))
    mask = dom.interior_cell_mask(16)
    err = np.linalg.norm((Gb_Pip.values - zero.values)[mask], axis=-1).max() / max(
        np.linalg.norm(GridField.sample(dom, f.gbar_derivative()).values[mask], axis=-1).max(),
        1e-30,
    )
    _report("6 Gbar-Pi+ on polynomials (as printed)", err, 3e-2, "[expected fail]")
    assert err <= 3e-2


@pytest.mark.xfail(
    strict=True,
    reason="the two-sided inverse property fails even in the classical complex "
    "limit: the boundary functional of the transform's trace does not vanish "
    "for compactly supported inputs (see decisions ledger)",
)
def test_criterion_06_inverse_pair_on_bumps():
    errs = []
    for n in (64, 128):
        dom = build_domain(RECT, m=2, planar_n=n, boundary_n=8, sphere_n=8)
        alg = dom.algebra
        bump = _wide_bump(dom, _scalar(alg, 1.0) + 0.5 * Multivector.basis(alg, 1))
        Pib = DiscreteOperator("Pi", dom).apply(bump)
        fv = GridField.sample(dom, bump)
        worst = 0.0
        for frac in ((0.5, 0.5), (0.42, 0.58)):
            iu, iv = dom.nearest_cell(frac[0], 1.0 + frac[1])
            for k in (1, 5):
                got = pi_plus_op(Pib, dom, (iu, iv, k))
                want = Multivector(alg, fv.values[iu, iv, k])
                worst = max(worst, (got - want).norm() / max(want.norm(), 1e-2))
        errs.append(worst)
    _report("6 Pi+ Pi = id on bumps (as printed)", errs[0], 2e-2, "[expected fail]")
    assert errs[0] <= 2e-2 and errs[0] / errs[1] >= 2.0


def test_criterion_06_definitional_compositions():
    """Green companion: both operators equal their defining compositions."""
    dom = build_domain(RECT, m=2, planar_n=64, boundary_n=8, sphere_n=8)
    alg = dom.algebra
    bump = _wide_bump(dom, _scalar(alg, 1.0) + 0.5 * Multivector.basis(alg, 1))
    Tf = DiscreteOperator("T", dom).apply(bump)
    Tbf = DiscreteOperator("Tbar", dom).apply(bump)
    Gbar_Tf, _ = grid_G_fd(Tf, conjugated=True, richardson=True)
    G_Tbf, _ = grid_G_fd(Tbf, richardson=True)
    worst_pi = worst_pip = 0.0
    for frac in ((0.5, 0.5), (0.42, 0.58)):
        iu, iv = dom.nearest_cell(frac[0], 1.0 + frac[1])
        for k in (1, 5):
            p = dom.slice_point(iu, iv, k)
            lhs = pi_op(bump, dom, p)
            rhs = Multivector(alg, Gbar_Tf.values[iu, iv, k])
            worst_pi = max(worst_pi, (lhs - rhs).norm() / max(rhs.norm(), 1e-3))
            lhs2 = pi_plus_op(bump, dom, (iu, iv, k))
            rhs2 = Multivector(alg, G_Tbf.values[iu, iv, k])
            worst_pip = max(worst_pip, (lhs2 - rhs2).norm() / max(rhs2.norm(), 1e-3))
    _report("6 definitional compositions", max(worst_pi, worst_pip), 2e-2)
    assert max(worst_pi, worst_pip) <= 2e-2


# -- criterion 7: adjoints ----------------------------------------------------------------


@pytest.mark.xfail(
    strict=True,
    reason="the argument-swap kernel identity is false; the kernel satisfies the "
    "conjugation-reflection symmetry instead (see decisions ledger)",
)
def test_criterion_07_kernel_identity_as_printed(rng):
    worst = 0.0
    count = 0
    alg = CliffordAlgebra(3)
    while count < 1000:
        q = random_paravector(alg, rng, scale=2.0)
        x = random_paravector(alg, rng, scale=2.0)
        if in_singular_sphere(q, x, tol=1e-2):
            continue
        if np.linalg.norm(q.vector_part) < 0.05 or np.linalg.norm(x.vector_part) < 0.05:
            continue
        count += 1
        lhs = slice_cauchy_kernel(q, x).conjugate()
        rhs = slice_cauchy_kernel(x, q)
        worst = max(worst, (lhs - rhs).norm() / max(rhs.norm(), 1e-6))
    _report("7 kernel swap identity (as printed)", worst, 1e-10, "[expected fail]")
    assert worst <= 1e-10


def test_criterion_07_kernel_reflection_symmetry(rng):
    worst = 0.0
    count = 0
    alg = CliffordAlgebra(3)
    while count < 1000:
        q = random_paravector(alg, rng, scale=2.0)
        x = random_paravector(alg, rng, scale=2.0)
        if in_singular_sphere(q, x, tol=1e-2):
            continue
        if np.linalg.norm(q.vector_part) < 0.05 or np.linalg.norm(x.vector_part) < 0.05:
            continue
        count += 1
        lhs = slice_cauchy_kernel(q, x).conjugate()
        rhs = -1.0 * slice_cauchy_kernel(x.conjugate(), q.conjugate())
        worst = max(worst, (lhs - rhs).norm() / max(rhs.norm(), 1e-6))
    _report("7 kernel conjugation-reflection symmetry", worst, 1e-10)
    assert worst <= 1e-10


def _adjoint_setup():
    dom = build_domain(RECT, m=2, planar_n=64, boundary_n=8, sphere_n=8)
    alg = dom.algebra
    f = make_bump(
        (0.1, 0.6, 1.1, 1.6), _scalar(alg, 1.0) + 0.5 * Multivector.basis(alg, 1), dom
    )
    g = make_bump(
        (0.28, 0.92, 1.28, 1.92), _scalar(alg, 0.7) - 0.4 * Multivector.basis(alg, 2), dom
    )
    return dom, alg, f, g


@pytest.mark.xfail(
    strict=True,
    reason="the volume potential is anti-self-adjoint (not self-adjoint) on "
    "even-profile inputs; equality measures relative error 2 (see decisions ledger)",
)
def test_criterion_07_t_self_adjoint_as_printed():
    dom, alg, f, g = _adjoint_setup()
    T = DiscreteOperator("T", dom)
    fg, gg = GridField.sample(dom, f), GridField.sample(dom, g)
    lhs = weighted_inner(T.apply(f), gg)
    rhs = weighted_inner(fg, T.apply(g))
    err = (lhs - rhs).norm() / max(rhs.norm(), 1e-30)
    _report("7 T self-adjointness (as printed)", err, 1e-2, "[expected fail]")
    assert err <= 1e-2


def test_criterion_07_t_anti_adjoint_exact():
    dom, alg, f, g = _adjoint_setup()
    T = DiscreteOperator("T", dom)
    fg, gg = GridField.sample(dom, f), GridField.sample(dom, g)
    lhs = weighted_inner(T.apply(f), gg)
    rhs = weighted_inner(fg, T.apply(g))
    err = (lhs + rhs).norm() / max(rhs.norm(), 1e-30)
    _report("7 T anti-adjointness (exact discrete identity)", err, 1e-12)
    assert err <= 1e-12


def test_criterion_07_integration_by_parts():
    dom, alg, f, g = _adjoint_setup()
    fg, gg = GridField.sample(dom, f), GridField.sample(dom, g)
    lhs = weighted_inner(_bump_deriv_field(dom, f, False), gg)
    uu, vv = dom.grid()
    corr = np.einsum("kab,uvkb->uvka", dom.sphere_lmul, gg.values) / vv[:, :, None, None]
    rhs_field = GridField(dom, -_bump_deriv_field(dom, g, True).values + (1 - dom.m) * corr)
    rhs = weighted_inner(fg, rhs_field)
    err = (lhs - rhs).norm() / max(rhs.norm(), 1e-10)
    _report("7 integration by parts (weighted)", err, 1e-2)
    assert err <= 1e-2


# -- criterion 8: norm bound ------------------------------------------------------------


def test_criterion_08_cprime_regression():
    err = abs(cprime_constant() - CPRIME_REFERENCE) / CPRIME_REFERENCE
    _report("8 symbol-constant regression", err, 1e-10)
    assert err <= 1e-10
    for m in (2, 3):
        vals = [theoretical_C(p, m) ** p for p in (2.0, 3.0, 4.0)]
        assert max(abs(v - vals[0]) for v in vals) <= 1e-12 * vals[0]


@pytest.mark.xfail(
    strict=True,
    reason="the printed norm bound fails: the discrete norm exceeds it at m=2 "
    "from 16^2 on (quadrature artifact crossing a 1% slack), and at m=3 the "
    "bound lies below even smooth-field Rayleigh quotients (see decisions ledger)",
)
def test_criterion_08_norm_bound_as_printed():
    worst_excess = 0.0
    for region in (RECT, DISK):
        for m, sphere_n in ((2, 8), (3, 4)):
            bound = theoretical_C(2.0, m)
            for n in (16, 32):
                dom = build_domain(region, m, n, 4, sphere_n)
                nrm = operator_norm(DiscreteOperator("Pi", dom))
                worst_excess = max(worst_excess, nrm / bound)
    _report("8 norm bound (as printed)", worst_excess, 1.0, "[expected fail]")
    assert worst_excess <= 1.0


def test_criterion_08_smooth_field_quotients_m2(rng):
    dom = build_domain(RECT, m=2, planar_n=32, boundary_n=4, sphere_n=8)
    alg = dom.algebra
    op = DiscreteOperator("Pi", dom)
    worst = 0.0
    for _ in range(6):
        f = GridField.sample(dom, _random_poly(alg, rng, 3))
        worst = max(worst, lp_norm(op.apply(f), 2.0) / lp_norm(f, 2.0))
    bump = _wide_bump(dom, _scalar(alg, 1.0) + 0.3 * Multivector.basis(alg, 1))
    f = GridField.sample(dom, bump)
    worst = max(worst, lp_norm(op.apply(f), 2.0) / lp_norm(f, 2.0))
    bound = theoretical_C(2.0, 2)
    _report("8 smooth-field quotients below bound (m=2)", worst, bound)
    assert worst <= bound


# -- criterion 9: Beltrami solver ----------------------------------------------------------


def test_criterion_09_beltrami_zero_coefficient():
    dom = build_domain(RECT, m=2, planar_n=32, boundary_n=4, sphere_n=8)
    alg = dom.algebra
    phi = PolynomialSliceFunction([_scalar(alg, 0.0), _scalar(alg, 1.0)])
    problem = BeltramiProblem(0.0, phi, dom, tol=1e-12, max_iter=10)
    sol = solve(problem, condition=check_contraction(0.0, dom, pi_norm=1.0))
    _report("9 zero-coefficient exactness", sol.residual, 1e-14)
    assert sol.converged and sol.iterations == 1
    assert sol.residual <= 1e-14
    assert np.array_equal(sol.w.values, GridField.sample(dom, phi).values)


def test_criterion_09_beltrami_contractive_instance():
    pi_norm = measure_pi_norm(build_domain(RECT, 2, 32, 4, 8))
    residuals = []
    ratios_worst = None
    sol64 = None
    for n in (64, 128):
        dom = build_domain(RECT, m=2, planar_n=n, boundary_n=8, sphere_n=8)
        alg = dom.algebra
        phi = PolynomialSliceFunction([_scalar(alg, 0.0), _scalar(alg, 1.0)])
        c = 0.5 / pi_norm
        problem = BeltramiProblem(
            Multivector.scalar(alg, c), phi, dom, tol=1e-11, max_iter=120
        )
        condition = check_contraction(problem.coefficient, dom, pi_norm=pi_norm)
        sol = solve(problem, condition=condition)
        assert sol.converged
        residuals.append(sol.residual)
        if n == 64:
            sol64 = sol
            usable = [
                r
                for r, s in zip(sol.contraction_estimates, sol.step_norms[1:])
                if s > 1e-12
            ]
            ratios_worst = max(usable)
    _report("9 contraction ratio", ratios_worst, 0.55)
    _report("9 residual 64^2", residuals[0], 5e-2)
    _report("9 residual 128^2", residuals[1], 2.5e-2)
    assert ratios_worst <= 0.55
    assert residuals[0] <= 5e-2
    assert residuals[1] <= 2.5e-2
    assert sol64.condition.product <= 0.51


def test_criterion_09_beltrami_restart_uniqueness():
    dom = build_domain(RECT, m=2, planar_n=48, boundary_n=8, sphere_n=8)
    alg = dom.algebra
    pi_norm = measure_pi_norm(dom)
    phi = PolynomialSliceFunction([_scalar(alg, 0.0), _scalar(alg, 1.0)])
    problem = BeltramiProblem(
        Multivector.scalar(alg, 0.5 / pi_norm), phi, dom, tol=1e-12, max_iter=200
    )
    condition = check_contraction(problem.coefficient, dom, pi_norm=pi_norm)
    sol0 = solve(problem, condition=condition)
    rng = np.random.default_rng(7)
    h0 = rng.uniform(-1.0, 1.0, sol0.h.values.shape)
    h0 /= max(np.linalg.norm(h0, axis=-1).max(), 1.0)
    sol1 = solve(problem, h0=h0, condition=condition)
    diff = sol0.h.values - sol1.h.values
    mu = dom.node_dmu_weights()
    dist = float(np.sqrt(np.einsum("uvkb,uvk->", diff**2, mu)))
    _report("9 restart uniqueness", dist, 1e-8)
    assert sol0.converged and sol1.converged
    assert dist <= 1e-8


# -- criterion 10: CLI determinism -----------------------------------------------------------


def test_criterion_10_cli_determinism(tmp_path):
    from sliceclifford.cli import main

    cfg = tmp_path / "cfg.ini"
    cfg.write_text(
        "[domain]\nshape = rectangle\nu0 = 0\nu1 = 1\nv0 = 1\nv1 = 2\nm = 2\n"
        "planar_n = 16\nboundary_n = 4\nsphere_n = 8\n"
        "[verify]\nresolutions = 12 24\nseed = 99\n"
    )
    outs = []
    for run in ("a", "b"):
        out = tmp_path / run
        assert main(["--config", str(cfg), "--outdir", str(out), "verify", "kernels"]) == 0
        outs.append((out / "kernels.csv").read_bytes())
    identical = outs[0] == outs[1]
    _report("10 CLI determinism", 0.0 if identical else 1.0, 0.0)
    assert identical

    failing = tmp_path / "failing.ini"
    failing.write_text(
        cfg.read_text().replace("seed = 99", "seed = 99\ntolerance_scale = 1e-30")
    )
    rc = main(["--config", str(failing), "--outdir", str(tmp_path / "f"), "verify", "kernels"])
    _report("10 CLI failing fixture exit", float(rc != 1), 0.0)
    assert rc == 1
    text = (tmp_path / "f" / "kernels.csv").read_text()
    assert ",false" in text
