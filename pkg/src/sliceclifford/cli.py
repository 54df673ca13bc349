"""Command-line harness: verification suites, the Beltrami solver, constants.

Configuration is flat INI text (configparser): a [domain] section describing
the region and resolutions, an optional [verify] section with the refinement
resolutions, seed and a tolerance scale, an optional [functions] section for
polynomial/bump test inputs, and a [beltrami] section for the solver.  Every
suite row carries a self-descriptive anchor slug, the resolution it ran at,
the measured error and its tolerance; a suite passes iff every row does.
Outputs are CSV files with deterministic float formatting, so repeated runs
with the same config and seed are byte-identical.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import math
import sys
import time
import warnings
from dataclasses import dataclass

import numpy as np

from .algebra import CliffordAlgebra, Multivector
from .beltrami import BeltramiProblem, check_contraction, measure_pi_norm, solve
from .functions import (
    GridField,
    PolynomialSliceFunction,
    grid_G_fd,
    make_bump,
    representation_formula,
    star_product,
)
from .geometry import Disk, Rectangle, SlicePoint, build_domain, sphere_surface_area
from .kernels import (
    alpha_beta,
    in_singular_sphere,
    pi_kernel,
    pi_plus_kernel,
    slice_cauchy_kernel,
)
from .operators import (
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

CPRIME_REFERENCE = 13.223566248261104


class UsageError(ValueError):
    """Bad command line or configuration."""


@dataclass
class Row:
    check_id: str
    anchor: str
    resolution: int
    error: float
    tol: float

    @property
    def passed(self):
        return self.error <= self.tol


@dataclass
class SuiteReport:
    suite: str
    rows: list
    wall_time: float

    @property
    def passed(self):
        return all(r.passed for r in self.rows)


# -- configuration -------------------------------------------------------------


def _parse_blades(alg, text):
    """Blade coefficient list like 's:1.0 e1:0.5 e12:-2'; bare number = scalar."""
    text = text.strip()
    try:
        return Multivector.scalar(alg, float(text))
    except ValueError:
        pass
    coeffs = np.zeros(alg.dim)
    for token in text.split():
        name, _, val = token.partition(":")
        if not val:
            raise UsageError(f"bad blade token {token!r} (want name:value)")
        if name in ("s", "1"):
            idx = ()
        elif name.startswith("e"):
            idx = tuple(int(ch) for ch in name[1:])
        else:
            raise UsageError(f"unknown blade {name!r}")
        if idx not in alg.blade_index:
            raise UsageError(f"blade {name!r} not in Cl_{alg.m}")
        coeffs[alg.blade_index[idx]] = float(val)
    return Multivector(alg, coeffs)


def _parse_poly(alg, section, prefix):
    degs = sorted(
        int(key[len(prefix):]) for key in section if key.startswith(prefix)
    )
    if not degs:
        return None
    coeffs = [Multivector.scalar(alg, 0.0)] * (max(degs) + 1)
    for d in degs:
        coeffs[d] = _parse_blades(alg, section[f"{prefix}{d}"])
    return PolynomialSliceFunction(coeffs)


class RunConfig:
    """Parsed configuration with defaults."""

    def __init__(self, parser: configparser.ConfigParser):
        try:
            dom = parser["domain"]
        except KeyError:
            raise UsageError("config needs a [domain] section")
        shape = dom.get("shape", "rectangle").strip().lower()
        if shape == "rectangle":
            self.region = Rectangle(
                dom.getfloat("u0", 0.0),
                dom.getfloat("u1", 1.0),
                dom.getfloat("v0", 1.0),
                dom.getfloat("v1", 2.0),
            )
        elif shape == "disk":
            self.region = Disk(
                dom.getfloat("uc", 0.0), dom.getfloat("vc", 2.0), dom.getfloat("radius", 1.0)
            )
        else:
            raise UsageError(f"unknown shape {shape!r}")
        self.m = dom.getint("m", 2)
        self.planar_n = dom.getint("planar_n", 32)
        self.boundary_n = dom.getint("boundary_n", 8)
        self.sphere_n = dom.getint("sphere_n", 8)

        verify = parser["verify"] if parser.has_section("verify") else {}
        res_text = verify.get("resolutions", "") if verify else ""
        self.resolutions = [int(t) for t in res_text.split()] or [
            max(self.planar_n // 2, 8),
            self.planar_n,
        ]
        if self.resolutions != sorted(set(self.resolutions)):
            raise UsageError("resolutions must be strictly increasing")
        self.seed = int(verify.get("seed", 1234)) if verify else 1234
        self.tolerance_scale = float(verify.get("tolerance_scale", 1.0)) if verify else 1.0

        self.functions = parser["functions"] if parser.has_section("functions") else {}
        self.beltrami = parser["beltrami"] if parser.has_section("beltrami") else None

    def domain(self, planar_n=None):
        return build_domain(
            self.region,
            self.m,
            planar_n or self.planar_n,
            self.boundary_n,
            self.sphere_n,
        )

    def algebra(self):
        return CliffordAlgebra(self.m)


def load_config(path):
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {path!r}: {exc}")
    except configparser.Error as exc:
        raise UsageError(f"config parse failure: {exc}")
    return RunConfig(parser)


# -- helpers shared by suites ----------------------------------------------------


def _default_bump(cfg, dom, alg):
    """Test bump fixed in physical coordinates across the resolution list."""
    f = cfg.functions
    if f and "bump_u0" in f:
        support = tuple(float(f[k]) for k in ("bump_u0", "bump_u1", "bump_v0", "bump_v1"))
        c = _parse_blades(alg, f.get("bump_c", "1.0"))
    else:
        u0, u1, v0, v1 = cfg.region.bbox
        du, dv = u1 - u0, v1 - v0
        coarse = min(cfg.resolutions)
        mu = max(0.15 * du, 2.6 * du / coarse)
        mv = max(0.15 * dv, 2.6 * dv / coarse)
        support = (u0 + mu, u1 - mu, v0 + mv, v1 - mv)
        c = Multivector.scalar(alg, 1.0) + 0.5 * Multivector.basis(alg, 1)
    return make_bump(support, c, dom)


def _suite_domain(cfg, n):
    """Suite domain at planar resolution n with proportionate boundary panels."""
    return build_domain(
        cfg.region, cfg.m, n, max(cfg.boundary_n, n // 4), cfg.sphere_n
    )


def _check_fractions(count, rng, lo=0.25, hi=0.75):
    return [(rng.uniform(lo, hi), rng.uniform(lo, hi)) for _ in range(count)]


def _cells_at_fractions(dom, fractions, rng):
    u0, u1, v0, v1 = dom.region.bbox
    cells = []
    for fu, fv in fractions:
        iu, iv = dom.nearest_cell(u0 + fu * (u1 - u0), v0 + fv * (v1 - v0))
        cells.append((iu, iv, int(rng.integers(0, dom.n_sphere))))
    return cells


def _default_poly(cfg, alg, rng, degree=3):
    poly = _parse_poly(alg, cfg.functions, "poly_deg") if cfg.functions else None
    if poly is not None:
        return poly
    coeffs = [
        Multivector(alg, rng.uniform(-1.0, 1.0, alg.dim) / (1.0 + 2.0 * k))
        for k in range(degree + 1)
    ]
    return PolynomialSliceFunction(coeffs)


def _central_cells(dom, count, rng, margin_frac=6):
    mask = dom.interior_cell_mask(dom.planar_n // margin_frac)
    cells = np.argwhere(mask)
    pick = rng.choice(len(cells), size=min(count, len(cells)), replace=False)
    ks = rng.integers(0, dom.n_sphere, size=len(pick))
    return [(int(cells[i][0]), int(cells[i][1]), int(k)) for i, k in zip(pick, ks)]


def _central_field_err(dom, got, want, margin_frac=6):
    mask = dom.interior_cell_mask(dom.planar_n // margin_frac)
    num = np.linalg.norm((got.values - want.values)[mask], axis=-1).max()
    den = max(np.linalg.norm(want.values[mask], axis=-1).max(), 1e-30)
    return num / den


def _rand_paravector(alg, rng, scale=1.0):
    c = np.zeros(alg.dim)
    c[: alg.m + 1] = rng.uniform(-1.0, 1.0, alg.m + 1) * scale
    return Multivector(alg, c)


def _rand_mv(alg, rng):
    return Multivector(alg, rng.uniform(-1.0, 1.0, alg.dim))


def _rand_unit(m, rng):
    v = rng.normal(size=m)
    return v / np.linalg.norm(v)


def _ratio_rows(check_id, anchor, errs, resolutions, tol_fine, ratio_tol=0.5):
    rows = [
        Row(f"{check_id}", anchor, n, e, tol_fine if n == resolutions[-1] else math.inf)
        for n, e in zip(resolutions, errs)
    ]
    # a ratio row is meaningful only above the accuracy floor
    if len(errs) >= 2 and errs[-2] > 0 and errs[-1] > 1e-6:
        rows.append(
            Row(
                f"{check_id}-ratio",
                anchor,
                resolutions[-1],
                errs[-1] / errs[-2],
                ratio_tol,
            )
        )
    return rows


# -- suites ----------------------------------------------------------------------


def _suite_clifford(cfg, rng):
    rows = []
    for m in (2, 3, 4):
        alg = CliffordAlgebra(m)
        worst_assoc = 0.0
        worst_conj = 0.0
        worst_inv = 0.0
        for _ in range(1000 // 4):
            a, b, c = (_rand_mv(alg, rng) for _ in range(3))
            worst_assoc = max(worst_assoc, ((a * b) * c - a * (b * c)).norm())
            worst_conj = max(
                worst_conj, ((a * b).conjugate() - b.conjugate() * a.conjugate()).norm()
            )
            x = _rand_paravector(alg, rng)
            if x.norm() > 1e-2:
                one = Multivector.scalar(alg, 1.0)
                worst_inv = max(worst_inv, (x * x.inverse() - one).norm())
        rows.append(Row("associativity", "algebra", m, worst_assoc, 1e-12))
        rows.append(Row("conjugation-anti-automorphism", "algebra", m, worst_conj, 1e-12))
        rows.append(Row("paravector-inverse", "algebra", m, worst_inv, 1e-12))
    return rows


def _suite_slicefn(cfg, rng):
    rows = []
    alg = cfg.algebra()
    poly = _default_poly(cfg, alg, rng)
    worst = 0.0
    for _ in range(100):
        I = _rand_unit(cfg.m, rng)
        Ix = _rand_unit(cfg.m, rng)
        u, v = rng.uniform(-1, 1), rng.uniform(0.5, 2.0)
        fp = poly(SlicePoint(u, v, I))
        fm = poly(SlicePoint(u, v, -I))
        rec = representation_formula(
            fp, fm, Multivector.from_vector(alg, I), Multivector.from_vector(alg, Ix)
        )
        direct = poly(SlicePoint(u, v, Ix))
        worst = max(worst, (rec - direct).norm() / max(direct.norm(), 1e-3))
    rows.append(Row("representation-formula", "slice-reconstruction", cfg.m, worst, 1e-12))

    e1 = Multivector.basis(alg, 1)
    zero = Multivector.scalar(alg, 0.0)
    one = Multivector.scalar(alg, 1.0)
    prod = star_product(
        PolynomialSliceFunction([one, e1]), PolynomialSliceFunction([one, -1.0 * e1])
    )
    err = (
        (prod.coeffs[0] - one).norm()
        + prod.coeffs[1].norm()
        + (prod.coeffs[2] - one).norm()
    )
    rows.append(Row("star-product", "series-convolution", cfg.m, err, 1e-14))

    errs = []
    for n in cfg.resolutions:
        dom = cfg.domain(n)
        field = GridField.sample(dom, poly)
        g, _ = grid_G_fd(field)
        mask = dom.interior_cell_mask(2)
        scale = max(np.linalg.norm(field.values[mask], axis=-1).max(), 1e-3)
        errs.append(np.linalg.norm(g.values[mask], axis=-1).max() / scale)
    rows += _ratio_rows(
        "slice-monogenicity-fd", "derivative-annihilation", errs, cfg.resolutions, 1e-3, 0.3
    )
    return rows


def _suite_kernels(cfg, rng):
    rows = []
    alg = cfg.algebra()
    worst_slice = worst_conj = worst_sym = worst_split = 0.0
    count = 0
    while count < 200:
        q = _rand_paravector(alg, rng, 2.0)
        x = _rand_paravector(alg, rng, 2.0)
        if in_singular_sphere(q, x, tol=1e-2):
            continue
        if np.linalg.norm(q.vector_part) < 0.1 or np.linalg.norm(x.vector_part) < 0.1:
            continue
        count += 1
        kp = pi_plus_kernel(q, x)
        kc = pi_kernel(q, x).conjugate()
        worst_conj = max(worst_conj, (kp - kc).norm() / max(kc.norm(), 1e-6))
        lhs = slice_cauchy_kernel(q, x).conjugate()
        rhs = -1.0 * slice_cauchy_kernel(x.conjugate(), q.conjugate())
        worst_sym = max(worst_sym, (lhs - rhs).norm() / max(rhs.norm(), 1e-6))
    for _ in range(100):
        d = _rand_unit(cfg.m, rng)
        zq = complex(rng.uniform(-1, 1), rng.uniform(0.5, 2.0))
        zx = complex(rng.uniform(-1, 1), rng.uniform(0.5, 2.0))
        if abs(zx - zq) < 0.2 or abs(zx - zq.conjugate()) < 0.2:
            continue
        I = Multivector.from_vector(alg, d)
        q = Multivector.scalar(alg, zq.real) + zq.imag * I
        x = Multivector.scalar(alg, zx.real) + zx.imag * I
        want = 1.0 / (zx - zq)
        got = slice_cauchy_kernel(q, x)
        emb = Multivector.scalar(alg, want.real) + want.imag * I
        worst_slice = max(worst_slice, (got - emb).norm() / max(emb.norm(), 1e-6))
        dq = _rand_unit(cfg.m, rng)
        qq = Multivector.scalar(alg, zq.real) + zq.imag * Multivector.from_vector(alg, dq)
        a, b = alpha_beta(Multivector.from_vector(alg, dq), I)
        own = -1.0 / (zx - zq) ** 2
        mir = -1.0 / (zx - zq.conjugate()) ** 2
        split = a * (Multivector.scalar(alg, own.real) + own.imag * I) + b * (
            Multivector.scalar(alg, mir.real) + mir.imag * I
        )
        kq = pi_kernel(qq, x)
        worst_split = max(worst_split, (kq - split).norm() / max(kq.norm(), 1e-6))
    rows.append(Row("same-slice-reduction", "complex-kernel-limit", cfg.m, worst_slice, 1e-12))
    rows.append(Row("conjugation-link", "squared-kernel-conjugate", cfg.m, worst_conj, 1e-10))
    rows.append(
        Row("conjugation-reflection-symmetry", "kernel-symmetry", cfg.m, worst_sym, 1e-10)
    )
    rows.append(Row("projector-split", "slice-projector-decomposition", cfg.m, worst_split, 1e-10))
    return rows


def _suite_bpf(cfg, rng):
    rows = []
    alg = cfg.algebra()
    poly = _default_poly(cfg, alg, rng)
    fractions = _check_fractions(20, np.random.default_rng(cfg.seed + 1))
    errs_b = []
    errs_v = []
    for n in cfg.resolutions:
        dom = _suite_domain(cfg, n)
        cells = _cells_at_fractions(dom, fractions, np.random.default_rng(cfg.seed + 1))
        worst = 0.0
        for cell in cells:
            p = dom.slice_point(*cell)
            got = cauchy_boundary(poly, dom, p)
            want = poly(p)
            worst = max(worst, (got - want).norm() / max(want.norm(), 1e-3))
        errs_b.append(worst)
        bump = _default_bump(cfg, dom, alg)

        def gf(u, v, d):
            return bump.derivative_arrays(u, v, np.broadcast_to(d, u.shape + (cfg.m,)))

        T_Gf = DiscreteOperator("T", dom).apply(GridField.sample(dom, gf))
        errs_v.append(_central_field_err(dom, T_Gf, GridField.sample(dom, bump)))
    rows += _ratio_rows(
        "borel-pompeiu-boundary", "boundary-reproduction", errs_b, cfg.resolutions, 1e-2
    )
    rows += _ratio_rows(
        "borel-pompeiu-volume", "volume-potential-inversion", errs_v, cfg.resolutions, 1e-2
    )
    # the conjugate form is exact in the complex limit
    errs_c = []
    for n in cfg.resolutions:
        dom1 = build_domain(cfg.region, 1, n, max(cfg.boundary_n, n // 4), 2)
        alg1 = dom1.algebra
        poly1 = PolynomialSliceFunction(
            [
                Multivector.scalar(alg1, 0.2),
                Multivector.scalar(alg1, 1.0),
                0.4 * Multivector.basis(alg1, 1),
            ]
        )
        gbar = poly1.gbar_derivative()
        worst = 0.0
        for cell in _cells_at_fractions(
            dom1, _check_fractions(6, np.random.default_rng(cfg.seed + 2)),
            np.random.default_rng(cfg.seed + 2),
        ):
            p = dom1.slice_point(*cell)
            lhs = cauchy_boundary(poly1, dom1, p, conjugated=True) + conjugate_teodorescu(
                gbar, dom1, p
            )
            want = poly1(p)
            worst = max(worst, (lhs - want).norm() / want.norm())
        errs_c.append(worst)
    rows += _ratio_rows(
        "borel-pompeiu-conjugate-complex-limit",
        "conjugate-cauchy-pompeiu",
        errs_c,
        cfg.resolutions,
        1e-2,
    )
    return rows


def _suite_inverse(cfg, rng):
    rows = []
    alg = cfg.algebra()
    errs = []
    for n in cfg.resolutions:
        dom = _suite_domain(cfg, n)
        bump = _default_bump(cfg, dom, alg)
        Tf = DiscreteOperator("T", dom).apply(bump)
        G_Tf, _ = grid_G_fd(Tf, richardson=True)
        errs.append(_central_field_err(dom, G_Tf, GridField.sample(dom, bump), 4))
    rows += _ratio_rows("right-inverse", "derivative-of-potential", errs, cfg.resolutions, 1e-2)

    disk = Disk(0.0, 2.0, 1.0)
    c, R = complex(0.0, 2.0), 1.0
    errs_d = []
    for n in cfg.resolutions:
        domd = build_domain(disk, cfg.m, n, cfg.boundary_n, max(4, cfg.sphere_n // 2))
        direction = domd.sphere_nodes[0]
        worst = 0.0
        for duv in ((0.3, 0.2), (-0.25, -0.35)):
            iu, iv = domd.nearest_cell(c.real + duv[0], c.imag + duv[1])
            z = complex(domd.centers_u[iu], domd.centers_v[iv])
            got = teodorescu_slice(1.0, domd, direction, z)
            want = 0.5 * np.conj(z - c) + 0.5 * R**2 / (z - np.conj(c))
            got_c = complex(got.coeffs[0], got.coeffs[1 : cfg.m + 1] @ direction)
            worst = max(worst, abs(got_c - want) / abs(want))
        errs_d.append(worst)
    rows += _ratio_rows(
        "cauchy-transform-disk", "disk-indicator-closed-form", errs_d, cfg.resolutions, 1e-3
    )
    return rows


def _suite_pi_consistency(cfg, rng):
    rows = []
    alg = cfg.algebra()
    errs = []
    fractions = _check_fractions(8, np.random.default_rng(cfg.seed + 3), 0.3, 0.7)
    for n in cfg.resolutions:
        dom = _suite_domain(cfg, n)
        poly = _default_poly(cfg, alg, rng)
        Tf = DiscreteOperator("T", dom).apply(poly)
        Gbar_Tf, _ = grid_G_fd(Tf, conjugated=True)
        worst = 0.0
        for cell in _cells_at_fractions(dom, fractions, np.random.default_rng(cfg.seed + 3)):
            p = dom.slice_point(*cell)
            lhs = pi_op(poly, dom, p)
            rhs = Multivector(alg, Gbar_Tf.values[cell])
            worst = max(worst, (lhs - rhs).norm() / max(rhs.norm(), 1e-6))
        errs.append(worst)
    rows += _ratio_rows(
        "pi-from-derivative-of-potential", "squared-kernel-vs-derivative-path",
        errs, cfg.resolutions, 1e-2,
    )
    disk = Disk(0.0, 2.0, 1.0)
    c, R = complex(0.0, 2.0), 1.0
    errs_d = []
    for n in cfg.resolutions:
        domd = build_domain(disk, cfg.m, n, cfg.boundary_n, max(4, cfg.sphere_n // 2))
        direction = domd.sphere_nodes[0]
        iu, iv = domd.nearest_cell(c.real + 0.3, c.imag + 0.2)
        z = complex(domd.centers_u[iu], domd.centers_v[iv])
        got = pi_op_slice(1.0, domd, direction, z)
        want = -(R**2) / (z - np.conj(c)) ** 2
        got_c = complex(got.coeffs[0], got.coeffs[1 : cfg.m + 1] @ direction)
        errs_d.append(abs(got_c - want) / abs(want))
    rows += _ratio_rows(
        "beurling-transform-disk", "disk-indicator-closed-form", errs_d, cfg.resolutions, 1e-2
    )
    return rows


def _suite_pi_identities(cfg, rng):
    rows = []
    alg = cfg.algebra()
    errs_g = []
    errs_pg = []
    errs_gbp = []
    for n in cfg.resolutions:
        dom = _suite_domain(cfg, n)
        poly = _default_poly(cfg, alg, rng)
        Pif = DiscreteOperator("Pi", dom).apply(poly)
        G_Pif, _ = grid_G_fd(Pif)
        errs_g.append(
            _central_field_err(dom, G_Pif, GridField.sample(dom, poly.gbar_derivative()), 4)
        )
        bump = _default_bump(cfg, dom, alg)

        def deriv(conj):
            def h(u, v, d):
                return bump.derivative_arrays(
                    u, v, np.broadcast_to(d, u.shape + (cfg.m,)), conjugated=conj
                )

            return GridField.sample(dom, h)

        PiG = DiscreteOperator("Pi", dom).apply(deriv(False))
        errs_pg.append(_central_field_err(dom, PiG, deriv(True), 4))
        Pip = DiscreteOperator("Piplus", dom).apply(bump)
        Gb_Pip, _ = grid_G_fd(Pip, conjugated=True)
        errs_gbp.append(_central_field_err(dom, Gb_Pip, deriv(False), 4))
    rows += _ratio_rows("g-pi-identity", "derivative-exchange", errs_g, cfg.resolutions, 3e-2)
    rows += _ratio_rows(
        "pi-g-identity-bumps", "derivative-exchange-compact", errs_pg, cfg.resolutions, 2e-2
    )
    rows += _ratio_rows(
        "gbar-pi-plus-identity-bumps", "conjugate-derivative-exchange",
        errs_gbp, cfg.resolutions, 3e-2,
    )
    return rows


def _suite_pi_inverse(cfg, rng):
    rows = []
    alg = cfg.algebra()
    errs_def = []
    errs_li = []
    fractions = _check_fractions(6, np.random.default_rng(cfg.seed + 4), 0.4, 0.6)
    for n in cfg.resolutions:
        dom = _suite_domain(cfg, n)
        bump = _default_bump(cfg, dom, alg)
        Tbf = DiscreteOperator("Tbar", dom).apply(bump)
        G_Tbf, _ = grid_G_fd(Tbf, richardson=True)
        worst = 0.0
        for cell in _cells_at_fractions(dom, fractions, np.random.default_rng(cfg.seed + 4)):
            got = pi_plus_op(bump, dom, cell)
            want = Multivector(alg, G_Tbf.values[cell])
            worst = max(worst, (got - want).norm() / max(want.norm(), 1e-6))
        errs_def.append(worst)
        Gb_Tbf, _ = grid_G_fd(Tbf, conjugated=True, richardson=True)
        errs_li.append(_central_field_err(dom, Gb_Tbf, GridField.sample(dom, bump), 4))
    rows += _ratio_rows(
        "pi-plus-definition", "conjugate-potential-derivative", errs_def, cfg.resolutions, 5e-2
    )
    rows += _ratio_rows(
        "conjugate-left-inverse-bumps", "conjugate-potential-inversion",
        errs_li, cfg.resolutions, 5e-2,
    )
    return rows


def _suite_adjoint(cfg, rng):
    rows = []
    alg = cfg.algebra()
    worst_sym = 0.0
    count = 0
    while count < 1000:
        q = _rand_paravector(alg, rng, 2.0)
        x = _rand_paravector(alg, rng, 2.0)
        if in_singular_sphere(q, x, tol=1e-2):
            continue
        if np.linalg.norm(q.vector_part) < 0.05 or np.linalg.norm(x.vector_part) < 0.05:
            continue
        count += 1
        lhs = slice_cauchy_kernel(q, x).conjugate()
        rhs = -1.0 * slice_cauchy_kernel(x.conjugate(), q.conjugate())
        worst_sym = max(worst_sym, (lhs - rhs).norm() / max(rhs.norm(), 1e-6))
    rows.append(
        Row("kernel-reflection-symmetry", "kernel-symmetry", cfg.m, worst_sym, 1e-10)
    )
    dom = cfg.domain(max(cfg.resolutions[-1], 48))
    u0, u1, v0, v1 = dom.region.bbox
    du, dv = u1 - u0, v1 - v0
    f = make_bump(
        (u0 + 0.1 * du, u0 + 0.6 * du, v0 + 0.1 * dv, v0 + 0.6 * dv),
        Multivector.scalar(alg, 1.0) + 0.5 * Multivector.basis(alg, 1),
        dom,
    )
    g = make_bump(
        (u0 + 0.28 * du, u0 + 0.92 * du, v0 + 0.28 * dv, v0 + 0.92 * dv),
        Multivector.scalar(alg, 0.7) - 0.4 * Multivector.basis(alg, 2),
        dom,
    )
    T = DiscreteOperator("T", dom)
    fg, gg = GridField.sample(dom, f), GridField.sample(dom, g)
    lhs = weighted_inner(T.apply(f), gg)
    rhs = weighted_inner(fg, T.apply(g))
    rows.append(
        Row(
            "potential-anti-adjointness",
            "weighted-inner-product",
            dom.planar_n,
            (lhs + rhs).norm() / max(rhs.norm(), 1e-30),
            1e-12,
        )
    )

    def deriv(bump, conj):
        def h(u, v, d):
            return bump.derivative_arrays(
                u, v, np.broadcast_to(d, u.shape + (cfg.m,)), conjugated=conj
            )

        return GridField.sample(dom, h)

    uu, vv = dom.grid()
    corr = np.einsum("kab,uvkb->uvka", dom.sphere_lmul, gg.values) / vv[:, :, None, None]
    rhs_field = GridField(dom, -deriv(g, True).values + (1 - cfg.m) * corr)
    lhs2 = weighted_inner(deriv(f, False), gg)
    rhs2 = weighted_inner(fg, rhs_field)
    rows.append(
        Row(
            "integration-by-parts",
            "weighted-derivative-adjoint",
            dom.planar_n,
            (lhs2 - rhs2).norm() / max(rhs2.norm(), 1e-10),
            1e-2,
        )
    )
    return rows


def _suite_norm(cfg, rng):
    rows = []
    cp = cprime_constant()
    rows.append(
        Row(
            "cprime-regression",
            "symbol-constant",
            0,
            abs(cp - CPRIME_REFERENCE) / CPRIME_REFERENCE,
            1e-10,
        )
    )
    vals = [theoretical_C(p, cfg.m) ** p for p in (2.0, 3.0, 4.0)]
    rows.append(
        Row(
            "c-power-invariance",
            "closed-form-bound",
            0,
            max(abs(v - vals[0]) for v in vals) / vals[0],
            1e-12,
        )
    )
    alg = cfg.algebra()
    bound = theoretical_C(2.0, cfg.m)
    for n in cfg.resolutions:
        dom = cfg.domain(n)
        op = DiscreteOperator("Pi", dom)
        nrm = operator_norm(op, seed=cfg.seed)
        # measured discrete norm recorded; the printed bound is checked in the
        # acceptance suite, where its partial failure is documented
        rows.append(Row("pi-norm-discrete", "weighted-operator-norm", n, nrm, math.inf))
        worst_rq = 0.0
        for _ in range(4):
            coeffs = [_rand_mv(alg, rng) for _ in range(3)]
            f = GridField.sample(dom, PolynomialSliceFunction(coeffs))
            worst_rq = max(worst_rq, lp_norm(op.apply(f), 2.0) / lp_norm(f, 2.0))
        tol = bound if cfg.m == 2 else math.inf
        rows.append(Row("pi-norm-smooth-quotient", "norm-bound", n, worst_rq, tol))
    return rows


SUITES = {
    "clifford": _suite_clifford,
    "slicefn": _suite_slicefn,
    "kernels": _suite_kernels,
    "bpf": _suite_bpf,
    "inverse": _suite_inverse,
    "pi-consistency": _suite_pi_consistency,
    "pi-identities": _suite_pi_identities,
    "pi-inverse": _suite_pi_inverse,
    "adjoint": _suite_adjoint,
    "norm": _suite_norm,
}


def run_suite(name, cfg, outdir, seed=None):
    """Run one named suite, write <outdir>/<name>.csv, return the report."""
    if name not in SUITES:
        raise UsageError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    rng = np.random.default_rng(cfg.seed if seed is None else seed)
    start = time.time()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AccuracyWarning)
        rows = SUITES[name](cfg, rng)
    if cfg.tolerance_scale != 1.0:
        rows = [
            Row(r.check_id, r.anchor, r.resolution, r.error, r.tol * cfg.tolerance_scale)
            for r in rows
        ]
    report = SuiteReport(name, rows, time.time() - start)
    outdir.mkdir(parents=True, exist_ok=True)
    with open(outdir / f"{name}.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["check_id", "anchor", "resolution", "error", "tol", "pass"])
        for r in rows:
            writer.writerow(
                [
                    r.check_id,
                    r.anchor,
                    r.resolution,
                    f"{r.error:.17g}",
                    f"{r.tol:.17g}",
                    str(r.passed).lower(),
                ]
            )
    return report


# -- solver command ----------------------------------------------------------------


def _beltrami_problem(cfg):
    if cfg.beltrami is None:
        raise UsageError("config needs a [beltrami] section")
    sec = cfg.beltrami
    dom = cfg.domain()
    alg = dom.algebra
    phi = _parse_poly(alg, sec, "phi_deg")
    if phi is None:
        phi = PolynomialSliceFunction(
            [Multivector.scalar(alg, 0.0), Multivector.scalar(alg, 1.0)]
        )
    norm_planar_n = int(sec.get("norm_planar_n", min(cfg.planar_n, 32)))
    coeff_text = sec.get("coefficient", "0.1").strip()
    pi_norm = None
    if coeff_text.startswith("auto"):
        target = float(coeff_text.split()[1])
        pi_norm = measure_pi_norm(dom, norm_planar_n)
        coeff = Multivector.scalar(alg, target / pi_norm)
    else:
        coeff = _parse_blades(alg, coeff_text)
    problem = BeltramiProblem(
        coefficient=coeff,
        seed=phi,
        domain=dom,
        tol=float(sec.get("tol", 1e-10)),
        max_iter=int(sec.get("max_iter", 200)),
        norm_planar_n=norm_planar_n,
    )
    return problem, pi_norm


def solve_beltrami_cmd(cfg, outdir):
    """Run the solver, write iteration log, field dump and condition report."""
    problem, pi_norm = _beltrami_problem(cfg)
    dom = problem.domain
    condition = check_contraction(
        problem.coefficient, dom, pi_norm=pi_norm, norm_planar_n=problem.norm_planar_n
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AccuracyWarning)
        sol = solve(problem, condition=condition)
    outdir.mkdir(parents=True, exist_ok=True)
    with open(outdir / "beltrami_iterations.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "step_norm", "contraction_ratio"])
        for k, step in enumerate(sol.step_norms, start=1):
            ratio = sol.contraction_estimates[k - 2] if k >= 2 else float("nan")
            writer.writerow([k, f"{step:.17g}", f"{ratio:.17g}"])
    dim = dom.algebra.dim
    with open(outdir / "beltrami_fields.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["u", "v", "k"]
        header += [f"h_{i}" for i in range(dim)] + [f"w_{i}" for i in range(dim)]
        writer.writerow(header)
        uu, vv = dom.grid()
        for iu in range(dom.planar_n):
            for iv in range(dom.planar_n):
                if dom.cell_w[iu, iv] == 0.0:
                    continue
                for k in range(dom.n_sphere):
                    rec = [f"{uu[iu, iv]:.17g}", f"{vv[iu, iv]:.17g}", k]
                    rec += [f"{x:.17g}" for x in sol.h.values[iu, iv, k]]
                    rec += [f"{x:.17g}" for x in sol.w.values[iu, iv, k]]
                    writer.writerow(rec)
    with open(outdir / "beltrami_condition.txt", "w") as fh:
        for line in condition.lines():
            fh.write(line + "\n")
        fh.write(f"converged = {str(sol.converged).lower()}\n")
        fh.write(f"iterations = {sol.iterations}\n")
        fh.write(f"residual = {sol.residual:.17g}\n")
    return sol


def dump_constants(cfg, outdir=None, stream=None):
    """Print the symbol constant, the bound for p in {2, 4} and measured norms."""
    stream = stream or sys.stdout
    cp = cprime_constant()
    lines = [f"cprime = {cp:.17g}", f"omega_{cfg.m - 1} = {sphere_surface_area(cfg.m):.17g}"]
    for p in (2.0, 4.0):
        lines.append(f"C(p={p:g}, m={cfg.m}) = {theoretical_C(p, cfg.m):.17g}")
    bound = theoretical_C(2.0, cfg.m)
    for n in cfg.resolutions:
        dom = cfg.domain(n)
        nrm = operator_norm(DiscreteOperator("Pi", dom), seed=cfg.seed)
        flag = "pass" if nrm <= bound else "fail"
        lines.append(f"pi_norm_discrete[n={n}] = {nrm:.17g} (<= C(2): {flag})")
    text = "\n".join(lines) + "\n"
    stream.write(text)
    if outdir is not None:
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / "constants.txt").write_text(text)
    return text


# -- entry point --------------------------------------------------------------------


def main(argv=None):
    from pathlib import Path

    parser = argparse.ArgumentParser(
        prog="sliceclifford",
        description="Verification suites and the Beltrami solver for the "
        "slice Clifford singular integral operators.",
    )
    parser.add_argument("--config", required=True, help="INI configuration file")
    parser.add_argument("--outdir", default="out", help="output directory for reports")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    sub = parser.add_subparsers(dest="command", required=True)
    p_verify = sub.add_parser("verify", help="run a named verification suite")
    p_verify.add_argument("suite", help=f"one of {', '.join(sorted(SUITES))}")
    sub.add_parser("solve-beltrami", help="run the fixed-point solver")
    sub.add_parser("constants", help="print the norm constants and measured norms")

    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        outdir = Path(args.outdir)
        if args.command == "verify":
            report = run_suite(args.suite, cfg, outdir)
            for r in report.rows:
                status = "pass" if r.passed else "FAIL"
                print(
                    f"[{status}] {report.suite}/{r.check_id} @ {r.resolution}: "
                    f"error {r.error:.3e} (tol {r.tol:.3e})"
                )
            print(
                f"suite {report.suite}: {'PASS' if report.passed else 'FAIL'} "
                f"({report.wall_time:.1f}s)"
            )
            return 0 if report.passed else 1
        if args.command == "solve-beltrami":
            sol = solve_beltrami_cmd(cfg, outdir)
            print(
                f"beltrami: converged={sol.converged} iterations={sol.iterations} "
                f"residual={sol.residual:.3e}"
            )
            return 0 if sol.converged else 1
        if args.command == "constants":
            dump_constants(cfg, outdir)
            return 0
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
