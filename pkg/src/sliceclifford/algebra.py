"""Dense real Clifford algebra arithmetic with negative-definite signature.

The algebra Cl_m is generated by e_1..e_m with e_i e_j + e_j e_i = -2*delta_ij.
Basis blades e_A are indexed by the subsets A of {1..m} in graded
lexicographic order, so coefficients of an element live in a flat float64
array of length 2**m with the blade axis last.  All array operations
vectorize over leading axes, which is what the quadrature code relies on.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

MAX_GENERATORS = 6


def _blade_subsets(m):
    """Subsets of {1..m} sorted by (grade, lexicographic tuple)."""
    out = []
    for size in range(m + 1):
        out.extend(combinations(range(1, m + 1), size))
    return out


def _blade_product(a, b):
    """Sign and resulting subset of e_A * e_B under e_i^2 = -1."""
    swaps = sum(1 for x in b for y in a if y > x)
    squares = len(set(a) & set(b))
    target = tuple(sorted(set(a) ^ set(b)))
    return (-1.0) ** (swaps + squares), target


class CliffordAlgebra:
    """Multiplication tables and vectorized coefficient-array operations.

    Instances are immutable after construction and safe to share between
    workers; the structure tensor is built once per dimension.
    """

    _cache: dict[int, "CliffordAlgebra"] = {}

    def __new__(cls, m):
        if m in cls._cache:
            return cls._cache[m]
        self = super().__new__(cls)
        cls._cache[m] = self
        return self

    def __init__(self, m):
        if getattr(self, "_built", False):
            return
        if not 1 <= m <= MAX_GENERATORS:
            raise ValueError(f"m must be in 1..{MAX_GENERATORS}, got {m}")
        self.m = m
        self.dim = 1 << m
        self.blades = _blade_subsets(m)
        self.blade_index = {s: i for i, s in enumerate(self.blades)}
        self.grades = np.array([len(s) for s in self.blades])
        self.conj_signs = (-1.0) ** ((self.grades * (self.grades + 1)) // 2)

        tensor = np.zeros((self.dim, self.dim, self.dim))
        for i, a in enumerate(self.blades):
            for j, b in enumerate(self.blades):
                sign, target = _blade_product(a, b)
                tensor[i, j, self.blade_index[target]] = sign
        tensor.setflags(write=False)
        self.conj_signs.setflags(write=False)
        self._tensor = tensor
        self._built = True

    # -- array-level operations ------------------------------------------

    def mul(self, a, b):
        """Geometric product of coefficient arrays, vectorized over leading axes."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if a.shape[-1] != self.dim or b.shape[-1] != self.dim:
            raise ValueError("coefficient arrays do not match algebra dimension")
        return np.einsum("...i,...j,ijk->...k", a, b, self._tensor)

    def conj(self, a):
        """Clifford conjugation: sign (-1)^(|A|(|A|+1)/2) per blade."""
        return np.asarray(a, dtype=float) * self.conj_signs

    def norm(self, a):
        """Euclidean norm of the blade coefficients."""
        return np.linalg.norm(np.asarray(a, dtype=float), axis=-1)

    def scalar(self, value):
        out = np.zeros(self.dim)
        out[0] = value
        return out

    def embed_vector(self, components):
        """Grade-1 element from an (..., m) array of vector components."""
        components = np.asarray(components, dtype=float)
        out = np.zeros(components.shape[:-1] + (self.dim,))
        out[..., 1 : self.m + 1] = components
        return out

    def embed_paravector(self, x0, components):
        out = self.embed_vector(components)
        out[..., 0] = x0
        return out

    def vector_part(self, a):
        return np.asarray(a, dtype=float)[..., 1 : self.m + 1]

    def lmul_matrices(self, a):
        """Real matrices L with L @ f = mul(a, f), shape (..., dim, dim)."""
        a = np.asarray(a, dtype=float)
        return np.einsum("...i,ijk->...kj", a, self._tensor)

    def paravector_inverse(self, a):
        """Inverse conj(a)/|a|^2, valid for paravectors (grades 0 and 1)."""
        a = np.asarray(a, dtype=float)
        n2 = np.sum(a * a, axis=-1, keepdims=True)
        if np.any(n2 == 0.0):
            raise ZeroDivisionError("paravector is singular (zero norm)")
        return self.conj(a) / n2

    def is_paravector(self, a, tol=0.0):
        a = np.asarray(a, dtype=float)
        high = a[..., self.m + 1 :]
        return np.all(np.abs(high) <= tol)

    def blade_name(self, index):
        subset = self.blades[index]
        if not subset:
            return "1"
        return "e" + "".join(str(i) for i in subset)

    def multivector(self, coeffs):
        return Multivector(self, coeffs)


class Multivector:
    """A single element of Cl_m: thin immutable wrapper over a coefficient array."""

    __slots__ = ("algebra", "coeffs")

    def __init__(self, algebra, coeffs):
        coeffs = np.array(coeffs, dtype=float).reshape(-1)
        if coeffs.shape != (algebra.dim,):
            raise ValueError(
                f"expected {algebra.dim} blade coefficients, got {coeffs.shape}"
            )
        coeffs.setflags(write=False)
        self.algebra = algebra
        self.coeffs = coeffs

    # -- constructors ------------------------------------------------------

    @classmethod
    def scalar(cls, algebra, value):
        return cls(algebra, algebra.scalar(value))

    @classmethod
    def basis(cls, algebra, *indices):
        """Basis blade e_{i1} e_{i2} ... for sorted distinct generator indices."""
        coeffs = np.zeros(algebra.dim)
        coeffs[algebra.blade_index[tuple(indices)]] = 1.0
        return cls(algebra, coeffs)

    @classmethod
    def from_vector(cls, algebra, components):
        return cls(algebra, algebra.embed_vector(components))

    @classmethod
    def from_paravector(cls, algebra, x0, components):
        return cls(algebra, algebra.embed_paravector(x0, components))

    # -- arithmetic ---------------------------------------------------------

    def _check(self, other):
        if self.algebra is not other.algebra:
            raise ValueError("multivectors belong to different algebras")

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = Multivector.scalar(self.algebra, other)
        self._check(other)
        return Multivector(self.algebra, self.coeffs + other.coeffs)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, (int, float)):
            other = Multivector.scalar(self.algebra, other)
        self._check(other)
        return Multivector(self.algebra, self.coeffs - other.coeffs)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return Multivector(self.algebra, -self.coeffs)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return Multivector(self.algebra, self.coeffs * other)
        self._check(other)
        return Multivector(self.algebra, self.algebra.mul(self.coeffs, other.coeffs))

    def __rmul__(self, other):
        if isinstance(other, (int, float)):
            return Multivector(self.algebra, self.coeffs * other)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, float)):
            return Multivector(self.algebra, self.coeffs / other)
        return NotImplemented

    def conjugate(self):
        return Multivector(self.algebra, self.algebra.conj(self.coeffs))

    def norm(self):
        return float(self.algebra.norm(self.coeffs))

    def inverse(self):
        """Paravector inverse conj(x)/|x|^2; raises for non-paravectors."""
        if not self.algebra.is_paravector(self.coeffs):
            raise ValueError("inverse implemented for paravectors only")
        return Multivector(self.algebra, self.algebra.paravector_inverse(self.coeffs))

    @property
    def scalar_part(self):
        return float(self.coeffs[0])

    @property
    def vector_part(self):
        return np.array(self.coeffs[1 : self.algebra.m + 1])

    def is_paravector(self, tol=0.0):
        return bool(self.algebra.is_paravector(self.coeffs, tol))

    def isclose(self, other, atol=1e-12):
        self._check(other)
        return bool(np.allclose(self.coeffs, other.coeffs, rtol=0.0, atol=atol))

    def __eq__(self, other):
        if not isinstance(other, Multivector) or self.algebra is not other.algebra:
            return NotImplemented
        return bool(np.array_equal(self.coeffs, other.coeffs))

    def __hash__(self):
        return hash((id(self.algebra), self.coeffs.tobytes()))

    def __repr__(self):
        terms = []
        for i, c in enumerate(self.coeffs):
            if c != 0.0:
                name = self.algebra.blade_name(i)
                terms.append(f"{c:g}" if name == "1" else f"{c:g}*{name}")
        return " + ".join(terms) if terms else "0"


class Paravector:
    """Element x0 + sum_j x_j e_j of Cl^0 + Cl^1, identified with R^(m+1)."""

    __slots__ = ("x0", "vec")

    def __init__(self, x0, vec):
        self.x0 = float(x0)
        self.vec = np.array(vec, dtype=float).reshape(-1)

    @property
    def m(self):
        return self.vec.size

    def to_multivector(self, algebra):
        if algebra.m != self.m:
            raise ValueError("paravector dimension does not match algebra")
        return Multivector.from_paravector(algebra, self.x0, self.vec)

    @classmethod
    def from_multivector(cls, mv, tol=0.0):
        if not mv.is_paravector(tol):
            raise ValueError("multivector has grade >= 2 components")
        return cls(mv.scalar_part, mv.vector_part)

    def norm(self):
        return float(np.hypot(self.x0, np.linalg.norm(self.vec)))

    def __repr__(self):
        return f"Paravector({self.x0!r}, {self.vec.tolist()!r})"
