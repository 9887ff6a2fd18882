"""Truncated sequence spaces l^p_d, their duals and rank-one operators.

Vectors and functionals are immutable wrappers around complex coordinate
arrays.  The dual pairing is the Banach-space one,

    <f, z> = sum_i f_i z_i,

i.e. bilinear with no complex conjugation.  A functional attached to a
space with exponent ``p`` is measured in the conjugate exponent ``q``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import LinearDependenceError, SpaceMismatchError


def conjugate_exponent(p: float) -> float:
    """Return q with 1/p + 1/q = 1 (q = inf for p = 1 and q = 1 for p = inf)."""
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def lp_norm(coords, p: float) -> float:
    a = np.abs(np.asarray(coords))
    if a.size == 0:
        return 0.0
    if math.isinf(p):
        return float(a.max())
    if p == 1:
        return float(a.sum())
    if p == 2:
        return float(np.linalg.norm(a))
    # rescale by the max modulus to keep a**p finite
    m = a.max()
    if m == 0:
        return 0.0
    return float(m * np.sum((a / m) ** p) ** (1.0 / p))


@dataclass(frozen=True)
class SpaceDesc:
    """Descriptor of the complex space l^p_d."""

    p: float
    dim: int

    def __post_init__(self):
        p = float(self.p)
        if math.isnan(p) or p < 1:
            raise ValueError(f"exponent p must satisfy p >= 1, got {self.p!r}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.dim!r}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "dim", int(self.dim))

    @property
    def q(self) -> float:
        return conjugate_exponent(self.p)

    def __str__(self):
        p = "inf" if math.isinf(self.p) else f"{self.p:g}"
        return f"l^{p}_{self.dim}"


class _Coords:
    """Shared arithmetic for coordinate-carrying elements."""

    __slots__ = ()

    def _check(self, other):
        if type(other) is not type(self):
            return NotImplemented
        if other.space != self.space:
            raise SpaceMismatchError(f"{self.space} vs {other.space}")
        return None

    def __add__(self, other):
        bad = self._check(other)
        if bad is NotImplemented:
            return bad
        return type(self)(self.space, self.coords + other.coords)

    def __sub__(self, other):
        bad = self._check(other)
        if bad is NotImplemented:
            return bad
        return type(self)(self.space, self.coords - other.coords)

    def __neg__(self):
        return type(self)(self.space, -self.coords)

    def __mul__(self, alpha):
        if not np.isscalar(alpha):
            return NotImplemented
        return type(self)(self.space, alpha * self.coords)

    __rmul__ = __mul__

    def __truediv__(self, alpha):
        if not np.isscalar(alpha):
            return NotImplemented
        return type(self)(self.space, self.coords / alpha)

    def __len__(self):
        return self.space.dim

    def allclose(self, other, atol=0.0, rtol=1e-12) -> bool:
        return self.space == other.space and np.allclose(
            self.coords, other.coords, atol=atol, rtol=rtol
        )


def _freeze(space: SpaceDesc, coords) -> np.ndarray:
    arr = np.array(coords, dtype=complex).reshape(-1)
    if arr.shape[0] != space.dim:
        raise SpaceMismatchError(
            f"expected {space.dim} coordinates for {space}, got {arr.shape[0]}"
        )
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class SpaceVec(_Coords):
    """Element of l^p_d."""

    space: SpaceDesc
    coords: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coords", _freeze(self.space, self.coords))

    def __repr__(self):
        return f"SpaceVec({self.space}, {np.round(self.coords, 6).tolist()})"


@dataclass(frozen=True, eq=False)
class Functional(_Coords):
    """Element of the dual of l^p_d, stored on the predual's descriptor."""

    space: SpaceDesc
    coords: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coords", _freeze(self.space, self.coords))

    def __repr__(self):
        return f"Functional({self.space}*, {np.round(self.coords, 6).tolist()})"


@dataclass(frozen=True, eq=False)
class RankOne:
    """The operator x (x) x* : z -> <x*, z> x."""

    left: SpaceVec
    right: Functional

    def __post_init__(self):
        if self.left.space != self.right.space:
            raise SpaceMismatchError(f"{self.left.space} vs {self.right.space}")

    @property
    def space(self) -> SpaceDesc:
        return self.left.space

    def matrix(self) -> np.ndarray:
        return np.outer(self.left.coords, self.right.coords)


def basis(space: SpaceDesc, i: int) -> SpaceVec:
    c = np.zeros(space.dim, dtype=complex)
    c[i] = 1.0
    return SpaceVec(space, c)


def coordinate_functional(space: SpaceDesc, i: int) -> Functional:
    c = np.zeros(space.dim, dtype=complex)
    c[i] = 1.0
    return Functional(space, c)


def zero_vec(space: SpaceDesc) -> SpaceVec:
    return SpaceVec(space, np.zeros(space.dim))


def norm(v: SpaceVec) -> float:
    """l^p norm of a vector (max modulus for p = inf)."""
    return lp_norm(v.coords, v.space.p)


def dual_norm(f: Functional) -> float:
    """Norm of a functional: l^q norm of its coordinates, q conjugate to p."""
    return lp_norm(f.coords, f.space.q)


def pair(f: Functional, z: SpaceVec) -> complex:
    """Bilinear dual pairing ``sum_i f_i z_i``."""
    if f.space != z.space:
        raise SpaceMismatchError(f"cannot pair {f.space}* with {z.space}")
    return complex(np.dot(f.coords, z.coords))


def rank_one_apply(r: RankOne, z: SpaceVec) -> SpaceVec:
    if r.space != z.space:
        raise SpaceMismatchError(f"rank-one on {r.space} applied to {z.space}")
    return pair(r.right, z) * r.left


def _biorthogonal(rows: np.ndarray, dim: int) -> np.ndarray:
    # rows: m x d; returns the minimum-norm d x m solution W of rows @ W = I
    m = rows.shape[0]
    if m > dim:
        raise LinearDependenceError(
            f"{m} vectors in dimension {dim} cannot be independent", rank=dim
        )
    rank = int(np.linalg.matrix_rank(rows))
    if rank < m:
        raise LinearDependenceError(
            f"family of {m} vectors has numerical rank {rank}", rank=rank
        )
    return np.linalg.pinv(rows)


def dual_basis(xs) -> list[Functional]:
    """Functionals f_i with ``pair(f_i, x_j) == delta_ij``.

    Among all solutions the minimum Euclidean norm one is returned
    (Moore-Penrose pseudoinverse), so the result is deterministic.

    Raises
    ------
    LinearDependenceError
        If the vectors are linearly dependent; ``err.rank`` is the
        numerical rank of the family.
    """
    xs = list(xs)
    if not xs:
        return []
    space = xs[0].space
    for x in xs:
        if x.space != space:
            raise SpaceMismatchError(f"{x.space} vs {space}")
    cols = np.column_stack([x.coords for x in xs])  # d x m
    # F @ cols = I with F (m x d) of minimum norm is pinv(cols)
    F = _biorthogonal(cols.T, space.dim).T
    return [Functional(space, row) for row in F]


def predual_basis(fs) -> list[SpaceVec]:
    """Vectors x_j with ``pair(f_i, x_j) == delta_ij`` (minimum-norm choice)."""
    fs = list(fs)
    if not fs:
        return []
    space = fs[0].space
    for f in fs:
        if f.space != space:
            raise SpaceMismatchError(f"{f.space} vs {space}")
    rows = np.vstack([f.coords for f in fs])  # m x d
    X = _biorthogonal(rows, space.dim)  # d x m
    return [SpaceVec(space, X[:, j]) for j in range(X.shape[1])]


def support(v) -> int:
    """Number of leading coordinates needed to hold ``v`` (0 for the zero vector)."""
    nz = np.flatnonzero(v.coords)
    return int(nz[-1]) + 1 if nz.size else 0
