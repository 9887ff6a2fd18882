"""Dense operators on truncated spaces: shifts, adjoints, orbits, L_T and R_T.

Powers are always formed by repeated multiplication so that nilpotent shift
truncations stay exactly nilpotent.

A unilateral backward shift on ``d`` coordinates agrees with the infinite
one on every vector supported in the first ``d`` coordinates.  The forward
shift pushes mass past the last coordinate, so ``F^n y`` is exact only when
``support(y) + n <= d``; criterion runs record this "exactness window".
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SpaceMismatchError
from .spaces import Functional, SpaceDesc, SpaceVec


@dataclass(frozen=True, eq=False)
class MatOp:
    """Bounded operator on l^p_d as a dense complex matrix."""

    domain: SpaceDesc
    codomain: SpaceDesc
    entries: np.ndarray

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape != (self.codomain.dim, self.domain.dim):
            raise SpaceMismatchError(
                f"matrix of shape {m.shape} does not map {self.domain} to {self.codomain}"
            )
        if self.domain.dim != self.codomain.dim:
            raise SpaceMismatchError("operators must be square at truncation")
        if not np.all(np.isfinite(m)):
            raise ValueError("operator entries must be finite")
        m.flags.writeable = False
        object.__setattr__(self, "entries", m)

    @property
    def space(self) -> SpaceDesc:
        return self.domain

    @property
    def dim(self) -> int:
        return self.domain.dim

    def act(self, v):
        """Apply to a vector, or to a functional when this is a dual operator."""
        if isinstance(v, SpaceVec):
            return apply(self, v)
        if isinstance(v, Functional):
            if v.space != self.domain:
                raise SpaceMismatchError(f"{self.domain} vs {v.space}")
            return Functional(self.codomain, self.entries @ v.coords)
        raise TypeError(f"cannot apply MatOp to {type(v).__name__}")

    def __matmul__(self, other):
        if isinstance(other, MatOp):
            return compose(self, other)
        if isinstance(other, (SpaceVec, Functional)):
            return self.act(other)
        return NotImplemented

    def __mul__(self, alpha):
        if not np.isscalar(alpha):
            return NotImplemented
        return MatOp(self.domain, self.codomain, alpha * self.entries)

    __rmul__ = __mul__

    def __add__(self, other):
        _same(self, other)
        return MatOp(self.domain, self.codomain, self.entries + other.entries)

    def __sub__(self, other):
        _same(self, other)
        return MatOp(self.domain, self.codomain, self.entries - other.entries)

    def __neg__(self):
        return MatOp(self.domain, self.codomain, -self.entries)

    def allclose(self, other, atol=0.0, rtol=1e-12) -> bool:
        return self.domain == other.domain and np.allclose(
            self.entries, other.entries, atol=atol, rtol=rtol
        )

    def __repr__(self):
        return f"MatOp({self.domain}, {np.round(self.entries, 4).tolist()})"


def _same(a: MatOp, b: MatOp):
    if not isinstance(b, MatOp):
        raise TypeError(f"expected MatOp, got {type(b).__name__}")
    if a.domain != b.domain:
        raise SpaceMismatchError(f"{a.domain} vs {b.domain}")


@dataclass(frozen=True, eq=False)
class ScaledOrbit:
    """Samples ``(n, T^n x)`` for ``n = 0..horizon``.

    The scalar multiples alpha * T^n x are left implicit; see ``probes``.
    """

    base: SpaceVec
    op: MatOp
    horizon: int
    samples: tuple

    def __getitem__(self, n: int) -> SpaceVec:
        return self.samples[n][1]

    def __len__(self):
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def vectors(self) -> list[SpaceVec]:
        return [v for _, v in self.samples]


def operator(space: SpaceDesc, entries) -> MatOp:
    return MatOp(space, space, entries)


def identity(space: SpaceDesc) -> MatOp:
    return MatOp(space, space, np.eye(space.dim))


def zero_op(space: SpaceDesc) -> MatOp:
    return MatOp(space, space, np.zeros((space.dim, space.dim)))


def diagonal(space: SpaceDesc, diag) -> MatOp:
    return MatOp(space, space, np.diag(np.asarray(diag, dtype=complex)))


def apply(T: MatOp, x: SpaceVec) -> SpaceVec:
    if x.space != T.domain:
        raise SpaceMismatchError(f"{T.domain} operator applied to {x.space} vector")
    return SpaceVec(T.codomain, T.entries @ x.coords)


def compose(A: MatOp, B: MatOp) -> MatOp:
    if A.domain != B.codomain:
        raise SpaceMismatchError(f"cannot compose {A.domain} after {B.codomain}")
    return MatOp(B.domain, A.codomain, A.entries @ B.entries)


def _weights(weights, d: int) -> np.ndarray:
    n = d - 1
    if np.ndim(weights) == 0:
        w = np.full(n, weights, dtype=complex)
    else:
        w = np.asarray(weights, dtype=complex).reshape(-1)
        if w.shape[0] < n:
            raise ValueError(f"need at least {n} weights for dimension {d}, got {w.shape[0]}")
        w = w[:n]
    if np.any(w == 0):
        raise ValueError("shift weights must be nonzero")
    return w


def weighted_backward_shift(weights, d: int, p: float = 2.0) -> MatOp:
    """``(Bx)_i = w_i x_{i+1}`` for ``i < d-1``; last coordinate 0.

    ``weights`` may be a scalar, meaning a constant weight.
    """
    w = _weights(weights, d)
    m = np.zeros((d, d), dtype=complex)
    idx = np.arange(d - 1)
    m[idx, idx + 1] = w
    space = SpaceDesc(p, d)
    return MatOp(space, space, m)


def forward_shift(weights, d: int, p: float = 2.0) -> MatOp:
    """``(Fx)_i = w_{i-1} x_{i-1}`` for ``i >= 1``; first coordinate 0."""
    w = _weights(weights, d)
    m = np.zeros((d, d), dtype=complex)
    idx = np.arange(d - 1)
    m[idx + 1, idx] = w
    space = SpaceDesc(p, d)
    return MatOp(space, space, m)


def adjoint(T: MatOp) -> MatOp:
    """Banach adjoint: plain transpose, so ``pair(T* f, x) == pair(f, T x)``."""
    return MatOp(T.codomain, T.domain, T.entries.T)


def power(T: MatOp, n: int) -> MatOp:
    if n < 0:
        raise ValueError("negative powers are not defined")
    m = np.eye(T.dim, dtype=complex)
    for _ in range(n):
        m = T.entries @ m
    return MatOp(T.domain, T.codomain, m)


def powers(T: MatOp, n_max: int) -> list[MatOp]:
    """``[T^0, T^1, ..., T^n_max]`` by successive multiplication."""
    out = [identity(T.domain)]
    for _ in range(n_max):
        out.append(compose(T, out[-1]))
    return out


def orbit(T: MatOp, x: SpaceVec, N: int) -> ScaledOrbit:
    if N < 0:
        raise ValueError("horizon N must be nonnegative")
    samples = [(0, x)]
    v = x
    for n in range(1, N + 1):
        v = apply(T, v)
        samples.append((n, v))
    return ScaledOrbit(x, T, N, tuple(samples))


def left_mult(T: MatOp, A: MatOp) -> MatOp:
    """L_T(A) = TA."""
    return compose(T, A)


def right_mult(T: MatOp, A: MatOp) -> MatOp:
    """R_T(A) = AT."""
    return compose(A, T)


def op_norm(T: MatOp) -> float:
    """Operator norm on l^p_d, exact for p in {1, 2, inf}."""
    p = T.domain.p
    m = T.entries
    if p == 2:
        return float(np.linalg.norm(m, 2)) if m.size else 0.0
    if p == 1:
        return float(np.abs(m).sum(axis=0).max())
    if math.isinf(p):
        return float(np.abs(m).sum(axis=1).max())
    raise ValueError(f"operator norm on l^{p:g} is only available for p in {{1, 2, inf}}")


def direct_sum(T: MatOp) -> MatOp:
    """Block-diagonal ``T (+) T`` on the l^p sum of two copies of the space."""
    d = T.dim
    m = np.zeros((2 * d, 2 * d), dtype=complex)
    m[:d, :d] = T.entries
    m[d:, d:] = T.entries
    space = SpaceDesc(T.domain.p, 2 * d)
    return MatOp(space, space, m)


def join(u, v):
    """Concatenate ``u (+) v`` into the direct-sum space."""
    if u.space != v.space:
        raise SpaceMismatchError(f"{u.space} vs {v.space}")
    space = SpaceDesc(u.space.p, 2 * u.space.dim)
    return type(u)(space, np.concatenate([u.coords, v.coords]))


def split(w):
    """Inverse of :func:`join`."""
    d = w.space.dim // 2
    space = SpaceDesc(w.space.p, d)
    return type(w)(space, w.coords[:d]), type(w)(space, w.coords[d:])
