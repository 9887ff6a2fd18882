"""Scaled-orbit density diagnostics.

These measure how close the scaled orbit {alpha T^n x} comes to sample
targets on the unit sphere.  A finite truncation can never certify density,
so the reports are diagnostics only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize

from .errors import SpaceMismatchError
from .operators import MatOp, orbit
from .spaces import SpaceVec, lp_norm, norm


def hilbert_inner(v: SpaceVec, u: SpaceVec) -> complex:
    """``<v, u>_H = sum v_i conj(u_i)`` (conjugate-linear in the second slot)."""
    return complex(np.vdot(u.coords, v.coords))


class Hit(NamedTuple):
    n: int
    alpha: complex
    distance: float


def best_scale(target: SpaceVec, u: SpaceVec) -> tuple:
    """Scalar alpha minimising ``||alpha u - target||`` and the distance reached.

    Closed form on l^2; otherwise a 2-D convex search over the complex
    plane started from the l^2 solution.  ``u = 0`` gives ``(0, ||target||)``.
    """
    if target.space != u.space:
        raise SpaceMismatchError(f"{target.space} vs {u.space}")
    uu = float(np.vdot(u.coords, u.coords).real)
    if uu == 0:
        return 0j, norm(target)
    alpha = hilbert_inner(target, u) / uu
    if target.space.p == 2:
        return alpha, lp_norm(alpha * u.coords - target.coords, 2)

    p = target.space.p

    def dist(ab):
        return lp_norm((ab[0] + 1j * ab[1]) * u.coords - target.coords, p)

    res = minimize(dist, [alpha.real, alpha.imag], method="Nelder-Mead",
                   options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000})
    a = complex(res.x[0], res.x[1])
    d = dist(res.x)
    d0 = dist([alpha.real, alpha.imag])
    if d0 <= d:
        return alpha, d0
    return a, d


def scaled_orbit_distance(T: MatOp, x: SpaceVec, target: SpaceVec, N: int) -> Hit:
    """Best ``(n, alpha, distance)`` over ``n = 0..N``; ties go to the smallest n."""
    orb = orbit(T, x, N)
    best = None
    for n, v in orb:
        a, d = best_scale(target, v)
        if best is None or d < best.distance:
            best = Hit(n, a, d)
    return best


def unit_sphere_targets(space, count: int, seed) -> list[SpaceVec]:
    """Normalised standard complex Gaussians (uniform on the l^2 sphere)."""
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((count, space.dim)) + 1j * rng.standard_normal((count, space.dim))
    return [SpaceVec(space, row / lp_norm(row, space.p)) for row in g]


@dataclass
class DensityReport:
    targets: list
    hits: list
    eps: float
    horizon: int
    seed: int | None

    @property
    def coverage(self) -> float:
        return sum(h.distance < self.eps for h in self.hits) / len(self.hits)

    def summary(self) -> dict:
        return {"coverage": self.coverage, "eps": self.eps, "N": self.horizon, "seed": self.seed,
                "net": len(self.targets)}

    def rows(self) -> list[dict]:
        return [
            {"target_index": i, "best_n": h.n, "alpha_re": h.alpha.real,
             "alpha_im": h.alpha.imag, "distance": h.distance}
            for i, h in enumerate(self.hits)
        ]


def density_report(T: MatOp, x: SpaceVec, net_size: int, eps: float, N: int, seed=None,
                   targets=None) -> DensityReport:
    """Coverage of a random unit-sphere net by the scaled orbit of ``x``.

    ``targets`` overrides the random net (used to compare operators on the
    same targets).
    """
    if net_size < 1:
        raise ValueError("net_size must be >= 1")
    if not eps > 0:
        raise ValueError("eps must be positive")
    if targets is None:
        targets = unit_sphere_targets(x.space, net_size, seed)
    hits = [scaled_orbit_distance(T, x, t, N) for t in targets]
    return DensityReport(list(targets), hits, eps, N, seed)
