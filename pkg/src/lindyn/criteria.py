"""Certifiers for the Supercyclicity and Hypercyclicity Criteria.

A criterion is a limit statement; at finite truncation we certify that the
relevant sequences have dropped below ``tol`` by the last index and have not
increased over the last three indices.  Every report keeps the whole
sequence so the claim can be audited.

The same engine runs on vectors (``MatOp`` acting on ``SpaceVec`` or
``Functional``) and on ideal elements (``MultOp`` acting on
``IdealElement``), which is how the lifts to L_T and R_T are certified.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .errors import CriterionDataError, SpaceMismatchError, WindowViolationError
from .ideals import (
    FiniteRankCombo,
    IdealDesc,
    IdealElement,
    ideal_norm,
    rank_one_element,
)
from .operators import (
    MatOp,
    adjoint,
    compose,
    direct_sum,
    forward_shift,
    identity,
    weighted_backward_shift,
)
from .spaces import (
    Functional,
    SpaceVec,
    basis,
    dual_basis,
    dual_norm,
    norm,
    predual_basis,
    support,
)

# floating-point allowance when testing "no increase" of a tail
_MONOTONE_RTOL = 1e-9


def magnitude(v) -> float:
    """Norm of a vector, functional or ideal element."""
    if isinstance(v, SpaceVec):
        return norm(v)
    if isinstance(v, Functional):
        return dual_norm(v)
    if isinstance(v, IdealElement):
        return ideal_norm(v)
    raise TypeError(f"no norm for {type(v).__name__}")


def row_support(e: IdealElement) -> int:
    rows = np.flatnonzero(np.any(e.matrix != 0, axis=1))
    return int(rows[-1]) + 1 if rows.size else 0


def col_support(e: IdealElement) -> int:
    cols = np.flatnonzero(np.any(e.matrix != 0, axis=0))
    return int(cols[-1]) + 1 if cols.size else 0


@dataclass(frozen=True, eq=False)
class MultOp:
    """``L_T`` (side ``"left"``) or ``R_T`` (side ``"right"``) on an ideal."""

    side: str
    T: MatOp
    ideal: IdealDesc

    def __post_init__(self):
        if self.side not in ("left", "right"):
            raise ValueError(f"side must be 'left' or 'right', got {self.side!r}")
        if self.T.domain != self.ideal.base:
            raise SpaceMismatchError(f"{self.T.domain} vs {self.ideal.base}")

    def act(self, A: IdealElement) -> IdealElement:
        if A.ideal != self.ideal:
            raise SpaceMismatchError(f"{A.ideal} vs {self.ideal}")
        op = compose(self.T, A.op) if self.side == "left" else compose(A.op, self.T)
        return IdealElement(op, self.ideal)

    def act_combo(self, combo: FiniteRankCombo) -> FiniteRankCombo:
        """Termwise action: ``T x (x) phi`` on the left, ``x (x) T* phi`` on the right."""
        T = self.T
        if self.side == "left":
            terms = [(a, T.act(x), f) for a, x, f in combo.terms]
        else:
            Tt = adjoint(T)
            terms = [(a, x, Tt.act(f)) for a, x, f in combo.terms]
        return FiniteRankCombo(tuple(terms))


@dataclass(frozen=True, eq=False)
class CriterionData:
    """Witness package for a criterion run.

    ``maps`` holds one linear map per index (anything with an ``act``
    method), or a callable ``k -> map``.  ``window`` is the truncation size
    for the shift exactness rule ``support(g) + n_k <= window``; ``None``
    disables the rule.
    """

    op: Any
    indices: tuple
    D1: tuple
    D2: tuple
    maps: Any
    scalars: tuple | None = None
    window: int | None = None
    support: Callable = support

    def __post_init__(self):
        idx = tuple(int(n) for n in self.indices)
        if not idx:
            raise CriterionDataError("index sequence is empty")
        if any(n < 0 for n in idx):
            raise CriterionDataError("indices must be nonnegative")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise CriterionDataError("indices must be strictly increasing")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "D1", tuple(self.D1))
        object.__setattr__(self, "D2", tuple(self.D2))
        if not self.D1 or not self.D2:
            raise CriterionDataError("generator lists must be nonempty")
        maps = self.maps
        if callable(maps) and not hasattr(maps, "act"):
            maps = tuple(maps(k) for k in range(len(idx)))
        else:
            maps = tuple(maps)
        if len(maps) != len(idx):
            raise CriterionDataError(f"{len(maps)} maps for {len(idx)} indices")
        object.__setattr__(self, "maps", maps)
        if self.scalars is not None:
            sc = tuple(complex(s) for s in self.scalars)
            if len(sc) != len(idx):
                raise CriterionDataError(f"{len(sc)} scalars for {len(idx)} indices")
            if any(s == 0 for s in sc):
                raise CriterionDataError("scalars must be nonzero")
            object.__setattr__(self, "scalars", sc)

    def window_ok(self, n: int) -> bool:
        if self.window is None:
            return True
        widest = max(self.support(g) for g in self.D1 + self.D2)
        return widest + n <= self.window


@dataclass
class CriterionRecord:
    k: int
    n_k: int
    max_product: float
    max_reconstruction_error: float
    window_ok: bool
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {
            "k": self.k,
            "n_k": self.n_k,
            "max_product": self.max_product,
            "max_reconstruction_error": self.max_reconstruction_error,
            "window_ok": self.window_ok,
        }
        d.update(self.extras)
        return d


@dataclass
class CriterionReport:
    criterion: str
    tol: float
    records: list
    passed: bool = False
    failed: list = field(default_factory=list)
    window: int | None = None
    params: dict = field(default_factory=dict)

    @property
    def window_violated(self) -> bool:
        return any(not r.window_ok for r in self.records)

    @property
    def final(self) -> int | None:
        """Position of the last record inside the exactness window."""
        ok = [i for i, r in enumerate(self.records) if r.window_ok]
        return ok[-1] if ok else None

    def sequence(self, name: str) -> list:
        out = []
        for r in self.records:
            out.append(getattr(r, name) if hasattr(r, name) else r.extras[name])
        return out

    @property
    def exit_code(self) -> int:
        if self.final is None:
            return 3
        return 0 if self.passed else 2

    def to_dict(self) -> dict:
        d = {
            "criterion": self.criterion,
            "tol": self.tol,
            "verdict": "pass" if self.passed else "fail",
            "failed_clauses": list(self.failed),
            "window": self.window,
            "records": [r.to_dict() for r in self.records],
        }
        if self.params:
            d["params"] = self.params
        return d


def decays(values, final: int, tol: float) -> bool:
    """``values[final] < tol`` and no increase over the last three indices up to ``final``."""
    if final is None or not values[final] < tol:
        return False
    tail = values[max(0, final - 2): final + 1]
    # rounding noise far below the sequence's scale (or far below tol) is not an increase
    atol = max(_MONOTONE_RTOL * 1e-3 * max(values[: final + 1]), tol * 1e-6)
    return all(b <= a * (1 + _MONOTONE_RTOL) + atol for a, b in zip(tail, tail[1:]))


def _powers_along(op, vectors, indices):
    """Yield ``[op^{n_k} v for v in vectors]`` for each index, reusing earlier powers."""
    current = list(vectors)
    prev = 0
    for n in indices:
        for _ in range(n - prev):
            current = [op.act(v) for v in current]
        prev = n
        yield current


def _iterate(op, v, n):
    for _ in range(n):
        v = op.act(v)
    return v


def _core(data: CriterionData):
    """Per-index raw quantities shared by all certifiers."""
    out = []
    for k, (n, Tx) in enumerate(zip(data.indices, _powers_along(data.op, data.D1, data.indices))):
        S = data.maps[k]
        Sy = [S.act(y) for y in data.D2]
        recon = [_iterate(data.op, s, n) - y for s, y in zip(Sy, data.D2)]
        out.append(
            {
                "k": k,
                "n": n,
                "orbit": max(magnitude(v) for v in Tx),
                "inverse": max(magnitude(v) for v in Sy),
                "recon": max(magnitude(v) for v in recon),
                "window_ok": data.window_ok(n),
            }
        )
    return out


def _finish(report: CriterionReport, strict: bool) -> CriterionReport:
    if report.final is None:
        report.passed = False
        report.failed.append("window")
    if strict and report.window_violated:
        raise WindowViolationError(
            f"generator supports exceed the exactness window {report.window} "
            f"for n_k = {[r.n_k for r in report.records if not r.window_ok]}",
            report=report,
        )
    return report


def check_supercyclicity_criterion(data: CriterionData, tol: float, strict: bool = True) -> CriterionReport:
    """Evaluate ``max ||T^{n_k}x|| ||S_{n_k}y||`` and ``max ||T^{n_k}S_{n_k}y - y||``.

    Passes iff both sequences decay below ``tol`` at the last index inside
    the exactness window.  When the data carry scalars the scaled sequences
    ``max ||lambda T^{n_k}x||`` and ``max ||S_{n_k}y / lambda||`` are also
    recorded (the verdict does not use them; the product is scale-free).

    Raises
    ------
    WindowViolationError
        With ``strict=True``, when some index falls outside the window.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    records = []
    for q in _core(data):
        extras = {"max_orbit_norm": q["orbit"], "max_inverse_norm": q["inverse"]}
        if data.scalars is not None:
            lam = abs(data.scalars[q["k"]])
            extras["scaled_orbit"] = lam * q["orbit"]
            extras["scaled_inverse"] = q["inverse"] / lam
        records.append(
            CriterionRecord(q["k"], q["n"], q["orbit"] * q["inverse"], q["recon"], q["window_ok"], extras)
        )
    report = CriterionReport("supercyclicity", tol, records, window=data.window)
    f = report.final
    if f is not None:
        if not decays(report.sequence("max_product"), f, tol):
            report.failed.append("(i)")
        if not decays(report.sequence("max_reconstruction_error"), f, tol):
            report.failed.append("(ii)")
        report.passed = not report.failed
    return _finish(report, strict)


def check_hypercyclicity_criterion(data: CriterionData, tol: float, strict: bool = True) -> CriterionReport:
    """Three separate decay checks: ``T^{n_k}x -> 0``, ``S_{n_k}y -> 0``, ``T^{n_k}S_{n_k}y -> y``."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    records = [
        CriterionRecord(
            q["k"], q["n"], q["orbit"] * q["inverse"], q["recon"], q["window_ok"],
            {"max_orbit_norm": q["orbit"], "max_inverse_norm": q["inverse"]},
        )
        for q in _core(data)
    ]
    report = CriterionReport("hypercyclicity", tol, records, window=data.window)
    f = report.final
    if f is not None:
        for clause, name in (("(i)", "max_orbit_norm"), ("(ii)", "max_inverse_norm"),
                             ("(iii)", "max_reconstruction_error")):
            if not decays(report.sequence(name), f, tol):
                report.failed.append(clause)
        report.passed = not report.failed
    return _finish(report, strict)


# -- canonical instances ---------------------------------------------------

def shift_data(weight, dim: int, kmax: int, p: float = 2.0, n_generators: int | None = None,
               scalars=None) -> CriterionData:
    """Criterion data for ``T = weight * B`` with ``S_{n_k} = (F / weight)^{n_k}``, ``n_k = k``.

    Generators are ``e_0 .. e_{m-1}`` with ``m = dim - kmax`` by default, the
    widest family whose forward shifts stay inside the truncation up to
    ``kmax``.  ``scalars`` may be a callable ``n -> lambda_n``.
    """
    T = weighted_backward_shift(weight, dim, p)
    S = forward_shift(1.0 / weight, dim, p)
    m = n_generators if n_generators is not None else max(1, dim - kmax)
    gens = [basis(T.domain, j) for j in range(m)]
    maps = [identity(T.domain)]
    for _ in range(kmax):
        maps.append(compose(S, maps[-1]))
    indices = list(range(kmax + 1))
    if callable(scalars):
        scalars = [scalars(n) for n in indices]
    return CriterionData(T, indices, gens, gens, maps, scalars=scalars, window=dim)


def dual_shift_data(weight, dim: int, kmax: int, p: float = 2.0, n_generators: int | None = None) -> CriterionData:
    """Adjoint-side data: ``weight * B`` acting on functionals of l^p_d.

    This is criterion data for ``T*`` where ``T = weight * F`` (forward
    shift), since the Banach adjoint of ``weight * F`` is ``weight * B``.
    The maps ``M_{n_k} = (F / weight)^{n_k}`` act on functionals.
    """
    base = shift_data(weight, dim, kmax, p, n_generators)
    gens = [Functional(g.space, g.coords) for g in base.D1]
    return CriterionData(base.op, base.indices, gens, gens, base.maps, window=dim)


# -- lifts to L_T and R_T ---------------------------------------------------

def lift_left(data: CriterionData, Phi, ideal: IdealDesc) -> CriterionData:
    """Criterion data for ``L_T`` on ``ideal`` built from data for ``T``.

    Generators are the rank-ones ``x (x) phi`` (``x`` in ``D1``) and
    ``y (x) phi`` (``y`` in ``D2``) over ``phi`` in ``Phi``; the maps
    ``Q_{n_k}`` act by ``S_{n_k}`` on left factors.
    """
    Phi = list(Phi)
    if not Phi:
        raise CriterionDataError("Phi must be nonempty")
    if not isinstance(data.op, MatOp):
        raise TypeError("lift_left expects criterion data for a MatOp")
    for f in Phi:
        if f.space != data.op.domain:
            raise SpaceMismatchError(f"functional on {f.space}, operator on {data.op.domain}")
    if ideal.base != data.op.domain:
        raise SpaceMismatchError(f"{ideal} is not an ideal of B({data.op.domain})")
    X0 = [rank_one_element(x, f, ideal) for x in data.D1 for f in Phi]
    Y0 = [rank_one_element(y, f, ideal) for y in data.D2 for f in Phi]
    Q = [MultOp("left", S, ideal) for S in data.maps]
    return CriterionData(
        MultOp("left", data.op, ideal), data.indices, X0, Y0, Q,
        scalars=data.scalars, window=data.window, support=row_support,
    )


def lift_right(adj_data: CriterionData, D, ideal: IdealDesc) -> CriterionData:
    """Criterion data for ``R_T`` built from data for ``T*`` acting on functionals.

    Generators are ``x (x) phi`` for ``x`` in ``D`` and ``phi`` in the dual
    generator lists; ``N_{n_k}`` acts by ``M_{n_k}`` on right factors, which
    as a matrix is ``B -> B M_{n_k}^T``.
    """
    D = list(D)
    if not D:
        raise CriterionDataError("D must be nonempty")
    Tstar = adj_data.op
    if not isinstance(Tstar, MatOp):
        raise TypeError("lift_right expects criterion data for a MatOp")
    for g in adj_data.D1 + adj_data.D2:
        if not isinstance(g, Functional):
            raise TypeError("adjoint data must have functional generators")
    for x in D:
        if x.space != Tstar.domain:
            raise SpaceMismatchError(f"vector on {x.space}, functionals on {Tstar.domain}")
    if ideal.base != Tstar.domain:
        raise SpaceMismatchError(f"{ideal} is not an ideal of B({Tstar.domain})")
    T = adjoint(Tstar)
    X0 = [rank_one_element(x, f, ideal) for x in D for f in adj_data.D1]
    Y0 = [rank_one_element(x, f, ideal) for x in D for f in adj_data.D2]
    N = [MultOp("right", adjoint(M), ideal) for M in adj_data.maps]
    return CriterionData(
        MultOp("right", T, ideal), adj_data.indices, X0, Y0, N,
        scalars=adj_data.scalars, window=adj_data.window, support=col_support,
    )


# -- intertwiners -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FactorMap:
    """``A -> (A x1, A x2)`` (left) or ``A -> (A* f1, A* f2)`` (right).

    ``partners`` is the biorthogonal family used to build surjectivity
    witnesses: dual functionals of ``(x1, x2)`` on the left, predual vectors
    of ``(f1, f2)`` on the right.
    """

    side: str
    anchors: tuple
    partners: tuple

    def __call__(self, A):
        m = _matrix_of(A)
        if self.side == "left":
            return tuple(SpaceVec(a.space, m @ a.coords) for a in self.anchors)
        return tuple(Functional(a.space, m.T @ a.coords) for a in self.anchors)

    def witness(self, t1, t2) -> MatOp:
        """An operator ``R`` with ``self(R) == (t1, t2)``."""
        p1, p2 = self.partners
        space = self.anchors[0].space
        if self.side == "left":
            m = np.outer(t1.coords, p1.coords) + np.outer(t2.coords, p2.coords)
        else:
            m = np.outer(p1.coords, t1.coords) + np.outer(p2.coords, t2.coords)
        return MatOp(space, space, m)

    def intertwined(self, T: MatOp) -> MatOp:
        """The operator on the sum space that this map intertwines with L_T (R_T)."""
        return direct_sum(T if self.side == "left" else adjoint(T))


def _matrix_of(A) -> np.ndarray:
    if isinstance(A, IdealElement):
        return A.matrix
    if isinstance(A, MatOp):
        return A.entries
    return np.asarray(A, dtype=complex)


def intertwiner_left(x1: SpaceVec, x2: SpaceVec) -> FactorMap:
    duals = dual_basis([x1, x2])
    return FactorMap("left", (x1, x2), tuple(duals))


def intertwiner_right(f1: Functional, f2: Functional) -> FactorMap:
    vecs = predual_basis([f1, f2])
    return FactorMap("right", (f1, f2), tuple(vecs))
