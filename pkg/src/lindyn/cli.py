"""Command-line front end.

    lindyn audit-ideal [--schatten P | --opnorm] [--dim D] [--samples S] [--seed N]
    lindyn certify {sc,hc,tsc,lift-left,lift-right,theorem3} [--shift W | --matrix FILE] ...
    lindyn probe [--shift W | --matrix FILE] [--net K] [--eps E] [--N H] [--seed N]

Settings come from built-in defaults, then an optional ``--config`` file of
``key = value`` lines, then command-line flags (flags win).  ``LINDYN_SEED``
is the seed fallback.  Exit codes: 0 pass/ok, 2 criterion fail, 3 window
violation, 64 usage error, 65 data error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from fractions import Fraction

import numpy as np

from . import serialize
from .criteria import (
    CriterionData,
    check_hypercyclicity_criterion,
    check_supercyclicity_criterion,
    dual_shift_data,
    lift_left,
    lift_right,
    magnitude,
    shift_data,
)
from .errors import LindynError, WindowViolationError
from .ideals import IdealDesc, audit_ideal_axioms
from .operators import MatOp, adjoint, compose, identity, weighted_backward_shift
from .probes import density_report
from .spaces import Functional, SpaceDesc, SpaceVec, basis, coordinate_functional
from .tensor import (
    TSCData,
    check_theorem3,
    check_tsc,
    identity_tsc,
    isometry_tsc,
    random_unimodular,
    shift_tsc,
)

EXIT_OK, EXIT_FAIL, EXIT_WINDOW, EXIT_USAGE, EXIT_DATA = 0, 2, 3, 64, 65

WHICH = ("sc", "hc", "tsc", "lift-left", "lift-right", "theorem3")

DEFAULTS = {
    "audit-ideal": {"dim": 6, "p": 2.0, "samples": 200, "tol": 1e-9},
    "certify": {"dim": 16, "p": 2.0, "kmax": 12, "tol": 1e-6},
    "probe": {"dim": 4, "p": 2.0, "net": 64, "eps": 0.1, "N": 8},
}


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- value parsers -------------------------------------------------------------

def exponent(text) -> float:
    s = str(text).strip().lower()
    if s in ("inf", "infinity", "∞"):
        return math.inf
    try:
        p = float(Fraction(s))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not an exponent: {text!r}")
    if p < 1:
        raise argparse.ArgumentTypeError(f"exponent must be >= 1, got {text}")
    return p


def _int_at_least(lo):
    def conv(text):
        try:
            v = int(str(text).strip())
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
        if v < lo:
            raise argparse.ArgumentTypeError(f"must be >= {lo}, got {v}")
        return v
    return conv


def positive(text) -> float:
    try:
        v = float(str(text).strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not v > 0 or math.isnan(v):
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def weight(text) -> complex:
    try:
        w = complex(str(text).strip().replace(" ", ""))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a weight: {text!r}")
    if w == 0:
        raise argparse.ArgumentTypeError("shift weight must be nonzero")
    return w


def existing_file(text) -> str:
    if not os.path.isfile(text):
        raise argparse.ArgumentTypeError(f"no such file: {text}")
    return text


def factor_spec(text) -> tuple:
    s = str(text).strip()
    kind, _, arg = s.partition(":")
    if kind == "identity" and not arg:
        return ("identity", None)
    if kind == "shift":
        return ("shift", weight(arg or "2"))
    if kind == "isometry":
        return ("isometry", _int_at_least(0)(arg or "0"))
    if kind == "matrix" and arg:
        return ("matrix", existing_file(arg))
    raise argparse.ArgumentTypeError(f"bad factor spec {text!r} (identity, shift:W, isometry:SEED, matrix:FILE)")


CONVERTERS = {
    "dim": _int_at_least(1),
    "p": exponent,
    "schatten": exponent,
    "opnorm": None,
    "samples": _int_at_least(1),
    "shift": weight,
    "matrix": existing_file,
    "kmax": _int_at_least(0),
    "tol": positive,
    "bound": positive,
    "net": _int_at_least(1),
    "eps": positive,
    "N": _int_at_least(0),
    "seed": _int_at_least(0),
    "out": str,
    "csv": str,
    "left": factor_spec,
    "right": factor_spec,
}

EXCLUSIVE = (("schatten", "opnorm"), ("shift", "matrix"))


def read_config(path) -> dict:
    """Parse a flat ``key = value`` file (``#`` comments, blank lines ignored)."""
    out = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}")
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip().lstrip("-"), value.strip()
        if not sep or key not in CONVERTERS:
            raise UsageError(f"{path}:{lineno}: unrecognised entry {raw.strip()!r}")
        conv = CONVERTERS[key]
        if conv is None:
            out[key] = value.lower() in ("1", "true", "yes", "on", "")
            continue
        try:
            out[key] = conv(value)
        except argparse.ArgumentTypeError as exc:
            raise UsageError(f"{path}:{lineno}: {key}: {exc}")
    return out


def build_parser() -> argparse.ArgumentParser:
    sup = argparse.SUPPRESS
    parser = _Parser(prog="lindyn", description="Finite-truncation linear dynamics laboratory.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def common(p):
        p.add_argument("--config", type=existing_file, default=sup, help="key = value settings file")
        p.add_argument("--dim", type=CONVERTERS["dim"], default=sup)
        p.add_argument("--p", type=exponent, default=sup, help="exponent of the base space l^p")
        p.add_argument("--seed", type=CONVERTERS["seed"], default=sup)
        p.add_argument("--out", default=sup, help="write the JSON report here")
        p.add_argument("--tol", type=positive, default=sup)

    def operator_flags(p):
        p.add_argument("--shift", type=weight, default=sup, help="constant shift weight W")
        p.add_argument("--matrix", type=existing_file, default=sup, help="JSON matrix file")

    a = sub.add_parser("audit-ideal", help="audit the Banach ideal axioms")
    common(a)
    a.add_argument("--schatten", type=exponent, default=sup)
    a.add_argument("--opnorm", action="store_true", default=sup)
    a.add_argument("--samples", type=CONVERTERS["samples"], default=sup)

    c = sub.add_parser("certify", help="run a criterion certifier")
    c.add_argument("which", choices=WHICH)
    common(c)
    operator_flags(c)
    c.add_argument("--kmax", type=CONVERTERS["kmax"], default=sup)
    c.add_argument("--bound", type=positive, default=sup)
    c.add_argument("--schatten", type=exponent, default=sup)
    c.add_argument("--opnorm", action="store_true", default=sup)
    c.add_argument("--left", type=factor_spec, default=sup, help="theorem3 left factor (SC side)")
    c.add_argument("--right", type=factor_spec, default=sup, help="theorem3 right factor (TSC side)")

    pr = sub.add_parser("probe", help="scaled-orbit density diagnostic")
    common(pr)
    operator_flags(pr)
    pr.add_argument("--net", type=CONVERTERS["net"], default=sup)
    pr.add_argument("--eps", type=positive, default=sup)
    pr.add_argument("--N", type=CONVERTERS["N"], default=sup)
    pr.add_argument("--csv", default=sup, help="write per-target rows here")
    return parser


def resolve(argv) -> dict:
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    config = read_config(args.pop("config")) if "config" in args else {}
    for group in EXCLUSIVE:
        given = [k for k in group if k in args]
        if len(given) > 1:
            raise UsageError(f"options {' and '.join('--' + g for g in given)} are exclusive")
        if given:
            for k in group:
                config.pop(k, None)
    settings = dict(DEFAULTS[command])
    settings.update(config)
    settings.update(args)
    if "seed" not in settings:
        env = os.environ.get("LINDYN_SEED")
        try:
            settings["seed"] = CONVERTERS["seed"](env) if env is not None else 0
        except argparse.ArgumentTypeError as exc:
            raise UsageError(f"LINDYN_SEED: {exc}")
    settings["command"] = command
    settings["dim_explicit"] = "dim" in args or "dim" in config
    return settings


# -- building blocks -----------------------------------------------------------

def _load_matrix(path, p) -> MatOp:
    try:
        return serialize.load_operator(path, p)
    except (ValueError, KeyError, TypeError, OSError) as exc:
        raise DataError(f"{path}: {exc}")


def _operator_source(s):
    if "matrix" in s:
        T = _load_matrix(s["matrix"], s["p"])
        if s.get("dim_explicit") and s["dim"] != T.dim:
            raise DataError(f"--dim {s['dim']} disagrees with the {T.dim}x{T.dim} matrix")
        return ("matrix", T)
    return ("shift", s.get("shift", 2))


def _pinv_powers(T: MatOp, kmax: int):
    out, P = [], identity(T.domain)
    for n in range(kmax + 1):
        out.append(MatOp(T.domain, T.domain, np.linalg.pinv(P.entries)))
        P = compose(T, P)
    return out


def _matrix_data(T: MatOp, kmax: int, functionals=False, scalars=None) -> CriterionData:
    cls = Functional if functionals else SpaceVec
    gens = [cls(T.domain, basis(T.domain, j).coords) for j in range(T.dim)]
    return CriterionData(T, range(kmax + 1), gens, gens, _pinv_powers(T, kmax), scalars=scalars)


def _ideal(s, space: SpaceDesc) -> IdealDesc:
    if s.get("opnorm"):
        return IdealDesc.operator_norm(space)
    return IdealDesc.schatten(s.get("schatten", 2.0), space)


def _criterion_data(s) -> CriterionData:
    kind, src = _operator_source(s)
    if kind == "matrix":
        return _matrix_data(src, s["kmax"])
    return shift_data(src, s["dim"], s["kmax"], s["p"])


def _sc_factor(spec, s) -> CriterionData:
    kind, arg = spec
    dim, kmax, p = s["dim"], s["kmax"], s["p"]
    ones = [1.0] * (kmax + 1)
    if kind == "shift":
        return shift_data(arg, dim, kmax, p, scalars=lambda n: complex(arg) ** (-n / 2))
    if kind == "identity":
        d = identity_tsc(SpaceDesc(p, dim), kmax)
        return CriterionData(d.op, d.indices, d.D1, d.D2, d.maps, scalars=ones)
    if kind == "matrix":
        return _matrix_data(_load_matrix(arg, p), kmax, scalars=ones)
    raise UsageError(f"{kind} is not available as the supercyclicity factor")


def _tsc_factor(spec, s) -> TSCData:
    kind, arg = spec
    dim, kmax, p = s["dim"], s["kmax"], s["p"]
    if kind == "identity":
        return identity_tsc(SpaceDesc(p, dim), kmax)
    if kind == "isometry":
        return isometry_tsc(random_unimodular(dim, arg), kmax, p)
    if kind == "shift":
        return shift_tsc(arg, dim, kmax, p)
    d = _matrix_data(_load_matrix(arg, p), kmax)
    return TSCData(d.op, d.indices, d.D1, d.D2, d.maps, scalars=[1.0] * len(d.indices))


def run_certify(s):
    which = s["which"]
    tol = s["tol"]
    if which in ("sc", "hc"):
        data = _criterion_data(s)
        check = check_supercyclicity_criterion if which == "sc" else check_hypercyclicity_criterion
        return check(data, tol)
    if which == "tsc":
        kind, src = _operator_source(s)
        if kind == "matrix":
            d = _matrix_data(src, s["kmax"])
            data = TSCData(d.op, d.indices, d.D1, d.D2, d.maps, scalars=[1.0] * len(d.indices))
        else:
            data = shift_tsc(src, s["dim"], s["kmax"], s["p"])
        bound = s.get("bound")
        if bound is None:
            bound = max(magnitude(g) for g in data.D1 + data.D2)
        return check_tsc(data, bound, tol)
    if which == "lift-left":
        data = _criterion_data(s)
        space = data.op.domain
        Phi = [coordinate_functional(space, j) for j in range(space.dim)]
        return check_supercyclicity_criterion(lift_left(data, Phi, _ideal(s, space)), tol)
    if which == "lift-right":
        kind, src = _operator_source(s)
        if kind == "matrix":
            adj = _matrix_data(adjoint(src), s["kmax"], functionals=True)
        else:
            adj = dual_shift_data(src, s["dim"], s["kmax"], s["p"])
        space = adj.op.domain
        D = [basis(space, j) for j in range(space.dim)]
        return check_supercyclicity_criterion(lift_right(adj, D, _ideal(s, space)), tol)
    # theorem3
    sc = _sc_factor(s.get("left", ("shift", 2)), s)
    tsc = _tsc_factor(s.get("right", ("identity", None)), s)
    return check_theorem3(sc, tsc, tol, bound=s.get("bound", math.inf))


def run_audit(s):
    ideal = _ideal(s, SpaceDesc(s["p"], s["dim"]))
    report = audit_ideal_axioms(ideal, s["samples"], seed=s["seed"], tol=s["tol"])
    return report, (EXIT_OK if report.ok else EXIT_FAIL)


def run_probe(s):
    kind, src = _operator_source(s)
    if kind == "matrix":
        T = src
    else:
        T = weighted_backward_shift(src, s["dim"], s["p"])
    x = SpaceVec(T.domain, 2.0 ** -np.arange(T.dim))
    return density_report(T, x, s["net"], s["eps"], s["N"], seed=s["seed"])


def _emit(s, payload: dict):
    text = serialize.report_text(payload)
    if "out" in s:
        serialize.atomic_write_text(s["out"], text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        s = resolve(argv)
        command = s["command"]
        if command == "audit-ideal":
            report, code = run_audit(s)
            _emit(s, report.to_dict())
            return code
        if command == "probe":
            report = run_probe(s)
            _emit(s, report.summary())
            if "csv" in s:
                serialize.atomic_write_text(s["csv"], serialize.density_csv(report))
            return EXIT_OK
        try:
            report = run_certify(s)
        except WindowViolationError as exc:
            if exc.report is not None:
                _emit(s, exc.report.to_dict())
            print(f"lindyn: window violation: {exc}", file=sys.stderr)
            return EXIT_WINDOW
        _emit(s, report.to_dict())
        return report.exit_code
    except UsageError as exc:
        print(f"lindyn: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, LindynError, ValueError) as exc:
        print(f"lindyn: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
