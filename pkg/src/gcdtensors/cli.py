"""Command-line front end.

Every command writes one JSON document (stdout or ``--out``) that echoes
the resolved configuration.  Exit status: 0 success, 1 usage or
validation error, 2 a mathematical check failed (oracle mismatch or a
lower-bound scan violation).
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import numtheory as nt
from .determinant import conjecture_scan, det_closed_form, tensor_det_oracle
from .errors import GcdTensorError, UsageError
from .gcdtensor import build_gcd_tensor, factorize, reconstruct, scp_decompose
from .poset import (
    build_meet_tensor,
    det_closed_form_meet,
    is_meet_closed,
    label_str,
    lattice_from_json,
    meet_closure,
    meet_decompose_factorize,
    resolve_label,
)
from .positivity import DEFAULT_ITERATIONS, DEFAULT_RESTARTS, DEFAULT_STEP, extreme_form_on_sphere, psd_sample_check
from .tensor import Tensor, entrywise_map, hadamard_power, relative_error

EXIT_OK, EXIT_USAGE, EXIT_VIOLATION = 0, 1, 2
FLOAT_RTOL = 1e-9


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _int_set(text: str) -> list[int]:
    try:
        values = [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    return values


def _exponent(text: str):
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    return value.numerator if value.denominator == 1 else value


def _g_function(text: str):
    """``power:R`` (p ** R), ``sigma`` (divisor sum) or ``phi`` (totient)."""
    if text.startswith("power:"):
        r = _exponent(text.split(":", 1)[1])
        if isinstance(r, Fraction):
            return lambda p: float(p) ** float(r)
        return lambda p: p**r
    if text == "sigma":
        return lambda p: sum(nt.divisors(p))
    if text == "phi":
        return nt.euler_phi
    raise UsageError(f"unknown g {text!r}; use power:R, sigma or phi")


def _load_json(path: str):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from None


def _tensor_input(args) -> Tensor:
    if args.tensor:
        obj = _load_json(args.tensor)
        return Tensor.from_json(obj.get("tensor", obj))
    if args.set is None or args.order is None:
        raise UsageError("give either --tensor FILE or both --set and --order")
    return build_gcd_tensor(args.set, args.order)


def _add_set_order(p, required=True):
    p.add_argument("--set", type=_int_set, required=required, help="comma-separated distinct positive integers")
    p.add_argument("--order", type=int, required=required, help="tensor order m >= 2")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gcdtensors", description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default="-", help="output file (default stdout)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("build", help="GCD tensor on a set")
    _add_set_order(p)

    p = sub.add_parser("decompose", help="strongly CP decomposition of a GCD tensor")
    _add_set_order(p, required=False)
    p.add_argument("--from", dest="source", help="read set and order from a `build` output file")
    p.add_argument("--scheme", choices=["phi", "psi", "mult", "fractional"], default="phi")
    p.add_argument("--power", type=_exponent, help="exponent r for --scheme fractional")
    p.add_argument("--g", default=None, help="g for --scheme mult: power:R, sigma or phi")

    p = sub.add_parser("factorize", help="T = D x_1 E ... x_m E")
    _add_set_order(p)
    p.add_argument("--scheme", choices=["phi", "psi"], default="phi")

    p = sub.add_parser("det", help="closed-form and/or oracle determinant")
    _add_set_order(p, required=False)
    p.add_argument("--tensor", help="tensor JSON file instead of --set/--order")
    p.add_argument("--closed-form", choices=["phi", "psi", "mult"])
    p.add_argument("--g", default=None, help="g for --closed-form mult (exact values): power:K, sigma or phi")
    p.add_argument("--oracle", action="store_true")
    p.add_argument("--verify-oracle", action="store_true", help="compute both and exit 2 on mismatch")

    p = sub.add_parser("hadamard-power", help="decomposition of the entrywise power T^r")
    _add_set_order(p)
    p.add_argument("--power", type=_exponent, required=True)

    p = sub.add_parser("psd-check", help="search for x with A x^m < 0")
    _add_set_order(p, required=False)
    p.add_argument("--tensor")
    p.add_argument("--trials", type=int, default=1000)

    p = sub.add_parser("extreme-form", help="extreme of A x^m on the m-norm sphere")
    _add_set_order(p, required=False)
    p.add_argument("--tensor")
    p.add_argument("--mode", choices=["min", "max"], default="min")
    p.add_argument("--restarts", type=int, default=DEFAULT_RESTARTS)
    p.add_argument("--iterations", type=int, default=DEFAULT_ITERATIONS)
    p.add_argument("--step", type=float, default=DEFAULT_STEP)

    p = sub.add_parser("scan-conjecture", help="exhaustive determinant lower-bound scan")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--max", dest="max_value", type=int, required=True)

    for name, help_text in [
        ("lattice-build", "validate a meet semilattice (and optionally build a meet tensor)"),
        ("lattice-det", "closed-form determinant of a meet tensor"),
        ("lattice-decompose", "decomposition and factorization of a meet tensor"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--lattice", required=True, help="lattice JSON file")
        p.add_argument("--subset", nargs="+", required=name != "lattice-build", help="element labels")
        p.add_argument("--order", type=int, required=name != "lattice-build")
        if name == "lattice-det":
            p.add_argument("--verify-oracle", action="store_true")
        if name == "lattice-decompose":
            p.add_argument("--closure", nargs="+", help="meet-closed superset F (default: meet closure)")
    return parser


# ---------------------------------------------------------------------------
# commands; each returns (payload, exit_code)


def cmd_build(args):
    T = build_gcd_tensor(args.set, args.order)
    return {"set": list(args.set), "order": args.order, "tensor": T.to_json()}, EXIT_OK


def cmd_decompose(args):
    target = None
    if args.source:
        obj = _load_json(args.source)
        try:
            args.set, args.order = obj["set"], obj["order"]
        except KeyError:
            raise UsageError(f"{args.source} is not a `build` output") from None
        target = Tensor.from_json(obj["tensor"])
    if args.set is None or args.order is None:
        raise UsageError("give --set and --order, or --from FILE")
    if args.scheme == "fractional" and args.power is None:
        raise UsageError("--scheme fractional needs --power")
    if args.scheme == "mult" and not args.g:
        raise UsageError("--scheme mult needs --g")
    g = _g_function(args.g) if args.scheme == "mult" else None
    d = scp_decompose(args.set, args.order, args.scheme, g=g, r=args.power)
    return _decomposition_payload(d, args, target)


def _decomposition_payload(d, args, target=None):
    R = reconstruct(d)
    if target is None:
        T = build_gcd_tensor(args.set, args.order)
        if d.scheme == "fractional":
            target = hadamard_power(T, args.power)
        elif d.scheme == "multiplicative":
            target = entrywise_map(T, _g_function(args.g))
        else:
            target = T
    if R.kind == "float64" or target.kind == "float64":
        err = relative_error(R.astype("float64"), target.astype("float64"))
        matches = err <= FLOAT_RTOL
    else:
        err = 0.0 if R == target else None
        matches = R.astype("rational") == target.astype("rational")
    payload = {
        "decomposition": d.to_json(),
        "certified_strongly_cp": d.certified,
        "reconstruction_matches": bool(matches),
        "reconstruction_relative_error": err,
    }
    return payload, EXIT_OK if matches else EXIT_VIOLATION


def cmd_factorize(args):
    fac = factorize(args.set, args.order, args.scheme)
    product = fac.product()
    matches = product == build_gcd_tensor(args.set, args.order)
    payload = {"D_diagonal": [str(w) for w in _diagonal(fac.D)], "D": fac.D.to_json(), "E": fac.E.to_json(),
               "product": product.to_json(), "product_matches": matches}
    return payload, EXIT_OK if matches else EXIT_VIOLATION


def _diagonal(D: Tensor):
    return [D.data[(i,) * D.order] for i in range(D.dim)]


def cmd_det(args):
    if not (args.closed_form or args.oracle or args.verify_oracle):
        args.oracle = True
    payload = {}
    closed = oracle = None
    if args.closed_form or args.verify_oracle:
        if args.set is None or args.order is None:
            raise UsageError("closed forms need --set and --order")
        scheme = args.closed_form or "phi"
        g = None
        if scheme == "mult":
            if not args.g:
                raise UsageError("--closed-form mult needs --g")
            g = _g_function(args.g)
        closed = det_closed_form(args.set, args.order, "multiplicative" if scheme == "mult" else scheme, g=g)
        payload["closed_form"] = closed.to_json()
    if args.oracle or args.verify_oracle:
        T = _tensor_input(args)
        if args.closed_form == "mult" and not args.tensor:
            T = entrywise_map(T, _g_function(args.g))
        oracle = tensor_det_oracle(T)
        payload["oracle"] = oracle.to_json()
    code = EXIT_OK
    if closed is not None and oracle is not None:
        agree = closed.same_value(oracle)
        payload["oracle_agreement"] = agree
        if not agree:
            code = EXIT_VIOLATION
    return payload, code


def cmd_hadamard_power(args):
    d = scp_decompose(args.set, args.order, "fractional", r=args.power)
    payload, code = _decomposition_payload(d, args)
    payload["tensor"] = hadamard_power(build_gcd_tensor(args.set, args.order), args.power).to_json()
    return payload, code


def cmd_psd_check(args):
    report = psd_sample_check(_tensor_input(args), trials=args.trials, seed=args.seed)
    return {"report": report.to_json()}, EXIT_OK


def cmd_extreme_form(args):
    res = extreme_form_on_sphere(
        _tensor_input(args), mode=args.mode, restarts=args.restarts,
        iterations=args.iterations, seed=args.seed, step=args.step,
    )
    return {"result": res.to_json()}, EXIT_OK


def cmd_scan_conjecture(args):
    report = conjecture_scan(args.n, args.order, args.max_value)
    return {"report": report.to_json()}, EXIT_OK if report.ok else EXIT_VIOLATION


def _lattice_args(args):
    L, g = lattice_from_json(_load_json(args.lattice))
    S = [resolve_label(L, x) for x in args.subset] if args.subset else None
    return L, g, S


def _need_g(g):
    if g is None:
        raise UsageError("lattice JSON has no valuation \"g\"")
    return g


def cmd_lattice_build(args):
    L, g, S = _lattice_args(args)
    payload = {
        "lattice": L.to_json(),
        "meet_table": [[label_str(L.meet(a, b)) for b in L.elements] for a in L.elements],
    }
    if S is not None:
        payload["subset"] = [label_str(s) for s in S]
        payload["meet_closed"] = is_meet_closed(L, S)
        if args.order is not None:
            payload["tensor"] = build_meet_tensor(L, S, _need_g(g), args.order).to_json()
    return payload, EXIT_OK


def cmd_lattice_det(args):
    L, g, S = _lattice_args(args)
    report = det_closed_form_meet(L, S, _need_g(g), args.order)
    payload = {"subset": [label_str(s) for s in S], "closed_form": report.to_json()}
    code = EXIT_OK
    if args.verify_oracle:
        oracle = tensor_det_oracle(build_meet_tensor(L, S, g, args.order))
        payload["oracle"] = oracle.to_json()
        payload["oracle_agreement"] = report.same_value(oracle)
        code = EXIT_OK if payload["oracle_agreement"] else EXIT_VIOLATION
    return payload, code


def _same_tensor(R: Tensor, target: Tensor) -> bool:
    if R.kind == "float64" or target.kind == "float64":
        return relative_error(R.astype("float64"), target.astype("float64")) <= FLOAT_RTOL
    return R.astype("rational") == target.astype("rational")


def cmd_lattice_decompose(args):
    L, g, S = _lattice_args(args)
    F = [resolve_label(L, x) for x in args.closure] if args.closure else meet_closure(L, S)
    fac = meet_decompose_factorize(L, S, _need_g(g), args.order, F)
    target = build_meet_tensor(L, S, g, args.order)
    matches = all(_same_tensor(R, target) for R in (reconstruct(fac.decomposition), fac.product()))
    d = fac.decomposition.to_json()
    d["labels"] = [label_str(f) for f in F]
    payload = {
        "subset": [label_str(s) for s in S],
        "decomposition": d,
        "E": {"rows": [label_str(s) for s in S], "cols": d["labels"], "matrix": fac.E.matrix.data.tolist()},
        "reconstruction_matches": bool(matches),
    }
    return payload, EXIT_OK if matches else EXIT_VIOLATION


COMMANDS = {
    "build": cmd_build,
    "decompose": cmd_decompose,
    "factorize": cmd_factorize,
    "det": cmd_det,
    "hadamard-power": cmd_hadamard_power,
    "psd-check": cmd_psd_check,
    "extreme-form": cmd_extreme_form,
    "scan-conjecture": cmd_scan_conjecture,
    "lattice-build": cmd_lattice_build,
    "lattice-det": cmd_lattice_det,
    "lattice-decompose": cmd_lattice_decompose,
}


def _config(args) -> dict:
    out = {}
    for key, value in sorted(vars(args).items()):
        if isinstance(value, Fraction):
            value = str(value)
        elif isinstance(value, tuple):
            value = list(value)
        out[key] = value
    return out


def _emit(doc: dict, out: str) -> None:
    text = json.dumps(doc, indent=2, default=str)
    if out == "-":
        sys.stdout.write(text + "\n")
    else:
        with open(out, "w") as fh:
            fh.write(text + "\n")


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        payload, code = COMMANDS[args.command](args)
    except GcdTensorError as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return EXIT_USAGE
    doc = {"command": args.command, "config": _config(args)}
    doc.update(payload)
    doc["exit_code"] = code
    try:
        _emit(doc, args.out)
    except OSError as exc:
        sys.stderr.write(json.dumps({"error": "OSError", "message": str(exc)}) + "\n")
        return EXIT_USAGE
    return code


if __name__ == "__main__":
    sys.exit(main())
