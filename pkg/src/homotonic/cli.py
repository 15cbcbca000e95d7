"""Command-line front end: ``homotonic {check,certify,threshold,demo,radius}``.

Exit codes: 0 success / holds / certified, 1 a condition fails or the norm
is refuted, 2 input error, 3 certificate refused because the algebra is not
homotonic (override with ``--force``).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from homotonic import __version__
from homotonic.core import DEFAULT_TOL, Carrier, Element, sample_rng
from homotonic.homotonicity import check_ii, theorem_equivalence_suite
from homotonic.norms import (
    NotHomotonicError,
    Weight,
    certify,
    threshold_scale,
    weight_from_json,
)
from homotonic.products import (
    Convolution,
    MatrixProduct,
    Plane,
    algebra,
    algebra_from_json,
    dilation_algebra,
    jordanize,
)
from homotonic.spectral import (
    berger_check,
    matrix_from_json,
    numerical_radius,
    radius_submult_witness,
)

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_REFUSED = 0, 1, 2, 3
DEMOS = ("jordan-nonassoc", "plane-complex", "radius")
FAMILIES = ("matrix-uniform", "convolution", "dilation", "custom")


class InputError(Exception):
    pass


def _default_seed() -> int:
    raw = os.environ.get("HOMOTONIC_SEED")
    if raw is None:
        return 0
    try:
        seed = int(raw)
    except ValueError:
        raise InputError(f"HOMOTONIC_SEED must be an integer, got {raw!r}")
    if not 0 <= seed < 2**64:
        raise InputError("HOMOTONIC_SEED must be a 64-bit unsigned integer")
    return seed


def load_json(source: str):
    """Read JSON from a file path, or parse ``source`` itself if it looks inline."""
    text = source
    if not source.lstrip().startswith(("{", "[")):
        try:
            with open(source) as fh:
                text = fh.read()
        except OSError as exc:
            raise InputError(f"cannot read {source}: {exc.strerror}")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {source}: {exc.msg} at line {exc.lineno} "
                         f"column {exc.colno} (char {exc.pos})")


def format_matrix(M: np.ndarray) -> str:
    """Aligned grid with 1-based row and column labels."""
    n, m = M.shape
    cells = [[_fmt(x) for x in row] for row in M]
    width = max(len(c) for row in cells for c in row)
    head = "      " + " ".join(f"{k + 1:>{width}}" for k in range(m))
    lines = [head] + [f"{j + 1:>4}  " + " ".join(f"{c:>{width}}" for c in cells[j])
                      for j in range(n)]
    return "\n".join(lines)


def _fmt(x) -> str:
    if np.iscomplexobj(x) and x.imag != 0:
        return f"{x.real:.6g}{x.imag:+.6g}i"
    return f"{np.real(x):.6g}"


def _emit(args, command: str, result: dict, human: list[str]) -> None:
    if args.json:
        envelope = {
            "tool": "homotonic",
            "version": __version__,
            "command": command,
            "seed": args.seed,
            "samples": args.samples,
            "tol": args.tol,
            "result": result,
        }
        print(json.dumps(envelope, indent=2, sort_keys=True))
    else:
        print("\n".join(human))


def cmd_check(args) -> int:
    alg = algebra_from_json(load_json(args.algebra))
    report = theorem_equivalence_suite(alg, args.samples, args.seed, args.tol)
    human = [f"algebra {alg.name} on a {alg.carrier.kind} carrier of size {alg.carrier.size}"]
    for r in report.reports.values():
        human.append("  " + r.describe())
        if not r.holds:
            for k, f in enumerate(r.witness):
                human.append(f"    witness[{k}] = {_render(f)}")
    human.append(f"equivalent characterisations agree: {report.consistent}")
    human.append("homotonic" if report.homotonic else "NOT homotonic")
    _emit(args, "check", report.to_json(), human)
    return EXIT_OK if report.homotonic else EXIT_FAIL


def _render(f: Element) -> str:
    if f.carrier.kind == "matrix-grid":
        return "\n" + format_matrix(f.as_matrix())
    return "[" + ", ".join(_fmt(x) for x in f.values) + "]"


def cmd_certify(args) -> int:
    alg = algebra_from_json(load_json(args.algebra))
    w = weight_from_json(load_json(args.weight), alg.carrier)
    pre = check_ii(alg, args.samples, args.seed, args.tol)
    human = []
    if not pre.holds:
        human.append(f"warning: algebra is not homotonic; {pre.describe()}")
    try:
        cert = certify(alg, w, args.tol, force=args.force)
    except NotHomotonicError as exc:
        msg = (f"certificate refused: {exc}. The criterion characterises sub-multiplicativity "
               "only on homotonic algebras; use --force to evaluate it anyway.")
        _emit(args, "certify", {"verdict": "refused", "reason": str(exc),
                                "precheck": pre.to_json()}, human + [msg])
        return EXIT_REFUSED
    result = cert.to_json()
    result["precheck"] = pre.to_json()
    human.append(f"{cert.verdict}: margin max(winv*winv - winv) = {cert.margin:.17g}")
    human.append(f"||winv||_w = {cert.norms['f']:.17g}, "
                 f"||winv*winv||_w = {cert.norms['product']:.17g}")
    if cert.forced:
        human.append(cert.note)
    if not cert.certified:
        rendered = _render(cert.witness[0])
        human.append("witness pair f = g = winv:" + (rendered if rendered.startswith("\n")
                                                     else " " + rendered))
    _emit(args, "certify", result, human)
    return EXIT_OK if cert.certified else EXIT_FAIL


def _threshold_family(args):
    fam = args.family
    if fam == "matrix-uniform":
        n = args.n
        return algebra(MatrixProduct(n)), Weight.uniform(Carrier.matrix(n), 1.0), float(n)
    if fam == "convolution":
        prod = Convolution(args.kappa, args.p, args.grid)
        return algebra(prod), Weight.uniform(prod.carrier, 1.0), args.kappa * args.p
    if fam == "dilation":
        return dilation_algebra(), Weight.dilation(1.0), 1.0
    if fam == "custom":
        if not (args.algebra and args.weight):
            raise InputError("custom family needs --algebra and --weight")
        alg = algebra_from_json(load_json(args.algebra))
        return alg, weight_from_json(load_json(args.weight), alg.carrier), None
    raise InputError(f"unknown family {fam!r}; choose from {', '.join(FAMILIES)}")


def cmd_threshold(args) -> int:
    alg, w0, expected = _threshold_family(args)
    mu = threshold_scale(alg, w0, args.tol)
    text = np.format_float_positional(mu, precision=12, unique=True, fractional=False, trim="0")
    result = {"family": args.family, "mu_star": mu}
    code = EXIT_OK
    if expected is not None:
        result["closed_form"] = expected
        agrees = abs(mu - expected) <= 1e-9 * max(1.0, expected)
        result["agrees"] = agrees
        if not agrees:
            code = EXIT_FAIL
    if args.json:
        _emit(args, "threshold", result, [])
    else:
        print(text)
        if code:
            print(f"mismatch with closed form {expected}", file=sys.stderr)
    return code


def demo_jordan(n: int) -> dict:
    if n < 2:
        raise InputError("jordan-nonassoc needs n >= 2")
    carrier = Carrier.matrix(n)
    A = np.zeros((n, n))
    A[0, 1] = 1.0
    B = np.zeros((n, n))
    B[1, 0] = 1.0
    J = jordanize(MatrixProduct(n))
    a, b = Element(carrier, A), Element(carrier, B)
    left = J(J(a, b), b)
    right = J(a, J(b, b))
    return {"n": n, "A": A, "B": B, "left": left.as_matrix(), "right": right.as_matrix(),
            "left_minus_half_B": float(np.max(np.abs(left.as_matrix() - 0.5 * B))),
            "right_max_abs": float(np.max(np.abs(right.as_matrix())))}


def demo_plane(samples: int, seed: int) -> dict:
    prod = Plane()
    carrier = prod.carrier
    worst = 0.0
    for i in range(samples):
        x, y = sample_rng(seed, i, (21,)).uniform(-1.0, 1.0, (2, 2))
        got = prod(Element(carrier, x), Element(carrier, y)).values
        z = complex(*x) * complex(*y)
        worst = max(worst, abs(got[0] - z.real), abs(got[1] - z.imag))
    return {"pairs": samples, "max_defect": worst}


def demo_radius(count: int, seed: int, max_power: int = 5) -> dict:
    w = radius_submult_witness()
    violations, worst = 0, 0.0
    for i in range(count):
        rng = sample_rng(seed, i, (31,))
        n = int(rng.integers(2, 6))
        A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        rep = berger_check(A, max_power)
        violations += not rep.holds
        worst = max(worst, rep.worst_ratio)
    return {"r_A": w.r_A, "r_B": w.r_B, "r_AB": w.r_AB,
            "submultiplicative": w.r_AB <= w.r_A * w.r_B,
            "berger_matrices": count, "berger_max_power": max_power,
            "berger_violations": violations, "berger_worst_ratio": worst}


def cmd_demo(args) -> int:
    if args.name == "jordan-nonassoc":
        d = demo_jordan(args.n)
        human = [f"A =\n{format_matrix(d['A'])}", f"B =\n{format_matrix(d['B'])}",
                 f"(A o B) o B =\n{format_matrix(d['left'])}",
                 f"A o (B o B) =\n{format_matrix(d['right'])}",
                 f"max |(A o B) o B - B/2| = {d['left_minus_half_B']}",
                 f"max |A o (B o B)| = {d['right_max_abs']}",
                 "the Jordan product is not associative"]
        ok = d["left_minus_half_B"] == 0.0 and d["right_max_abs"] == 0.0
        result = {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in d.items()}
    elif args.name == "plane-complex":
        result = demo_plane(args.samples, args.seed)
        ok = result["max_defect"] <= 1e-12
        human = [f"(a,b)x(c,d) versus (a+ib)(c+id) on {result['pairs']} random pairs: "
                 f"max defect {result['max_defect']:.3g}"]
    elif args.name == "radius":
        result = demo_radius(200, args.seed)
        ok = not result["submultiplicative"] and result["berger_violations"] == 0
        human = [f"r(A) = {result['r_A']:.12g}, r(B) = {result['r_B']:.12g}, "
                 f"r(AB) = {result['r_AB']:.12g} > r(A) r(B) = "
                 f"{result['r_A'] * result['r_B']:.12g}: not sub-multiplicative",
                 f"Berger sweep over {result['berger_matrices']} random matrices, "
                 f"k <= {result['berger_max_power']}: {result['berger_violations']} violations, "
                 f"worst r(A^k)/r(A)^k = {result['berger_worst_ratio']:.12g}"]
    else:
        raise InputError(f"unknown demo {args.name!r}; available: {', '.join(DEMOS)}")
    result["name"] = args.name
    _emit(args, "demo", result, human)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_radius(args) -> int:
    A = matrix_from_json(load_json(args.matrix))
    r = numerical_radius(A)
    result = {"radius": r}
    human = [f"r(A) = {r:.12g}"]
    code = EXIT_OK
    if args.berger:
        rep = berger_check(A, args.berger)
        result["berger"] = rep.to_json()
        human.append(f"Berger r(A^k) <= r(A)^k for k <= {args.berger}: "
                     f"{'holds' if rep.holds else 'VIOLATED'}, worst ratio {rep.worst_ratio:.12g}")
        code = EXIT_OK if rep.holds else EXIT_FAIL
    _emit(args, "radius", result, human)
    return code


def _positive_int(text: str) -> int:
    val = int(text)
    if val < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return val


def _positive_float(text: str) -> float:
    val = float(text)
    if not (val > 0 and math.isfinite(val)):
        raise argparse.ArgumentTypeError("must be a positive number")
    return val


def _seed(text: str) -> int:
    val = int(text)
    if not 0 <= val < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return val


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=argparse.SUPPRESS,
                        help="random seed (default: $HOMOTONIC_SEED or 0)")
    common.add_argument("--samples", type=_positive_int, default=argparse.SUPPRESS,
                        help="random samples per check (default 1000)")
    common.add_argument("--tol", type=_positive_float, default=argparse.SUPPRESS,
                        help=f"relative tolerance (default {DEFAULT_TOL:g})")
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS,
                        help="emit a JSON report")
    common.add_argument("--force", action="store_true", default=argparse.SUPPRESS,
                        help="certify even when the algebra is not homotonic")

    parser = argparse.ArgumentParser(prog="homotonic", parents=[common],
                                     description="Homotonic algebras and weighted sup norms.")
    parser.add_argument("--version", action="version", version=f"homotonic {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="decide homotonicity of an algebra")
    p.add_argument("algebra", help="algebra JSON file (or inline JSON)")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("certify", parents=[common],
                       help="decide sub-multiplicativity of a weighted sup norm")
    p.add_argument("algebra")
    p.add_argument("weight", help="weight JSON: list, {\"uniform\": mu} or {\"dilation_nu\": nu}")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("threshold", parents=[common],
                       help="smallest certified scale mu* of a weight family")
    p.add_argument("family", help=", ".join(FAMILIES))
    p.add_argument("--n", type=_positive_int, default=2)
    p.add_argument("--kappa", type=_positive_float, default=1.0)
    p.add_argument("--p", type=_positive_float, default=1.0)
    p.add_argument("--grid", type=_positive_int, default=128)
    p.add_argument("--algebra")
    p.add_argument("--weight")
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("demo", parents=[common], help=", ".join(DEMOS))
    p.add_argument("name")
    p.add_argument("--n", type=_positive_int, default=2)
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("radius", parents=[common], help="numerical radius of a matrix")
    p.add_argument("matrix", help='matrix JSON {"n": n, "entries": [[re, im], ...]}')
    p.add_argument("--berger", type=int, default=0, metavar="K",
                   help="also check r(A^k) <= r(A)^k for k = 2..K")
    p.set_defaults(func=cmd_radius)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        defaults = {"seed": _default_seed(), "samples": 1000, "tol": DEFAULT_TOL,
                    "json": False, "force": False}
        for key, val in defaults.items():
            if not hasattr(args, key):
                setattr(args, key, val)
        return args.func(args)
    except (InputError, ValueError, KeyError, TypeError) as exc:
        if isinstance(exc, KeyError):
            exc = f"missing field {exc}"
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
