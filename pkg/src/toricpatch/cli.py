"""Command-line surface: check, make, eval, render, stress, serve."""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import numpy as np

from . import __version__
from .compatibility import (VERDICT_COMPATIBLE, VERDICT_NOT_WEAK,
                            VERDICT_WEAKLY_ONLY, check_compatible)
from .errors import CertificateDisagreement, OutsideDomain, ToricError
from .oracle import stress_certificate
from .patch import eval_patch_many
from .patchfile import (PatchFile, make_tensor, make_triangle, parse_patchfile,
                        serialize_patchfile)
from .render import render_svg

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_WEAKLY_ONLY = 2
EXIT_NOT_WEAK = 3
EXIT_DISAGREEMENT = 4

_VERDICT_EXIT = {
    VERDICT_COMPATIBLE: EXIT_OK,
    VERDICT_WEAKLY_ONLY: EXIT_WEAKLY_ONLY,
    VERDICT_NOT_WEAK: EXIT_NOT_WEAK,
}


def _load_patchfile(path: str) -> PatchFile:
    if path == "-":
        raw = sys.stdin.read()
    else:
        with open(path, "r", encoding="utf-8") as fh:
            raw = fh.read()
    return parse_patchfile(json.loads(raw))


def _emit(text: str, path: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _fmt_num(v: float) -> str:
    # shortest round-trip-exact decimal form (17 significant digits suffice)
    return repr(float(v))


def cmd_check(args) -> int:
    pf = _load_patchfile(args.file)
    control = pf.control
    if args.exact and not pf.exact:
        control = tuple(tuple(Fraction(c) for c in row) for row in control)
    report = check_compatible(pf.lattice, control,
                              exact=args.exact or pf.exact, fast=args.fast)
    print(json.dumps(report.to_dict(), indent=2))
    return _VERDICT_EXIT[report.verdict]


def cmd_make(args) -> int:
    if args.m < 1 or (args.kind == "tensor" and args.n < 1):
        print("degrees must be >= 1", file=sys.stderr)
        return EXIT_INPUT
    pf = make_tensor(args.m, args.n) if args.kind == "tensor" else make_triangle(args.m)
    print(json.dumps(serialize_patchfile(pf), indent=2))
    return EXIT_OK


def cmd_eval(args) -> int:
    pf = _load_patchfile(args.file)
    spec = pf.to_spec()
    if args.at:
        pts = [tuple(p) for p in args.at]
    elif args.grid:
        from .oracle import _domain_samples
        pts = [tuple(p) for p in _domain_samples(spec.poly, args.grid)[0]]
    else:
        print("one of --at or --grid is required", file=sys.stderr)
        return EXIT_INPUT
    header = "x,y,Fx,Fy" + (",Fz" if spec.dim == 3 else "")
    rows = [header]
    skipped = 0
    for p in pts:
        try:
            img = eval_patch_many(spec, [p])[0]
        except OutsideDomain:
            skipped += 1
            continue
        rows.append(",".join(_fmt_num(v) for v in (*p, *img)))
    _emit("\n".join(rows) + "\n", args.out)
    if skipped:
        print(f"warning: skipped {skipped} point(s) outside the domain",
              file=sys.stderr)
    return EXIT_OK


def cmd_render(args) -> int:
    pf = _load_patchfile(args.file)
    if pf.dim != 2:
        print("render supports 2D patches only", file=sys.stderr)
        return EXIT_INPUT
    _emit(render_svg(pf, grid=args.grid), args.out)
    return EXIT_OK


def cmd_stress(args) -> int:
    pf = _load_patchfile(args.file)
    try:
        summary = stress_certificate(
            pf.lattice, pf.control_floats, trials=args.trials, n=args.grid,
            spread=args.spread, seed=args.seed,
            delta_dom=args.delta_dom, eps_img=args.eps_img)
    except CertificateDisagreement as exc:
        print(json.dumps(exc.summary.to_dict(), indent=2))
        print(f"certificate disagreement: {exc}", file=sys.stderr)
        return EXIT_DISAGREEMENT
    print(json.dumps(summary.to_dict(), indent=2))
    return EXIT_OK


def cmd_serve(args) -> int:
    from .server import serve
    serve(args.bind, args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="toricpatch",
        description="Toric Bezier patches with an all-weights injectivity certificate")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="decide compatibility of a patch file")
    p.add_argument("file", help="patch file path, or - for stdin")
    p.add_argument("--exact", action="store_true",
                   help="exact rational arithmetic for the image orientations")
    p.add_argument("--fast", action="store_true",
                   help="stop at the first violating triple")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("make", help="emit a classical identity patch file")
    p.add_argument("kind", choices=["tensor", "triangle"])
    p.add_argument("-m", type=int, required=True)
    p.add_argument("-n", type=int, default=None)
    p.set_defaults(fn=cmd_make)

    p = sub.add_parser("eval", help="evaluate the patch, CSV output")
    p.add_argument("file")
    p.add_argument("--at", nargs=2, type=float, action="append", metavar=("X", "Y"))
    p.add_argument("--grid", type=int, default=None)
    p.add_argument("--out", default="-")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("render", help="render the patch image as SVG")
    p.add_argument("file")
    p.add_argument("--grid", type=int, default=12, help="iso-curves per axis")
    p.add_argument("--out", default="-")
    p.set_defaults(fn=cmd_render)

    p = sub.add_parser("stress", help="stress the certificate against the oracle")
    p.add_argument("file")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--grid", type=int, default=128)
    p.add_argument("--spread", type=float, default=100.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--delta-dom", type=float, default=None)
    p.add_argument("--eps-img", type=float, default=None)
    p.set_defaults(fn=cmd_stress)

    p = sub.add_parser("serve", help="serve the /v1 HTTP API")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--bind", default="127.0.0.1")
    p.set_defaults(fn=cmd_serve)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "kind", None) == "tensor" and args.n is None:
        args.n = args.m
    try:
        return args.fn(args)
    except (ToricError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
