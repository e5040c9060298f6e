"""Command-line front end.

Exit codes: 0 success, 1 conditions failed or verification failed,
2 invalid input or malformed file, 3 search exhausted.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import os
import sys
import tempfile

from . import __version__
from .certificate import CertificateFormatError, to_json
from .polarize import certify_evil, verify_certificate
from .realquad import FieldError, RealQuadField
from .ssembed import InputError, check_thmA, disc_generator, validate_field_and_prime

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_EXHAUSTED = 0, 1, 2, 3
SCAN_GUARD = 5000

log = logging.getLogger("evilforge")


def _setup_logging() -> None:
    level = os.environ.get("EVILFORGE_LOG", "error").lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(stream=sys.stderr, level=levels.get(level, logging.ERROR), format="%(levelname)s %(name)s: %(message)s")


def atomic_write(path: str, text: str) -> None:
    """Write via a temporary file in the target directory and rename into place."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".evilforge-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text: str, out: str | None) -> None:
    if out:
        atomic_write(out, text)
    else:
        sys.stdout.write(text)


def _pair(text: str, d: int) -> tuple:
    try:
        parts = [int(v) for v in text.split(",")]
    except ValueError as exc:
        raise InputError(f"expected integers like 'x,y', got {text!r}") from exc
    if len(parts) == 1:
        parts.append(0)
    if len(parts) != 2:
        raise InputError(f"expected one or two coordinates, got {text!r}")
    if d == 1:
        if parts[1] != 0:
            raise InputError("L = Q takes a single integer coordinate")
        return (parts[0],)
    return tuple(parts)


def _field(d: int) -> RealQuadField:
    try:
        return RealQuadField(d)
    except FieldError as exc:
        raise InputError(str(exc)) from exc


def _csv(rows) -> str:
    buf = io.StringIO()
    for r in rows:
        buf.write(",".join(r) + "\n")
    return buf.getvalue()


# ----------------------------------------------------------------------------
# commands


def cmd_check(args) -> int:
    L = _field(args.d)
    K = disc_generator(L, _pair(args.b, args.d), _pair(args.c, args.d))
    reports = []
    for p in args.p:
        validate_field_and_prime(L, p)
        reports.append(check_thmA(K, p))
    ok = all(r.local_everywhere for r in reports)
    if args.format == "csv":
        rows = [["p", "d", "m", "norm_disc", "verdicts", "p_unramified_in_K", "conditions_pass", "local_everywhere", "order_is_maximal"]]
        for r in reports:
            rows.append([
                str(r.p), str(r.d), ";".join(str(v) for v in r.m), str(abs(r.norm_m)),
                ";".join(f"{v.case_tag}{int(v.representable)}" for v in r.verdicts),
                str(r.unramified_in_K).lower(), str(r.conditions_pass).lower(), str(r.local_everywhere).lower(),
                str(r.is_maximal).lower(),
            ])
        _emit(_csv(rows), args.out)
    else:
        doc = {"command": "check", "all_pass": ok, "reports": [r.as_dict() for r in reports]}
        _emit(json.dumps(doc, indent=2) + "\n", args.out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_certify(args) -> int:
    if len(args.p) != 1:
        raise InputError("certify takes exactly one --p")
    p = args.p[0]
    d = args.d
    _field(d)
    outcome = certify_evil(p, d, _pair(args.b, d), _pair(args.c, d), search_bound=args.bound)
    if outcome.status == "certified":
        _emit(to_json(outcome.certificate), args.out)
        return EXIT_OK
    partial = {
        "command": "certify",
        "status": outcome.status,
        "stage": outcome.stage,
        "detail": {k: str(v) for k, v in outcome.detail.items()},
        "report": outcome.report.as_dict(),
    }
    sys.stdout.write(json.dumps(partial, indent=2) + "\n")
    return EXIT_FAIL if outcome.status == "conditions_failed" else EXIT_EXHAUSTED


def cmd_verify(args) -> int:
    try:
        with open(args.path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        print(f"cannot read {args.path}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        ok, items = verify_certificate(data)
    except CertificateFormatError as exc:
        print(f"malformed certificate: {exc}", file=sys.stderr)
        return EXIT_INPUT
    for name, passed in items:
        if not passed:
            print(f"FAILED {name}", file=sys.stderr)
    print("certificate verified" if ok else "certificate rejected")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_scan(args) -> int:
    from .grids import CSV_HEADER, scan_rows

    if args.m_max < 0 or args.m_max > SCAN_GUARD or args.bound > SCAN_GUARD:
        raise InputError(f"scan ranges must stay within {SCAN_GUARD}")
    L = _field(args.d)
    for p in args.p:
        validate_field_and_prime(L, p)
    rows = scan_rows(tuple(args.p), args.d, args.m_max, args.bound)
    n_local = sum(r.local_pass for r in rows)
    n_wit = sum(r.witness is not None for r in rows)
    summary = f"rows={len(rows)} local_pass={n_local} global_witness={n_wit}"
    if args.format == "csv":
        _emit(_csv([CSV_HEADER] + [r.csv_fields() for r in rows]), args.out)
        print(summary, file=sys.stderr)
    else:
        doc = {
            "command": "scan",
            "rows": [dict(zip(CSV_HEADER, r.csv_fields())) for r in rows],
            "summary": {"rows": len(rows), "local_pass": n_local, "global_witness": n_wit},
        }
        _emit(json.dumps(doc, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .selftest import run_all

    results = run_all()
    for name, ok in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    return EXIT_OK if all(ok for _, ok in results) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="evilforge", description="Local criteria, embeddings and certificates for quartic CM fields.")
    ap.add_argument("--version", action="version", version=f"evilforge {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def field_args(sp, need_bc=True):
        sp.add_argument("--p", type=int, action="append", required=True, help="rational prime (repeatable)")
        sp.add_argument("--d", type=int, required=True, help="squarefree d >= 1; d = 1 means L = Q")
        if need_bc:
            sp.add_argument("--b", required=True, help="b as 'x,y' in the basis 1, w")
            sp.add_argument("--c", required=True, help="c as 'x,y' in the basis 1, w")
        sp.add_argument("--out", help="output path (written atomically)")
        sp.add_argument("--format", choices=("json", "csv"), default="json")

    sp = sub.add_parser("check", help="evaluate the local conditions at each prime")
    field_args(sp)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("certify", help="search for and emit an evil certificate")
    field_args(sp)
    sp.add_argument("--bound", type=int, default=600, help="search bound on Tr(m) and d_L")
    sp.set_defaults(func=cmd_certify)

    sp = sub.add_parser("verify", help="re-check a certificate file")
    sp.add_argument("path")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("scan", help="tabulate local verdicts and global witnesses over m")
    field_args(sp, need_bc=False)
    sp.add_argument("--m-max", type=int, default=100, help="largest Norm(m)")
    sp.add_argument("--bound", type=int, default=600, help="search bound on Tr(m)")
    sp.set_defaults(func=cmd_scan)

    sp = sub.add_parser("selftest", help="run the built-in oracle corpus")
    sp.set_defaults(func=cmd_selftest)
    return ap


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, FieldError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
