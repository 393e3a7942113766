import argparse
import csv
import logging
import sys
from typing import Optional, Sequence, TextIO

from singlet import acceptance, application, domain_functions
from singlet.domain import value
from singlet.transfer.conversions import (
    CommandResultDTO,
    ComplexDTO,
    EvalContextDTO,
    LabelDTO,
    ModelParamsDTO,
    parse_complex,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED_CHECK = 1
EXIT_INVALID = 2
EXIT_NUMERICAL = 3

CSV_HEADER = ("re_eps", "im_eps", "re_q", "im_q", "regime")


def _complex(text: str) -> complex:
    try:
        return parse_complex(text)
    except ValueError as error:
        raise argparse.ArgumentTypeError(str(error)) from error


# ---- Parser ----
def _parents():
    context = argparse.ArgumentParser(add_help=False)
    context.add_argument("--tau", type=_complex, default=1j, help="modular parameter re,im (default 0,1)")
    context.add_argument("--eps", type=_complex, default=0j, help="regulator re,im (default 0,0)")
    context.add_argument("--tail-tol", type=float, dest="series_tail_tol")
    context.add_argument("--quad-tol", type=float, dest="quad_abs_tol")
    context.add_argument("--precision", type=int, dest="precision_digits")
    context.add_argument("--max-terms", type=int, dest="max_terms")

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--pplus", type=int, required=True)
    model.add_argument("--pminus", type=int, required=True)
    return context, model


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="singlet", description="Regularised singlet algebra characters.")
    parser.add_argument("--log-level", dest="log_level", help="DEBUG, INFO, WARNING, ERROR")
    parser.add_argument("--config", help="key=value file with default settings")
    context, model = _parents()
    commands = parser.add_subparsers(dest="command", required=True)

    char = commands.add_parser("char", parents=[model, context], help="evaluate a character")
    char.add_argument("--label", required=True)
    char.add_argument("--form", default="F", choices=sorted(domain_functions.CHARACTER_FORMS))
    char.add_argument("--order", type=int, help="exact q-expansion up to this order instead")

    stransform = commands.add_parser("stransform", parents=[model, context], help="check an S-transformation")
    target = stransform.add_mutually_exclusive_group(required=True)
    target.add_argument("--label")
    target.add_argument("--false-theta", nargs=2, type=int, metavar=("B", "C"))

    qdim = commands.add_parser("qdim", parents=[model, context], help="regularised quantum dimension")
    qdim.add_argument("--label", required=True)
    qdim.add_argument("--mode", default="closed", choices=("closed", "numeric"))
    qdim.add_argument("--leak", type=int, metavar="M", help="one-sided values at the wall Im eps = M/alpha")

    scan = commands.add_parser("qdim-scan", parents=[model], help="quantum dimensions over an eps grid")
    scan.add_argument("--label", required=True)
    scan.add_argument("--re", nargs=2, type=float, default=(-1.0, 1.0), metavar=("MIN", "MAX"))
    scan.add_argument("--im", nargs=2, type=float, default=(-1.0, 1.0), metavar=("MIN", "MAX"))
    scan.add_argument("--nx", type=int, default=41)
    scan.add_argument("--ny", type=int, default=41)
    scan.add_argument("--format", default="json", choices=("json", "csv"))

    fuse = commands.add_parser("fuse", parents=[model], help="fusion product of two labels")
    fuse.add_argument("left")
    fuse.add_argument("right")

    verlinde = commands.add_parser("verlinde", help="fusion tensor of a named S-matrix")
    source = verlinde.add_mutually_exclusive_group(required=True)
    source.add_argument("--minimal", nargs=2, type=int, metavar=("P_PLUS", "P_MINUS"))
    source.add_argument("--wzw", type=int, metavar="K")

    variety = commands.add_parser("variety", parents=[model, context], help="fusion variety checks")
    action = variety.add_mutually_exclusive_group(required=True)
    action.add_argument("--singular", action="store_true")
    action.add_argument("--parametrize", type=_complex, metavar="T")
    action.add_argument("--uniformise", action="store_true", help="check the curve point at t(eps)")

    qmf = commands.add_parser("qmf", parents=[context], help="quantum modular form checks")
    check = qmf.add_mutually_exclusive_group(required=True)
    check.add_argument("--cocycle", choices=("half", "weight32"))
    check.add_argument("--radial", nargs=3, metavar=("J", "P", "X"))
    qmf.add_argument("--p", type=int)
    qmf.add_argument("--pplus", type=int)
    qmf.add_argument("--pminus", type=int)
    qmf.add_argument("--w", type=_complex, default=complex(-0.3, -0.7))

    selftest = commands.add_parser("selftest", help="run the acceptance criteria")
    selftest.add_argument("--only", type=int, action="append", metavar="N")
    return parser


# ---- Settings ----
def _settings(args: argparse.Namespace) -> application.Settings:
    settings = application.from_environment()
    if args.config:
        settings = application.from_config_file(args.config, settings)
    overrides = {"log_level": args.log_level}
    for key in ("series_tail_tol", "quad_abs_tol", "precision_digits", "max_terms"):
        overrides[key] = getattr(args, key, None)
    return settings.updated(overrides)


def _context(args: argparse.Namespace, settings: application.Settings) -> EvalContextDTO:
    return EvalContextDTO(
        tau=ComplexDTO.from_domain(args.tau),
        eps=ComplexDTO.from_domain(args.eps),
        series_tail_tol=settings.series_tail_tol,
        max_terms=settings.max_terms,
        quad_abs_tol=settings.quad_abs_tol,
        precision_digits=settings.precision_digits,
    )


def _params(args: argparse.Namespace) -> ModelParamsDTO:
    return ModelParamsDTO(p_plus=args.pplus, p_minus=args.pminus)


# ---- Dispatch ----
def _dispatch(args: argparse.Namespace, settings: application.Settings) -> CommandResultDTO:
    if args.command == "char":
        if args.order is not None:
            return domain_functions.expand_character(_params(args), LabelDTO(text=args.label), args.order)
        return domain_functions.evaluate_character(
            _params(args), LabelDTO(text=args.label), _context(args, settings), args.form
        )
    if args.command == "stransform":
        if args.false_theta:
            b, c = args.false_theta
            return domain_functions.verify_false_theta(_params(args), b, c, _context(args, settings))
        return domain_functions.verify_stransform(_params(args), LabelDTO(text=args.label), _context(args, settings))
    if args.command == "qdim":
        if args.leak is not None:
            return domain_functions.leak_points(_params(args), LabelDTO(text=args.label), args.leak)
        return domain_functions.quantum_dimension(
            _params(args), LabelDTO(text=args.label), _context(args, settings), args.mode
        )
    if args.command == "qdim-scan":
        rectangle = (*args.re, *args.im, args.nx, args.ny)
        return domain_functions.scan_quantum_dimension(_params(args), LabelDTO(text=args.label), rectangle)
    if args.command == "fuse":
        return domain_functions.fuse_labels(_params(args), LabelDTO(text=args.left), LabelDTO(text=args.right))
    if args.command == "verlinde":
        return domain_functions.verlinde(minimal=tuple(args.minimal) if args.minimal else None, wzw=args.wzw)
    if args.command == "variety":
        if args.singular:
            return domain_functions.variety_points(_params(args))
        if args.parametrize is not None:
            return domain_functions.variety_parametrize(_params(args), args.parametrize)
        return domain_functions.variety_uniformise(_params(args), _context(args, settings))
    return _dispatch_qmf(args, settings)


def _dispatch_qmf(args: argparse.Namespace, settings: application.Settings) -> CommandResultDTO:
    context = _context(args, settings)
    if args.radial:
        j, p, x = args.radial
        return domain_functions.qmf_radial(int(j), int(p), x, context)
    if args.cocycle == "half":
        return domain_functions.qmf_cocycle_half(args.p, args.w, context)
    return domain_functions.qmf_cocycle_weight32(_params(args), args.w, context)


def _selftest(args: argparse.Namespace, stdout: TextIO) -> int:
    results = acceptance.run_selftest(args.only)
    envelope = CommandResultDTO(
        command="selftest",
        result=[
            {"number": r.number, "title": r.title, "passed": r.passed, "detail": r.detail}
            for r in results
        ],
        diagnostics={"seconds": {str(r.number): round(r.seconds, 3) for r in results}},
    )
    stdout.write(envelope.to_json() + "\n")
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAILED_CHECK


# ---- Output ----
def _write_csv(result: CommandResultDTO, stdout: TextIO) -> None:
    writer = csv.writer(stdout, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in result.result:
        fields = row.model_dump()
        writer.writerow(["" if fields[key] is None else fields[key] for key in CSV_HEADER])


def _check_qmf(parser: argparse.ArgumentParser, args: argparse.Namespace) -> None:
    if args.command != "qmf":
        return
    if args.cocycle == "half" and args.p is None:
        parser.error("qmf --cocycle half needs --p")
    if args.cocycle == "weight32" and (args.pplus is None or args.pminus is None):
        parser.error("qmf --cocycle weight32 needs --pplus and --pminus")


def _exit_code(error: domain_functions.CommandError) -> int:
    return EXIT_NUMERICAL if isinstance(error.__cause__, value.NumericalError) else EXIT_INVALID


def run(argv: Optional[Sequence[str]] = None, stdout: Optional[TextIO] = None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv) if argv is not None else None)
        _check_qmf(parser, args)
    except SystemExit as exit_:
        return int(exit_.code or 0)
    try:
        settings = _settings(args)
    except application.InvalidConfigError as error:
        logger.error("%s", error)
        return EXIT_INVALID
    application.configure_logging(settings.log_level)

    if args.command == "selftest":
        try:
            return _selftest(args, stdout)
        except ValueError as error:
            logger.error("%s", error)
            return EXIT_INVALID
    try:
        result = _dispatch(args, settings)
    except domain_functions.CommandError as error:
        logger.error("%s", error)
        return _exit_code(error)
    if getattr(args, "format", "json") == "csv":
        _write_csv(result, stdout)
    else:
        stdout.write(result.to_json() + "\n")
    return EXIT_OK

