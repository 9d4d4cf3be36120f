"""
命令行入口。

用法:
    python -m crfhmc convert crf.json -o hmc.json --trace trace.json
    python -m crfhmc decode model.json sequences.txt --marginals
    python -m crfhmc verify crf.json --tolerance 1e-9
    python -m crfhmc random --n 4 --hidden 3 --obs 2 --seed 0

退出码: 0 正常, 2 解析错误, 3 退化模型, 4 观测不可能, 5 等价性校验失败, 6 超出预算。
"""
import argparse
import asyncio
import logging
import sys
from pathlib import Path

from . import config
from .chains.crf import CrfModel
from .chains.hmc import HmcModel
from .errors import (
    BudgetExceededError,
    ChainError,
    DegenerateModelError,
    ImpossibleObservationError,
    LengthMismatchError,
    ModelFileError,
)
from .model_io import (
    dump_document,
    dump_model,
    encode_sequence,
    load_model,
    model_digest,
    read_sequences,
)
from .services import equivalence, generator, verifier

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_DEGENERATE = 3
EXIT_IMPOSSIBLE = 4
EXIT_MISMATCH = 5
EXIT_BUDGET = 6

# 未列出的 ChainError 子类一律按解析错误处理
ERROR_EXIT_CODES = {
    DegenerateModelError: EXIT_DEGENERATE,
    ImpossibleObservationError: EXIT_IMPOSSIBLE,
    BudgetExceededError: EXIT_BUDGET,
}


def exit_code_for(error: ChainError) -> int:
    for error_class, code in ERROR_EXIT_CODES.items():
        if isinstance(error, error_class):
            return code
    return EXIT_PARSE


def _write(path: str | None, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        Path(path).write_text(text, encoding="utf-8")


def _positive_int(value: str) -> int:
    try:
        number = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"'{value}' is not an integer") from None
    if number < 1:
        raise argparse.ArgumentTypeError(f"expected a value of at least 1, got {number}")
    return number


def _non_negative_float(value: str) -> float:
    try:
        number = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"'{value}' is not a number") from None
    if not number >= 0.0:
        raise argparse.ArgumentTypeError(f"expected a non-negative number, got {value}")
    return number


# ====================
# 子命令
# ====================

def cmd_convert(args) -> int:
    """CRF -> 等价 HMC; HMC 输入则写出其对数参数形式的 CRF。"""
    model = load_model(args.model)
    if isinstance(model, CrfModel):
        hmc, trace = equivalence.convert(model)
        _write(args.output, dump_model(hmc))
        if args.trace:
            _write(args.trace, dump_document(trace.to_document()))
            logger.info(f"Wrote construction trace to {args.trace}")
        return EXIT_OK

    if args.trace:
        raise ModelFileError("a construction trace is only produced for CRF input", "--trace")
    _write(args.output, dump_model(equivalence.hmc_to_crf(model)))
    return EXIT_OK


def _format_marginals(rows) -> str:
    return "\t".join(" ".join(f"{p:.6f}" for p in row) for row in rows)


def cmd_decode(args) -> int:
    """逐行 MPM 解码; 单行出错不影响其他行, 退出码取第一个出错行。"""
    model = load_model(args.model)
    status = EXIT_OK
    tiled = {model.n: model}

    stream = sys.stdin if args.sequences == "-" else open(args.sequences, encoding="utf-8")
    out = sys.stdout if args.output in (None, "-") else open(args.output, "w", encoding="utf-8")
    try:
        for line_no, tokens in read_sequences(stream):
            if not tokens:
                out.write("\n")
                continue
            try:
                y = encode_sequence(model.obs, tokens, line_no)
                if len(y) not in tiled:
                    if not args.tile:
                        raise LengthMismatchError(
                            f"sequence has length {len(y)}, model expects {model.n} (use --tile)"
                        )
                    tiled[len(y)] = model.tile(len(y))
                marginals = tiled[len(y)].posterior_marginals(y)
            except ChainError as e:
                code = exit_code_for(e)
                logger.warning(f"Decoding failed on line {line_no}: {e}")
                print(f"line {line_no}: {e}", file=sys.stderr)
                status = status or code
                out.write("\n")
                continue

            line = " ".join(model.hidden.decode(marginals.decode()))
            if args.marginals:
                line += "\t" + _format_marginals(marginals.probabilities())
            out.write(line + "\n")
    finally:
        if stream is not sys.stdin:
            stream.close()
        if out is not sys.stdout:
            out.close()
        else:
            out.flush()
    return status


def _record_run(digest: str, report) -> int:
    from . import crud
    from .database import AsyncSessionLocal, create_tables

    async def run():
        await create_tables()
        async with AsyncSessionLocal() as db:
            db_run = await crud.create_verification_run(db, digest, report)
            return db_run.id

    return asyncio.run(run())


def cmd_verify(args) -> int:
    crf = load_model(args.model)
    if not isinstance(crf, CrfModel):
        raise ModelFileError("verify expects a CRF model file", str(args.model))
    against = None
    if args.against:
        against = load_model(args.against)
        if not isinstance(against, HmcModel):
            raise ModelFileError("--against expects an HMC model file", str(args.against))

    report = verifier.verify_equivalence(
        crf,
        against=against,
        budget=args.budget,
        tolerance=args.tolerance,
        samples=args.samples,
        seed=args.seed,
    )
    if args.json:
        _write(None, dump_document(report))
    else:
        _write(None, report.summary() + "\n")
    if args.report:
        _write(args.report, dump_document(report))
    if args.record:
        run_id = _record_run(model_digest(crf.to_document()), report)
        logger.info(f"Recorded verification run {run_id}")
    return EXIT_OK if report.passed else EXIT_MISMATCH


def cmd_random(args) -> int:
    model = generator.random_crf(args.n, args.hidden, args.obs, args.seed, mode=args.mode)
    _write(args.output, dump_model(model))
    return EXIT_OK


# ====================
# 参数解析
# ====================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crfhmc",
        description="Linear-chain CRFs, hidden Markov chains and their posterior equivalence.",
        epilog="Exit codes: 0 ok, 2 parse, 3 degenerate, 4 impossible observation, "
               "5 equivalence failure, 6 budget.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    commands = parser.add_subparsers(dest="command", required=True)

    convert = commands.add_parser("convert", help="build the HMC equivalent to a CRF (or read an HMC as a CRF)")
    convert.add_argument("model", help="model file (JSON)")
    convert.add_argument("-o", "--output", help="output model file (default: stdout)")
    convert.add_argument("--trace", help="also write the psi/phi/beta construction trace to this file")
    convert.set_defaults(handler=cmd_convert)

    decode = commands.add_parser("decode", help="MPM-decode observation sequences, one per line")
    decode.add_argument("model", help="model file (JSON)")
    decode.add_argument("sequences", help="sequence file, whitespace-separated symbols ('-' for stdin)")
    decode.add_argument("-o", "--output", help="output file (default: stdout)")
    decode.add_argument("--marginals", action="store_true", help="append per-position posterior marginals")
    decode.add_argument("--tile", action="store_true",
                        help="tile a homogeneous model to the length of each sequence")
    decode.set_defaults(handler=cmd_decode)

    verify = commands.add_parser("verify", help="check CRF/HMC posterior equivalence")
    verify.add_argument("model", help="CRF model file (JSON)")
    verify.add_argument("--against", help="compare with this HMC file instead of the constructed one")
    verify.add_argument("--budget", type=_positive_int, default=config.DEFAULT_BUDGET,
                        help="maximum number of enumerated sequences (default: %(default)s)")
    verify.add_argument("--tolerance", type=_non_negative_float, default=config.DEFAULT_TOLERANCE,
                        help="maximum accepted posterior discrepancy (default: %(default)s)")
    verify.add_argument("--samples", type=_positive_int,
                        help="verify on this many random observation sequences when out of budget")
    verify.add_argument("--seed", type=int, default=0, help="seed for sampled observation sequences")
    verify.add_argument("--json", action="store_true", help="print the report as JSON")
    verify.add_argument("--report", help="also write the JSON report to this file")
    verify.add_argument("--record", action="store_true", help="store the report in the run history database")
    verify.set_defaults(handler=cmd_verify)

    random = commands.add_parser("random", help="generate a seeded random CRF model file")
    random.add_argument("--n", type=_positive_int, required=True, help="sequence length")
    random.add_argument("--hidden", type=_positive_int, required=True, help="number of hidden labels")
    random.add_argument("--obs", type=_positive_int, required=True, help="number of observation symbols")
    random.add_argument("--seed", type=int, default=0)
    random.add_argument("--mode", choices=["strict", "generalized"], default="strict")
    random.add_argument("-o", "--output", help="output file (default: stdout)")
    random.set_defaults(handler=cmd_random)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config.configure_logging(verbose=args.verbose)
    try:
        return args.handler(args)
    except ChainError as e:
        code = exit_code_for(e)
        logger.debug(f"Command '{args.command}' failed", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return code
    except OSError as e:
        logger.error(f"Command '{args.command}' failed: {e}", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
