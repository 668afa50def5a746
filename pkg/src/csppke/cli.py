"""Command-line front end.

Commands: gen-matrix, check-expansion, keygen, encrypt, decrypt, calibrate,
sample-instance, bench-correctness, bench-advantage. Every randomized
command requires --seed and is byte-reproducible from it. Exit codes:
0 success, 2 validation/format failure, 3 strict-mode key-generation abort.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import analysis, cspsampler, expandergen, f2core, pkescheme, rmcode
from .f2core import FormatError
from .params import GenParams, SchemeParams, params_loads, validate
from .rng import stream

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_ABORT = 3


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_VALIDATION):
        super().__init__(message)
        self.code = code


def _add_params_flags(cmd: argparse.ArgumentParser) -> None:
    cmd.add_argument("--params", type=Path, help="parameter file (key=value block)")
    for flag, help_text in (
        ("--n", "secret length"),
        ("--m", "constraint count (rows of the generator matrix)"),
        ("--k", "locality (nonzeros per row)"),
        ("--sigma", "size of the symbol alphabet"),
        ("--gamma", "size of the target alphabet"),
        ("--mprime", "public-key height"),
    ):
        cmd.add_argument(flag, type=int, help=help_text)
    cmd.add_argument("--alpha", type=float, help="constraint corruption/erasure rate")
    cmd.add_argument("--beta", type=float, help="parity corruption rate")


def _resolve_params(args) -> SchemeParams:
    if args.params is not None:
        p = params_loads(_read(args.params))
        if args.seed is not None:
            p = SchemeParams(
                p.n, p.m, p.k, p.sigma_size, p.gamma_size, p.alpha, p.beta, p.m_prime, args.seed
            )
        return p
    missing = [
        flag
        for flag, value in (
            ("--n", args.n),
            ("--m", args.m),
            ("--k", args.k),
            ("--sigma", args.sigma),
            ("--gamma", args.gamma),
            ("--alpha", args.alpha),
            ("--beta", args.beta),
            ("--mprime", args.mprime),
        )
        if value is None
    ]
    if missing:
        raise CliError(f"missing parameter flags: {' '.join(missing)} (or use --params FILE)")
    return SchemeParams(
        n=args.n,
        m=args.m,
        k=args.k,
        sigma_size=args.sigma,
        gamma_size=args.gamma,
        alpha=args.alpha,
        beta=args.beta,
        m_prime=args.mprime,
        seed=args.seed if args.seed is not None else 0,
    )


def _validate_or_die(p: SchemeParams, strict: bool) -> None:
    violations = validate(p, strict=strict)
    if violations:
        for v in violations:
            print(f"parameter violation: {v}", file=sys.stderr)
        raise CliError("invalid parameters")
    if not strict:
        for v in validate(p, strict=True):
            print(f"warning (strict relation relaxed): {v}", file=sys.stderr)


def _read(path: Path) -> str:
    try:
        return path.read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}")


def _write(path: Path, text: str) -> None:
    try:
        path.write_text(text)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror}")


def _gen_params_for(p: SchemeParams, args) -> GenParams:
    d = p.m.bit_length() - 1
    if 1 << d != p.m:
        raise CliError(f"m = {p.m} must be a power of two to drive the matrix sampler")
    window_bits = args.window_bits
    if window_bits is None:
        if p.n < 2 * p.k:
            raise CliError(f"n = {p.n} must be at least 2k = {2 * p.k} to derive window bits")
        window_bits = (p.n // p.k).bit_length() - 1
    poly_degree = args.poly_degree
    if poly_degree is None:
        poly_degree = max(1, (p.n - 1).bit_length())
    try:
        return GenParams(d=d, n=p.n, k=p.k, window_bits=window_bits, poly_degree=poly_degree)
    except ValueError as exc:
        raise CliError(str(exc))


def _load_or_generate_matrix(p: SchemeParams, args) -> expandergen.GeneratedMatrix:
    if args.matrix is not None:
        gm = expandergen.genmatrix_loads(_read(args.matrix))
        if (gm.G.m, gm.G.n, gm.G.k) != (p.m, p.n, p.k):
            raise CliError(
                f"matrix file is {(gm.G.m, gm.G.n, gm.G.k)}, parameters say {(p.m, p.n, p.k)}"
            )
        return gm
    gen = _gen_params_for(p, args)
    return expandergen.generate(gen, stream(p.seed, "gen-matrix"))


def _cmd_gen_matrix(args) -> int:
    gen = GenParams(
        d=args.d,
        n=args.n,
        k=args.k,
        window_bits=args.window_bits
        if args.window_bits is not None
        else (args.n // args.k).bit_length() - 1,
        poly_degree=args.poly_degree
        if args.poly_degree is not None
        else max(1, (args.n - 1).bit_length()),
    )
    gm = expandergen.generate(gen, stream(args.seed, "gen-matrix"))
    _write(args.out, expandergen.genmatrix_dumps(gm))
    print(f"wrote ({gm.G.m}, {gm.G.n}, {gm.G.k})-matrix, column degree bound {gm.column_degree_bound}")
    print(f"RESULT m={gm.G.m} n={gm.G.n} k={gm.G.k} degree_bound={gm.column_degree_bound}")
    return EXIT_OK


def _cmd_check_expansion(args) -> int:
    text = _read(args.matrix)
    try:
        matrix = expandergen.genmatrix_loads(text).G
    except FormatError:
        matrix = f2core.srm_loads(text)
    rng = stream(args.seed, "check-expansion") if args.seed is not None else None
    try:
        report = f2core.check_expansion(
            matrix,
            args.gamma,
            args.t,
            mode=args.mode,
            trials=args.trials,
            rng=rng,
            budget=args.budget,
        )
    except f2core.BudgetError as exc:
        raise CliError(str(exc))
    except ValueError as exc:
        raise CliError(str(exc))
    if report.passed:
        qualifier = "" if report.certified else " (sampled; failure not ruled out)"
        print(f"PASS{qualifier}")
    else:
        print(f"FAIL counterexample rows: {' '.join(str(i) for i in report.counterexample)}")
    print(
        f"RESULT passed={int(report.passed)} certified={int(report.certified)} "
        f"subsets_checked={report.subsets_checked}"
    )
    return EXIT_OK


def _cmd_keygen(args) -> int:
    p = _resolve_params(args)
    _validate_or_die(p, args.strict)
    gm = _load_or_generate_matrix(p, args)
    rng = stream(p.seed, "keygen")
    try:
        pair = pkescheme.keygen(
            p,
            gm,
            rng,
            retry_budget=args.retries,
            strict=args.strict,
            z_star=args.z_star,
            calibration_trials=args.calibration_trials,
        )
    except (pkescheme.RetryBudgetError, rmcode.CalibrationError, f2core.BudgetError) as exc:
        raise CliError(str(exc))
    if pair is None:
        print("ABORT", file=sys.stderr)
        return EXIT_ABORT
    _write(args.out_pk, pkescheme.public_key_dumps(pair.public))
    _write(args.out_sk, pkescheme.secret_key_dumps(pair.secret))
    print(f"wrote public key ({pair.public.H.m} x {pair.public.H.n}) and secret key")
    print(
        f"RESULT m_prime={pair.public.H.m} preimages={pair.witness.preimage_count} "
        f"attempts={pair.witness.attempts} z_star={pair.secret.z_star!r}"
    )
    return EXIT_OK


def _cmd_encrypt(args) -> int:
    pk = pkescheme.public_key_loads(_read(args.pk))
    _validate_or_die(pk.params, False)
    ct = pkescheme.encrypt(pk, args.bit, stream(args.seed, "encrypt"))
    _write(args.out, pkescheme.ciphertext_dumps(ct))
    print(f"RESULT bit={args.bit} length={ct.v.length}")
    return EXIT_OK


def _cmd_decrypt(args) -> int:
    sk = pkescheme.secret_key_loads(_read(args.sk))
    _validate_or_die(sk.params, False)
    ct = pkescheme.ciphertext_loads(_read(args.ct))
    bit = pkescheme.decrypt(sk, ct, stream(args.seed, "decrypt"))
    if bit is None:
        print("ABORT")
        return EXIT_ABORT
    print(bit)
    print(f"RESULT bit={bit}")
    return EXIT_OK


def _cmd_calibrate(args) -> int:
    code = rmcode.RmCode(args.d, args.r)
    try:
        cal = rmcode.calibrate_threshold(
            code, args.alpha, args.beta, args.trials, stream(args.seed, "calibrate")
        )
    except rmcode.CalibrationError as exc:
        print(f"calibration failure: {exc}", file=sys.stderr)
        print("RESULT calibrated=0")
        return EXIT_OK
    print(
        f"z_star={cal.z_star!r} codeword_mean={cal.codeword_mean:.2f} "
        f"random_mean={cal.random_mean:.2f} separation={cal.separation:.3f}"
    )
    print(
        f"RESULT calibrated=1 z_star={cal.z_star!r} codeword_mean={cal.codeword_mean:.4f} "
        f"random_mean={cal.random_mean:.4f} separation={cal.separation:.4f}"
    )
    return EXIT_OK


def _cmd_sample_instance(args) -> int:
    p = _resolve_params(args)
    _validate_or_die(p, False)
    rng = stream(p.seed, "sample-instance", args.type, args.which)
    H = cspsampler.random_mnk_matrix(p.m, p.n, p.k, rng)
    if args.type == "larp":
        inst = cspsampler.sample_larp(p, H, args.which, rng)
    else:
        inst = cspsampler.sample_kxor(p, H, args.which, rng)
    _write(args.out, cspsampler.instance_dumps(inst, p, include_witness=args.include_witness))
    print(f"RESULT type={args.type} label={inst.label} m={p.m}")
    return EXIT_OK


def _cmd_bench_correctness(args) -> int:
    p = _resolve_params(args)
    _validate_or_die(p, False)
    gm = _load_or_generate_matrix(p, args)
    code = rmcode.RmCode(gm.gen.d, gm.column_degree_bound)
    cal = rmcode.calibrate_threshold(
        code, p.alpha, p.beta, args.calibration_trials, stream(p.seed, "calibrate")
    )
    stats = pkescheme.correctness_trials(
        p, gm, args.trials, cal.z_star, retry_budget=args.retries
    )
    halfwidth = analysis.wilson_halfwidth(round(stats["rate"] * args.trials), args.trials)
    print(
        f"correctness rate {stats['rate']:.4f} over {args.trials} trials "
        f"(bit0 {stats['rate_bit0']:.4f}, bit1 {stats['rate_bit1']:.4f})"
    )
    print(
        f"RESULT trials={args.trials} rate={stats['rate']:.4f} rate_bit0={stats['rate_bit0']:.4f} "
        f"rate_bit1={stats['rate_bit1']:.4f} wilson_hw={halfwidth:.4f} z_star={cal.z_star!r}"
    )
    return EXIT_OK


def _cmd_bench_advantage(args) -> int:
    p = _resolve_params(args)
    _validate_or_die(p, False)
    gm = _load_or_generate_matrix(p, args)
    rng = stream(p.seed, "bench-advantage")
    pair = pkescheme.keygen(p, gm, rng, retry_budget=args.retries,
                            calibration_trials=args.calibration_trials)

    def sampler_for(bit):
        def sample(r):
            return pkescheme.encrypt(pair.public, bit, r)

        return sample

    def decrypt_rule(ct):
        return pkescheme.decrypt(pair.secret, ct, rng)

    report = analysis.estimate_advantage(
        sampler_for(0), sampler_for(1), decrypt_rule, args.trials, rng
    )
    print(
        f"decryption rule under one key: accepts bit-1 arm {report.planted_rate:.4f}, "
        f"bit-0 arm {report.null_rate:.4f}, advantage {report.advantage:.4f}"
    )
    if args.csv:
        print(report.CSV_HEADER)
        print(report.csv_row())
    print(report.footer())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="csppke",
        description="Toy public-key encryption from planted constraint satisfaction",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, needs_seed=True, **kwargs):
        cmd = sub.add_parser(name, **kwargs)
        cmd.set_defaults(fn=fn)
        if needs_seed:
            cmd.add_argument("--seed", type=int, required=True, help="64-bit master seed")
        return cmd

    cmd = add(name="gen-matrix", fn=_cmd_gen_matrix, help="sample an expanding generator matrix")
    cmd.add_argument("--n", type=int, required=True)
    cmd.add_argument("--d", type=int, required=True, help="log2 of the row count")
    cmd.add_argument("--k", type=int, required=True)
    cmd.add_argument("--window-bits", type=int)
    cmd.add_argument("--poly-degree", type=int)
    cmd.add_argument("--out", type=Path, required=True)

    cmd = add(
        "check-expansion", _cmd_check_expansion, needs_seed=False,
        help="verify boundary expansion of a matrix file",
    )
    cmd.add_argument("--matrix", type=Path, required=True)
    cmd.add_argument("--gamma", type=float, required=True)
    cmd.add_argument("--t", type=int, required=True)
    cmd.add_argument("--mode", choices=["exhaustive", "sampled"], default="exhaustive")
    cmd.add_argument("--trials", type=int, default=1000)
    cmd.add_argument("--budget", type=int, default=2_000_000)
    cmd.add_argument("--seed", type=int, help="required for sampled mode")

    cmd = add("keygen", _cmd_keygen, help="generate a key pair")
    _add_params_flags(cmd)
    cmd.add_argument("--matrix", type=Path, help="generator matrix file (default: sample one)")
    cmd.add_argument("--window-bits", type=int)
    cmd.add_argument("--poly-degree", type=int)
    cmd.add_argument("--strict", action="store_true", help="abort instead of retrying")
    cmd.add_argument("--retries", type=int, default=pkescheme.DEFAULT_RETRY_BUDGET)
    cmd.add_argument("--calibration-trials", type=int, default=pkescheme.DEFAULT_CALIBRATION_TRIALS)
    cmd.add_argument(
        "--z-star", type=float, help="precomputed threshold (skips internal calibration)"
    )
    cmd.add_argument("--out-pk", type=Path, required=True)
    cmd.add_argument("--out-sk", type=Path, required=True)

    cmd = add("encrypt", _cmd_encrypt, help="encrypt one bit")
    cmd.add_argument("--pk", type=Path, required=True)
    cmd.add_argument("--bit", type=int, choices=[0, 1], required=True)
    cmd.add_argument("--out", type=Path, required=True)

    cmd = add("decrypt", _cmd_decrypt, help="decrypt a ciphertext")
    cmd.add_argument("--sk", type=Path, required=True)
    cmd.add_argument("--ct", type=Path, required=True)

    cmd = add("calibrate", _cmd_calibrate, help="calibrate the distinguishing threshold")
    cmd.add_argument("--d", type=int, required=True)
    cmd.add_argument("--r", type=int, required=True)
    cmd.add_argument("--alpha", type=float, required=True)
    cmd.add_argument("--beta", type=float, required=True)
    cmd.add_argument("--trials", type=int, default=200)

    cmd = add("sample-instance", _cmd_sample_instance, help="sample a decision-problem instance")
    _add_params_flags(cmd)
    cmd.add_argument("--type", choices=["larp", "kxor"], required=True)
    cmd.add_argument("--which", choices=["null", "planted"], default="planted")
    cmd.add_argument("--include-witness", action="store_true")
    cmd.add_argument("--out", type=Path, required=True)

    cmd = add("bench-correctness", _cmd_bench_correctness, help="measure end-to-end correctness")
    _add_params_flags(cmd)
    cmd.add_argument("--matrix", type=Path)
    cmd.add_argument("--window-bits", type=int)
    cmd.add_argument("--poly-degree", type=int)
    cmd.add_argument("--trials", type=int, default=200)
    cmd.add_argument("--retries", type=int, default=pkescheme.DEFAULT_RETRY_BUDGET)
    cmd.add_argument("--calibration-trials", type=int, default=pkescheme.DEFAULT_CALIBRATION_TRIALS)

    cmd = add("bench-advantage", _cmd_bench_advantage, help="measure decryption advantage")
    _add_params_flags(cmd)
    cmd.add_argument("--matrix", type=Path)
    cmd.add_argument("--window-bits", type=int)
    cmd.add_argument("--poly-degree", type=int)
    cmd.add_argument("--trials", type=int, default=100)
    cmd.add_argument("--retries", type=int, default=pkescheme.DEFAULT_RETRY_BUDGET)
    cmd.add_argument("--calibration-trials", type=int, default=pkescheme.DEFAULT_CALIBRATION_TRIALS)
    cmd.add_argument("--csv", action="store_true", help="also print a CSV header and row")

    return parser


def run(argv: list[str]) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except FormatError as exc:
        print(f"format error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
