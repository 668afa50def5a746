#!/usr/bin/env python3
"""Calibrate the desk-scale end-to-end configuration and freeze it as a fixture.

Two stages:

1. Attempt the first-choice configuration: the RM(10,3) ambient code driven
   at erasure rate 0.3 / corruption rate 0.04 (the code the n=8, k=4
   derivation would give). Record whether threshold calibration separates
   the two arms, and whether the keygen preimage sweep fits the domain
   budget there (sigma=64, k=4 needs m * 64^4 = 2^34 evaluations; it does
   not). Majority-logic decoding tops out well below that noise at degree 3,
   so this attempt is expected to fail and is recorded, not asserted.

2. Calibrate the configuration that does work at the same noise rates: 16
   secret symbols, locality 4, degree-1 selectors with 2 window bits (so the
   code is RM(10,2) and all four arms of the analysis separate), and run the
   full 200-trial fresh-key correctness harness.

The result is written to tests/fixtures/desk_calibration.json; the
acceptance suite re-runs the harness at the recorded seed and must reproduce
the recorded rates exactly.
"""

import json
import pathlib
import sys
import time

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from csppke import expandergen, pkescheme, rmcode
from csppke.params import GenParams, SchemeParams, validate
from csppke.rng import stream

FIXTURE = pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "desk_calibration.json"

REFERENCE = {
    "code": {"d": 10, "r": 3},
    "alpha": 0.3,
    "beta": 0.04,
    "params": {"n": 8, "m": 1024, "k": 4, "sigma": 64, "gamma": 4096},
}

DESK_PARAMS = SchemeParams(
    n=16, m=1024, k=4, sigma_size=16, gamma_size=4096,
    alpha=0.3, beta=0.04, m_prime=16384, seed=11,
)
DESK_GEN = GenParams(d=10, n=16, k=4, window_bits=2, poly_degree=1)
TRIALS = 200
CALIBRATION_TRIALS = 200


def attempt_reference() -> dict:
    code = rmcode.RmCode(REFERENCE["code"]["d"], REFERENCE["code"]["r"])
    out = dict(REFERENCE)
    keygen_cost = REFERENCE["params"]["m"] * REFERENCE["params"]["sigma"] ** REFERENCE["params"]["k"]
    out["keygen_table_entries"] = keygen_cost
    out["keygen_within_budget"] = keygen_cost <= 4 * (1 << 24)
    try:
        cal = rmcode.calibrate_threshold(
            code, REFERENCE["alpha"], REFERENCE["beta"], CALIBRATION_TRIALS,
            stream(DESK_PARAMS.seed, "reference-calibration"),
        )
        out["calibrated"] = True
        out["z_star"] = cal.z_star
        out["separation"] = cal.separation
    except rmcode.CalibrationError as exc:
        out["calibrated"] = False
        out["failure"] = str(exc)
    return out


def calibrate_desk() -> dict:
    p, gen = DESK_PARAMS, DESK_GEN
    assert validate(p) == [], validate(p)
    code = rmcode.RmCode(gen.d, gen.window_bits * gen.poly_degree)
    cal = rmcode.calibrate_threshold(
        code, p.alpha, p.beta, CALIBRATION_TRIALS, stream(p.seed, "calibrate")
    )
    gm = expandergen.generate(gen, stream(p.seed, "gen-matrix"))
    start = time.time()
    stats = pkescheme.correctness_trials(p, gm, TRIALS, z_star=cal.z_star)
    elapsed = time.time() - start
    return {
        "params": {
            "n": p.n, "m": p.m, "k": p.k, "sigma_size": p.sigma_size,
            "gamma_size": p.gamma_size, "alpha": p.alpha, "beta": p.beta,
            "m_prime": p.m_prime, "seed": p.seed,
        },
        "gen": {
            "d": gen.d, "n": gen.n, "k": gen.k,
            "window_bits": gen.window_bits, "poly_degree": gen.poly_degree,
        },
        "code": {"d": code.d, "r": code.r},
        "calibration_trials": CALIBRATION_TRIALS,
        "z_star": cal.z_star,
        "codeword_mean": cal.codeword_mean,
        "random_mean": cal.random_mean,
        "separation": cal.separation,
        "trials": TRIALS,
        "achieved_rate": stats["rate"],
        "rate_bit0": stats["rate_bit0"],
        "rate_bit1": stats["rate_bit1"],
        "preimage_bound": 2 * p.m * (1 + p.sigma_size**p.k / p.gamma_size),
        "harness_seconds": round(elapsed, 1),
    }


def main() -> None:
    reference = attempt_reference()
    print("reference attempt:", json.dumps(reference, indent=2))
    desk = calibrate_desk()
    print("desk configuration:", json.dumps(desk, indent=2))
    FIXTURE.parent.mkdir(parents=True, exist_ok=True)
    FIXTURE.write_text(json.dumps({"reference_attempt": reference, "desk": desk}, indent=2) + "\n")
    print(f"wrote {FIXTURE}")
    if desk["achieved_rate"] < 0.75:
        sys.exit("achieved rate below the 0.75 floor; pick a different configuration")


if __name__ == "__main__":
    main()
