"""Key generation, encryption and decryption.

Key generation plants a secret inside a public constraint matrix: it samples
a planted large-alphabet instance over the expanding generator matrix G,
enumerates every distinct-symbol local preimage of the targets b, and writes
each preimage tuple as an indicator row of the public matrix H (padded with
random k-sparse rows and row-permuted). The secret map zeta records, for
every honest constraint, which row of H encodes the planted tuple, so a
column-permuted punctured copy of G hides inside H.

Encrypting 0 sends a noisy parity sample through H; encrypting 1 sends a
uniform vector. Decryption pulls the coordinates indexed by zeta out of the
ciphertext (erasing the corrupted constraints) and asks the code's
noisy-codeword/random distinguisher which world it sees.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .expandergen import GeneratedMatrix
from .f2core import (
    ERASED,
    BitVec,
    FormatError,
    SparseRowMatrix,
    TriVector,
    matvec,
    srm_dumps,
    srm_parse,
)
from .params import SchemeParams, params_dumps, params_parse, strict_m_prime
from .rmcode import RmCode, calibrate_threshold, distinguish
from .rng import derive_key, stream
from .cspsampler import DEFAULT_DOMAIN_BUDGET, RandomFunctionStore, domain_digits

KEY_MAGIC = "CSPPKE1"
CT_MAGIC = "CSPCT1"

DEFAULT_RETRY_BUDGET = 64
DEFAULT_CALIBRATION_TRIALS = 96


class RetryBudgetError(RuntimeError):
    """Desk-mode key generation kept hitting abort conditions."""


@dataclass(frozen=True)
class PublicKey:
    H: SparseRowMatrix
    params: SchemeParams


@dataclass(frozen=True, eq=False)
class SecretKey:
    """zeta maps constraint index -> public-key row, -1 marking corrupted
    constraints; G and the code parameters make decryption self-contained."""

    zeta: np.ndarray = field(repr=False)
    G: SparseRowMatrix
    code_d: int
    code_r: int
    z_star: float
    params: SchemeParams

    def code(self) -> RmCode:
        return RmCode(self.code_d, self.code_r)


@dataclass(frozen=True, eq=False)
class KeyGenWitness:
    """Secret-side byproducts kept for white-box tests; never serialized."""

    secret: np.ndarray
    corrupted_mask: np.ndarray
    F: RandomFunctionStore
    b: np.ndarray
    logical_rows: np.ndarray
    perm: np.ndarray
    preimage_count: int
    attempts: int


@dataclass(frozen=True)
class KeyPair:
    public: PublicKey
    secret: SecretKey
    witness: KeyGenWitness


@dataclass(frozen=True)
class Ciphertext:
    """Bit vector of the public-key height, or the abort marker (v is None)."""

    v: BitVec | None

    @property
    def is_abort(self) -> bool:
        return self.v is None


def _pad_rows(count: int, n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    if count == 0:
        return np.zeros((0, k), dtype=np.int64)
    picks = rng.random((count, n)).argsort(axis=1)[:, :k]
    return np.sort(picks, axis=1)


def keygen(
    p: SchemeParams,
    gm: GeneratedMatrix,
    rng: np.random.Generator,
    retry_budget: int = DEFAULT_RETRY_BUDGET,
    strict: bool = False,
    z_star: float | None = None,
    calibration_trials: int = DEFAULT_CALIBRATION_TRIALS,
    b_mode: str = "planted",
    budget: int = DEFAULT_DOMAIN_BUDGET,
) -> KeyPair | None:
    """Generate a key pair, or None on abort.

    Abort fires when the secret has a repeated symbol or when the preimage
    set outgrows the public-key height. In strict mode the first abort
    returns None and the height is pinned to ceil(sigma^(k/3)); desk mode
    resamples (s, b) up to retry_budget times with the random functions held
    fixed.

    b_mode="null" replaces the planted targets with uniform symbols (the
    key-generation half of the hybrid experiments); zeta is then all-erased.

    The distinguishing threshold z_star depends only on (code, alpha, beta),
    so callers running many trials may calibrate once and pass it in;
    by default it is calibrated here with calibration_trials decodes per arm.
    """
    G = gm.G
    if (G.m, G.n, G.k) != (p.m, p.n, p.k):
        raise ValueError(f"generator matrix is {(G.m, G.n, G.k)}, params say {(p.m, p.n, p.k)}")
    if b_mode not in ("planted", "null"):
        raise ValueError(f"b_mode must be 'planted' or 'null', got {b_mode!r}")
    if not strict and p.sigma_size < p.n:
        raise RetryBudgetError(
            f"sigma_size {p.sigma_size} < n {p.n}: no repeat-free secret exists"
        )
    m_prime = strict_m_prime(p.sigma_size, p.k) if strict else p.m_prime

    code = RmCode(gm.gen.d, gm.column_degree_bound)
    if z_star is None:
        calibration = calibrate_threshold(
            code, p.alpha, p.beta, calibration_trials, stream(p.seed, "calibrate")
        )
        z_star = calibration.z_star

    F = RandomFunctionStore(p.m, p.k, p.sigma_size, p.gamma_size, seed=derive_key(rng))
    values = F.all_row_values(budget=budget)
    distinct = F.distinct_tuple_mask(budget=budget)
    digits = domain_digits(p.sigma_size, p.k)
    weights = p.sigma_size ** np.arange(p.k - 1, -1, -1, dtype=np.int64)
    row_range = np.arange(p.m)

    attempts = 0
    while True:
        attempts += 1
        if strict:
            s = rng.integers(0, p.sigma_size, size=p.n, dtype=np.int64)
        else:
            # Conditioning on the repeated-symbol abort depends on s alone, so
            # resample-until-distinct is exactly a uniform injection; sampling
            # it directly saves the retries that dominate at toy alphabets.
            s = rng.permutation(p.sigma_size)[: p.n].astype(np.int64)
        mask = rng.random(p.m) < p.alpha
        replacement = rng.integers(0, p.gamma_size, size=p.m, dtype=np.int64)
        if b_mode == "planted":
            honest_idx = (s[G.rows] * weights[None, :]).sum(axis=1)
            b = np.where(mask, replacement, values[row_range, honest_idx].astype(np.int64))
        else:
            b = replacement
            mask = np.ones(p.m, dtype=bool)

        abort = len(np.unique(s)) < p.n
        positions: dict[int, int] = {}
        if not abort:
            hits = values == b.astype(values.dtype)[:, None]
            hits &= distinct[None, :]
            hit_rows, hit_idx = np.nonzero(hits)
            order = []
            for idx in hit_idx:
                idx = int(idx)
                if idx not in positions:
                    positions[idx] = len(order)
                    order.append(idx)
            abort = len(order) > m_prime
        if abort:
            if strict:
                return None
            if attempts > retry_budget:
                raise RetryBudgetError(f"no admissible key after {attempts} attempts")
            continue

        x_count = len(order)
        logical = np.concatenate(
            [
                np.sort(digits[order], axis=1),
                _pad_rows(m_prime - x_count, p.sigma_size, p.k, rng),
            ]
        )
        perm = rng.permutation(m_prime)
        h_rows = np.empty((m_prime, p.k), dtype=np.int64)
        h_rows[perm] = logical
        H = SparseRowMatrix(m_prime, p.sigma_size, p.k, h_rows)

        zeta = np.full(p.m, -1, dtype=np.int64)
        honest = np.nonzero(~mask)[0]
        tuple_idx = (s[G.rows[honest]] * weights[None, :]).sum(axis=1)
        for i, idx in zip(honest, tuple_idx):
            zeta[i] = perm[positions[int(idx)]]

        public = PublicKey(H, p)
        secret = SecretKey(zeta, G, gm.gen.d, gm.column_degree_bound, float(z_star), p)
        witness = KeyGenWitness(s, mask, F, b, logical, perm, x_count, attempts)
        return KeyPair(public, secret, witness)


def encrypt(pk: PublicKey | None, bit: int, rng: np.random.Generator) -> Ciphertext:
    """Encrypt one bit: 0 = noisy parity sample through H, 1 = uniform vector.

    For bit 0 the draw order is: the secret parity input t (n' bits), then
    one corruption uniform per output coordinate, then the replacement bits.
    """
    if pk is None:
        return Ciphertext(None)
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit!r}")
    m_prime = pk.H.m
    if bit == 1:
        return Ciphertext(BitVec.random(m_prime, rng))
    t = BitVec.random(pk.H.n, rng)
    parity = matvec(pk.H, t).to_array()
    corrupt = rng.random(m_prime) < pk.params.beta
    replacement = rng.integers(0, 2, size=m_prime, dtype=np.uint8)
    return Ciphertext(BitVec.from_bits(np.where(corrupt, replacement, parity).astype(np.uint8)))


def extract_channel_word(sk: SecretKey, ct: Ciphertext) -> TriVector:
    """Pull the length-m codeword view out of a ciphertext: coordinate i is
    the ciphertext bit at row zeta(i), or erased where zeta(i) is undefined."""
    bits = ct.v.to_array()
    symbols = np.full(sk.params.m, ERASED, dtype=np.int8)
    known = sk.zeta >= 0
    symbols[known] = bits[sk.zeta[known]]
    return TriVector(symbols)


def decrypt(sk: SecretKey, ct: Ciphertext, rng: np.random.Generator) -> int | None:
    """Decrypt a ciphertext to a bit; None mirrors an aborted ciphertext."""
    if ct.is_abort:
        return None
    if ct.v.length != sk.params.m_prime and ct.v.length != strict_m_prime(
        sk.params.sigma_size, sk.params.k
    ):
        raise ValueError(f"ciphertext length {ct.v.length} does not match key height")
    w = extract_channel_word(sk, ct)
    return distinguish(sk.code(), w, sk.z_star, rng)


def correctness_trials(
    p: SchemeParams,
    gm: GeneratedMatrix,
    trials: int,
    z_star: float,
    retry_budget: int = DEFAULT_RETRY_BUDGET,
    label: str = "bench-correctness",
) -> dict:
    """Fresh key, random bit, encrypt, decrypt, `trials` times; per-arm rates.

    Trial t draws everything from stream(p.seed, label, t), so a run is
    reproducible from the parameter block alone.
    """
    hits = 0
    per_bit = {0: [0, 0], 1: [0, 0]}
    for trial in range(trials):
        rng = stream(p.seed, label, trial)
        pair = keygen(p, gm, rng, retry_budget=retry_budget, z_star=z_star)
        bit = int(rng.integers(0, 2))
        ct = encrypt(pair.public, bit, rng)
        out = decrypt(pair.secret, ct, rng)
        ok = int(out == bit)
        hits += ok
        per_bit[bit][0] += ok
        per_bit[bit][1] += 1
    return {
        "trials": trials,
        "rate": hits / trials,
        "rate_bit0": per_bit[0][0] / max(per_bit[0][1], 1),
        "rate_bit1": per_bit[1][0] / max(per_bit[1][1], 1),
        "trials_bit0": per_bit[0][1],
        "trials_bit1": per_bit[1][1],
    }


HYBRIDS = ("H0", "H0$", "H1$", "H1")


def hybrid_sample(
    which: str,
    p: SchemeParams,
    gm: GeneratedMatrix,
    rng: np.random.Generator,
    **keygen_kwargs,
) -> tuple[PublicKey | None, Ciphertext]:
    """Sample (pk, ct) from one of the four indistinguishability hybrids:
    H0 = (KeyGen, Enc 0), H0$ = (KeyGen', Enc 0), H1$ = (KeyGen', Enc 1),
    H1 = (KeyGen, Enc 1), where KeyGen' draws the targets b uniformly."""
    if which not in HYBRIDS:
        raise ValueError(f"which must be one of {HYBRIDS}, got {which!r}")
    b_mode = "null" if which in ("H0$", "H1$") else "planted"
    bit = 0 if which in ("H0", "H0$") else 1
    pair = keygen(p, gm, rng, b_mode=b_mode, **keygen_kwargs)
    pk = pair.public if pair is not None else None
    return pk, encrypt(pk, bit, rng)


# --- key and ciphertext files ----------------------------------------------


def public_key_dumps(pk: PublicKey) -> str:
    return f"{KEY_MAGIC}\n{params_dumps(pk.params)}{srm_dumps(pk.H)}"


def public_key_loads(text: str) -> PublicKey:
    lines = text.splitlines()
    if not lines or lines[0] != KEY_MAGIC:
        raise FormatError(f"line 1: expected magic {KEY_MAGIC!r}")
    p, pos = params_parse(lines, 1, 2)
    H, _ = srm_parse(lines, pos, pos + 1)
    return PublicKey(H, p)


def secret_key_dumps(sk: SecretKey) -> str:
    lines = [KEY_MAGIC, params_dumps(sk.params).rstrip("\n")]
    lines.append(f"ZETA {sk.params.m}")
    for i in range(sk.params.m):
        val = "BOT" if sk.zeta[i] < 0 else str(int(sk.zeta[i]))
        lines.append(f"{i} {val}")
    lines.append(srm_dumps(sk.G).rstrip("\n"))
    lines.append(f"RM {sk.code_d} {sk.code_r}")
    lines.append(f"ZSTAR {sk.z_star!r}")
    return "\n".join(lines) + "\n"


def secret_key_loads(text: str) -> SecretKey:
    lines = text.splitlines()
    if not lines or lines[0] != KEY_MAGIC:
        raise FormatError(f"line 1: expected magic {KEY_MAGIC!r}")
    p, pos = params_parse(lines, 1, 2)
    if pos >= len(lines) or lines[pos] != f"ZETA {p.m}":
        raise FormatError(f"line {pos + 1}: expected 'ZETA {p.m}' header")
    zeta = np.full(p.m, -1, dtype=np.int64)
    for i in range(p.m):
        idx = pos + 1 + i
        if idx >= len(lines):
            raise FormatError(f"line {idx + 1}: expected zeta entry, got end of file")
        parts = lines[idx].split()
        if len(parts) != 2 or parts[0] != str(i):
            raise FormatError(f"line {idx + 1}: expected '{i} <row|BOT>', got {lines[idx]!r}")
        if parts[1] != "BOT":
            try:
                zeta[i] = int(parts[1])
            except ValueError:
                raise FormatError(f"line {idx + 1}: bad row index {parts[1]!r}")
    pos += 1 + p.m
    G, pos = srm_parse(lines, pos, pos + 1)
    if pos >= len(lines) or not lines[pos].startswith("RM "):
        raise FormatError(f"line {pos + 1}: expected 'RM d r' line")
    try:
        _, d_str, r_str = lines[pos].split()
        code_d, code_r = int(d_str), int(r_str)
    except ValueError:
        raise FormatError(f"line {pos + 1}: malformed RM line {lines[pos]!r}")
    pos += 1
    if pos >= len(lines) or not lines[pos].startswith("ZSTAR "):
        raise FormatError(f"line {pos + 1}: expected 'ZSTAR value' line")
    try:
        z_star = float(lines[pos].split(maxsplit=1)[1])
    except (IndexError, ValueError):
        raise FormatError(f"line {pos + 1}: malformed ZSTAR line {lines[pos]!r}")
    return SecretKey(zeta, G, code_d, code_r, z_star, p)


def ciphertext_dumps(ct: Ciphertext) -> str:
    body = "ABORT" if ct.is_abort else ct.v.to_hex()
    return f"{CT_MAGIC}\n{body}\n"


def ciphertext_loads(text: str) -> Ciphertext:
    lines = text.splitlines()
    if not lines or lines[0] != CT_MAGIC:
        raise FormatError(f"line 1: expected magic {CT_MAGIC!r}")
    if len(lines) < 2:
        raise FormatError("line 2: expected ciphertext body, got end of file")
    if lines[1] == "ABORT":
        return Ciphertext(None)
    return Ciphertext(BitVec.from_hex(lines[1]))
