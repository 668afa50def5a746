"""Samplers for the two planted decision problems the scheme rests on.

The large-alphabet problem hands out (H, F, b): random functions
f_i : Sigma^k -> Gamma attached to the rows of a sparse matrix H, with b
either uniform (null) or mostly-honest evaluations of a planted secret
(planted, corruption rate alpha). The parity problem is the familiar noisy
sparse-XOR pair (H, b) with corruption rate beta.

Random functions are realized as counter-based streams keyed per row rather
than materialized truth tables: evaluation and full-domain preimage sweeps
are vectorized fills, and nothing of size Sigma^k is retained per row.
Per-coordinate corruption draws are keyed by coordinate index, so
null/planted pairs built from equal seeds are coupled
coordinate-by-coordinate (at corruption rate 1 they coincide exactly).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .f2core import BitVec, BudgetError, FormatError, SparseRowMatrix, matvec, srm_dumps, srm_parse
from .params import SchemeParams, params_dumps, params_parse
from .rng import derive_key, mix64, mix64_int

DEFAULT_DOMAIN_BUDGET = 1 << 24

_SEED_TAG = 0x5AFE5EED00000001


def _coord_uniforms(key: int, count: int) -> np.ndarray:
    """count floats in [0, 1), the i-th depending only on (key, i)."""
    mixed = mix64(np.uint64(key) ^ np.arange(count, dtype=np.uint64))
    return (mixed >> np.uint64(11)).astype(np.float64) * 2.0**-53


def _coord_values(key: int, count: int, modulus: int) -> np.ndarray:
    mixed = mix64(np.uint64(key) ^ np.arange(count, dtype=np.uint64))
    return (mixed % np.uint64(modulus)).astype(np.int64)


@dataclass(frozen=True)
class RandomFunctionStore:
    """m seeded random functions f_i : Sigma^k -> Gamma.

    f_i's truth table over the lexicographically ordered domain is the
    counter-based stream keyed by (seed, i), so evaluation is deterministic,
    uniform over Gamma per (i, tuple), and a full-domain sweep is one
    vectorized fill. Nothing of size Sigma^k is retained per row.
    """

    m: int
    k: int
    sigma_size: int
    gamma_size: int
    seed: int

    def __post_init__(self):
        if self.gamma_size < 1 or self.sigma_size < 1:
            raise ValueError("alphabet sizes must be positive")

    def _value_dtype(self):
        return np.uint16 if self.gamma_size <= 1 << 16 else np.uint32

    def domain_size(self) -> int:
        return self.sigma_size**self.k

    def tuple_index(self, symbols) -> int:
        idx = 0
        for sym in symbols:
            if not 0 <= sym < self.sigma_size:
                raise ValueError(f"symbol {sym} outside [0, {self.sigma_size})")
            idx = idx * self.sigma_size + int(sym)
        return idx

    def index_tuple(self, idx: int) -> tuple[int, ...]:
        digits = []
        for _ in range(self.k):
            idx, digit = divmod(idx, self.sigma_size)
            digits.append(digit)
        return tuple(reversed(digits))

    def row_values(self, i: int, budget: int = DEFAULT_DOMAIN_BUDGET) -> np.ndarray:
        """Full truth table of f_i over the lexicographically ordered domain."""
        if not 0 <= i < self.m:
            raise IndexError(f"row {i} out of range [0, {self.m})")
        size = self.domain_size()
        if size > budget:
            raise BudgetError(f"domain size {size} exceeds budget {budget}")
        key = np.array([mix64_int(self.seed ^ _SEED_TAG), i], dtype=np.uint64)
        gen = np.random.Generator(np.random.Philox(key=key))
        return gen.integers(0, self.gamma_size, size=size, dtype=self._value_dtype())

    def evaluate(self, i: int, symbols) -> int:
        """f_i applied to one k-tuple of symbols."""
        if len(symbols) != self.k:
            raise ValueError(f"expected {self.k} symbols, got {len(symbols)}")
        return int(self.row_values(i)[self.tuple_index(symbols)])

    def all_row_values(self, budget: int = DEFAULT_DOMAIN_BUDGET) -> np.ndarray:
        """(m, Sigma^k) table of every function's values; budget-guarded."""
        size = self.domain_size()
        if size * self.m > 4 * budget:
            raise BudgetError(f"m * domain = {size * self.m} exceeds table budget {4 * budget}")
        out = np.empty((self.m, size), dtype=self._value_dtype())
        for i in range(self.m):
            out[i] = self.row_values(i, budget=budget)
        return out

    def evaluate_rows(self, tuples: np.ndarray, budget: int = DEFAULT_DOMAIN_BUDGET) -> np.ndarray:
        """f_i(tuples[i]) for every row i; `tuples` has shape (m, k)."""
        tuples = np.asarray(tuples)
        if tuples.shape != (self.m, self.k):
            raise ValueError(f"tuples must have shape ({self.m}, {self.k})")
        weights = self.sigma_size ** np.arange(self.k - 1, -1, -1, dtype=np.int64)
        idx = (tuples.astype(np.int64) * weights[None, :]).sum(axis=1)
        values = self.all_row_values(budget=budget)
        return values[np.arange(self.m), idx].astype(np.int64)

    def distinct_tuple_mask(self, budget: int = DEFAULT_DOMAIN_BUDGET) -> np.ndarray:
        """Boolean mask over the domain marking tuples with all-distinct symbols."""
        size = self.domain_size()
        if size > budget:
            raise BudgetError(f"domain size {size} exceeds budget {budget}")
        digits = domain_digits(self.sigma_size, self.k)
        if self.k == 1:
            return np.ones(size, dtype=bool)
        sorted_digits = np.sort(digits, axis=1)
        return (np.diff(sorted_digits, axis=1) != 0).all(axis=1)


def domain_digits(sigma_size: int, k: int) -> np.ndarray:
    """(sigma^k, k) array: row idx holds the symbols of lexicographic tuple idx."""
    size = sigma_size**k
    idx = np.arange(size, dtype=np.int64)
    digits = np.zeros((size, k), dtype=np.int64)
    for j in range(k - 1, -1, -1):
        idx, digits[:, j] = np.divmod(idx, sigma_size)
    return digits


def honest_larp_values(F: RandomFunctionStore, H: SparseRowMatrix, s: np.ndarray) -> np.ndarray:
    """b_i = f_i(s restricted to row i's support), for all rows at once."""
    return F.evaluate_rows(np.asarray(s, dtype=np.int64)[H.rows])


@dataclass(frozen=True, eq=False)
class LarpInstance:
    H: SparseRowMatrix
    F: RandomFunctionStore
    b: np.ndarray = field(repr=False)
    label: str = "null"
    secret: np.ndarray | None = None
    corrupted_mask: np.ndarray | None = None


@dataclass(frozen=True, eq=False)
class KxorInstance:
    H: SparseRowMatrix
    b: BitVec
    label: str = "null"
    secret: BitVec | None = None
    corrupted_mask: np.ndarray | None = None


def random_mnk_matrix(m: int, n: int, k: int, rng: np.random.Generator) -> SparseRowMatrix:
    """Uniform (m, n, k)-matrix: each row picks k distinct columns of [n]."""
    if k > n:
        raise ValueError(f"cannot place {k} distinct columns in width {n}")
    picks = rng.random((m, n)).argsort(axis=1)[:, :k]
    return SparseRowMatrix(m, n, k, np.sort(picks, axis=1))


def sample_larp(
    p: SchemeParams,
    H: SparseRowMatrix,
    which: str,
    rng: np.random.Generator,
) -> LarpInstance:
    """Draw a null or planted large-alphabet instance over the given matrix.

    Null: b uniform over Gamma^m. Planted: sample a secret s, replace each
    honest value f_i(s|row i) with a uniform symbol independently w.p. alpha.
    The replacement symbols reuse the null stream's coordinate keys, so equal
    seeds couple the two distributions.
    """
    if (H.m, H.n, H.k) != (p.m, p.n, p.k):
        raise ValueError(f"H is {(H.m, H.n, H.k)}, params say {(p.m, p.n, p.k)}")
    if which not in ("null", "planted"):
        raise ValueError(f"which must be 'null' or 'planted', got {which!r}")
    key_b = derive_key(rng)
    F = RandomFunctionStore(p.m, p.k, p.sigma_size, p.gamma_size, seed=derive_key(rng))
    replacement = _coord_values(key_b, p.m, p.gamma_size)
    if which == "null":
        return LarpInstance(H, F, replacement, "null")
    key_mask = derive_key(rng)
    s = rng.integers(0, p.sigma_size, size=p.n, dtype=np.int64)
    mask = _coord_uniforms(key_mask, p.m) < p.alpha
    b = np.where(mask, replacement, honest_larp_values(F, H, s))
    return LarpInstance(H, F, b, "planted", secret=s, corrupted_mask=mask)


def sample_kxor(
    p: SchemeParams,
    H: SparseRowMatrix,
    which: str,
    rng: np.random.Generator,
) -> KxorInstance:
    """Draw a null or planted noisy sparse-XOR instance over the given matrix."""
    if H.m != p.m:
        raise ValueError(f"H has {H.m} rows, params say {p.m}")
    if which not in ("null", "planted"):
        raise ValueError(f"which must be 'null' or 'planted', got {which!r}")
    key_b = derive_key(rng)
    replacement = (_coord_values(key_b, p.m, 2)).astype(np.uint8)
    if which == "null":
        return KxorInstance(H, BitVec.from_bits(replacement), "null")
    key_mask = derive_key(rng)
    s = BitVec.random(H.n, rng)
    mask = _coord_uniforms(key_mask, p.m) < p.beta
    parity = matvec(H, s).to_array()
    b = np.where(mask, replacement, parity).astype(np.uint8)
    return KxorInstance(H, BitVec.from_bits(b), "planted", secret=s, corrupted_mask=mask)


def enumerate_preimages(
    F: RandomFunctionStore,
    i: int,
    target: int,
    distinct_only: bool = False,
    budget: int = DEFAULT_DOMAIN_BUDGET,
) -> list[tuple[int, ...]]:
    """All tuples with f_i(tuple) == target, lexicographically ordered.

    distinct_only drops every tuple containing a repeated symbol.
    """
    if not 0 <= target < F.gamma_size:
        raise ValueError(f"target {target} outside [0, {F.gamma_size})")
    hits = F.row_values(i, budget=budget) == target
    if distinct_only:
        hits &= F.distinct_tuple_mask(budget=budget)
    digits = domain_digits(F.sigma_size, F.k)[np.nonzero(hits)[0]]
    return [tuple(int(v) for v in row) for row in digits]


@dataclass(frozen=True)
class HypergraphView:
    """Planted-problem view: vertices are (coordinate, symbol) pairs, and each
    constraint row contributes one arity-k edge per preimage of its target."""

    n: int
    sigma_size: int
    edges: frozenset[tuple[tuple[int, int], ...]]

    def edge_supports(self) -> set[tuple[int, ...]]:
        return {tuple(coord for coord, _ in edge) for edge in self.edges}


def to_hypergraph(inst: LarpInstance, budget: int = DEFAULT_DOMAIN_BUDGET) -> HypergraphView:
    """Edge ((j_1, sigma_1), ..., (j_k, sigma_k)) is present iff the symbol
    tuple is a preimage of b_i under f_i for some row i with support (j_1..j_k)."""
    edges = set()
    for i in range(inst.H.m):
        support = inst.H.row_support(i)
        for symbols in enumerate_preimages(inst.F, i, int(inst.b[i]), budget=budget):
            edges.add(tuple(zip(support, symbols)))
    return HypergraphView(inst.H.n, inst.F.sigma_size, frozenset(edges))


# --- instance files ---------------------------------------------------------
#
# "CSPINST1" magic, type/label/function-seed lines, parameter block, SRM
# matrix, then the target vector as decimal symbol indices. Secret and mask
# blocks appear only when the writer was asked to include the witness.

INSTANCE_MAGIC = "CSPINST1"


def instance_dumps(
    inst: LarpInstance | KxorInstance, p: SchemeParams, include_witness: bool = False
) -> str:
    is_larp = isinstance(inst, LarpInstance)
    lines = [INSTANCE_MAGIC]
    lines.append(f"type={'larp' if is_larp else 'kxor'}")
    lines.append(f"label={inst.label}")
    lines.append(f"fseed={inst.F.seed if is_larp else 0}")
    lines.append(params_dumps(p).rstrip("\n"))
    lines.append(srm_dumps(inst.H).rstrip("\n"))
    lines.append("B")
    b_values = inst.b if is_larp else inst.b.to_array()
    lines.append(" ".join(str(int(v)) for v in b_values))
    if include_witness and inst.secret is not None:
        lines.append("SECRET")
        sec = inst.secret if is_larp else inst.secret.to_array()
        lines.append(" ".join(str(int(v)) for v in sec))
        lines.append("MASK")
        lines.append(BitVec.from_bits(inst.corrupted_mask.astype(np.uint8)).to_hex())
    return "\n".join(lines) + "\n"


def instance_loads(text: str) -> tuple[LarpInstance | KxorInstance, SchemeParams]:
    lines = text.splitlines()
    if not lines or lines[0] != INSTANCE_MAGIC:
        raise FormatError(f"line 1: expected magic {INSTANCE_MAGIC!r}")
    meta = {}
    for offset, key in enumerate(("type", "label", "fseed")):
        idx = 1 + offset
        if idx >= len(lines) or not lines[idx].startswith(f"{key}="):
            raise FormatError(f"line {idx + 1}: expected '{key}=...'")
        meta[key] = lines[idx].split("=", 1)[1]
    p, pos = params_parse(lines, 4, 5)
    H, pos = srm_parse(lines, pos, pos + 1)
    if pos >= len(lines) or lines[pos] != "B":
        raise FormatError(f"line {pos + 1}: expected 'B' block")
    if pos + 1 >= len(lines):
        raise FormatError(f"line {pos + 2}: expected target values")
    try:
        b_values = np.array([int(v) for v in lines[pos + 1].split()], dtype=np.int64)
    except ValueError:
        raise FormatError(f"line {pos + 2}: non-integer target value")
    if len(b_values) != H.m:
        raise FormatError(f"line {pos + 2}: expected {H.m} target values, got {len(b_values)}")
    alphabet = p.gamma_size if meta["type"] == "larp" else 2
    if len(b_values) and (b_values.min() < 0 or b_values.max() >= alphabet):
        raise FormatError(f"line {pos + 2}: target value outside [0, {alphabet})")
    pos += 2

    secret = mask = None
    if pos < len(lines) and lines[pos] == "SECRET":
        try:
            secret = np.array([int(v) for v in lines[pos + 1].split()], dtype=np.int64)
        except (IndexError, ValueError):
            raise FormatError(f"line {pos + 2}: malformed secret block")
        if pos + 2 >= len(lines) or lines[pos + 2] != "MASK":
            raise FormatError(f"line {pos + 3}: expected 'MASK' block")
        mask = BitVec.from_hex(lines[pos + 3]).to_array().astype(bool)
        if len(mask) != H.m:
            raise FormatError(f"line {pos + 4}: mask length {len(mask)} != m = {H.m}")
        pos += 4

    if meta["type"] == "larp":
        F = RandomFunctionStore(p.m, p.k, p.sigma_size, p.gamma_size, seed=int(meta["fseed"]))
        inst = LarpInstance(H, F, b_values, meta["label"], secret=secret, corrupted_mask=mask)
    elif meta["type"] == "kxor":
        b = BitVec.from_bits(b_values.astype(np.uint8))
        sec = BitVec.from_bits(secret.astype(np.uint8)) if secret is not None else None
        inst = KxorInstance(H, b, meta["label"], secret=sec, corrupted_mask=mask)
    else:
        raise FormatError(f"line 2: unknown instance type {meta['type']!r}")
    return inst, p
