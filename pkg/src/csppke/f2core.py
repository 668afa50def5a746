"""Bit-packed GF(2) vectors, sparse constraint matrices, and expansion checks.

A constraint matrix here is an (m, n, k)-matrix: every row has exactly k
nonzero entries, stored as a strictly increasing list of column indices.
Rows double as the variable scopes of arity-k constraints, so the only
linear algebra provided is what the encryption pipeline needs: row unions,
matrix-vector products, and boundary-expansion verification.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

ERASED = np.int8(2)


class BudgetError(RuntimeError):
    """An exhaustive oracle was asked to do more work than its budget allows."""


class FormatError(ValueError):
    """A serialized artifact failed to parse; the message names the line."""


@dataclass(frozen=True)
class BitVec:
    """Immutable bit vector; bits are packed into one arbitrary-precision word.

    Bit i of `value` is coordinate i. Bits at positions >= length are zero.
    """

    length: int
    value: int = 0

    def __post_init__(self):
        if self.length < 0:
            raise ValueError("length must be nonnegative")
        if self.value < 0 or self.value >> self.length:
            raise ValueError("value has bits beyond length")

    @classmethod
    def from_bits(cls, bits) -> "BitVec":
        arr = np.asarray(bits, dtype=np.uint8)
        if arr.ndim != 1:
            raise ValueError("expected a 1-d bit sequence")
        packed = np.packbits(arr, bitorder="little").tobytes()
        return cls(len(arr), int.from_bytes(packed, "little"))

    @classmethod
    def from_indices(cls, length: int, indices) -> "BitVec":
        value = 0
        for i in indices:
            if not 0 <= i < length:
                raise IndexError(f"bit index {i} out of range [0, {length})")
            value |= 1 << int(i)
        return cls(length, value)

    @classmethod
    def zeros(cls, length: int) -> "BitVec":
        return cls(length, 0)

    @classmethod
    def random(cls, length: int, rng: np.random.Generator) -> "BitVec":
        return cls.from_bits(rng.integers(0, 2, size=length, dtype=np.uint8))

    def to_array(self) -> np.ndarray:
        nbytes = max(1, (self.length + 7) // 8)
        raw = np.frombuffer(self.value.to_bytes(nbytes, "little"), dtype=np.uint8)
        return np.unpackbits(raw, bitorder="little")[: self.length]

    def get(self, i: int) -> int:
        if not 0 <= i < self.length:
            raise IndexError(f"bit index {i} out of range [0, {self.length})")
        return (self.value >> i) & 1

    def weight(self) -> int:
        return self.value.bit_count()

    def __xor__(self, other: "BitVec") -> "BitVec":
        if self.length != other.length:
            raise ValueError("length mismatch")
        return BitVec(self.length, self.value ^ other.value)

    def to_hex(self) -> str:
        """Serialize as `<length>:<hex>` with fixed-width hex (round-trips exactly)."""
        digits = max(1, (self.length + 3) // 4)
        return f"{self.length}:{self.value:0{digits}x}"

    @classmethod
    def from_hex(cls, text: str) -> "BitVec":
        try:
            length_part, hex_part = text.strip().split(":")
            length = int(length_part)
            value = int(hex_part, 16)
        except ValueError as exc:
            raise FormatError(f"bad bit-vector literal {text!r}") from exc
        if len(hex_part) != max(1, (length + 3) // 4):
            raise FormatError(f"bit-vector literal {text!r} has wrong hex width")
        return cls(length, value)


@dataclass(frozen=True)
class TriVector:
    """Vector over {0, 1, ERASED}; the erased symbol models '?' coordinates."""

    symbols: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.symbols, dtype=np.int8)
        if arr.ndim != 1 or not np.isin(arr, (0, 1, ERASED)).all():
            raise ValueError("symbols must be a 1-d array over {0, 1, ERASED}")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "symbols", arr)

    @classmethod
    def from_bitvec(cls, v: BitVec) -> "TriVector":
        return cls(v.to_array().astype(np.int8))

    @property
    def length(self) -> int:
        return len(self.symbols)

    def erased_mask(self) -> np.ndarray:
        return self.symbols == ERASED

    def known_mask(self) -> np.ndarray:
        return self.symbols != ERASED

    def fill_erasures(self, fill_bits: np.ndarray) -> np.ndarray:
        """Return a plain bit array with erased coordinates replaced by fill_bits."""
        out = self.symbols.astype(np.uint8).copy()
        mask = self.erased_mask()
        out[mask] = np.asarray(fill_bits, dtype=np.uint8)[mask]
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, TriVector) and np.array_equal(self.symbols, other.symbols)


class SparseRowMatrix:
    """(m, n, k)-matrix stored as per-row strictly increasing column indices."""

    __slots__ = ("m", "n", "k", "rows")

    def __init__(self, m: int, n: int, k: int, rows):
        arr = np.asarray(rows, dtype=np.int32)
        if arr.shape != (m, k):
            raise ValueError(f"rows must have shape ({m}, {k}), got {arr.shape}")
        if m > 0 and k > 0:
            if arr.min() < 0 or arr.max() >= n:
                raise ValueError("column index out of range")
            if k > 1 and not (np.diff(arr, axis=1) > 0).all():
                raise ValueError("row indices must be strictly increasing")
        arr = arr.copy()
        arr.flags.writeable = False
        self.m, self.n, self.k, self.rows = m, n, k, arr

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SparseRowMatrix)
            and (self.m, self.n, self.k) == (other.m, other.n, other.k)
            and np.array_equal(self.rows, other.rows)
        )

    def __repr__(self):
        return f"SparseRowMatrix(m={self.m}, n={self.n}, k={self.k})"

    def row_support(self, i: int) -> tuple[int, ...]:
        return tuple(int(c) for c in self.rows[i])

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((self.m, self.n), dtype=np.uint8)
        if self.m and self.k:
            dense[np.arange(self.m)[:, None], self.rows] = 1
        return dense


def neighbor(matrix: SparseRowMatrix, i: int, j: int) -> int:
    """Column index of the j-th nonzero entry of row i (both 0-based)."""
    if not 0 <= i < matrix.m:
        raise IndexError(f"row {i} out of range [0, {matrix.m})")
    if not 0 <= j < matrix.k:
        raise IndexError(f"position {j} out of range [0, {matrix.k})")
    return int(matrix.rows[i, j])


def row_or(matrix: SparseRowMatrix, row_set) -> BitVec:
    """Component-wise OR of the selected rows (the union of their supports)."""
    rows = sorted(set(int(i) for i in row_set))
    if not rows:
        raise ValueError("row set must be nonempty")
    for i in rows:
        if not 0 <= i < matrix.m:
            raise IndexError(f"row {i} out of range [0, {matrix.m})")
    support = np.unique(matrix.rows[rows])
    return BitVec.from_indices(matrix.n, support.tolist())


def matvec(matrix: SparseRowMatrix, x: BitVec) -> BitVec:
    """GF(2) product: output bit i is the XOR of x over row i's support."""
    if x.length != matrix.n:
        raise ValueError(f"x has length {x.length}, expected {matrix.n}")
    bits = x.to_array()
    out = bits[matrix.rows].sum(axis=1, dtype=np.int64) & 1
    return BitVec.from_bits(out.astype(np.uint8))


def _row_masks(matrix: SparseRowMatrix) -> np.ndarray:
    """Per-row support bitmasks, one uint64 word per 64 columns."""
    words = max(1, (matrix.n + 63) // 64)
    masks = np.zeros((matrix.m, words), dtype=np.uint64)
    word_idx = matrix.rows // 64
    bit = np.uint64(1) << (matrix.rows % 64).astype(np.uint64)
    for j in range(matrix.k):
        np.bitwise_or.at(masks, (np.arange(matrix.m), word_idx[:, j]), bit[:, j])
    return masks


@dataclass(frozen=True)
class ExpansionReport:
    """Outcome of an expansion check.

    `certified` is True only in exhaustive mode: sampled mode can exhibit a
    counterexample but can never certify that none exists.
    """

    passed: bool
    gamma: float
    t: int
    mode: str
    subsets_checked: int
    counterexample: tuple[int, ...] | None = None
    certified: bool = False


def _verify_violation(matrix: SparseRowMatrix, gamma: float, subset: tuple[int, ...]) -> bool:
    weight = row_or(matrix, subset).weight()
    return weight < gamma * matrix.k * len(subset)


def check_expansion(
    matrix: SparseRowMatrix,
    gamma: float,
    t: int,
    mode: str = "exhaustive",
    trials: int = 1000,
    rng: np.random.Generator | None = None,
    budget: int = 2_000_000,
) -> ExpansionReport:
    """Check hw(OR of rows in S) >= gamma * k * |S| for all row sets S, |S| <= t.

    Exhaustive mode enumerates every subset (subject to `budget`) and can
    certify a pass. Sampled mode draws `trials` random subsets per size and
    re-verifies any violation it finds before reporting it.
    """
    if not 1 <= t <= matrix.m:
        raise ValueError(f"t must be in [1, {matrix.m}]")
    if mode not in ("exhaustive", "sampled"):
        raise ValueError(f"unknown mode {mode!r}")

    masks = _row_masks(matrix)
    checked = 0

    if mode == "exhaustive":
        total = 0
        for s in range(1, t + 1):
            total += math.comb(matrix.m, s)
            if total > budget:
                raise BudgetError(
                    f"exhaustive expansion check needs {total}+ subsets, budget is {budget}"
                )
        for s in range(1, t + 1):
            threshold = gamma * matrix.k * s
            combos = np.array(
                list(itertools.combinations(range(matrix.m), s)), dtype=np.int64
            )
            union = np.bitwise_or.reduce(masks[combos], axis=1)
            weights = np.bitwise_count(union).sum(axis=1)
            checked += len(combos)
            bad = np.nonzero(weights < threshold)[0]
            if len(bad):
                subset = tuple(int(i) for i in combos[bad[0]])
                return ExpansionReport(False, gamma, t, mode, checked, subset, certified=True)
        return ExpansionReport(True, gamma, t, mode, checked, certified=True)

    if rng is None:
        raise ValueError("sampled mode requires an rng")
    for s in range(1, t + 1):
        threshold = gamma * matrix.k * s
        for _ in range(trials):
            subset = tuple(sorted(rng.choice(matrix.m, size=s, replace=False).tolist()))
            union = np.bitwise_or.reduce(masks[list(subset)], axis=0)
            checked += 1
            if int(np.bitwise_count(union).sum()) < threshold:
                if not _verify_violation(matrix, gamma, subset):
                    raise RuntimeError("sampled violation failed re-verification")
                return ExpansionReport(False, gamma, t, mode, checked, subset)
    return ExpansionReport(True, gamma, t, mode, checked, certified=False)


def apply_erasure_corruption(
    v: BitVec, alpha: float, beta: float, rng: np.random.Generator
) -> TriVector:
    """Erase each coordinate w.p. alpha; replace survivors with a uniform bit w.p. beta.

    Matches the channel a codeword sees end to end: position i becomes ERASED
    with probability alpha, a fresh uniform bit with probability (1-alpha)*beta,
    and is carried through unchanged otherwise.
    """
    if not (0.0 <= alpha <= 1.0 and 0.0 <= beta <= 1.0):
        raise ValueError("rates must lie in [0, 1]")
    bits = v.to_array().astype(np.int8)
    u = rng.random(v.length)
    replacement = rng.integers(0, 2, size=v.length, dtype=np.int8)
    out = np.where(u < alpha, ERASED, np.where(u < alpha + (1 - alpha) * beta, replacement, bits))
    return TriVector(out)


# --- SRM text format ------------------------------------------------------
#
# Header "SRM m n k", then m lines of k space-separated 0-based column
# indices. Newline-terminated, bit-exact.


def srm_dumps(matrix: SparseRowMatrix) -> str:
    lines = [f"SRM {matrix.m} {matrix.n} {matrix.k}"]
    for i in range(matrix.m):
        lines.append(" ".join(str(int(c)) for c in matrix.rows[i]))
    return "\n".join(lines) + "\n"


def srm_loads(text: str, start_line: int = 1) -> SparseRowMatrix:
    lines = text.splitlines()
    matrix, _ = srm_parse(lines, 0, start_line)
    return matrix


def srm_parse(lines: list[str], pos: int, line_no: int) -> tuple[SparseRowMatrix, int]:
    """Parse an SRM block from `lines[pos:]`; returns (matrix, next position).

    `line_no` is the 1-based file line of lines[pos], used in error messages.
    """
    if pos >= len(lines):
        raise FormatError(f"line {line_no}: expected 'SRM m n k' header, got end of file")
    header = lines[pos].split()
    if len(header) != 4 or header[0] != "SRM":
        raise FormatError(f"line {line_no}: expected 'SRM m n k' header, got {lines[pos]!r}")
    try:
        m, n, k = (int(x) for x in header[1:])
    except ValueError:
        raise FormatError(f"line {line_no}: non-integer SRM dimensions in {lines[pos]!r}")
    rows = np.zeros((m, k), dtype=np.int32)
    for i in range(m):
        idx = pos + 1 + i
        if idx >= len(lines):
            raise FormatError(f"line {line_no + 1 + i}: expected matrix row, got end of file")
        parts = lines[idx].split()
        if len(parts) != k:
            raise FormatError(
                f"line {line_no + 1 + i}: expected {k} column indices, got {len(parts)}"
            )
        try:
            rows[i] = [int(p) for p in parts]
        except ValueError:
            raise FormatError(f"line {line_no + 1 + i}: non-integer column index")
    try:
        matrix = SparseRowMatrix(m, n, k, rows)
    except ValueError as exc:
        raise FormatError(f"line {line_no}: invalid SRM block: {exc}")
    return matrix, pos + 1 + m
