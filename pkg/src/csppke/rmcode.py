"""Reed-Muller codes RM(d, r): encoding, ANF tools, majority-logic decoding,
and the erasure-randomizing noisy-codeword/random distinguisher.

Conventions fixed across the package (serialization depends on them):
  * Evaluation points p in F_2^d are enumerated as the integers 0..2^d-1;
    bit j of p is the value of variable j (LSB-first point order).
  * Monomials are subsets of variables, stored as bitmasks, ordered by
    (degree, then lexicographic sorted index tuple). The constant monomial
    (empty subset) comes first.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .f2core import BitVec, TriVector


def moebius_transform(table: np.ndarray) -> np.ndarray:
    """Self-inverse GF(2) Moebius/zeta transform over the subset lattice.

    Maps a truth table (indexed by points, LSB-first) to its ANF coefficient
    vector (indexed by monomial bitmasks), and back. Accepts a batch as the
    leading axes; the transform runs over the last axis.
    """
    arr = np.asarray(table, dtype=np.uint8).copy()
    n = arr.shape[-1]
    if n & (n - 1):
        raise ValueError(f"length {n} is not a power of two")
    lead = arr.shape[:-1]
    h = 1
    while h < n:
        arr = arr.reshape(lead + (-1, 2, h))
        arr[..., 1, :] ^= arr[..., 0, :]
        h *= 2
    return arr.reshape(lead + (n,))


@dataclass(frozen=True)
class Anf:
    """Multilinear GF(2) polynomial in algebraic normal form.

    `terms` holds the bitmask of every monomial with coefficient 1 (bit j set
    means variable j appears). The zero polynomial has no terms and reports
    degree 0; `is_zero` tells it apart from the constant 1.
    """

    d: int
    terms: frozenset[int]

    def __post_init__(self):
        for t in self.terms:
            if t < 0 or t >> self.d:
                raise ValueError(f"term mask {t:#x} uses variables beyond d={self.d}")

    @property
    def degree(self) -> int:
        return max((t.bit_count() for t in self.terms), default=0)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def evaluate(self, point: int) -> int:
        return sum(1 for t in self.terms if point & t == t) & 1

    def truth_table(self) -> np.ndarray:
        coeffs = np.zeros(1 << self.d, dtype=np.uint8)
        for t in self.terms:
            coeffs[t] = 1
        return moebius_transform(coeffs)

    @classmethod
    def from_truth_table(cls, table: np.ndarray) -> "Anf":
        table = np.asarray(table, dtype=np.uint8)
        d = (len(table) - 1).bit_length()
        if len(table) != 1 << d:
            raise ValueError(f"length {len(table)} is not a power of two")
        coeffs = moebius_transform(table)
        return cls(d, frozenset(int(t) for t in np.nonzero(coeffs)[0]))

    def term_subsets(self) -> list[tuple[int, ...]]:
        """Terms as sorted variable-index tuples, in (degree, lex) order."""
        subsets = [_mask_to_subset(t) for t in self.terms]
        return sorted(subsets, key=lambda s: (len(s), s))


def _mask_to_subset(mask: int) -> tuple[int, ...]:
    return tuple(j for j in range(mask.bit_length()) if (mask >> j) & 1)


def _subset_to_mask(subset) -> int:
    mask = 0
    for j in subset:
        mask |= 1 << int(j)
    return mask


def anf_degree(table: np.ndarray) -> int:
    """Degree of the unique multilinear polynomial with this truth table.

    All-zero tables report 0, same as the constant 1; use
    Anf.from_truth_table(...).is_zero to separate the two.
    """
    return Anf.from_truth_table(table).degree


@lru_cache(maxsize=32)
def _code_tables(d: int, r: int) -> tuple[tuple[int, ...], np.ndarray]:
    masks = []
    for size in range(0, min(r, d) + 1):
        for subset in itertools.combinations(range(d), size):
            masks.append(_subset_to_mask(subset))
    points = np.arange(1 << d, dtype=np.int64)
    eval_matrix = np.zeros((1 << d, len(masks)), dtype=np.uint8)
    for idx, mask in enumerate(masks):
        eval_matrix[:, idx] = (points & mask) == mask
    eval_matrix.flags.writeable = False
    return tuple(masks), eval_matrix


@dataclass(frozen=True)
class RmCode:
    """RM(d, r): evaluation vectors of all degree <= r polynomials over F_2^d.

    r >= d is allowed and yields the full space (distance 1). Instances are
    immutable and share cached evaluation matrices, so they are cheap to pass
    around between concurrent trials.
    """

    d: int
    r: int

    def __post_init__(self):
        if self.d < 1 or self.r < 0:
            raise ValueError("need d >= 1 and r >= 0")

    @property
    def block_length(self) -> int:
        return 1 << self.d

    @property
    def monomial_masks(self) -> tuple[int, ...]:
        return _code_tables(self.d, self.r)[0]

    @property
    def evaluation_matrix(self) -> np.ndarray:
        """2^d x dimension matrix; column idx is the truth table of monomial idx."""
        return _code_tables(self.d, self.r)[1]

    @property
    def dimension(self) -> int:
        return len(self.monomial_masks)

    def monomials(self) -> list[tuple[int, ...]]:
        return [_mask_to_subset(m) for m in self.monomial_masks]

    def min_distance(self) -> int:
        return 1 << max(self.d - self.r, 0)

    def decode_radius(self) -> int:
        """Largest adversarial error count majority-logic decoding corrects."""
        return (1 << max(self.d - self.r - 1, 0)) - 1


def encode(code: RmCode, coeffs: BitVec) -> BitVec:
    """Evaluate the polynomial with the given monomial coefficients at all points."""
    if coeffs.length != code.dimension:
        raise ValueError(f"coeffs length {coeffs.length} != dimension {code.dimension}")
    word = code.evaluation_matrix @ coeffs.to_array().astype(np.int64) & 1
    return BitVec.from_bits(word.astype(np.uint8))


def is_member(code: RmCode, v: BitVec) -> bool:
    """Membership test, run through two independent routes that must agree.

    Route 1 computes the ANF degree of v. Route 2 checks orthogonality to the
    generators of the dual code RM(d, d-r-1). A disagreement would mean a bug
    in one of the routes, so it raises instead of picking a side.
    """
    if v.length != code.block_length:
        raise ValueError(f"v has length {v.length}, expected {code.block_length}")
    via_anf = anf_degree(v.to_array()) <= code.r
    dual_degree = code.d - code.r - 1
    if dual_degree < 0:
        via_dual = True
    else:
        dual_gens = _code_tables(code.d, dual_degree)[1]
        products = (v.to_array().astype(np.int64) @ dual_gens) & 1
        via_dual = not products.any()
    if via_anf != via_dual:
        raise RuntimeError(
            f"membership routes disagree for RM({code.d},{code.r}): "
            f"anf={via_anf}, dual={via_dual}"
        )
    return via_anf


def decode_majority(code: RmCode, received: BitVec) -> BitVec:
    """Reed majority-logic decoding, peeling degrees r down to 0.

    For each degree-s monomial the coefficient is voted on by the parities of
    the 2^(d-s) cosets of its variable subcube; ties break to 0. If the input
    is within the decoding radius (< 2^(d-r-1) flips of a codeword) the
    transmitted coefficients are recovered exactly; otherwise some coefficient
    vector is still returned and the caller judges the residual distance.
    """
    if received.length != code.block_length:
        raise ValueError(f"received length {received.length} != {code.block_length}")
    d = code.d
    masks = code.monomial_masks
    eval_matrix = code.evaluation_matrix
    residual = received.to_array().astype(np.uint8)
    coeffs = np.zeros(code.dimension, dtype=np.uint8)

    by_degree: dict[int, list[int]] = {}
    for idx, mask in enumerate(masks):
        by_degree.setdefault(mask.bit_count(), []).append(idx)

    for degree in sorted(by_degree, reverse=True):
        cube = residual.reshape((2,) * d)
        for idx in by_degree[degree]:
            mask = masks[idx]
            axes = tuple(d - 1 - j for j in range(d) if (mask >> j) & 1)
            votes = cube.sum(axis=axes, dtype=np.int64) & 1
            if 2 * int(votes.sum()) > votes.size:
                coeffs[idx] = 1
        level = np.zeros(code.dimension, dtype=np.uint8)
        level[by_degree[degree]] = coeffs[by_degree[degree]]
        residual ^= (eval_matrix @ level.astype(np.int64) & 1).astype(np.uint8)
    return BitVec.from_bits(coeffs)


def distinguish(
    code: RmCode,
    w: TriVector,
    z_star: float,
    rng: np.random.Generator | None = None,
    erasure_fill: str = "random",
) -> int:
    """Decide whether w is a noisy codeword (0) or an erased-random vector (1).

    Fills erasures with fresh random bits, majority-decodes, re-encodes, and
    counts disagreements on the originally non-erased coordinates; returns 0
    iff the count is below z_star. erasure_fill="zero" is a deterministic
    variant for regression tests only.
    """
    if w.length != code.block_length:
        raise ValueError(f"w has length {w.length}, expected {code.block_length}")
    if erasure_fill == "random":
        if rng is None:
            raise ValueError("random erasure fill requires an rng")
        fill = rng.integers(0, 2, size=w.length, dtype=np.uint8)
    elif erasure_fill == "zero":
        fill = np.zeros(w.length, dtype=np.uint8)
    else:
        raise ValueError(f"unknown erasure_fill {erasure_fill!r}")
    filled = w.fill_erasures(fill)
    decoded = decode_majority(code, BitVec.from_bits(filled))
    reencoded = encode(code, decoded).to_array()
    known = w.known_mask()
    count = int((reencoded[known] != filled[known]).sum())
    return 0 if count < z_star else 1


def _disagreement_count(code: RmCode, w: TriVector, rng: np.random.Generator) -> int:
    fill = rng.integers(0, 2, size=w.length, dtype=np.uint8)
    filled = w.fill_erasures(fill)
    decoded = decode_majority(code, BitVec.from_bits(filled))
    reencoded = encode(code, decoded).to_array()
    known = w.known_mask()
    return int((reencoded[known] != filled[known]).sum())


class CalibrationError(RuntimeError):
    """The noisy-codeword and random-vector count distributions do not separate."""


@dataclass(frozen=True)
class CalibrationResult:
    """Threshold and the two empirical disagreement-count distributions."""

    z_star: float
    codeword_counts: np.ndarray
    random_counts: np.ndarray
    separation: float

    @property
    def codeword_mean(self) -> float:
        return float(self.codeword_counts.mean())

    @property
    def random_mean(self) -> float:
        return float(self.random_counts.mean())


def calibrate_threshold(
    code: RmCode,
    alpha: float,
    beta: float,
    trials: int,
    rng: np.random.Generator,
    min_separation: float = 0.75,
) -> CalibrationResult:
    """Find a cutoff separating noisy-codeword counts from random-vector counts.

    Runs `trials` Monte-Carlo decodes per arm and sets z_star to the midpoint
    of the two empirical means. `separation` is the fraction of trials the
    midpoint classifies correctly; below `min_separation` the parameters are
    outside the decodable regime and a CalibrationError is raised.
    """
    from .f2core import apply_erasure_corruption

    if trials < 2:
        raise ValueError("need trials >= 2")
    codeword_counts = np.zeros(trials, dtype=np.int64)
    random_counts = np.zeros(trials, dtype=np.int64)
    for t in range(trials):
        coeffs = BitVec.random(code.dimension, rng)
        noisy = apply_erasure_corruption(encode(code, coeffs), alpha, beta, rng)
        codeword_counts[t] = _disagreement_count(code, noisy, rng)

        symbols = rng.integers(0, 2, size=code.block_length, dtype=np.int8)
        erased = rng.random(code.block_length) < alpha
        symbols[erased] = 2
        random_counts[t] = _disagreement_count(code, TriVector(symbols), rng)

    z_star = (codeword_counts.mean() + random_counts.mean()) / 2.0
    separation = (
        float((codeword_counts < z_star).mean()) + float((random_counts >= z_star).mean())
    ) / 2.0
    result = CalibrationResult(float(z_star), codeword_counts, random_counts, separation)
    if separation < min_separation:
        raise CalibrationError(
            f"distributions overlap: separation {separation:.3f} < {min_separation} "
            f"(codeword mean {result.codeword_mean:.1f}, random mean {result.random_mean:.1f})"
        )
    return result
