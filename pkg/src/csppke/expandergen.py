"""Sampler for expanding (m, n, k) generator matrices whose code sits inside
a low-degree Reed-Muller code.

The matrix is built from k blocks of 2^window_bits columns. Block i places
one nonzero per row: row p gets column q, where q is the window_bits-bit
string obtained by evaluating that block's random low-degree selector
polynomials at p (first selector = most significant bit). Every column is
therefore the truth table of a product of at most window_bits selectors, so
its ANF degree is at most window_bits * poly_degree.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .f2core import FormatError, SparseRowMatrix
from .params import GenParams
from .rmcode import Anf, RmCode, anf_degree, is_member


def sample_low_degree_poly(d: int, degree: int, rng: np.random.Generator) -> Anf:
    """Uniform polynomial of degree <= `degree` over d variables.

    Each of the C(d, <=degree) monomial coefficients is an independent fair
    coin, so every admissible polynomial is equally likely.
    """
    if not 0 <= degree <= d:
        raise ValueError(f"degree must be in [0, {d}], got {degree}")
    terms = set()
    for size in range(0, degree + 1):
        for subset in itertools.combinations(range(d), size):
            if rng.integers(0, 2):
                mask = 0
                for j in subset:
                    mask |= 1 << j
                terms.add(mask)
    return Anf(d, frozenset(terms))


@dataclass(frozen=True)
class GeneratedMatrix:
    """A sampled generator matrix together with its selector polynomials.

    selectors[i][j] is the polynomial feeding bit j (MSB first) of block i's
    column index; column_degree_bound = window_bits * poly_degree upper-bounds
    the ANF degree of every column.
    """

    G: SparseRowMatrix
    gen: GenParams
    selectors: tuple[tuple[Anf, ...], ...] = field(repr=False)

    @property
    def column_degree_bound(self) -> int:
        return self.gen.window_bits * self.gen.poly_degree

    def ambient_code(self) -> RmCode:
        """Smallest RM code of this block length guaranteed to contain the columns."""
        return RmCode(self.gen.d, self.column_degree_bound)

    def block_column_indices(self) -> np.ndarray:
        """(m, k) array: within-block column index chosen by each block per row."""
        w = self.gen.window_bits
        base = np.arange(self.gen.k, dtype=np.int32) << w
        return self.G.rows - base[None, :]

    def column_truth_table(self, column: int) -> np.ndarray:
        """Column `column` of G as a length-2^d bit array (zero-pad columns included)."""
        if not 0 <= column < self.gen.n:
            raise IndexError(f"column {column} out of range [0, {self.gen.n})")
        return (self.G.rows == column).any(axis=1).astype(np.uint8)


def generate(gen: GenParams, rng: np.random.Generator) -> GeneratedMatrix:
    """Sample a generator matrix with m = 2^d rows, width n, k nonzeros per row.

    Blocks occupy columns [i*2^w, (i+1)*2^w); columns k*2^w..n-1 are zero
    padding. With window_bits = 0 every block is a single all-ones column.
    """
    d, k, w = gen.d, gen.k, gen.window_bits
    m = gen.m
    selectors = tuple(
        tuple(sample_low_degree_poly(d, gen.poly_degree, rng) for _ in range(w))
        for _ in range(k)
    )
    rows = np.zeros((m, k), dtype=np.int32)
    for i in range(k):
        q = np.zeros(m, dtype=np.int32)
        for j, poly in enumerate(selectors[i]):
            q |= poly.truth_table().astype(np.int32) << (w - 1 - j)
        rows[:, i] = (i << w) + q
    return GeneratedMatrix(SparseRowMatrix(m, gen.n, k, rows), gen, selectors)


def verify_rm_subcode(gm: GeneratedMatrix, code: RmCode) -> bool:
    """True iff every column of G is a member of the given RM code."""
    if code.d != gm.gen.d:
        raise ValueError(f"code has d={code.d}, matrix has d={gm.gen.d}")
    if code.r < gm.column_degree_bound:
        raise ValueError(
            f"code degree {code.r} below column degree bound {gm.column_degree_bound}"
        )
    from .f2core import BitVec

    return all(
        is_member(code, BitVec.from_bits(gm.column_truth_table(c))) for c in range(gm.gen.n)
    )


def column_degrees(gm: GeneratedMatrix) -> list[int]:
    """ANF degree of every column of G (cheap structural diagnostic)."""
    return [anf_degree(gm.column_truth_table(c)) for c in range(gm.gen.n)]


# --- serialization ----------------------------------------------------------
#
# SRM block followed by a selector appendix: one line per polynomial,
# "POLY <block> <bit> <terms>", where <terms> is ";"-joined monomials. A
# monomial is "1" (the constant) or a ","-joined list of variables "x3,x7";
# the whole field is "0" for the zero polynomial.


def _anf_dumps(poly: Anf) -> str:
    if poly.is_zero:
        return "0"
    parts = []
    for subset in poly.term_subsets():
        parts.append("1" if not subset else ",".join(f"x{v}" for v in subset))
    return ";".join(parts)


def _anf_parse(text: str, d: int, line_no: int) -> Anf:
    if text == "0":
        return Anf(d, frozenset())
    terms = set()
    for part in text.split(";"):
        if part == "1":
            terms.add(0)
            continue
        mask = 0
        for v in part.split(","):
            if not v.startswith("x"):
                raise FormatError(f"line {line_no}: bad monomial {part!r}")
            try:
                mask |= 1 << int(v[1:])
            except ValueError:
                raise FormatError(f"line {line_no}: bad monomial {part!r}")
        terms.add(mask)
    try:
        return Anf(d, frozenset(terms))
    except ValueError as exc:
        raise FormatError(f"line {line_no}: {exc}")


def genmatrix_dumps(gm: GeneratedMatrix) -> str:
    from .f2core import srm_dumps

    lines = [srm_dumps(gm.G).rstrip("\n")]
    lines.append(f"GEN d={gm.gen.d} w={gm.gen.window_bits} degree={gm.gen.poly_degree}")
    for i in range(gm.gen.k):
        for j in range(gm.gen.window_bits):
            lines.append(f"POLY {i} {j} {_anf_dumps(gm.selectors[i][j])}")
    return "\n".join(lines) + "\n"


def genmatrix_loads(text: str) -> GeneratedMatrix:
    from .f2core import srm_parse

    lines = text.splitlines()
    G, pos = srm_parse(lines, 0, 1)
    line_no = pos + 1
    if pos >= len(lines) or not lines[pos].startswith("GEN "):
        raise FormatError(f"line {line_no}: expected 'GEN d=.. w=.. degree=..' header")
    try:
        fields = dict(item.split("=") for item in lines[pos].split()[1:])
        d, w, degree = int(fields["d"]), int(fields["w"]), int(fields["degree"])
    except (ValueError, KeyError):
        raise FormatError(f"line {line_no}: malformed GEN header {lines[pos]!r}")
    gen = GenParams(d=d, n=G.n, k=G.k, window_bits=w, poly_degree=degree)
    selectors = []
    pos += 1
    for i in range(G.k):
        block = []
        for j in range(w):
            line_no = pos + 1
            if pos >= len(lines):
                raise FormatError(f"line {line_no}: expected 'POLY {i} {j} ...', got end of file")
            parts = lines[pos].split(maxsplit=3)
            if len(parts) != 4 or parts[0] != "POLY" or parts[1] != str(i) or parts[2] != str(j):
                raise FormatError(f"line {line_no}: expected 'POLY {i} {j} ...', got {lines[pos]!r}")
            block.append(_anf_parse(parts[3], d, line_no))
            pos += 1
        selectors.append(tuple(block))
    gm = GeneratedMatrix(G, gen, tuple(selectors))
    _check_selectors_match(gm)
    return gm


def _check_selectors_match(gm: GeneratedMatrix) -> None:
    w = gm.gen.window_bits
    for i in range(gm.gen.k):
        q = np.zeros(gm.gen.m, dtype=np.int32)
        for j, poly in enumerate(gm.selectors[i]):
            q |= poly.truth_table().astype(np.int32) << (w - 1 - j)
        if not np.array_equal((i << w) + q, gm.G.rows[:, i]):
            raise FormatError(f"selector polynomials do not reproduce block {i}")
