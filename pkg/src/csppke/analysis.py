"""Brute-force oracles and statistical harnesses.

Everything here exists to cross-validate the main pipeline at small sizes:
exhaustive planted-secret search, exact distance to a generated code, the
normalized low-degree monomial-expectation oracle for the planted hypergraph
view, and a Monte-Carlo distinguishing-advantage estimator. Every oracle
carries an explicit work budget and fails loudly rather than truncating.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cspsampler import KxorInstance, LarpInstance, domain_digits
from .f2core import BitVec, BudgetError, SparseRowMatrix, TriVector

DEFAULT_SEARCH_BUDGET = 1 << 24


def _assignment_block(count: int, n: int, base: int, start: int) -> np.ndarray:
    """Rows start..start+count-1 of the lexicographic enumeration of [base]^n."""
    idx = np.arange(start, start + count, dtype=np.int64)
    out = np.zeros((count, n), dtype=np.int64)
    for j in range(n - 1, -1, -1):
        idx, out[:, j] = np.divmod(idx, base)
    return out


def brute_force_secret(
    inst: LarpInstance | KxorInstance,
    tolerance: int = 0,
    budget: int = DEFAULT_SEARCH_BUDGET,
    chunk: int = 1 << 14,
) -> np.ndarray | None:
    """Exhaustively search for a secret violating at most `tolerance` constraints.

    Returns the first such assignment in lexicographic order, or None. The
    planted secret of a planted instance always qualifies when tolerance is
    at least the number of corrupted coordinates, so this is the ground-truth
    oracle for the samplers.
    """
    H = inst.H
    is_larp = isinstance(inst, LarpInstance)
    base = inst.F.sigma_size if is_larp else 2
    total = base**H.n
    if total > budget:
        raise BudgetError(f"search space {total} exceeds budget {budget}")
    b = inst.b if is_larp else inst.b.to_array().astype(np.int64)
    if is_larp:
        tables = inst.F.all_row_values(budget=budget)
        weights = base ** np.arange(H.k - 1, -1, -1, dtype=np.int64)
        row_range = np.arange(H.m)
    for start in range(0, total, chunk):
        block = _assignment_block(min(chunk, total - start), H.n, base, start)
        if is_larp:
            tuples = block[:, H.rows]  # (chunk, m, k)
            idx = (tuples * weights[None, None, :]).sum(axis=2)
            values = tables[row_range[None, :], idx]
            violations = (values != b[None, :]).sum(axis=1)
        else:
            parity = block[:, H.rows].sum(axis=2) & 1
            violations = (parity != b[None, :]).sum(axis=1)
        good = np.nonzero(violations <= tolerance)[0]
        if len(good):
            return block[good[0]]
    return None


def distance_to_code(
    G: SparseRowMatrix, w: TriVector, budget: int = DEFAULT_SEARCH_BUDGET
) -> tuple[int, BitVec]:
    """Exact distance from w to {Gx}, counting disagreements on non-erased
    coordinates only, together with a minimizing message x."""
    if w.length != G.m:
        raise ValueError(f"w has length {w.length}, expected {G.m}")
    total = 1 << G.n
    if total > budget:
        raise BudgetError(f"codeword space {total} exceeds budget {budget}")
    known = w.known_mask()
    bits = w.symbols[known].astype(np.int64)
    dense = G.to_dense()[known].astype(np.int64)  # (known, n)
    messages = _assignment_block(total, G.n, 2, 0)
    words = (messages @ dense.T) & 1
    distances = (words != bits[None, :]).sum(axis=1)
    best = int(np.argmin(distances))
    return int(distances[best]), BitVec.from_bits(messages[best].astype(np.uint8))


@dataclass(frozen=True)
class NormalizationMap:
    """Affine recoding of Bernoulli(p) edge indicators to mean 0, variance 1
    under the null distribution, with p = 1/gamma_size."""

    p: float
    phi0: float
    phi1: float

    @classmethod
    def for_gamma(cls, gamma_size: int) -> "NormalizationMap":
        p = 1.0 / gamma_size
        return cls(p, -math.sqrt(p / (1 - p)), math.sqrt((1 - p) / p))

    def apply(self, indicator: np.ndarray) -> np.ndarray:
        return np.where(np.asarray(indicator, dtype=bool), self.phi1, self.phi0)


Edge = tuple[tuple[int, int], ...]


def monomial_expectation(
    n: int,
    sigma_size: int,
    gamma_size: int,
    monomial,
    mode: str = "exact",
    trials: int = 10_000,
    rng: np.random.Generator | None = None,
    budget: int = DEFAULT_SEARCH_BUDGET,
) -> float:
    """Expected value, under the planted hypergraph distribution, of the
    product of normalized edge indicators over the given edge set.

    An edge is a k-tuple of (coordinate, symbol) pairs. Under the planted
    distribution each candidate edge appears independently with probability
    1/gamma_size, plus the single edge matching the planted secret on its
    coordinates appears surely. Exact mode enumerates all sigma^n secrets and
    applies the (analytic) conditional edge-noise expectations per secret;
    Monte-Carlo mode samples secrets and noise coins.
    """
    monomial = [tuple(edge) for edge in monomial]
    if not monomial:
        return 1.0
    phi = NormalizationMap.for_gamma(gamma_size)

    if mode == "exact":
        total = sigma_size**n
        if total > budget:
            raise BudgetError(f"secret space {total} exceeds budget {budget}")
        # Enumerate every secret. Conditional on the secret, an edge outside
        # the planted set contributes a mean-zero factor independently of the
        # others, so a secret's term is phi1^|S| if it plants every edge in
        # the monomial and 0 otherwise.
        consistent = 0
        for start in range(0, total, 1 << 14):
            block = _assignment_block(min(1 << 14, total - start), n, sigma_size, start)
            all_planted = np.ones(len(block), dtype=bool)
            for edge in monomial:
                for coord, symbol in edge:
                    all_planted &= block[:, coord] == symbol
            consistent += int(all_planted.sum())
        return (phi.phi1 ** len(monomial)) * consistent / total
    if mode != "monte_carlo":
        raise ValueError(f"mode must be 'exact' or 'monte_carlo', got {mode!r}")
    if rng is None:
        raise ValueError("monte_carlo mode requires an rng")

    secrets = rng.integers(0, sigma_size, size=(trials, n))
    coins = rng.random((trials, len(monomial))) < phi.p
    product = np.ones(trials)
    for e, edge in enumerate(monomial):
        planted = np.ones(trials, dtype=bool)
        for coord, symbol in edge:
            planted &= secrets[:, coord] == symbol
        product *= phi.apply(planted | coins[:, e])
    return float(product.mean())


def squared_expectation_mass(
    H: SparseRowMatrix,
    sigma_size: int,
    gamma_size: int,
    max_degree: int = 2,
    budget: int = DEFAULT_SEARCH_BUDGET,
) -> float:
    """Sum of squared exact expectations over all edge monomials of degree
    <= max_degree. A diagnostic number, reported without a pass/fail claim."""
    supports = sorted({H.row_support(i) for i in range(H.m)})
    tuples = domain_digits(sigma_size, H.k)
    edges: list[Edge] = [
        tuple(zip(support, (int(v) for v in row))) for support in supports for row in tuples
    ]
    if len(edges) ** max(max_degree, 1) > budget:
        raise BudgetError(f"{len(edges)} candidate edges is too many for budget {budget}")
    total = 0.0
    if max_degree >= 1:
        for edge in edges:
            total += monomial_expectation(H.n, sigma_size, gamma_size, [edge]) ** 2
    if max_degree >= 2:
        for a in range(len(edges)):
            for bidx in range(a + 1, len(edges)):
                total += (
                    monomial_expectation(H.n, sigma_size, gamma_size, [edges[a], edges[bidx]])
                    ** 2
                )
    return total


@dataclass(frozen=True)
class AdvantageReport:
    """Per-arm acceptance estimates with Wilson 95% intervals."""

    trials: int
    planted_rate: float
    null_rate: float
    planted_halfwidth: float
    null_halfwidth: float

    @property
    def advantage(self) -> float:
        return abs(self.planted_rate - self.null_rate)

    @property
    def signed_difference(self) -> float:
        return self.planted_rate - self.null_rate

    def footer(self) -> str:
        return (
            f"RESULT trials={self.trials} planted_rate={self.planted_rate:.4f} "
            f"null_rate={self.null_rate:.4f} advantage={self.advantage:.4f} "
            f"planted_hw={self.planted_halfwidth:.4f} null_hw={self.null_halfwidth:.4f}"
        )

    CSV_HEADER = "trials,planted_rate,null_rate,advantage,planted_hw,null_hw"

    def csv_row(self) -> str:
        """One CSV row matching CSV_HEADER, for plotting by external tools."""
        return (
            f"{self.trials},{self.planted_rate:.6f},{self.null_rate:.6f},"
            f"{self.advantage:.6f},{self.planted_halfwidth:.6f},{self.null_halfwidth:.6f}"
        )


def wilson_halfwidth(successes: int, trials: int, z: float = 1.96) -> float:
    """Half-width of the Wilson score interval around its center."""
    if trials == 0:
        return 0.5
    phat = successes / trials
    denom = 1 + z**2 / trials
    return (z / denom) * math.sqrt(phat * (1 - phat) / trials + z**2 / (4 * trials**2))


def estimate_advantage(
    sampler_null,
    sampler_planted,
    distinguisher,
    trials: int,
    rng: np.random.Generator,
) -> AdvantageReport:
    """Unbiased acceptance-rate estimates of `distinguisher` on both arms.

    sampler_null/sampler_planted take an rng and return an instance;
    distinguisher maps an instance to an accept bit. Swapping the arms
    negates the signed difference and leaves the advantage unchanged.
    """
    if trials < 30:
        raise ValueError("need at least 30 trials per arm")
    null_hits = sum(int(distinguisher(sampler_null(rng))) for _ in range(trials))
    planted_hits = sum(int(distinguisher(sampler_planted(rng))) for _ in range(trials))
    return AdvantageReport(
        trials=trials,
        planted_rate=planted_hits / trials,
        null_rate=null_hits / trials,
        planted_halfwidth=wilson_halfwidth(planted_hits, trials),
        null_halfwidth=wilson_halfwidth(null_hits, trials),
    )
