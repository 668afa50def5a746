"""Parameter sets for the scheme and the matrix generator, with validation.

Desk mode keeps only the structural relations that are checkable at toy
sizes; strict mode additionally enforces the exact alphabet and public-key
height relations the construction prescribes asymptotically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .f2core import FormatError


@dataclass(frozen=True)
class SchemeParams:
    """Parameters of one scheme instance.

    n: secret length, m: constraint count, k: locality (nonzeros per row),
    sigma_size/gamma_size: alphabet sizes, alpha: erasure/corruption rate of
    the constraint channel, beta: corruption rate of the parity channel,
    m_prime: public-key height, seed: master RNG seed.
    """

    n: int
    m: int
    k: int
    sigma_size: int
    gamma_size: int
    alpha: float
    beta: float
    m_prime: int
    seed: int = 0


def strict_m_prime(sigma_size: int, k: int) -> int:
    """Public-key height sigma^(k/3), rounded up to the next integer."""
    return math.ceil(sigma_size ** (k / 3) - 1e-9)


def validate(p: SchemeParams, strict: bool = False) -> list[str]:
    """Return a list of violated relations (empty iff the parameters are sound).

    Pure and report-only: each violation names the relation and both sides.
    Strict mode adds the gamma-size bound and the exact m_prime formula; a
    strict pass always implies a desk pass.
    """
    violations = []
    if p.k < 1:
        violations.append(f"k >= 1 violated: k = {p.k}")
    if p.n < p.k:
        violations.append(f"n >= k violated: n = {p.n} < k = {p.k}")
    if p.m < 1:
        violations.append(f"m >= 1 violated: m = {p.m}")
    if p.gamma_size < 2:
        violations.append(f"gamma_size >= 2 violated: gamma_size = {p.gamma_size}")
    elif p.k >= 1 and p.gamma_size > p.sigma_size**p.k:
        violations.append(
            f"gamma_size <= sigma_size^k violated: {p.gamma_size} > {p.sigma_size**p.k}"
        )
    if p.sigma_size < 2:
        violations.append(f"sigma_size >= 2 violated: sigma_size = {p.sigma_size}")
    if not 0.0 <= p.alpha <= 1.0:
        violations.append(f"alpha out of [0,1]: alpha = {p.alpha}")
    if not 0.0 <= p.beta <= 1.0:
        violations.append(f"beta out of [0,1]: beta = {p.beta}")
    if p.m_prime < 1:
        violations.append(f"m_prime >= 1 violated: m_prime = {p.m_prime}")
    if strict:
        gamma_bound = p.sigma_size ** (3 * p.k / 4)
        if p.gamma_size > gamma_bound:
            violations.append(
                f"gamma_size > sigma_size^(3k/4): {p.gamma_size} > "
                f"{p.sigma_size}^{3 * p.k / 4:g} = {gamma_bound:g}"
            )
        want = strict_m_prime(p.sigma_size, p.k)
        if p.m_prime != want:
            violations.append(
                f"m_prime != ceil(sigma_size^(k/3)): {p.m_prime} != {want}"
            )
    return violations


@dataclass(frozen=True)
class GenParams:
    """Parameters of the generator-matrix sampler.

    d: log2 of the row count (the matrix has 2^d rows), n: target width,
    k: blocks (nonzeros per row), window_bits: bits per block-column index,
    poly_degree: degree bound for the sampled selector polynomials.
    c_k/c_m are the asymptotic exponents of the construction; they are kept
    for documentation only and never drive a desk run.
    """

    d: int
    n: int
    k: int
    window_bits: int
    poly_degree: int
    c_k: int | None = None
    c_m: int | None = None

    def __post_init__(self):
        if self.window_bits < 0:
            raise ValueError(f"window_bits must be >= 0, got {self.window_bits}")
        if self.k * (1 << self.window_bits) > self.n:
            raise ValueError(
                f"k * 2^window_bits = {self.k * (1 << self.window_bits)} exceeds n = {self.n}"
            )
        if self.poly_degree < 1:
            raise ValueError(f"poly_degree must be >= 1, got {self.poly_degree}")
        if self.d < self.poly_degree:
            raise ValueError(f"d = {self.d} smaller than poly_degree = {self.poly_degree}")

    @property
    def m(self) -> int:
        return 1 << self.d


# The asymptotic instantiation fixes these exponents (k = ceil(log n)^c_k,
# m = 2^(ceil(log n)^c_m)). Even n = 4 would need k = 2^7 and m = 2^64;
# recorded here so the preset is nameable, never runnable.
ASYMPTOTIC_EXPONENTS = {"c_k": 7, "c_m": 6}


def derive_gen_params(n: int, d: int, k: int) -> GenParams:
    """Derive sampler parameters from (n, d, k) the way the construction does.

    window_bits = floor(log2(n/k)), poly_degree = ceil(log2 n), m = 2^d.
    Rejects n < 2k: the window would be empty.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if n < 2 * k:
        raise ValueError(f"n = {n} must be at least 2k = {2 * k}")
    window_bits = (n // k).bit_length() - 1
    poly_degree = max(1, (n - 1).bit_length())
    return GenParams(d=d, n=n, k=k, window_bits=window_bits, poly_degree=poly_degree)


# --- flat key=value block --------------------------------------------------

_FIELDS = ("n", "m", "k", "sigma", "gamma", "alpha", "beta", "mprime", "seed")


def params_dumps(p: SchemeParams) -> str:
    return (
        f"n={p.n}\nm={p.m}\nk={p.k}\nsigma={p.sigma_size}\ngamma={p.gamma_size}\n"
        f"alpha={p.alpha!r}\nbeta={p.beta!r}\nmprime={p.m_prime}\nseed={p.seed}\n"
    )


def params_parse(lines: list[str], pos: int, line_no: int) -> tuple[SchemeParams, int]:
    """Parse the 9-line key=value block at lines[pos:]; returns (params, next pos)."""
    values: dict[str, str] = {}
    for offset, key in enumerate(_FIELDS):
        idx = pos + offset
        if idx >= len(lines):
            raise FormatError(f"line {line_no + offset}: expected '{key}=...', got end of file")
        line = lines[idx]
        if "=" not in line:
            raise FormatError(f"line {line_no + offset}: expected '{key}=...', got {line!r}")
        name, _, raw = line.partition("=")
        if name != key:
            raise FormatError(f"line {line_no + offset}: expected key '{key}', got '{name}'")
        values[key] = raw
    try:
        p = SchemeParams(
            n=int(values["n"]),
            m=int(values["m"]),
            k=int(values["k"]),
            sigma_size=int(values["sigma"]),
            gamma_size=int(values["gamma"]),
            alpha=float(values["alpha"]),
            beta=float(values["beta"]),
            m_prime=int(values["mprime"]),
            seed=int(values["seed"]),
        )
    except ValueError as exc:
        raise FormatError(f"line {line_no}: bad parameter value: {exc}")
    return p, pos + len(_FIELDS)


def params_loads(text: str) -> SchemeParams:
    p, _ = params_parse(text.splitlines(), 0, 1)
    return p
