"""Exact interleaved heat traces for monomial chains on the vertex space.

Closed forms are meromorphic functions of the heat parameters, kept as
rational data: numerators are finite sums of exponentials with rational
coefficients, denominators are products of the three atoms 1-E, 1+E and
1-(2d-1)E in E = e^{-(s_1+...+s_m)}.  Truncated oracles compute the same
traces by direct summation over the vertex window and report certified
geometric tail bounds, so closed form and oracle can be compared honestly.
"""

from __future__ import annotations

import cmath
import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

from .ckalg import (
    CKElement,
    Monomial,
    ZeroDiagonal,
    act_on_vertex,
    diagonal_dichotomy,
)
from .words import (
    AdjacencyModel,
    BoundaryPoint,
    Word,
    enumerate_admissible,
    fixed_point,
    settled_eigenvalue,
    vertex_from_group_word,
)

ENTIRE_ATOM = "1"
PLAIN_ATOM = "1-E"
ALTERNATING_ATOM = "1+E"
BRANCH_ATOM = "1-(2d-1)E"

ZERO_DIAGONAL_CERTIFICATE = "zero-diagonal"
FINITE_RANK_CERTIFICATE = "finite-rank"

TermKey = tuple[int, tuple[int, ...]]


@dataclass(frozen=True)
class ExpSum:
    """Finite sum of terms coeff * e^{-const_exp} * e^{-<exp_vector, s>}.

    Entire in all variables; coefficients are exact rationals.
    """

    nvars: int
    terms: tuple[tuple[int, tuple[int, ...], Fraction], ...]

    def __post_init__(self) -> None:
        for const_exp, vector, coeff in self.terms:
            if len(vector) != self.nvars:
                raise ValueError("exponent vector length must match nvars")
            if not coeff:
                raise ValueError("zero terms must be dropped before construction")

    @staticmethod
    def from_terms(nvars: int, entries: dict[TermKey, Fraction]) -> ExpSum:
        kept = sorted(
            (const_exp, vector, coeff)
            for (const_exp, vector), coeff in entries.items()
            if coeff
        )
        return ExpSum(nvars, tuple(kept))

    @staticmethod
    def zero(nvars: int) -> ExpSum:
        return ExpSum(nvars, ())

    @staticmethod
    def single(
        nvars: int,
        vector: Sequence[int],
        coeff: Fraction | int = 1,
        const_exp: int = 0,
    ) -> ExpSum:
        return ExpSum.from_terms(
            nvars, {(const_exp, tuple(vector)): Fraction(coeff)}
        )

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def as_dict(self) -> dict[TermKey, Fraction]:
        return {(c, v): q for c, v, q in self.terms}

    def plus(self, other: ExpSum) -> ExpSum:
        merged = self.as_dict()
        for c, v, q in other.terms:
            merged[(c, v)] = merged.get((c, v), Fraction(0)) + q
        return ExpSum.from_terms(self.nvars, merged)

    def scaled(self, factor: Fraction | int) -> ExpSum:
        factor = Fraction(factor)
        if not factor:
            return ExpSum.zero(self.nvars)
        return ExpSum(
            self.nvars, tuple((c, v, q * factor) for c, v, q in self.terms)
        )

    def times(self, other: ExpSum) -> ExpSum:
        merged: dict[TermKey, Fraction] = {}
        for c1, v1, q1 in self.terms:
            for c2, v2, q2 in other.terms:
                key = (c1 + c2, tuple(a + b for a, b in zip(v1, v2)))
                merged[key] = merged.get(key, Fraction(0)) + q1 * q2
        return ExpSum.from_terms(self.nvars, merged)

    def evaluate(self, s: Sequence[complex]) -> complex:
        if len(s) != self.nvars:
            raise ValueError("need one value per variable")
        total = 0j
        for const_exp, vector, coeff in self.terms:
            exponent = -const_exp - sum(v * sj for v, sj in zip(vector, s))
            total += float(coeff) * cmath.exp(exponent)
        return total


@dataclass(frozen=True)
class Denom:
    """One denominator atom raised to a power; atom "1" marks the entire part."""

    atom: str
    power: int

    def __post_init__(self) -> None:
        if self.atom == ENTIRE_ATOM:
            if self.power != 0:
                raise ValueError("the trivial atom carries power zero")
        elif self.atom in (PLAIN_ATOM, ALTERNATING_ATOM, BRANCH_ATOM):
            if self.power < 1:
                raise ValueError("denominator powers are positive")
        else:
            raise ValueError(f"unknown denominator atom {self.atom!r}")


ENTIRE_DENOM = Denom(ENTIRE_ATOM, 0)


@dataclass(frozen=True)
class MeromorphicTrace:
    """Sum of exponential numerators over powers of the denominator atoms.

    A non-None certificate asserts the function is entire and names the
    structural reason; its parts then involve only the trivial atom.
    """

    d: int
    nvars: int
    parts: tuple[tuple[Denom, ExpSum], ...]
    certificate: str | None = None

    def __post_init__(self) -> None:
        if self.d < 2:
            raise ValueError("the model needs at least two generator pairs")
        seen = set()
        for denom, numerator in self.parts:
            if denom in seen:
                raise ValueError("each denominator may appear only once")
            seen.add(denom)
            if numerator.nvars != self.nvars:
                raise ValueError("numerator variable count mismatch")
            if self.certificate is not None and denom.atom != ENTIRE_ATOM:
                raise ValueError("certified entire traces admit no denominators")

    @staticmethod
    def from_parts(
        d: int,
        nvars: int,
        parts: dict[Denom, ExpSum],
        certificate: str | None = None,
    ) -> MeromorphicTrace:
        kept = sorted(
            ((denom, num) for denom, num in parts.items() if not num.is_zero),
            key=lambda item: (item[0].atom, item[0].power),
        )
        return MeromorphicTrace(d, nvars, tuple(kept), certificate)

    @property
    def is_entire(self) -> bool:
        return self.certificate is not None or all(
            denom.atom == ENTIRE_ATOM for denom, _ in self.parts
        )

    def part(self, atom: str, power: int = 0) -> ExpSum:
        for denom, numerator in self.parts:
            if denom.atom == atom and denom.power == power:
                return numerator
        return ExpSum.zero(self.nvars)

    def plus(self, other: MeromorphicTrace) -> MeromorphicTrace:
        if (self.d, self.nvars) != (other.d, other.nvars):
            raise ValueError("traces live over different parameter spaces")
        merged = dict(self.parts)
        for denom, numerator in other.parts:
            merged[denom] = merged.get(denom, ExpSum.zero(self.nvars)).plus(numerator)
        joint: str | None = None
        if self.certificate is not None and other.certificate is not None:
            joint = self.certificate
        return MeromorphicTrace.from_parts(self.d, self.nvars, merged, joint)

    def scaled(self, factor: Fraction | int) -> MeromorphicTrace:
        parts = {denom: num.scaled(factor) for denom, num in self.parts}
        return MeromorphicTrace.from_parts(self.d, self.nvars, parts, self.certificate)

    def evaluate(self, s: Sequence[complex]) -> complex:
        branch = cmath.exp(-sum(s))
        total = 0j
        for denom, numerator in self.parts:
            value = numerator.evaluate(s)
            if denom.atom == PLAIN_ATOM:
                value /= (1 - branch) ** denom.power
            elif denom.atom == ALTERNATING_ATOM:
                value /= (1 + branch) ** denom.power
            elif denom.atom == BRANCH_ATOM:
                value /= (1 - (2 * self.d - 1) * branch) ** denom.power
            total += value
        return total


def _atom_for(amplitude: Fraction, d: int) -> str:
    branching = 2 * d - 1
    if amplitude == 1:
        return PLAIN_ATOM
    if amplitude == -1:
        return ALTERNATING_ATOM
    if amplitude == branching:
        return BRANCH_ATOM
    raise ValueError(
        f"denominator amplitude {amplitude} is outside the representable family"
    )


def _pair_split(beta: Fraction, power: int, alpha: Fraction) -> dict[tuple[Fraction, int], Fraction]:
    """Partial fractions of 1/((1-beta E)^power (1-alpha E)) for beta != alpha."""
    if power == 0:
        return {(alpha, 1): Fraction(1)}
    keep = beta / (beta - alpha)
    swap = alpha / (alpha - beta)
    out = {(beta, power): keep}
    for key, coeff in _pair_split(beta, power - 1, alpha).items():
        out[key] = out.get(key, Fraction(0)) + swap * coeff
    return out


def _partial_fractions(
    factors: dict[Fraction, int]
) -> dict[tuple[Fraction, int] | None, Fraction]:
    """Decompose 1/prod (1-alpha E)^p into atomic fractions, exactly.

    The key None stands for the constant 1 (empty product).
    """
    current: dict[tuple[Fraction, int] | None, Fraction] = {None: Fraction(1)}
    for alpha, power in factors.items():
        for _ in range(power):
            updated: dict[tuple[Fraction, int] | None, Fraction] = {}

            def add(key: tuple[Fraction, int] | None, value: Fraction) -> None:
                if value:
                    updated[key] = updated.get(key, Fraction(0)) + value

            for key, coeff in current.items():
                if key is None:
                    add((alpha, 1), coeff)
                    continue
                beta, k = key
                if beta == alpha:
                    add((alpha, k + 1), coeff)
                    continue
                for split_key, split_coeff in _pair_split(beta, k, alpha).items():
                    add(split_key, coeff * split_coeff)
            current = updated
    return current


class _Accumulator:
    """Mutable builder collecting numerator terms per denominator atom."""

    def __init__(self, d: int, nvars: int) -> None:
        self.d = d
        self.nvars = nvars
        self.buckets: dict[Denom, dict[TermKey, Fraction]] = {}

    def add_term(
        self,
        factors: dict[Fraction, int],
        vector: Sequence[int],
        coeff: Fraction,
        const_exp: int = 0,
    ) -> None:
        if not coeff:
            return
        key = (const_exp, tuple(vector))
        for split, split_coeff in _partial_fractions(factors).items():
            denom = (
                ENTIRE_DENOM
                if split is None
                else Denom(_atom_for(split[0], self.d), split[1])
            )
            bucket = self.buckets.setdefault(denom, {})
            bucket[key] = bucket.get(key, Fraction(0)) + coeff * split_coeff

    def build(self, certificate: str | None = None) -> MeromorphicTrace:
        parts = {
            denom: ExpSum.from_terms(self.nvars, entries)
            for denom, entries in self.buckets.items()
        }
        return MeromorphicTrace.from_parts(self.d, self.nvars, parts, certificate)


def geom_sum(
    kind: int,
    d: int,
    nvars: int,
    *,
    lower: int = 0,
    inner_lower: int = 0,
    coupling: int = 0,
    offsets: Sequence[int] = (),
    amplitude: Fraction | int = 1,
) -> MeromorphicTrace:
    """Exact value of one of the four basic geometric-series identities.

    Kind 3 sums amplitude^{coupling*n} e^{-sum_j s_j |n + offset_j|} over
    n >= lower; kind 4 sums amplitude^k e^{-sum_j s_j k} over
    k >= inner_lower; kinds 1 and 2 are the double sums with independent
    and coupled inner ranges.  The finite boundary sums below the kink of
    |n + offset_j| go into the numerator verbatim.
    """
    amplitude = Fraction(amplitude)
    if amplitude <= 0:
        raise ValueError("amplitude must be positive")
    if kind not in (1, 2, 3, 4):
        raise ValueError(f"unknown identity kind {kind}")
    if kind in (1, 2, 3) and len(offsets) != nvars:
        raise ValueError("need one offset per variable")

    out = _Accumulator(d, nvars)

    if kind == 4:
        out.add_term(
            {amplitude: 1},
            tuple(inner_lower for _ in range(nvars)),
            amplitude**inner_lower,
        )
        return out.build()

    pivot = max(lower, -min(offsets))

    def kink_vector(n: int) -> tuple[int, ...]:
        return tuple(abs(n + off) for off in offsets)

    if kind == 3:
        for n in range(lower, pivot):
            out.add_term({}, kink_vector(n), amplitude ** (coupling * n))
        out.add_term(
            {amplitude**coupling: 1},
            tuple(pivot + off for off in offsets),
            amplitude ** (coupling * pivot),
        )
        return out.build()

    if kind == 1:
        head = amplitude**inner_lower
        for n in range(lower, pivot):
            out.add_term(
                {amplitude: 1},
                tuple(x + inner_lower for x in kink_vector(n)),
                head * amplitude ** (coupling * n),
            )
        coupled = amplitude**coupling
        factors = {amplitude: 1}
        factors[coupled] = factors.get(coupled, 0) + 1
        out.add_term(
            factors,
            tuple(pivot + off + inner_lower for off in offsets),
            head * amplitude ** (coupling * pivot),
        )
        return out.build()

    # kind 2: inner index starts at n + inner_lower, coupling the ranges.
    squared = amplitude ** (coupling + 1)
    head = amplitude**inner_lower
    for n in range(lower, pivot):
        out.add_term(
            {amplitude: 1},
            tuple(x + n + inner_lower for x in kink_vector(n)),
            head * squared**n,
        )
    if squared == 1:
        inner_factors = {Fraction(1): 1, Fraction(-1): 1}
    else:
        raise ValueError(
            "coupled double sums are representable only when the squared "
            "amplitude is 1"
        )
    factors = dict(inner_factors)
    factors[amplitude] = factors.get(amplitude, 0) + 1
    out.add_term(
        factors,
        tuple(inner_lower + off + 2 * pivot for off in offsets),
        head * squared**pivot,
    )
    return out.build()


def _canonical_chain(
    chain: Sequence[Monomial], tail: BoundaryPoint, model: AdjacencyModel
) -> tuple[tuple[Monomial, ...], BoundaryPoint]:
    """Relabel letters so the distinguished tail repeats letter 0.

    Letter permutations that respect the inverse pairing preserve
    admissibility, so traces are unchanged; the closed-form species counts
    assume the tail letter is the first generator.
    """
    model.require_free_group()
    if not tail.is_fixed_point:
        raise ValueError("the trace engine requires a fixed-point tail")
    letter = tail.period[0]
    if letter == 0:
        return tuple(chain), tail
    inverse = model.inverse(letter)
    mapping = {letter: 0, inverse: 1}
    mapping.setdefault(0, letter)
    mapping.setdefault(1, inverse)

    def remap(word: Word) -> Word:
        return tuple(mapping.get(x, x) for x in word)

    renamed = tuple(Monomial(remap(m.out_word), remap(m.in_word)) for m in chain)
    return renamed, fixed_point(0)


class _ChainSummary(NamedTuple):
    refined_length: int
    omegas: tuple[int, ...]
    sigma_lengths: tuple[int, ...]
    settled_buckets: tuple[tuple[tuple[int, ...], Fraction], ...]
    ending_buckets: tuple[tuple[int, Fraction], ...]
    zero_diagonal: bool


@functools.lru_cache(maxsize=256)
def _chain_summary(chain: tuple[Monomial, ...], model: AdjacencyModel) -> _ChainSummary:
    """Cylinder decomposition of a chain diagonal, grouped for assembly.

    Cylinders sharing the vector of partially-applied settle depths are
    interchangeable for the settled family, and cylinders sharing their
    final letter are interchangeable for the escaping family; only the
    grouped weights are kept.
    """
    if not chain:
        raise ValueError("chain must be nonempty")
    stages = len(chain)
    refined = sum(len(m.out_word) + len(m.in_word) for m in chain) + 2
    omegas = [0] * (stages + 1)
    for j in range(stages - 1, 0, -1):
        omegas[j] = omegas[j + 1] + len(chain[j].out_word) - len(chain[j].in_word)
    omega_tuple = tuple(omegas[1:])
    sigma_lengths = tuple(refined + w for w in omega_tuple)

    result = diagonal_dichotomy(list(chain), model, refined)
    if isinstance(result, ZeroDiagonal):
        return _ChainSummary(refined, omega_tuple, sigma_lengths, (), (), True)

    settled: dict[tuple[int, ...], Fraction] = {}
    ending: dict[int, Fraction] = {}
    for cylinder, weight in result.cylinders:
        if len(cylinder) != refined:
            raise AssertionError("cylinder refinement produced a ragged length")
        sigma: dict[int, Word] = {stages: cylinder}
        for j in range(stages, 1, -1):
            pair = chain[j - 1]
            sigma[j - 1] = pair.out_word + sigma[j][len(pair.in_word) :]
        last = cylinder[-1]
        ending[last] = ending.get(last, Fraction(0)) + weight
        if last != 1:
            depths = []
            for j in range(1, stages + 1):
                word = sigma[j]
                run = 0
                while run < len(word) and word[len(word) - 1 - run] == 0:
                    run += 1
                depths.append(len(word) - run)
            key = tuple(depths)
            settled[key] = settled.get(key, Fraction(0)) + weight
    return _ChainSummary(
        refined,
        omega_tuple,
        sigma_lengths,
        tuple(sorted(settled.items())),
        tuple(sorted(ending.items())),
        False,
    )


def closed_form_heat_trace(
    chain: Sequence[Monomial], tail: BoundaryPoint, model: AdjacencyModel
) -> MeromorphicTrace:
    """Exact trace of the chain interleaved with heat factors on the vertex
    space attached to the tail.

    The diagonal decomposes into cylinders; vertices over each cylinder
    split into the family settling straight onto the tail and the families
    settling after an escape of each positive depth, whose counts follow
    the branching geometry.  Both resum to the atomic denominators.
    """
    canonical, _ = _canonical_chain(chain, tail, model)
    d = model.generator_pairs
    assert d is not None
    stages = len(canonical)
    summary = _chain_summary(canonical, model)
    if summary.zero_diagonal:
        return MeromorphicTrace.from_parts(
            d, stages, {}, certificate=ZERO_DIAGONAL_CERTIFICATE
        )

    branching = Fraction(2 * d - 1)
    out = _Accumulator(d, stages)
    omegas = summary.omegas
    sigma_lengths = summary.sigma_lengths

    for depths, weight in summary.settled_buckets:
        upper = max(t - w for t, w in zip(depths, omegas))
        lower = -max(omegas)
        out.add_term({Fraction(1): 1}, tuple(w + upper for w in omegas), weight)
        for offset in range(lower, upper):
            vector = tuple(
                settled_eigenvalue(t, offset + w) for t, w in zip(depths, omegas)
            )
            out.add_term({}, vector, weight)
        out.add_term(
            {Fraction(1): 1, Fraction(-1): 1},
            tuple(t - 2 * w + 2 - 2 * lower for t, w in zip(depths, omegas)),
            weight,
        )

    shallow = min(sigma_lengths)
    deep = max(sigma_lengths)
    plateau_vectors = [
        tuple(max(sl, 2 * c - sl) for sl in sigma_lengths)
        for c in range(shallow + 1, deep + 1)
    ]
    escape_pieces: list[tuple[dict[Fraction, int], list[tuple[tuple[int, ...], Fraction]]]] = [
        ({Fraction(1): 1}, [(sigma_lengths, Fraction(1))]),
        (
            {},
            [(sigma_lengths, Fraction(shallow))]
            + [(v, Fraction(1)) for v in plateau_vectors],
        ),
        (
            {Fraction(1): 1, Fraction(-1): 1},
            [(tuple(2 * deep + 2 - sl for sl in sigma_lengths), Fraction(1))],
        ),
    ]
    for last, weight in summary.ending_buckets:
        marked = Fraction(1) if last in (0, 1) else Fraction(0)
        branches = (
            (Fraction(d - 1, d), branching, branching),
            (marked - Fraction(1, d), Fraction(1), Fraction(-1)),
        )
        for overall, series_amp, alpha in branches:
            scale = weight * overall * series_amp
            out.add_term(
                {alpha: 2}, tuple(sl + 1 for sl in sigma_lengths), scale
            )
            for extra_factors, pieces in escape_pieces:
                factors = dict(extra_factors)
                factors[alpha] = factors.get(alpha, 0) + 1
                for vector, piece_coeff in pieces:
                    out.add_term(
                        factors,
                        tuple(x + 1 for x in vector),
                        scale * piece_coeff,
                    )
    return out.build()


def _toeplitz_step(word: Word, pair: Monomial, model: AdjacencyModel) -> Word | None:
    """One Toeplitz pair applied to a basis word, or None when it dies."""
    stripped = len(pair.in_word)
    if word[:stripped] != pair.in_word:
        return None
    rest = word[stripped:]
    if pair.out_word and rest and not model.allows(pair.out_word[-1], rest[0]):
        return None
    landed = pair.out_word + rest
    if landed and landed[-1] == 1:
        return None
    return landed


def _toeplitz_short_vectors(
    chain: tuple[Monomial, ...],
    model: AdjacencyModel,
    below: int,
) -> list[tuple[int, ...]]:
    """Stage-length vectors of surviving diagonal basis words shorter than
    the refinement length."""
    stages = len(chain)
    vectors = []
    for length in range(0, below):
        for word in enumerate_admissible(model, length):
            if word and word[-1] == 1:
                continue
            current = word
            lengths = [0] * stages
            for j in range(stages, 0, -1):
                lengths[j - 1] = len(current)
                current = _toeplitz_step(current, chain[j - 1], model)
                if current is None:
                    break
            if current == word:
                vectors.append(tuple(lengths))
    return vectors


def closed_form_toeplitz_trace(
    chain: Sequence[Monomial], tail: BoundaryPoint, model: AdjacencyModel
) -> MeromorphicTrace:
    """Exact trace of the chain compressed to the word basis, interleaved
    with heat factors of the length operator.

    Words shorter than the refinement length are simulated one by one into
    the entire part; longer words group by their defining cylinder and
    their extension counts resum geometrically.
    """
    canonical, _ = _canonical_chain(chain, tail, model)
    d = model.generator_pairs
    assert d is not None
    stages = len(canonical)
    summary = _chain_summary(canonical, model)
    if summary.zero_diagonal:
        return MeromorphicTrace.from_parts(
            d, stages, {}, certificate=ZERO_DIAGONAL_CERTIFICATE
        )

    branching = 2 * d - 1
    out = _Accumulator(d, stages)
    for vector in _toeplitz_short_vectors(canonical, model, summary.refined_length):
        out.add_term({}, vector, Fraction(1))

    sigma_lengths = summary.sigma_lengths
    for last, weight in summary.ending_buckets:
        if last != 1:
            out.add_term({}, sigma_lengths, weight)
        bumped = tuple(sl + 1 for sl in sigma_lengths)
        out.add_term(
            {Fraction(branching): 1},
            bumped,
            weight * Fraction(branching * branching, 2 * d),
        )
        marked = 1 if last in (0, 1) else 0
        out.add_term(
            {Fraction(-1): 1},
            bumped,
            weight * (Fraction(marked, 2) - Fraction(1, 2 * d)),
        )
        signed = (1 if last == 0 else 0) - (1 if last == 1 else 0)
        if signed:
            out.add_term({Fraction(1): 1}, bumped, weight * Fraction(signed, 2))
    return out.build()


class OracleResult(NamedTuple):
    value: float
    tail_bound: float


def _validate_oracle_inputs(
    chain: Sequence[Monomial],
    model: AdjacencyModel,
    s: Sequence[float],
    truncation: int,
) -> float:
    if not chain:
        raise ValueError("chain must be nonempty")
    if len(s) != len(chain):
        raise ValueError("need one heat parameter per chain stage")
    if any(value < 0 for value in s):
        raise ValueError("heat parameters must be nonnegative")
    if truncation < 1:
        raise ValueError("truncation must be positive")
    d = model.generator_pairs
    assert d is not None
    total = float(sum(s))
    threshold = math.log(2 * d - 1)
    if total <= threshold:
        raise ValueError(
            f"sum of heat parameters {total:.6g} is not above the convergence "
            f"threshold log(2d-1) = {threshold:.6g}"
        )
    return total


def _escape_counts(
    model: AdjacencyModel, after: int, top: int, settling: bool
) -> list[int]:
    """Exact counts of admissible words following a letter, by length.

    Entry p (1-based) counts words of length p whose last letter avoids
    the tail letter's inverse, and for settling counts the tail letter as
    well.  Plain integer transfer-matrix iteration, independent of the
    closed-form species formulas.
    """
    size = model.size
    banned = (0, 1) if settling else (1,)
    vector = [1 if model.allows(after, letter) else 0 for letter in range(size)]
    counts = []
    for _ in range(top):
        counts.append(sum(vector[x] for x in range(size) if x not in banned))
        vector = [
            sum(vector[a] for a in range(size) if model.allows(a, b))
            for b in range(size)
        ]
    return [0] + counts


def _windowed_heat_value(
    summary: _ChainSummary,
    model: AdjacencyModel,
    s: Sequence[float],
    truncation: int,
) -> float:
    """Exact heat sum over the vertices inside the truncation window.

    Only finitely many vertices contribute, so the value is meaningful for
    any nonnegative heat parameters, including below the convergence
    abscissa where no tail bound exists.
    """
    limit = truncation
    omegas = summary.omegas
    sigma_lengths = summary.sigma_lengths
    refined = summary.refined_length

    value = 0.0
    for depths, weight in summary.settled_buckets:
        terminal = depths[-1]
        partial = 0.0
        for offset in range(2 * terminal - limit, limit + 1):
            partial += math.exp(
                -sum(
                    sj * settled_eigenvalue(t, offset + w)
                    for sj, t, w in zip(s, depths, omegas)
                )
            )
        value += float(weight) * partial

    counts_cache: dict[int, list[int]] = {}
    top = max(limit - refined, 0)
    for last, weight in summary.ending_buckets:
        if top >= 1:
            counts = counts_cache.get(last)
            if counts is None:
                counts = _escape_counts(model, last, top, settling=True)
                counts_cache[last] = counts
            partial = 0.0
            for depth in range(1, top + 1):
                settle = refined + depth
                inner = 0.0
                for offset in range(2 * settle - limit, limit + 1):
                    inner += math.exp(
                        -sum(
                            sj * settled_eigenvalue(sl + depth, offset + w)
                            for sj, sl, w in zip(s, sigma_lengths, omegas)
                        )
                    )
                partial += counts[depth] * inner
            value += float(weight) * partial
    return value


def _heat_partial_sum(
    chain: Sequence[Monomial],
    tail: BoundaryPoint,
    model: AdjacencyModel,
    s: Sequence[float],
    truncation: int,
) -> float:
    """Windowed heat sum alone, with no convergence threshold demanded.

    Summability sweeps need partial sums on both sides of the abscissa,
    where a certified remainder cannot exist.
    """
    if not chain:
        raise ValueError("chain must be nonempty")
    if len(s) != len(chain):
        raise ValueError("need one heat parameter per chain stage")
    if any(value < 0 for value in s):
        raise ValueError("heat parameters must be nonnegative")
    if truncation < 1:
        raise ValueError("truncation must be positive")
    canonical, _ = _canonical_chain(chain, tail, model)
    summary = _chain_summary(canonical, model)
    if summary.zero_diagonal:
        return 0.0
    return _windowed_heat_value(summary, model, s, truncation)


def brute_force_heat_trace(
    chain: Sequence[Monomial],
    tail: BoundaryPoint,
    model: AdjacencyModel,
    s: Sequence[float],
    truncation: int,
) -> OracleResult:
    """Trace over vertices carried by group words up to the truncation
    length, with a certified bound on everything omitted.

    Vertices are aggregated per cylinder family and summed termwise; the
    tail bound combines geometric remainders of the three regimes with the
    crude count of escape words by the branching number.
    """
    canonical, _ = _canonical_chain(chain, tail, model)
    total = _validate_oracle_inputs(canonical, model, s, truncation)
    d = model.generator_pairs
    assert d is not None
    summary = _chain_summary(canonical, model)
    if summary.zero_diagonal:
        return OracleResult(0.0, 0.0)

    branching = 2 * d - 1
    limit = truncation
    omegas = summary.omegas
    sigma_lengths = summary.sigma_lengths
    refined = summary.refined_length
    ratio = math.exp(-total)
    value = _windowed_heat_value(summary, model, s, truncation)
    top = max(limit - refined, 0)

    # Tail bound pieces; eigenvalues dominate both the linear regime
    # (eigenvalue >= offset) and the reflected one (eigenvalue >= depth
    # minus twice the offset), so each omitted zone is under a geometric
    # envelope with an explicit first term.
    drift = math.exp(-sum(sj * w for sj, w in zip(s, omegas)))
    reflect_base = math.exp(
        -sum(sj * (refined - w) for sj, w in zip(s, omegas))
    )
    heavy = math.exp(-sum(sj * sl for sj, sl in zip(s, sigma_lengths)))
    bound = 0.0
    for depths, weight in summary.settled_buckets:
        strength = abs(float(weight))
        terminal = depths[-1]
        bound += strength * drift * ratio ** (limit + 1) / (1 - ratio)
        reflected = math.exp(
            -sum(sj * (t - 2 * w) for sj, t, w in zip(s, depths, omegas))
        )
        bound += (
            strength
            * reflected
            * ratio ** (2 * limit + 2 - 4 * terminal)
            / (1 - ratio**2)
        )
    branch_ratio = branching * ratio
    if branch_ratio >= 1:
        raise AssertionError("convergence validation should have caught this")
    for last, weight in summary.ending_buckets:
        strength = abs(float(weight))
        if top >= 1:
            prefix_counts = (branching ** (top + 1) - branching) // (branching - 1)
            bound += strength * prefix_counts * drift * ratio ** (limit + 1) / (1 - ratio)
            for depth in range(1, top + 1):
                cut = 2 * (refined + depth) - limit
                low = min(cut, 0)
                reflected = (
                    reflect_base
                    * ratio**depth
                    * ratio ** (2 - 2 * low)
                    / (1 - ratio**2)
                )
                plateau = max(cut, 0) * heavy * ratio**depth
                bound += strength * branching**depth * (reflected + plateau)
        start = max(top + 1, 1)
        alpha = (
            drift * ratio**refined / (1 - ratio)
            + (refined + max(omegas)) * heavy
            + reflect_base * ratio ** (2 + 2 * max(omegas)) / (1 - ratio**2)
        )
        beta = heavy
        power = branch_ratio**start
        bound += strength * (
            alpha * power / (1 - branch_ratio)
            + beta
            * power
            * (start / (1 - branch_ratio) + branch_ratio / (1 - branch_ratio) ** 2)
        )
    return OracleResult(value, bound)


def brute_force_toeplitz_trace(
    chain: Sequence[Monomial],
    tail: BoundaryPoint,
    model: AdjacencyModel,
    s: Sequence[float],
    truncation: int,
) -> OracleResult:
    """Word-basis companion of :func:`brute_force_heat_trace`."""
    canonical, _ = _canonical_chain(chain, tail, model)
    total = _validate_oracle_inputs(canonical, model, s, truncation)
    d = model.generator_pairs
    assert d is not None
    summary = _chain_summary(canonical, model)
    if summary.zero_diagonal:
        return OracleResult(0.0, 0.0)

    branching = 2 * d - 1
    limit = truncation
    refined = summary.refined_length
    sigma_lengths = summary.sigma_lengths
    ratio = math.exp(-total)
    heavy = math.exp(-sum(sj * sl for sj, sl in zip(s, sigma_lengths)))

    value = 0.0
    for vector in _toeplitz_short_vectors(
        canonical, model, min(refined, limit + 1)
    ):
        value += math.exp(-sum(sj * x for sj, x in zip(s, vector)))

    top = max(limit - refined, 0)
    for last, weight in summary.ending_buckets:
        partial = 0.0
        if limit >= refined and last != 1:
            partial += heavy
        if top >= 1:
            counts = _escape_counts(model, last, top, settling=False)
            for length in range(1, top + 1):
                partial += counts[length] * heavy * ratio**length
        value += float(weight) * partial

    bound = 0.0
    for length in range(limit + 1, refined):
        cap = math.exp(
            -sum(sj * max(0, length + w) for sj, w in zip(s, summary.omegas))
        )
        bound += 2 * d * branching ** (length - 1) * cap
    branch_ratio = branching * ratio
    start = max(limit - refined + 1, 0)
    spill = sum(abs(float(w)) for _, w in summary.ending_buckets)
    bound += spill * heavy * branch_ratio**start / (1 - branch_ratio)
    return OracleResult(value, bound)


def literal_heat_trace(
    chain: Sequence[Monomial],
    tail: BoundaryPoint,
    model: AdjacencyModel,
    s: Sequence[float],
    truncation: int,
) -> float:
    """Same truncated trace by direct vertex-by-vertex simulation.

    Every vertex carried by a group word up to the truncation length is
    pushed through the interleaved product with the basis action; no
    cylinder structure is consulted.  Exponentially slow, but the ground
    truth the aggregated oracle is tested against.
    """
    canonical, tail = _canonical_chain(chain, tail, model)
    _validate_oracle_inputs(canonical, model, s, truncation)
    elements = [CKElement.of(pair) for pair in canonical]
    total = 0.0
    for length in range(truncation + 1):
        for word in enumerate_admissible(model, length):
            start = vertex_from_group_word(word, tail, model)
            amplitudes = {start: 1.0}
            for j in range(len(canonical), 0, -1):
                weighted = {
                    vertex: amp * math.exp(-s[j - 1] * abs(vertex.eigenvalue))
                    for vertex, amp in amplitudes.items()
                }
                amplitudes = {}
                for vertex, amp in weighted.items():
                    for target, coeff in act_on_vertex(
                        elements[j - 1], vertex, tail, model
                    ).items():
                        build = amplitudes.get(target, 0.0) + amp * float(coeff)
                        amplitudes[target] = build
            total += amplitudes.get(start, 0.0)
    return total


def literal_toeplitz_trace(
    chain: Sequence[Monomial],
    tail: BoundaryPoint,
    model: AdjacencyModel,
    s: Sequence[float],
    truncation: int,
) -> float:
    """Word-basis trace by direct simulation over all basis words."""
    canonical, _ = _canonical_chain(chain, tail, model)
    _validate_oracle_inputs(canonical, model, s, truncation)
    stages = len(canonical)
    total = 0.0
    for length in range(truncation + 1):
        for word in enumerate_admissible(model, length):
            if word and word[-1] == 1:
                continue
            current = word
            exponent = 0.0
            for j in range(stages, 0, -1):
                exponent += s[j - 1] * len(current)
                current = _toeplitz_step(current, canonical[j - 1], model)
                if current is None:
                    break
            if current == word:
                total += math.exp(-exponent)
    return total


def specialize_shifts(
    trace: MeromorphicTrace, shifts: Sequence[int]
) -> MeromorphicTrace:
    """Single-variable slice along consecutive shift differences.

    Variable j becomes the constant shifts[j] - shifts[j+1] for j < m and
    the last variable becomes s + shifts[m-1] - shifts[0]; the differences
    telescope, so e^{-(s_1+...+s_m)} turns into e^{-s} and the denominator
    atoms pass through unchanged.
    """
    if len(shifts) != trace.nvars:
        raise ValueError("need one shift per variable")
    stages = trace.nvars
    parts: dict[Denom, ExpSum] = {}
    for denom, numerator in trace.parts:
        entries: dict[TermKey, Fraction] = {}
        for const_exp, vector, coeff in numerator.terms:
            moved = const_exp + vector[-1] * (shifts[-1] - shifts[0])
            for j in range(stages - 1):
                moved += vector[j] * (shifts[j] - shifts[j + 1])
            key = (moved, (vector[-1],))
            entries[key] = entries.get(key, Fraction(0)) + coeff
        parts[denom] = ExpSum.from_terms(1, entries)
    return MeromorphicTrace.from_parts(trace.d, 1, parts, trace.certificate)


@dataclass(frozen=True)
class ExactReal:
    """Exact number of the form sum of rational multiples of e^{-integer}."""

    terms: tuple[tuple[int, Fraction], ...]

    @staticmethod
    def from_dict(entries: dict[int, Fraction]) -> ExactReal:
        return ExactReal(tuple(sorted((c, q) for c, q in entries.items() if q)))

    @staticmethod
    def zero() -> ExactReal:
        return ExactReal(())

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def plus(self, other: ExactReal) -> ExactReal:
        merged = dict(self.terms)
        for c, q in other.terms:
            merged[c] = merged.get(c, Fraction(0)) + q
        return ExactReal.from_dict(merged)

    def scaled(self, factor: Fraction) -> ExactReal:
        if not factor:
            return ExactReal.zero()
        return ExactReal(tuple((c, q * factor) for c, q in self.terms))

    def value(self) -> float:
        return sum(float(q) * math.exp(-c) for c, q in self.terms)


@dataclass(frozen=True)
class PoleDatum:
    """Principal part of one pole class of a single-variable trace.

    The location is base + i*pi for odd parity, base for even parity, both
    modulo 2*pi*i; ``principal`` lists the exact Laurent coefficients of
    (s - location)^{-order} through (s - location)^{-1}.
    """

    base_label: str
    base_value: float
    parity: str
    order: int
    principal: tuple[ExactReal, ...]

    @property
    def residue(self) -> ExactReal:
        return self.principal[-1]


def _phi_series(order: int) -> list[Fraction]:
    """Taylor coefficients of t/(1 - e^{-t}) up to the requested order."""
    drops = [
        Fraction((-1) ** i, math.factorial(i + 1)) for i in range(order + 1)
    ]
    coeffs: list[Fraction] = []
    for i in range(order + 1):
        acc = Fraction(1 if i == 0 else 0)
        for j in range(i):
            acc -= coeffs[j] * drops[i - j]
        coeffs.append(acc)
    return coeffs


def _series_power(base: list[Fraction], power: int, order: int) -> list[Fraction]:
    result = [Fraction(1)] + [Fraction(0)] * order
    for _ in range(power):
        merged = [Fraction(0)] * (order + 1)
        for i in range(order + 1):
            for j in range(order + 1 - i):
                merged[i + j] += result[i] * base[j]
        result = merged
    return result


_POLE_CLASSES = (
    (PLAIN_ATOM, "0", "even"),
    (ALTERNATING_ATOM, "0", "odd"),
    (BRANCH_ATOM, "log(2d-1)", "even"),
)


def poles_and_laurent(trace: MeromorphicTrace) -> list[PoleDatum]:
    """Exact pole classes of a single-variable trace.

    Writes w = e^{-s}; near each candidate root the matching atom equals
    1 - e^{-t} in the local variable t, whose reciprocal expands through
    Bernoulli-type coefficients, while the numerator contributes its exact
    Taylor data.  Cancellations are detected exactly, so reported orders
    are true orders.
    """
    if trace.nvars != 1:
        raise ValueError("pole extraction expects a single-variable trace")
    if trace.certificate is not None:
        return []
    branching = 2 * trace.d - 1
    found = []
    for atom, label, parity in _POLE_CLASSES:
        powers = {
            denom.power: numerator
            for denom, numerator in trace.parts
            if denom.atom == atom
        }
        if not powers:
            continue
        deepest = max(powers)
        principal: dict[int, ExactReal] = {}
        if atom == BRANCH_ATOM:
            root_num, root_den = 1, branching
            base_value = math.log(branching)
        else:
            root_num, root_den = (1, 1) if atom == PLAIN_ATOM else (-1, 1)
            base_value = 0.0
        phi = _phi_series(deepest)
        for power, numerator in powers.items():
            reciprocal = _series_power(phi, power, power - 1)
            taylor: list[ExactReal] = []
            for i in range(power):
                entries: dict[int, Fraction] = {}
                for const_exp, vector, coeff in numerator.terms:
                    v = vector[0]
                    scale = (
                        coeff
                        * Fraction(root_num, root_den) ** v
                        * Fraction((-v) ** i, math.factorial(i))
                    )
                    if scale:
                        entries[const_exp] = entries.get(const_exp, Fraction(0)) + scale
                taylor.append(ExactReal.from_dict(entries))
            for exponent in range(-power, 0):
                acc = ExactReal.zero()
                for i in range(power + exponent + 1):
                    acc = acc.plus(taylor[i].scaled(reciprocal[power + exponent - i]))
                principal[exponent] = principal.get(exponent, ExactReal.zero()).plus(acc)
        true_order = 0
        for exponent in sorted(principal):
            if not principal[exponent].is_zero:
                true_order = -exponent
                break
        if true_order == 0:
            continue
        coefficients = tuple(
            principal.get(exponent, ExactReal.zero())
            for exponent in range(-true_order, 0)
        )
        found.append(PoleDatum(label, base_value, parity, true_order, coefficients))
    return found
