"""Residue cochains of twisted commutator words and the paired index checks.

The candidate local formulas pair a unitary with an alternating sum of
residue functionals applied to operator words built from twisted
commutators.  With the conformal twist implemented by conjugation with the
operator modulus, two structural facts decide every word: iterated
squared-modulus brackets collapse to zero, and the surviving words carry a
twisted-commutator factor whose trace function is entire, so each residue
vanishes exactly.  The index pairings themselves are nonzero, which the
verdict records side by side with the vanishing cochains.

Free-group words are evaluated exactly on the vertex basis with rational
coefficients and integer exponent bookkeeping; circle words are certified
through window-stabilized Dirichlet data.  Both routes feed the same
assembly of combinatorial weights, so the reports show per-word residues,
the certificates they consumed, and the assembled value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Sequence

import numpy as np

from .ckalg import CKElement, act_on_vertex, adjoint, generator
from .circle import (
    CrossedElement,
    MoebiusMap,
    TrigPoly,
    build_dirac,
    build_phase,
    circle_zeta,
    mult_op,
    numerical_rank,
    represent,
    stabilized_dirichlet,
    toeplitz_index,
    winding_number,
)
from .traces import (
    ENTIRE_DENOM,
    FINITE_RANK_CERTIFICATE,
    ExactReal,
    ExpSum,
    MeromorphicTrace,
    TermKey,
    poles_and_laurent,
)
from .words import (
    AdjacencyModel,
    BoundaryPoint,
    Vertex,
    enumerate_admissible,
    fixed_point,
    free_group,
    vertex_from_group_word,
)

ITERATE_CERTIFICATE = "collapsed-square-iterate"
STABILIZED_CERTIFICATE = "stabilized-dirichlet"

COUNTEREXAMPLE_FAMILIES = ("free_group", "circle", "moebius")


def multiindex_weight(powers: Sequence[int]) -> Fraction:
    """Normalizing weight of one derivative multi-index, as an exact rational.

    The denominator multiplies the factorials of the entries with the
    running sums shifted by the position, so the weight of the all-zero
    index of length m is 1/m! and higher entries decay factorially.
    """
    if not powers:
        raise ValueError("a multi-index has at least one entry")
    if any(entry < 0 for entry in powers):
        raise ValueError("multi-index entries are nonnegative")
    denominator = 1
    running = 0
    for position, entry in enumerate(powers, start=1):
        denominator *= math.factorial(entry)
        running += entry
        denominator *= running + position
    return Fraction(1, denominator)


def rising_half_coeffs(count: int) -> tuple[Fraction, ...]:
    """Ascending coefficients of the rising factorial shifted by one half.

    Entry j is the exact coefficient of the j-th power in the product of
    ``count`` linear factors with roots at the negative half-odd integers;
    an empty product yields the constant one.
    """
    if count < 0:
        raise ValueError("the factor count is nonnegative")
    coefficients = [Fraction(1)]
    for j in range(count):
        shift = Fraction(2 * j + 1, 2)
        bumped = [Fraction(0)] + coefficients
        coefficients = [
            bumped[i] + shift * (coefficients[i] if i < len(coefficients) else 0)
            for i in range(len(bumped))
        ]
    return tuple(coefficients)


def zeta_residue(trace: MeromorphicTrace, order: int) -> ExactReal:
    """Residue of the order-th power of the half-parameter against a trace.

    The trace is a function of the heat parameter; halving the variable
    moves each principal coefficient down by a power of two.  Only the
    even pole class at the origin contributes, the other pole classes sit
    away from the origin after halving.  Pole orders above two fall
    outside the admissible class and raise.
    """
    if order < 0:
        raise ValueError("the residue order is nonnegative")
    if trace.nvars != 1:
        raise ValueError("residues are extracted from single-parameter traces")
    for pole in poles_and_laurent(trace):
        if pole.base_label != "0" or pole.parity != "even":
            continue
        if pole.order > 2:
            raise ValueError(
                f"origin pole of order {pole.order} exceeds the admissible double pole"
            )
        position = pole.order - order - 1
        if position < 0:
            return ExactReal.zero()
        return pole.principal[position].scaled(Fraction(1, 2 ** (order + 1)))
    return ExactReal.zero()


def square_modulus_iterate(matrix: np.ndarray, modulus: np.ndarray) -> np.ndarray:
    """One bracket of the squared modulus twisted by its own conjugation.

    Written out entrywise the bracket is d_i^2 t_ij - (d_i^2 t_ij / d_j^2)
    d_j^2, so it vanishes identically up to floating-point cancellation;
    the matrix returned is that defect.
    """
    side = matrix.shape[0]
    if matrix.shape != (side, side):
        raise ValueError("a square window matrix is required")
    if modulus.shape != (side,):
        raise ValueError("the modulus diagonal must match the window")
    if np.any(modulus <= 0.0):
        raise ValueError("the operator modulus is positive")
    square = modulus * modulus
    plain = square[:, None] * matrix
    conjugated = plain / square[None, :]
    return plain - conjugated * square[None, :]


def group_unitary(letter: int, model: AdjacencyModel) -> CKElement:
    """Boundary translation by one group letter as an algebra element.

    The generator isometry plus the adjoint of the inverse-letter isometry
    acts on every boundary word by reduced left concatenation, and the two
    ranges are complementary, so the sum is a unitary.
    """
    model.require_free_group()
    forward = generator(letter, model)
    backward = adjoint(generator(model.inverse(letter), model))
    return forward.plus(backward)


def boundary_translation_index(
    letter: int, tail: BoundaryPoint, model: AdjacencyModel
) -> int:
    """Index of the translation compressed to the nonnegative spectral part.

    Translating against the tail letter frees one basis vector of the
    compression domain, translating by the tail letter itself misses one
    in the range, and every other letter gives a bijection; the index is
    the difference of those two indicators.
    """
    model.require_free_group()
    model.letter_name(letter)
    if not tail.is_fixed_point:
        raise ValueError("the compression is anchored at a fixed-point tail")
    anchor = tail.period[0]
    kernel = 1 if model.inverse(letter) == anchor else 0
    cokernel = 1 if letter == anchor else 0
    return kernel - cokernel


def _vertex_key(vertex: Vertex) -> tuple:
    return (vertex.group_word, vertex.offset, vertex.depth)


def _sparse_rank(columns: list[dict[Vertex, Fraction]]) -> int:
    """Rank of a sparse rational column collection by exact elimination."""
    pivots: dict[Vertex, dict[Vertex, Fraction]] = {}
    rank = 0
    for column in columns:
        work = {vertex: coeff for vertex, coeff in column.items() if coeff}
        while work:
            row = min(work, key=_vertex_key)
            pivot = pivots.get(row)
            if pivot is None:
                pivots[row] = work
                rank += 1
                break
            scale = work[row] / pivot[row]
            for vertex, coeff in pivot.items():
                updated = work.get(vertex, Fraction(0)) - scale * coeff
                if updated:
                    work[vertex] = updated
                else:
                    work.pop(vertex, None)
    return rank


def _positive_words(
    model: AdjacencyModel, tail: BoundaryPoint, max_length: int
) -> Iterator[tuple[int, ...]]:
    """Reduced words carrying the nonnegative spectral basis, by length."""
    blocked = model.inverse(tail.period[0])
    yield ()
    for length in range(1, max_length + 1):
        yield from enumerate_admissible(
            model, length, last=lambda letter: letter != blocked
        )


def compressed_kernel_dimension(
    element: CKElement,
    tail: BoundaryPoint,
    model: AdjacencyModel,
    source_length: int,
) -> int:
    """Kernel dimension of the compression on a word-length window.

    Columns over source words are complete because images grow by at most
    the longest out-word, so the kernel of the windowed rectangle equals
    the kernel of the full compression intersected with the window.
    """
    model.require_free_group()
    if not tail.is_fixed_point:
        raise ValueError("the compression is anchored at a fixed-point tail")
    if source_length < 1:
        raise ValueError("the source window must contain at least length one")
    growth = max((len(mono.out_word) for mono, _ in element.terms), default=0)
    columns: list[dict[Vertex, Fraction]] = []
    for word in _positive_words(model, tail, source_length):
        vertex = vertex_from_group_word(word, tail, model)
        column: dict[Vertex, Fraction] = {}
        for target, coeff in act_on_vertex(element, vertex, tail, model).items():
            if target.eigenvalue < 0:
                continue
            if len(target.group_word) > source_length + growth:
                raise ValueError("the image escaped the certified window")
            column[target] = coeff
        columns.append(column)
    return len(columns) - _sparse_rank(columns)


def compressed_translation_index(
    letter: int,
    tail: BoundaryPoint,
    model: AdjacencyModel,
    *,
    source_length: int,
) -> int:
    """Windowed kernel-minus-cokernel count of the compressed translation."""
    kernel = compressed_kernel_dimension(
        group_unitary(letter, model), tail, model, source_length
    )
    cokernel = compressed_kernel_dimension(
        group_unitary(model.inverse(letter), model), tail, model, source_length
    )
    return kernel - cokernel


def _spectral_sign(vertex: Vertex) -> int:
    return 1 if vertex.eigenvalue >= 0 else -1


ExactVector = dict[Vertex, dict[int, Fraction]]


def _merge_entry(
    vector: ExactVector, vertex: Vertex, exponent: int, coeff: Fraction
) -> None:
    bucket = vector.setdefault(vertex, {})
    updated = bucket.get(exponent, Fraction(0)) + coeff
    if updated:
        bucket[exponent] = updated
    else:
        bucket.pop(exponent, None)
        if not bucket:
            vector.pop(vertex, None)


def _modulus_step(vector: ExactVector, power: int) -> ExactVector:
    """Multiply by the operator modulus raised to an integer power."""
    moved: ExactVector = {}
    for vertex, bucket in vector.items():
        shift = -power * abs(vertex.eigenvalue)
        moved[vertex] = {exponent + shift: coeff for exponent, coeff in bucket.items()}
    return moved


def _element_step(
    vector: ExactVector,
    element: CKElement,
    tail: BoundaryPoint,
    model: AdjacencyModel,
) -> ExactVector:
    moved: ExactVector = {}
    for vertex, bucket in vector.items():
        for target, scale in act_on_vertex(element, vertex, tail, model).items():
            for exponent, coeff in bucket.items():
                _merge_entry(moved, target, exponent, coeff * scale)
    return moved


def _phase_commutator_step(
    vector: ExactVector,
    element: CKElement,
    tail: BoundaryPoint,
    model: AdjacencyModel,
) -> ExactVector:
    """Apply the commutator of the spectral phase with an algebra element."""
    moved: ExactVector = {}
    for vertex, bucket in vector.items():
        source_sign = _spectral_sign(vertex)
        for target, scale in act_on_vertex(element, vertex, tail, model).items():
            flip = _spectral_sign(target) - source_sign
            if not flip:
                continue
            for exponent, coeff in bucket.items():
                _merge_entry(moved, target, exponent, coeff * scale * flip)
    return moved


def cochain_word_trace(
    elements: Sequence[CKElement],
    tail: BoundaryPoint,
    model: AdjacencyModel,
) -> MeromorphicTrace:
    """Entire trace function of the zero-index cochain word, exactly.

    The word is the spectral phase, the leading element, and one
    phase-commutator factor per remaining element with interleaved modulus
    weights that cancel against the closing inverse power.  A sign flip
    forces the column word into the tail region, so columns vanish beyond
    the longest monomial of the final factor; the window extends past that
    bound and verifies the predicted vanishing before certifying.
    """
    model.require_free_group()
    if not tail.is_fixed_point:
        raise ValueError("the vertex space is anchored at a fixed-point tail")
    if len(elements) < 2:
        raise ValueError("the word needs a leading element and at least one factor")
    arity = len(elements) - 1
    reach = max(
        (len(mono.out_word) + len(mono.in_word) for mono, _ in elements[-1].terms),
        default=0,
    )
    entries: dict[TermKey, Fraction] = {}
    for length in range(reach + 3):
        for word in enumerate_admissible(model, length):
            vertex = vertex_from_group_word(word, tail, model)
            base = abs(vertex.eigenvalue)
            vector: ExactVector = {vertex: {arity * base: Fraction(1)}}
            for element in reversed(elements[1:]):
                vector = _modulus_step(vector, 1)
                vector = _phase_commutator_step(vector, element, tail, model)
            if length > reach:
                if vector:
                    raise ValueError("a column escaped the certified support bound")
                continue
            vector = _element_step(vector, elements[0], tail, model)
            bucket = vector.get(vertex)
            if bucket is None:
                continue
            sign = _spectral_sign(vertex)
            for exponent, coeff in bucket.items():
                key = (exponent, (base,))
                entries[key] = entries.get(key, Fraction(0)) + sign * coeff
    numerator = ExpSum.from_terms(1, entries)
    return MeromorphicTrace.from_parts(
        model.generator_pairs,
        1,
        {ENTIRE_DENOM: numerator},
        certificate=FINITE_RANK_CERTIFICATE,
    )


def multiindex_cutoff(dimension: int, arity: int) -> int:
    """Largest multi-index size kept by the summability bookkeeping.

    The half-dimension rounds up to the summability exponent, and indices
    beyond twice that exponent less the arity contribute nothing; the
    bound clamps at zero so the zero index is always inspected.
    """
    if dimension < 1:
        raise ValueError("the dimension proxy is a positive integer")
    if arity < 1:
        raise ValueError("the arity is a positive integer")
    exponent = dimension // 2 + 1
    return max(0, 2 * exponent - 1 - arity)


def _multi_indices(arity: int, cutoff: int) -> Iterator[tuple[int, ...]]:
    if arity == 1:
        for total in range(cutoff + 1):
            yield (total,)
        return
    for head in range(cutoff + 1):
        for rest in _multi_indices(arity - 1, cutoff - head):
            yield (head,) + rest


@dataclass(frozen=True)
class CochainSummand:
    """One residue evaluation inside the assembled cochain."""

    powers: tuple[int, ...]
    order: int
    weight: Fraction
    residue: float
    exact_zero: bool
    certificate: str


@dataclass(frozen=True)
class CochainReport:
    """Assembled cochain value with its per-summand residue audit."""

    arity: int
    cutoff: int
    summands: tuple[CochainSummand, ...]
    value: float
    exact_zero: bool
    weights_immaterial: bool

    @property
    def certificates(self) -> tuple[str, ...]:
        seen: list[str] = []
        for summand in self.summands:
            if summand.certificate not in seen:
                seen.append(summand.certificate)
        return tuple(seen)


def _assemble(
    arity: int,
    cutoff: int,
    zero_word_residue: Callable[[int], tuple[float, str]],
) -> CochainReport:
    if arity < 1 or arity % 2 == 0:
        raise ValueError("the cochain arity must be a positive odd integer")
    if cutoff < 0:
        raise ValueError("the multi-index cutoff is nonnegative")
    summands: list[CochainSummand] = []
    total = 0.0
    exact = True
    for powers in _multi_indices(arity, cutoff):
        size = sum(powers)
        top = size + (arity - 1) // 2
        ascending = rising_half_coeffs(top)
        alpha = multiindex_weight(powers)
        for order in range(top + 1):
            weight = alpha * ascending[order]
            if size % 2:
                weight = -weight
            if size:
                residue, certificate = 0.0, ITERATE_CERTIFICATE
            else:
                residue, certificate = zero_word_residue(order)
            vanished = residue == 0.0
            summands.append(
                CochainSummand(powers, order, weight, residue, vanished, certificate)
            )
            total += float(weight) * residue
            exact = exact and vanished
    return CochainReport(
        arity=arity,
        cutoff=cutoff,
        summands=tuple(summands),
        value=total,
        exact_zero=exact and total == 0.0,
        weights_immaterial=exact,
    )


def free_group_cochain(
    elements: Sequence[CKElement],
    tail: BoundaryPoint,
    model: AdjacencyModel,
    *,
    cutoff: int,
) -> CochainReport:
    """Cochain of boundary-algebra elements through the exact vertex engine.

    Positive multi-indices collapse through the squared-modulus bracket;
    the zero index evaluates the finitely supported word trace, whose
    entirety makes every residue vanish exactly.
    """
    arity = len(elements) - 1
    trace = cochain_word_trace(elements, tail, model)
    certificate = trace.certificate or "pole-data"

    def zero_word(order: int) -> tuple[float, str]:
        return zeta_residue(trace, order).value(), certificate

    return _assemble(arity, cutoff, zero_word)


def circle_cochain(
    symbols: Sequence[TrigPoly],
    *,
    cutoff: int,
    max_mode: int = 48,
) -> CochainReport:
    """Cochain of Fourier polynomials through window-stabilized diagonals.

    The word matrix is assembled on increasing mode windows; the surviving
    diagonal data must agree termwise across windows before the entire
    certificate is issued, and the residues of an entire trace vanish.
    """
    if len(symbols) < 2:
        raise ValueError("the word needs a leading symbol and at least one factor")
    arity = len(symbols) - 1
    span = sum(symbol.bandwidth for symbol in symbols)
    if max_mode < 4 * max(span, 1):
        raise ValueError("the mode window is too small for the word bandwidth")

    def builder(window: int) -> np.ndarray:
        phase = build_phase(window)
        modulus = np.abs(build_dirac(window))
        total = phase[:, None] * mult_op(symbols[0], window)
        for symbol in symbols[1:]:
            block = mult_op(symbol, window)
            bracket = phase[:, None] * block - block * phase[None, :]
            total = total @ (bracket * modulus[None, :])
        return total * modulus[None, :] ** float(-arity)

    stabilized = stabilized_dirichlet(
        builder, (max_mode // 2, (3 * max_mode) // 4, max_mode)
    )

    def zero_word(order: int) -> tuple[float, str]:
        return circle_zeta(stabilized, order), STABILIZED_CERTIFICATE

    return _assemble(arity, cutoff, zero_word)


@dataclass(frozen=True)
class PairingRecord:
    """One route to the index pairing and the value it produced."""

    method: str
    value: int


@dataclass(frozen=True)
class CounterexampleReport:
    """Index pairing and cochain audit of one counterexample family."""

    family: str
    pairing: int
    checks: tuple[PairingRecord, ...]
    cochains: tuple[CochainReport, ...]
    passed: bool

    @property
    def word_certificates(self) -> int:
        """Distinct operator words that consumed an entirety certificate."""
        return len(
            {
                (report.arity, summand.powers)
                for report in self.cochains
                for summand in report.summands
            }
        )


def _covariant_compression_index(
    symbol: TrigPoly, gamma: MoebiusMap, max_mode: int
) -> int:
    """Kernel-minus-cokernel count of the compressed covariant symbol.

    The column window stops one bandwidth early so every retained column
    of the compression is complete.
    """
    matrix = represent(
        CrossedElement.multiplication(symbol), gamma, max_mode, 8 * max_mode
    )
    reach = max(symbol.bandwidth, 1)
    rows = slice(max_mode, 2 * max_mode + 1)
    cols = slice(max_mode, 2 * max_mode + 1 - reach)
    block = matrix[rows, cols]
    dual = matrix.conj().T[rows, cols]
    kernel = block.shape[1] - numerical_rank(block)
    cokernel = dual.shape[1] - numerical_rank(dual)
    return kernel - cokernel


def counterexample_verdict(
    family: str,
    *,
    generators: int = 2,
    anchor_letter: str = "a1",
    pairing_letter: str | None = None,
    max_mode: int = 128,
    source_length: int = 9,
) -> CounterexampleReport:
    """Pair a unitary against the compression and audit the cochains.

    The verdict passes when the index pairing is nonzero, every assembled
    cochain of arity one and three vanishes exactly, and all pairing
    routes agree.  A zero pairing or a surviving residue fails the verdict
    rather than raising.
    """
    if family not in COUNTEREXAMPLE_FAMILIES:
        raise ValueError(f"unknown counterexample family {family!r}")

    cochains: list[CochainReport] = []
    if family == "free_group":
        model = free_group(generators)
        anchor = model.letter_index(anchor_letter)
        letter = model.letter_index(pairing_letter or anchor_letter)
        tail = fixed_point(anchor)
        pairing = boundary_translation_index(letter, tail, model)
        windowed = compressed_translation_index(
            letter, tail, model, source_length=source_length
        )
        checks = (
            PairingRecord("reduced-word formula", pairing),
            PairingRecord("windowed kernel dimensions", windowed),
        )
        unitary = group_unitary(letter, model)
        dual = adjoint(unitary)
        dimension = math.ceil(math.log(2 * generators - 1))
        for arity in (1, 3):
            elements = tuple(
                dual if position % 2 == 0 else unitary
                for position in range(arity + 1)
            )
            cochains.append(
                free_group_cochain(
                    elements,
                    tail,
                    model,
                    cutoff=multiindex_cutoff(dimension, arity),
                )
            )
    else:
        coordinate = TrigPoly.coordinate()
        pairing = toeplitz_index(coordinate, max_mode)
        records = [
            PairingRecord("toeplitz compression", pairing),
            PairingRecord("winding number", -winding_number(coordinate)),
        ]
        if family == "moebius":
            records.append(
                PairingRecord(
                    "covariant compression",
                    _covariant_compression_index(
                        coordinate, MoebiusMap.hyperbolic(1.0), max_mode
                    ),
                )
            )
        checks = tuple(records)
        conjugate = coordinate.conjugate()
        for arity in (1, 3):
            symbols = tuple(
                conjugate if position % 2 == 0 else coordinate
                for position in range(arity + 1)
            )
            cochains.append(
                circle_cochain(symbols, cutoff=multiindex_cutoff(1, arity))
            )

    agreed = all(record.value == pairing for record in checks)
    vanished = all(report.exact_zero for report in cochains)
    return CounterexampleReport(
        family=family,
        pairing=pairing,
        checks=checks,
        cochains=tuple(cochains),
        passed=pairing != 0 and vanished and agreed,
    )
