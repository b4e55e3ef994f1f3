"""Sign-preserving logarithmic dampening and exponentiation of spectra.

The transforms act on diagonal operators given as 1-d eigenvalue arrays:
the signed logarithm x -> sgn(x)log(1+|x|), its beta-regularized variant,
and the exponential amplification F e^{|D|} together with the conjugation
twist it induces.  Summability scans turn truncated heat or power sums
into convergence verdicts by a ratio test on the tail increments, both for
materialized mode windows and for the free-group vertex space, where the
partial sums come from the exact counting engine instead of an eigenvalue
list.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .ckalg import Monomial
from .traces import _heat_partial_sum
from .words import AdjacencyModel, BoundaryPoint

__all__ = [
    "ExponentiatedDirac",
    "SummabilityReport",
    "beta_log_transform",
    "exponentiate",
    "free_group_summability",
    "invertible_amplification",
    "sgnlog_transform",
    "summability_scan",
]

OVERFLOW_GUARD = 300.0

DIVERGENCE_MARGIN = 1e-3


def sgnlog_transform(diagonal: np.ndarray) -> np.ndarray:
    """Signed logarithm of a diagonal operator, eigenvalue by eigenvalue.

    Maps x to sgn(x)log(1+|x|); zero eigenvalues stay zero and the map is
    odd and strictly monotone.
    """
    values = np.asarray(diagonal, dtype=float)
    return np.sign(values) * np.log1p(np.abs(values))


def beta_log_transform(diagonal: np.ndarray, dampening: float) -> np.ndarray:
    """Regularized logarithmic dampening with exponent deficit ``dampening``.

    Each eigenvalue x becomes x(1+x^2)^(-1/2) log(1+(1+x^2)^(1/2-b)) for
    b = ``dampening``.  The result differs from (1-2b) times the signed
    logarithm by a correction that vanishes at infinity.
    """
    if not 0.0 < dampening < 0.5:
        raise ValueError("dampening exponent must lie strictly between 0 and 1/2")
    values = np.asarray(diagonal, dtype=float)
    squares = 1.0 + values * values
    return values / np.sqrt(squares) * np.log1p(squares ** (0.5 - dampening))


class ExponentiatedDirac(NamedTuple):
    amplified: np.ndarray
    twist: Callable[[np.ndarray], np.ndarray]


def exponentiate(diagonal: np.ndarray) -> ExponentiatedDirac:
    """Exponential amplification of a diagonal operator with its twist.

    Returns the diagonal of F e^|D| (the phase convention sends kernel
    eigenvalues to +1) together with a map materializing the conjugation
    a -> e^|D| a e^(-|D|) on the window.  The twist combines row and
    column exponents additively before a single exponential, so the gap
    exponents stay within twice the guard and clear of float overflow
    even where e^|D| times e^|D| would not be representable.
    """
    values = np.asarray(diagonal, dtype=float)
    magnitudes = np.abs(values)
    peak = float(magnitudes.max()) if magnitudes.size else 0.0
    if peak > OVERFLOW_GUARD:
        raise ValueError(
            f"largest eigenvalue magnitude {peak:.6g} exceeds the exponentiation "
            f"guard {OVERFLOW_GUARD:.6g}"
        )
    phases = np.where(values >= 0, 1.0, -1.0)
    amplified = phases * np.exp(magnitudes)
    gaps = np.exp(magnitudes[:, None] - magnitudes[None, :])

    def twist(matrix: np.ndarray) -> np.ndarray:
        operator = np.asarray(matrix)
        if operator.shape != gaps.shape:
            raise ValueError(
                f"operator shape {operator.shape} does not match the window "
                f"{gaps.shape}"
            )
        return gaps * operator

    return ExponentiatedDirac(amplified, twist)


def invertible_amplification(diagonal: np.ndarray) -> np.ndarray:
    """Doubled-basis amplification with spectrum bounded away from zero.

    Builds the block operator with D and -D on the diagonal and the
    resolvent-type block (1+D^2)^(-1) on the antidiagonal.  Its square is
    diagonal with entries f(x) = x^2 + (1+x^2)^(-2), so every singular
    value is at least min_x f(x)^(1/2), which stays above 1/2.
    """
    values = np.asarray(diagonal, dtype=float)
    size = values.size
    resolvent = 1.0 / (1.0 + values * values)
    amplified = np.zeros((2 * size, 2 * size))
    indices = np.arange(size)
    amplified[indices, indices] = values
    amplified[size + indices, size + indices] = -values
    amplified[indices, size + indices] = resolvent
    amplified[size + indices, indices] = resolvent
    return amplified


@dataclass(frozen=True)
class SummabilityReport:
    """Partial-sum curves over a truncation sweep with verdicts per exponent.

    ``curves[i][j]`` is the partial sum for ``exponents[i]`` at the j-th
    truncation of the sweep.  ``crossing`` is the midpoint estimate of the
    abscissa separating diverging from converged exponents, or None when
    the verdicts do not bracket it.
    """

    exponents: tuple[float, ...]
    curves: tuple[tuple[float, ...], ...]
    verdicts: tuple[str, ...]
    crossing: float | None

    def __post_init__(self) -> None:
        if len(self.curves) != len(self.exponents):
            raise ValueError("need one partial-sum curve per exponent")
        if len(self.verdicts) != len(self.exponents):
            raise ValueError("need one verdict per exponent")
        for curve in self.curves:
            drops = np.diff(np.asarray(curve))
            if drops.size and float(drops.min()) < -1e-9 * max(map(abs, curve)):
                raise ValueError("positive-term partial sums must be monotone")


def _tail_verdict(curve: Sequence[float]) -> str:
    """Ratio test on the last three increment pairs of a partial-sum curve."""
    gaps = np.diff(np.asarray(curve, dtype=float))
    ratios = []
    for previous, current in zip(gaps[-4:-1], gaps[-3:]):
        if previous == 0.0:
            ratios.append(0.0 if current == 0.0 else math.inf)
        else:
            ratios.append(float(current / previous))
    diverging = all(ratio > 1.0 - DIVERGENCE_MARGIN for ratio in ratios)
    return "diverging" if diverging else "converged"


def _crossing_estimate(
    exponents: Sequence[float], verdicts: Sequence[str]
) -> float | None:
    diverging = [s for s, verdict in zip(exponents, verdicts) if verdict == "diverging"]
    converged = [s for s, verdict in zip(exponents, verdicts) if verdict == "converged"]
    if not diverging or not converged:
        return None
    below, above = max(diverging), min(converged)
    if below >= above:
        return None
    return (below + above) / 2.0


def _assemble_report(
    exponents: Sequence[float], curves: Sequence[tuple[float, ...]]
) -> SummabilityReport:
    verdicts = tuple(_tail_verdict(curve) for curve in curves)
    return SummabilityReport(
        exponents=tuple(float(s) for s in exponents),
        curves=tuple(curves),
        verdicts=verdicts,
        crossing=_crossing_estimate(exponents, verdicts),
    )


def _validate_sweep(sweep: Sequence[int]) -> tuple[int, ...]:
    stages = tuple(int(size) for size in sweep)
    if len(stages) < 5:
        raise ValueError(
            "the truncation sweep needs at least five stages so the verdict "
            "can inspect three tail ratios"
        )
    if any(b <= a for a, b in zip(stages, stages[1:])):
        raise ValueError("truncation sweep must be strictly increasing")
    if stages[0] < 1:
        raise ValueError("truncations must be positive")
    return stages


def summability_scan(
    diagonal: np.ndarray,
    mode: str,
    exponents: Sequence[float],
    sweep: Sequence[int],
) -> SummabilityReport:
    """Convergence verdicts for power or heat sums over a mode window.

    The diagonal must cover a symmetric window (odd length); the partial
    sum at truncation L runs over the central 2L+1 eigenvalues.  Power
    mode accumulates (1+x^2)^(-s/2) and exp mode e^(-s|x|); an exponent is
    declared diverging when the tail increment ratios stay above
    1 - 1e-3 across the final three sweep stages.
    """
    if mode not in ("power", "exp"):
        raise ValueError(f"mode must be 'power' or 'exp', not {mode!r}")
    grid = tuple(float(s) for s in exponents)
    if not grid:
        raise ValueError("exponent grid must be nonempty")
    if any(s <= 0 for s in grid):
        raise ValueError("exponents must be positive")
    stages = _validate_sweep(sweep)
    values = np.asarray(diagonal, dtype=float)
    if values.ndim != 1 or values.size % 2 == 0:
        raise ValueError("diagonal must be a 1-d array over a symmetric window")
    center = values.size // 2
    if stages[-1] > center:
        raise ValueError(
            f"truncation {stages[-1]} exceeds the window radius {center}"
        )
    magnitudes = np.abs(values)
    curves = []
    for s in grid:
        if mode == "power":
            weights = np.exp(-0.5 * s * np.log1p(magnitudes * magnitudes))
        else:
            weights = np.exp(-s * magnitudes)
        curve = tuple(
            float(np.sum(weights[center - stage : center + stage + 1]))
            for stage in stages
        )
        curves.append(curve)
    return _assemble_report(grid, curves)


UNIT_CHAIN = (Monomial((), ()),)


def free_group_summability(
    model: AdjacencyModel,
    tail: BoundaryPoint,
    exponents: Sequence[float],
    sweep: Sequence[int],
) -> SummabilityReport:
    """Heat-sum verdicts over the free-group vertex space.

    The eigenvalue list cannot be materialized (level sizes grow like
    (2d-1)^L), so each partial sum comes from the exact windowed counting
    engine for the identity chain: the sum of e^(-s |eigenvalue|) over all
    vertices carried by group words up to the truncation length.  Verdicts
    follow the same tail-ratio rule as :func:`summability_scan`; the
    crossing estimate brackets log(2d-1).
    """
    grid = tuple(float(s) for s in exponents)
    if not grid:
        raise ValueError("exponent grid must be nonempty")
    if any(s <= 0 for s in grid):
        raise ValueError("exponents must be positive")
    stages = _validate_sweep(sweep)
    curves = []
    for s in grid:
        curve = tuple(
            _heat_partial_sum(UNIT_CHAIN, tail, model, [s], stage)
            for stage in stages
        )
        curves.append(curve)
    return _assemble_report(grid, curves)
