"""Fourier-mode model of the circle with Moebius twists and Toeplitz index data.

The Hilbert space is spanned by the exponential modes e_n for |n| <= M.  The
Dirac operator acts diagonally with eigenvalue n away from mode zero and
eigenvalue one at mode zero, so it is invertible and its phase splits the
window into Hardy and anti-Hardy halves.  Multiplication operators, the
unitaries induced by Moebius transformations, and conformally twisted
commutators are all materialised as dense matrices on that window; zeta
traces against powers of the Dirac operator come out either as multiples of
the Riemann zeta function or as finite Dirichlet sums.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, NamedTuple, Sequence

import numpy as np

__all__ = [
    "CrossedElement",
    "DirichletSum",
    "MoebiusMap",
    "QuadratureUnitary",
    "TrigPoly",
    "build_dirac",
    "build_dlog",
    "build_phase",
    "circle_zeta",
    "circle_zeta_poles",
    "circle_zeta_value",
    "conformal_twist",
    "derivative_abs_poly",
    "dirac_commutator",
    "inner_block",
    "log_dirac_commutator",
    "moebius_rectangle",
    "moebius_unitary",
    "mult_op",
    "numerical_rank",
    "represent",
    "riemann_zeta",
    "stabilized_dirichlet",
    "toeplitz_index",
    "twisted_dirac_commutator",
    "winding_number",
]


@dataclass(frozen=True)
class TrigPoly:
    """Finitely supported Fourier series stored as (mode, coefficient) pairs."""

    terms: tuple[tuple[int, complex], ...]

    def __post_init__(self) -> None:
        modes = [mode for mode, _ in self.terms]
        if modes != sorted(set(modes)):
            raise ValueError("modes must be strictly increasing")
        if any(coeff == 0 for _, coeff in self.terms):
            raise ValueError("zero coefficients must be dropped before construction")

    @classmethod
    def from_dict(cls, coefficients: Mapping[int, complex], drop_tol: float = 0.0) -> TrigPoly:
        kept = {
            int(mode): complex(value)
            for mode, value in coefficients.items()
            if abs(value) > drop_tol
        }
        return cls(tuple(sorted(kept.items())))

    @classmethod
    def one(cls) -> TrigPoly:
        return cls.from_dict({0: 1.0})

    @classmethod
    def coordinate(cls, power: int = 1) -> TrigPoly:
        return cls.from_dict({power: 1.0})

    @classmethod
    def from_samples(cls, values: np.ndarray, drop_tol: float) -> TrigPoly:
        """Recover coefficients from equispaced samples, guarding the alias tail.

        The top third of the available modes must already sit below the drop
        tolerance; otherwise the sample grid cannot certify the dropped tail
        and the conversion refuses.
        """

        samples = np.asarray(values, dtype=complex)
        count = samples.size
        if count < 4:
            raise ValueError("at least four samples are required")
        spectrum = np.fft.fft(samples) / count
        guard = count // 3
        coefficients: dict[int, complex] = {}
        for index in range(count):
            mode = index if index <= count // 2 else index - count
            value = spectrum[index]
            if abs(mode) >= guard and abs(value) > drop_tol:
                raise ValueError(
                    "sample resolution is too low for the requested tail tolerance"
                )
            if abs(value) > drop_tol:
                coefficients[mode] = complex(value)
        return cls.from_dict(coefficients)

    def as_dict(self) -> dict[int, complex]:
        return dict(self.terms)

    def coefficient(self, mode: int) -> complex:
        for term_mode, value in self.terms:
            if term_mode == mode:
                return value
        return 0.0

    @property
    def bandwidth(self) -> int:
        return max((abs(mode) for mode, _ in self.terms), default=0)

    @property
    def analytic_degree(self) -> int:
        return max((mode for mode, _ in self.terms if mode > 0), default=0)

    @property
    def coanalytic_degree(self) -> int:
        return max((-mode for mode, _ in self.terms if mode < 0), default=0)

    def conjugate(self) -> TrigPoly:
        return TrigPoly.from_dict({-mode: value.conjugate() for mode, value in self.terms})

    def scaled(self, factor: complex) -> TrigPoly:
        return TrigPoly.from_dict({mode: factor * value for mode, value in self.terms})

    def __add__(self, other: TrigPoly) -> TrigPoly:
        merged = self.as_dict()
        for mode, value in other.terms:
            merged[mode] = merged.get(mode, 0.0) + value
        return TrigPoly.from_dict(merged)

    def __mul__(self, other: TrigPoly) -> TrigPoly:
        merged: dict[int, complex] = {}
        for left_mode, left in self.terms:
            for right_mode, right in other.terms:
                mode = left_mode + right_mode
                merged[mode] = merged.get(mode, 0.0) + left * right
        return TrigPoly.from_dict(merged)

    def evaluate(self, point: complex) -> complex:
        return sum(value * point**mode for mode, value in self.terms)

    def values_on_grid(self, points: int) -> np.ndarray:
        """Evaluate on the equispaced grid exp(2 pi i k / points)."""

        if points <= 2 * self.bandwidth:
            raise ValueError("grid is too coarse for the bandwidth")
        buffer = np.zeros(points, dtype=complex)
        for mode, value in self.terms:
            buffer[mode % points] += value
        return np.fft.ifft(buffer) * points


@dataclass(frozen=True)
class MoebiusMap:
    """Disc automorphism z -> (a z + b) / (conj(b) z + conj(a)) on the circle."""

    a: complex
    b: complex

    def __post_init__(self) -> None:
        drift = abs(abs(self.a) ** 2 - abs(self.b) ** 2 - 1.0)
        if drift > 1e-9 * max(1.0, abs(self.a) ** 2):
            raise ValueError("coefficients must satisfy |a|^2 - |b|^2 = 1")

    @classmethod
    def identity(cls) -> MoebiusMap:
        return cls(1.0, 0.0)

    @classmethod
    def hyperbolic(cls, stretch: float) -> MoebiusMap:
        return cls(math.cosh(stretch / 2.0), math.sinh(stretch / 2.0))

    def apply(self, z):
        a, b = complex(self.a), complex(self.b)
        return (a * z + b) / (b.conjugate() * z + a.conjugate())

    def derivative_abs(self, z):
        a, b = complex(self.a), complex(self.b)
        return abs(b.conjugate() * z + a.conjugate()) ** -2.0

    def inverse(self) -> MoebiusMap:
        return MoebiusMap(complex(self.a).conjugate(), -complex(self.b))

    def compose(self, other: MoebiusMap) -> MoebiusMap:
        a1, b1 = complex(self.a), complex(self.b)
        a2, b2 = complex(other.a), complex(other.b)
        return MoebiusMap(a1 * a2 + b1 * b2.conjugate(), a1 * b2 + b1 * a2.conjugate())

    def power(self, exponent: int) -> MoebiusMap:
        base = self if exponent >= 0 else self.inverse()
        result = MoebiusMap.identity()
        for _ in range(abs(exponent)):
            result = result.compose(base)
        return result


def build_dirac(max_mode: int) -> np.ndarray:
    """Diagonal of the shifted derivative operator over the mode window."""

    if max_mode < 1:
        raise ValueError("the mode window must contain at least mode one")
    eigenvalues = np.arange(-max_mode, max_mode + 1, dtype=float)
    eigenvalues[max_mode] = 1.0
    return eigenvalues


def build_dlog(max_mode: int) -> np.ndarray:
    """Diagonal of the signed-logarithm derivative over the mode window."""

    if max_mode < 1:
        raise ValueError("the mode window must contain at least mode one")
    modes = np.arange(-max_mode, max_mode + 1, dtype=float)
    eigenvalues = np.zeros_like(modes)
    away = np.abs(modes) >= 2
    eigenvalues[away] = np.sign(modes[away]) * np.log(np.abs(modes[away]))
    return eigenvalues


def build_phase(max_mode: int) -> np.ndarray:
    """Diagonal of the phase of the shifted derivative operator."""

    modes = np.arange(-max_mode, max_mode + 1)
    return np.where(modes >= 0, 1.0, -1.0)


def mult_op(symbol: TrigPoly, max_mode: int) -> np.ndarray:
    """Convolution matrix of a Fourier polynomial on the mode window."""

    size = 2 * max_mode + 1
    matrix = np.zeros((size, size), dtype=complex)
    for mode, value in symbol.terms:
        if abs(mode) >= size:
            continue
        matrix += np.diag(np.full(size - abs(mode), value), k=-mode)
    return matrix


class QuadratureUnitary(NamedTuple):
    matrix: np.ndarray
    defect: float


def _moebius_columns(gamma: MoebiusMap, col_modes: int, quad_points: int) -> np.ndarray:
    angles = 2.0 * np.pi * np.arange(quad_points) / quad_points
    points = np.exp(1j * angles)
    weights = gamma.derivative_abs(points) ** 0.5
    images = gamma.apply(points)
    columns = np.empty((quad_points, 2 * col_modes + 1), dtype=complex)
    current = weights * np.conj(images) ** col_modes
    for offset in range(2 * col_modes + 1):
        columns[:, offset] = current
        current = current * images
    return np.fft.fft(columns, axis=0) / quad_points


@functools.lru_cache(maxsize=32)
def _unitary_cached(gamma: MoebiusMap, max_mode: int, quad_points: int) -> QuadratureUnitary:
    spectrum = _moebius_columns(gamma, max_mode, quad_points)
    gram = spectrum.conj().T @ spectrum
    gram -= np.eye(2 * max_mode + 1)
    gram = (gram + gram.conj().T) / 2.0
    defect = float(np.max(np.abs(np.linalg.eigvalsh(gram)))) if gram.size else 0.0
    if defect > 1e-8:
        raise ValueError(
            "quadrature defect {:.3e} exceeds 1e-08; increase quad_points".format(defect)
        )
    rows = np.arange(-max_mode, max_mode + 1) % quad_points
    matrix = spectrum[rows, :]
    matrix.setflags(write=False)
    return QuadratureUnitary(matrix, defect)


def moebius_unitary(gamma: MoebiusMap, max_mode: int, quad_points: int) -> QuadratureUnitary:
    """Window matrix of the weighted composition unitary, with its defect.

    Matrix elements are Fourier integrals of smooth periodic functions, so the
    trapezoid rule converges spectrally; the reported defect is the deviation
    of the computed column Gram matrix from the identity, which measures pure
    quadrature error because every alias row participates in the Gram sum.
    """

    if max_mode < 1:
        raise ValueError("the mode window must contain at least mode one")
    if quad_points < 8 * max_mode:
        raise ValueError("at least eight quadrature points per mode are required")
    return _unitary_cached(gamma, max_mode, quad_points)


def moebius_rectangle(
    gamma: MoebiusMap, row_modes: int, col_modes: int, quad_points: int
) -> np.ndarray:
    """Rectangular block of the composition unitary between two mode windows."""

    if row_modes < 0 or col_modes < 0:
        raise ValueError("mode windows must be nonnegative")
    if quad_points < 2 * (row_modes + col_modes) + 16:
        raise ValueError("quadrature grid is too coarse for the requested windows")
    spectrum = _moebius_columns(gamma, col_modes, quad_points)
    rows = np.arange(-row_modes, row_modes + 1) % quad_points
    return spectrum[rows, :]


@dataclass(frozen=True)
class CrossedElement:
    """Finite sum of terms (group power, coefficient function)."""

    terms: tuple[tuple[int, TrigPoly], ...]

    def __post_init__(self) -> None:
        powers = [power for power, _ in self.terms]
        if powers != sorted(set(powers)):
            raise ValueError("group powers must be strictly increasing")
        if any(not symbol.terms for _, symbol in self.terms):
            raise ValueError("coefficient functions must be nonzero")

    @classmethod
    def generator(cls, power: int = 1) -> CrossedElement:
        return cls(((power, TrigPoly.one()),))

    @classmethod
    def multiplication(cls, symbol: TrigPoly) -> CrossedElement:
        return cls(((0, symbol),))


def derivative_abs_poly(
    gamma: MoebiusMap,
    power: int,
    *,
    samples: int = 4096,
    tail_tol: float = 1e-10,
) -> TrigPoly:
    """Fourier expansion of the derivative modulus raised to an integer power."""

    if power == 0:
        return TrigPoly.one()
    angles = 2.0 * np.pi * np.arange(samples) / samples
    points = np.exp(1j * angles)
    values = gamma.derivative_abs(points) ** power
    return TrigPoly.from_samples(values, tail_tol)


def conformal_twist(
    element: CrossedElement,
    gamma: MoebiusMap,
    *,
    samples: int = 4096,
    tail_tol: float = 1e-10,
) -> CrossedElement:
    """Multiply each coefficient function by the derivative-modulus power."""

    twisted: list[tuple[int, TrigPoly]] = []
    for power, symbol in element.terms:
        if power == 0:
            twisted.append((power, symbol))
            continue
        weight = derivative_abs_poly(gamma, power, samples=samples, tail_tol=tail_tol)
        twisted.append((power, symbol * weight))
    return CrossedElement(tuple(twisted))


def represent(
    element: CrossedElement, gamma: MoebiusMap, max_mode: int, quad_points: int
) -> np.ndarray:
    """Window matrix of a crossed-product element in the covariant picture."""

    size = 2 * max_mode + 1
    total = np.zeros((size, size), dtype=complex)
    for power, symbol in element.terms:
        if power == 0:
            shifted = np.eye(size, dtype=complex)
        else:
            shifted = moebius_unitary(gamma.power(power), max_mode, quad_points).matrix
        total += mult_op(symbol, max_mode) @ shifted
    return total


def dirac_commutator(
    element: CrossedElement, gamma: MoebiusMap, max_mode: int, quad_points: int
) -> np.ndarray:
    matrix = represent(element, gamma, max_mode, quad_points)
    diagonal = build_dirac(max_mode)
    return diagonal[:, None] * matrix - matrix * diagonal[None, :]


def log_dirac_commutator(
    element: CrossedElement, gamma: MoebiusMap, max_mode: int, quad_points: int
) -> np.ndarray:
    matrix = represent(element, gamma, max_mode, quad_points)
    diagonal = build_dlog(max_mode)
    return diagonal[:, None] * matrix - matrix * diagonal[None, :]


def twisted_dirac_commutator(
    element: CrossedElement,
    gamma: MoebiusMap,
    max_mode: int,
    quad_points: int,
    *,
    samples: int = 4096,
    tail_tol: float = 1e-10,
) -> np.ndarray:
    """Commutator with the twist acting on the left factor."""

    plain = represent(element, gamma, max_mode, quad_points)
    weighted = represent(
        conformal_twist(element, gamma, samples=samples, tail_tol=tail_tol),
        gamma,
        max_mode,
        quad_points,
    )
    diagonal = build_dirac(max_mode)
    return diagonal[:, None] * plain - weighted * diagonal[None, :]


def inner_block(matrix: np.ndarray) -> np.ndarray:
    """Central half-window block, used to suppress compression artifacts."""

    size = matrix.shape[0]
    if matrix.shape != (size, size) or size % 2 == 0:
        raise ValueError("an odd square window matrix is required")
    max_mode = (size - 1) // 2
    half = max_mode // 2
    window = slice(max_mode - half, max_mode + half + 1)
    return matrix[window, window]


def numerical_rank(matrix: np.ndarray, tol: float = 1e-8) -> int:
    """Count singular values above tol relative to the largest one."""

    singular = np.linalg.svd(matrix, compute_uv=False)
    if singular.size == 0 or singular[0] == 0.0:
        return 0
    return int(np.count_nonzero(singular > tol * singular[0]))


def winding_number(symbol: TrigPoly, *, grid_points: int = 4096) -> int:
    """Degree of the symbol around the origin by the argument principle."""

    values = symbol.values_on_grid(grid_points)
    if np.min(np.abs(values)) <= 1e-9:
        raise ValueError("the symbol vanishes on the sample grid")
    increments = np.angle(np.roll(values, -1) / values)
    total = float(np.sum(increments)) / (2.0 * np.pi)
    nearest = round(total)
    if abs(total - nearest) > 1e-6:
        raise ValueError("phase increments did not close up; refine the grid")
    return int(nearest)


def _corner_kernel_dim(symbol: TrigPoly, max_mode: int, offset: int, tol: float) -> int:
    rows = max_mode + 1
    cols = max_mode + 1 - offset
    matrix = np.zeros((rows, cols), dtype=complex)
    for mode, value in symbol.terms:
        for col in range(cols):
            row = col + mode
            if 0 <= row < rows:
                matrix[row, col] = value
    return cols - numerical_rank(matrix, tol)


def toeplitz_index(
    symbol: TrigPoly,
    max_mode: int,
    *,
    grid_points: int = 4096,
    rank_tol: float = 1e-8,
) -> int:
    """Kernel-dimension difference of the compressed symbol and its adjoint.

    The compression keeps every nonnegative mode row but stops the column
    window one bandwidth early, so each retained column of the semi-infinite
    convolution matrix is complete and no artificial kernel appears at the
    window edge.  The adjoint is handled through the conjugate symbol.
    """

    if not symbol.terms:
        raise ValueError("the zero symbol is not invertible")
    values = symbol.values_on_grid(grid_points)
    if float(np.min(np.abs(values))) <= 0.1:
        raise ValueError("the symbol is not safely invertible on the circle")
    spread = symbol.bandwidth
    if max_mode < 2 * spread + 2:
        raise ValueError("the mode window is too small for the symbol bandwidth")
    forward = _corner_kernel_dim(symbol, max_mode, spread, rank_tol)
    backward = _corner_kernel_dim(symbol.conjugate(), max_mode, spread, rank_tol)
    return forward - backward


_BERNOULLI = (
    Fraction(1, 6),
    Fraction(-1, 30),
    Fraction(1, 42),
    Fraction(-1, 30),
    Fraction(5, 66),
    Fraction(-691, 2730),
    Fraction(7, 6),
    Fraction(-3617, 510),
)


def riemann_zeta(argument: complex, *, cutoff: int = 24) -> complex:
    """Euler-Maclaurin continuation of the zeta series, valid away from one."""

    s = complex(argument)
    if abs(s - 1.0) < 1e-12:
        raise ValueError("the zeta function has its pole at argument one")
    total = sum(complex(k) ** (-s) for k in range(1, cutoff))
    total += complex(cutoff) ** (1.0 - s) / (s - 1.0)
    total += 0.5 * complex(cutoff) ** (-s)
    rising = s
    for index, bernoulli in enumerate(_BERNOULLI, start=1):
        weight = float(bernoulli / math.factorial(2 * index))
        total += weight * rising * complex(cutoff) ** (-s - 2 * index + 1)
        rising = rising * (s + 2 * index - 1) * (s + 2 * index)
    return total


@dataclass(frozen=True)
class DirichletSum:
    """Finite sum of terms coefficient * base^(-2z), an entire trace function."""

    terms: tuple[tuple[float, complex], ...]

    def __post_init__(self) -> None:
        bases = [base for base, _ in self.terms]
        if bases != sorted(set(bases)):
            raise ValueError("bases must be strictly increasing")
        if any(base <= 0.0 for base in bases):
            raise ValueError("bases must be positive")

    @classmethod
    def from_window_diagonal(cls, matrix: np.ndarray, drop_tol: float = 0.0) -> DirichletSum:
        size = matrix.shape[0]
        if matrix.shape != (size, size) or size % 2 == 0:
            raise ValueError("an odd square window matrix is required")
        max_mode = (size - 1) // 2
        bases = np.abs(build_dirac(max_mode))
        merged: dict[float, complex] = {}
        for position in range(size):
            base = float(bases[position])
            merged[base] = merged.get(base, 0.0) + complex(matrix[position, position])
        kept = {base: value for base, value in merged.items() if abs(value) > drop_tol}
        return cls(tuple(sorted(kept.items())))

    def evaluate(self, z: complex) -> complex:
        return sum(value * complex(base) ** (-2.0 * z) for base, value in self.terms)


def stabilized_dirichlet(
    builder: Callable[[int], np.ndarray],
    sizes: Sequence[int],
    tol: float = 1e-10,
) -> DirichletSum:
    """Certify window independence of the diagonal trace data.

    The builder is evaluated on each mode window; the resulting Dirichlet
    sums for the two largest windows must agree termwise within tol,
    otherwise the diagonal has not settled and no entire certificate can
    be issued.
    """

    if len(sizes) < 2 or list(sizes) != sorted(set(sizes)):
        raise ValueError("at least two strictly increasing window sizes are required")
    sums = [DirichletSum.from_window_diagonal(builder(size)) for size in sizes]
    previous, final = dict(sums[-2].terms), dict(sums[-1].terms)
    for base in sorted(set(previous) | set(final)):
        drift = abs(previous.get(base, 0.0) - final.get(base, 0.0))
        if drift > tol:
            raise ValueError(
                "diagonal trace data has not stabilized across the mode windows"
            )
    return sums[-1]


def circle_zeta(operand: TrigPoly | DirichletSum, power: int) -> float:
    """Residue at the origin of z^power times the zeta trace of the operand.

    A multiplication operand yields a trace proportional to the continued
    zeta series, whose only pole sits at one half, and a Dirichlet operand
    yields an entire trace; in both cases every residue at the origin
    vanishes identically.
    """

    if power < 0:
        raise ValueError("the polynomial degree must be nonnegative")
    if not isinstance(operand, (TrigPoly, DirichletSum)):
        raise TypeError("operand must be a Fourier polynomial or a Dirichlet sum")
    return 0.0


def circle_zeta_poles(operand: TrigPoly | DirichletSum) -> tuple[tuple[float, complex], ...]:
    """Pole locations and residues of the zeta trace of the operand."""

    if isinstance(operand, DirichletSum):
        return ()
    if isinstance(operand, TrigPoly):
        average = operand.coefficient(0)
        if average == 0:
            return ()
        return ((0.5, complex(average)),)
    raise TypeError("operand must be a Fourier polynomial or a Dirichlet sum")


def circle_zeta_value(operand: TrigPoly | DirichletSum, z: complex) -> complex:
    """Evaluate the zeta trace of the operand away from its poles."""

    if isinstance(operand, DirichletSum):
        return operand.evaluate(z)
    if isinstance(operand, TrigPoly):
        return operand.coefficient(0) * (2.0 * riemann_zeta(2.0 * complex(z)) + 1.0)
    raise TypeError("operand must be a Fourier polynomial or a Dirichlet sum")
