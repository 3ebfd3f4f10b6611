"""Arbitrary-precision scalar and polynomial utilities.

This module is the arithmetic substrate for the reconstruction pipeline:
a precision context wrapping mpmath, exact combinatorial sums, a small
complex-polynomial type with a simultaneous-iteration root finder, and a
solver for the scaled Vandermonde systems produced by moment decimation.

Everything here is deterministic: no randomness is used anywhere, and root
lists come back in a fixed sort order, so repeated runs at the same
precision produce identical output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from mpmath import mp

__all__ = [
    "ArithmeticContext",
    "ComplexPoly",
    "RootFindingError",
    "ScaledVandermonde",
    "annihilation_sum",
    "binomial",
    "poly_roots",
    "vandermonde_solve",
]


class RootFindingError(ArithmeticError):
    """Raised when the iteration cap is hit or a root fails the residual bound."""


@dataclass(frozen=True)
class ArithmeticContext:
    """Working precision plus derived tolerances.

    Parameters
    ----------
    precision_digits : int
        Decimal working precision, at least 15.
    root_tolerance : float or None
        Relative acceptance bound for polynomial root residuals.  When None,
        defaults to ``10**-(precision_digits - 8)``, leaving eight digits of
        slack below working precision.
    """

    precision_digits: int = 15
    root_tolerance: float | None = None

    def __post_init__(self) -> None:
        if self.precision_digits < 15:
            raise ValueError(
                f"precision_digits must be >= 15, got {self.precision_digits}"
            )
        if self.root_tolerance is not None and self.root_tolerance <= 0:
            raise ValueError("root_tolerance must be positive")

    def workprec(self):
        """Context manager setting mpmath working precision.

        mpmath precision is process-global state; concurrent use from
        threads is not supported.  Parallel callers should use separate
        processes (the CLI does).
        """
        return mp.workdps(self.precision_digits)

    def root_tol(self):
        """Root residual tolerance as an mpf under this context."""
        with self.workprec():
            if self.root_tolerance is not None:
                return mp.mpf(self.root_tolerance)
            return mp.mpf(10) ** (-(self.precision_digits - 8))

    def eps(self):
        """One unit in the last decimal place of the working precision."""
        with self.workprec():
            return mp.mpf(10) ** (-self.precision_digits)


def binomial(n: int, k: int) -> int:
    """Exact binomial coefficient C(n, k).

    Thin wrapper over math.comb with the domain checks the callers rely on.

    Raises
    ------
    ValueError
        If n < 0, k < 0, or k > n.
    """
    if n < 0 or k < 0:
        raise ValueError(f"binomial requires n, k >= 0, got n={n}, k={k}")
    if k > n:
        raise ValueError(f"binomial requires k <= n, got n={n}, k={k}")
    return math.comb(n, k)


def annihilation_sum(l: int, d: int) -> int:
    """Exact integer sum_{j=0}^{d+1} (-1)^j C(d+1, j) (j+1)^l.

    This is the (d+1)-th forward difference of the sequence (j+1)^l at 0, up
    to sign.  It vanishes exactly for 0 <= l <= d, which is the identity that
    makes the decimated localization polynomial annihilate polynomial moment
    growth; at l = d+1 it equals (-1)^(d+1) (d+1)!.

    Raises
    ------
    ValueError
        If l < 0 or d < 0.
    """
    if l < 0 or d < 0:
        raise ValueError(f"annihilation_sum requires l, d >= 0, got l={l}, d={d}")
    return sum(
        (-1) ** j * math.comb(d + 1, j) * (j + 1) ** l for j in range(d + 2)
    )


class ComplexPoly:
    """Dense univariate polynomial with complex coefficients.

    Coefficients are stored in ascending order (coeffs[j] multiplies z**j)
    and trailing zeros are stripped at construction, so ``degree`` reflects
    the true leading term.  The zero polynomial keeps a single zero
    coefficient and reports degree -1.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence):
        cs = list(coeffs)
        if not cs:
            raise ValueError("ComplexPoly needs at least one coefficient")
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    @property
    def degree(self) -> int:
        if len(self.coeffs) == 1 and self.coeffs[0] == 0:
            return -1
        return len(self.coeffs) - 1

    def __call__(self, z):
        # Horner; exact for exact coefficient/argument types.
        acc = self.coeffs[-1]
        for c in reversed(self.coeffs[:-1]):
            acc = acc * z + c
        return acc

    def derivative(self) -> "ComplexPoly":
        if len(self.coeffs) == 1:
            return ComplexPoly([0])
        return ComplexPoly([j * c for j, c in enumerate(self.coeffs)][1:])

    def __repr__(self) -> str:
        return f"ComplexPoly(degree={self.degree})"


def poly_roots(poly: ComplexPoly, ctx: ArithmeticContext) -> list:
    """All complex roots of ``poly`` by Aberth-Ehrlich simultaneous iteration.

    Returns the full root multiset (length = degree) as mpc values sorted by
    real part, then imaginary part.  Exact zero roots are factored out before
    iteration, which also handles pure monomials like z**m instantly.

    Initialization places the starting points on a circle of radius
    max(1, max_j |c_j / c_n|) with a fixed irrational phase offset; no
    randomness, so results are reproducible bit for bit at a given precision.

    Raises
    ------
    RootFindingError
        If the iteration cap is reached before the update norm drops below
        the stopping threshold, or if an accepted root violates
        |p(r)| <= root_tolerance * max|coeff| * max(1, |r|)**degree.
    """
    n = poly.degree
    if n < 0:
        raise RootFindingError("zero polynomial has no well-defined roots")
    if n == 0:
        return []

    # Ten guard digits so the update norm can actually reach the stopping
    # threshold instead of stagnating at the rounding floor.
    with mp.workdps(ctx.precision_digits + 10):
        coeffs = [mp.mpc(c) for c in poly.coeffs]

        # Factor out exact zero roots: they are exact answers and removing
        # them keeps the iteration away from a symmetric stagnation set.
        zero_roots = 0
        while coeffs[0] == 0 and len(coeffs) > 1:
            coeffs.pop(0)
            zero_roots += 1
        roots = [mp.mpc(0)] * zero_roots

        m = len(coeffs) - 1
        if m > 0:
            p = ComplexPoly(coeffs)
            dp = p.derivative()
            lead = abs(coeffs[-1])
            radius = max(mp.mpf(1), max(abs(c) for c in coeffs[:-1]) / lead)
            # Fixed non-symmetric phase offset; see docstring.
            z = [
                radius * mp.expjpi(mp.mpf(2 * k) / m + mp.mpf("0.3779"))
                for k in range(m)
            ]
            stop = mp.mpf(10) ** (-(ctx.precision_digits + 5))
            maxiter = 200 + 15 * ctx.precision_digits
            history = []
            for _ in range(maxiter):
                shift = mp.mpf(0)
                for i in range(m):
                    pz = p(z[i])
                    dpz = dp(z[i])
                    if dpz == 0:
                        # Degenerate point; nudge off and retry next sweep.
                        z[i] = z[i] + mp.mpf("1e-3") * (1 + abs(z[i]))
                        shift = mp.inf
                        continue
                    ratio = pz / dpz
                    s = mp.mpc(0)
                    for j in range(m):
                        if j != i:
                            s += 1 / (z[i] - z[j])
                    denom = 1 - ratio * s
                    w = ratio if denom == 0 else ratio / denom
                    z[i] = z[i] - w
                    shift = max(shift, abs(w) / max(mp.mpf(1), abs(z[i])))
                if shift < stop:
                    break
                # A root of multiplicity q stalls the update norm at the
                # eps^(1/q) noise floor, above `stop` forever.  Accept a
                # stalled cluster once progress flattens out; the residual
                # bound below stays the actual acceptance gate.
                history.append(shift)
                if (
                    len(history) >= 24
                    and shift < mp.mpf("1e-6")
                    and min(history[-12:]) >= mp.mpf("0.5") * min(history[-24:-12])
                ):
                    break
            else:
                raise RootFindingError(
                    f"no convergence after {maxiter} iterations (degree {m})"
                )
            roots.extend(z)

        scale = max(abs(c) for c in coeffs) if m > 0 else mp.mpf(1)
        tol = ctx.root_tol()
        full = ComplexPoly([mp.mpc(c) for c in poly.coeffs])
        for r in roots:
            bound = tol * scale * max(mp.mpf(1), abs(r)) ** n
            if abs(full(r)) > bound:
                raise RootFindingError(
                    f"root residual {mp.nstr(abs(full(r)), 8)} exceeds bound "
                    f"{mp.nstr(bound, 8)}"
                )
        roots.sort(key=lambda r: (r.real, r.imag))
        return roots


@lru_cache(maxsize=32)
def _unit_vandermonde_inverse(d: int) -> tuple:
    """Exact inverse of the step-1 power matrix [ (j+1)**l ]_{j,l=0..d}.

    Returned as (numerators, denominators): integer matrix plus one positive
    integer denominator per row, so applying the inverse costs a single
    exact integer division per unknown.
    """
    size = d + 1
    # Gauss-Jordan over Fraction; the matrix is tiny (d <= ~13 in practice).
    a = [
        [Fraction((j + 1) ** l) for l in range(size)] +
        [Fraction(int(i == j)) for i in range(size)]
        for j in range(size)
    ]
    for col in range(size):
        piv = next(r for r in range(col, size) if a[r][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        inv = a[col][col]
        a[col] = [x / inv for x in a[col]]
        for r in range(size):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    nums = []
    dens = []
    for r in range(size):
        row = a[r][size:]
        den = math.lcm(*(f.denominator for f in row))
        nums.append(tuple(f.numerator * (den // f.denominator) for f in row))
        dens.append(den)
    return tuple(nums), tuple(dens)


@dataclass(frozen=True)
class ScaledVandermonde:
    """Vandermonde system on the decimated nodes (j+1)*base, j = 0..d.

    The coefficient matrix V has entries ((j+1)*base)**l.  It factors as
    V1 * diag(base**l) with V1 the integer step-1 matrix, so a solve applies
    the exact integer inverse of V1 (one integer division per unknown) and
    then rescales by base**-l.  Rounding enters only in the final
    integer-times-complex accumulation.
    """

    d: int
    base: int

    def __post_init__(self) -> None:
        if self.d < 0:
            raise ValueError(f"order must be >= 0, got {self.d}")
        if self.base < 1:
            raise ValueError(f"base must be >= 1, got {self.base}")

    def node(self, j: int) -> int:
        if not 0 <= j <= self.d:
            raise ValueError(f"node index {j} outside 0..{self.d}")
        return (j + 1) * self.base

    def solve(self, rhs: Sequence, ctx: ArithmeticContext) -> list:
        """Solve V x = rhs for complex rhs; returns list of mpc, length d+1."""
        if len(rhs) != self.d + 1:
            raise ValueError(
                f"rhs length {len(rhs)} != {self.d + 1} (order {self.d})"
            )
        nums, dens = _unit_vandermonde_inverse(self.d)
        with ctx.workprec():
            b = [mp.mpc(v) for v in rhs]
            out = []
            for l in range(self.d + 1):
                acc = mp.mpc(0)
                for j in range(self.d + 1):
                    c = nums[l][j]
                    if c:
                        acc += c * b[j]
                acc = acc / dens[l]
                if l and self.base != 1:
                    acc = acc / mp.mpf(self.base) ** l
                out.append(acc)
            return out


def vandermonde_solve(
    d: int, base: int, rhs: Sequence, ctx: ArithmeticContext
) -> list:
    """Functional form of :meth:`ScaledVandermonde.solve`."""
    return ScaledVandermonde(d, base).solve(rhs, ctx)
