"""Synthetic 1D piecewise-smooth models and their Fourier coefficients.

A model is one interior jump point carrying a finite stack of jump-kernel
magnitudes, plus an optional bandlimited smooth background.  Coefficients
are synthesized in closed form; an independent jump-split quadrature oracle
exists so closed forms are never tested against themselves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from mpmath import mp

from .kernels import v_fourier_coeff, v_kernel
from .numerics import ArithmeticContext

__all__ = [
    "CoeffVector1D",
    "JumpModel1D",
    "TrigBackground",
    "eval_model",
    "quadrature_oracle",
    "synth_coeffs",
]


@dataclass(frozen=True)
class TrigBackground:
    """Real trig polynomial stored by its nonnegative-frequency coefficients.

    ``coeffs[k]`` is the Fourier coefficient g_k for k = 0..K_g; negative
    frequencies are implied by conjugate symmetry (the function is real).
    g_0 must be real.  Coefficient values may be any numeric type mpmath can
    convert, including strings for high-precision constants.
    """

    coeffs: tuple

    def __post_init__(self) -> None:
        if not self.coeffs:
            raise ValueError("TrigBackground needs at least g_0")
        object.__setattr__(self, "coeffs", tuple(self.coeffs))
        g0 = complex(mp.mpc(self.coeffs[0]))
        if g0.imag != 0:
            raise ValueError(f"g_0 must be real, got {self.coeffs[0]}")

    @property
    def bandwidth(self) -> int:
        return len(self.coeffs) - 1

    def coeff(self, k: int):
        """g_k for any integer k (0 outside the band).  mpc under caller prec."""
        a = abs(k)
        if a > self.bandwidth:
            return mp.mpc(0)
        g = mp.mpc(self.coeffs[a])
        return mp.conj(g) if k < 0 else g

    def eval(self, x, ctx: ArithmeticContext):
        """Pointwise value; real by construction."""
        with ctx.workprec():
            xm = mp.mpf(x)
            acc = mp.mpc(self.coeffs[0]).real + mp.mpf(0)
            for k in range(1, len(self.coeffs)):
                acc += 2 * (mp.mpc(self.coeffs[k]) * mp.expj(k * xm)).real
            return acc


@dataclass(frozen=True)
class JumpModel1D:
    """One jump at xi in [-pi, pi) with kernel magnitudes A_0..A_d.

    ``magnitudes`` may be empty for a smooth-only model (useful for oracle
    cross-checks); magnitudes are real.  ``smooth`` is an optional
    TrigBackground.
    """

    xi: float
    magnitudes: tuple
    smooth: Optional[TrigBackground] = None

    def __post_init__(self) -> None:
        if not -math.pi <= float(self.xi) < math.pi:
            raise ValueError(f"jump location {self.xi} outside [-pi, pi)")
        object.__setattr__(self, "magnitudes", tuple(self.magnitudes))

    @property
    def d(self) -> int:
        """Highest kernel order present (-1 for smooth-only)."""
        return len(self.magnitudes) - 1


@dataclass(frozen=True)
class CoeffVector1D:
    """Fourier coefficients c_k for |k| <= M, stored k = -M..M."""

    M: int
    values: tuple

    def __post_init__(self) -> None:
        if self.M < 0:
            raise ValueError(f"M must be >= 0, got {self.M}")
        object.__setattr__(self, "values", tuple(self.values))
        if len(self.values) != 2 * self.M + 1:
            raise ValueError(
                f"expected {2 * self.M + 1} values for M={self.M}, "
                f"got {len(self.values)}"
            )

    def c(self, k: int):
        if abs(k) > self.M:
            raise ValueError(f"|k|={abs(k)} exceeds M={self.M}")
        return self.values[k + self.M]


def eval_model(m: JumpModel1D, x, ctx: ArithmeticContext):
    """Pointwise model value (right-continuous at the jump).  Real mpf."""
    with ctx.workprec():
        acc = mp.mpf(0)
        if m.smooth is not None:
            acc += m.smooth.eval(x, ctx)
        for l, a in enumerate(m.magnitudes):
            if a != 0:
                acc += mp.mpf(a) * v_kernel(l, m.xi, x, ctx)
        return acc


def synth_coeffs(m: JumpModel1D, M: int, ctx: ArithmeticContext) -> CoeffVector1D:
    """Closed-form coefficients for |k| <= M.

    Negative frequencies are mirrored by conjugation from the positive ones,
    so the stored vector is exactly conjugate-symmetric (the model is real).
    """
    if M < 0:
        raise ValueError(f"M must be >= 0, got {M}")
    with ctx.workprec():
        pos = []
        for k in range(M + 1):
            c = mp.mpc(0)
            if m.smooth is not None:
                c += m.smooth.coeff(k)
            if k != 0:
                for l, a in enumerate(m.magnitudes):
                    if a != 0:
                        c += mp.mpf(a) * v_fourier_coeff(l, m.xi, k, ctx)
            else:
                # kernels are zero-mean, so c_0 is the background mean (real)
                c = mp.mpc(c.real)
            pos.append(c)
        vals = [mp.conj(pos[-k]) for k in range(-M, 0)] + pos
        return CoeffVector1D(M, tuple(vals))


_GL32 = np.polynomial.legendre.leggauss(32)


def _composite_gl(f, a, b, nodes: int):
    """Composite 32-point Gauss-Legendre of f over [a, b] under caller prec."""
    panels = max(1, math.ceil(nodes / 32))
    t, w = _GL32
    a = mp.mpf(a)
    b = mp.mpf(b)
    h = (b - a) / panels
    half = h / 2
    acc = mp.mpc(0)
    for p in range(panels):
        mid = a + p * h + half
        for ti, wi in zip(t, w):
            acc += mp.mpf(wi) * f(mid + half * mp.mpf(ti))
    return acc * half


def quadrature_oracle(
    m: JumpModel1D, k: int, ctx: ArithmeticContext, nodes: int = 1024
):
    """Independent (1/2pi) integral of f(x) exp(-ikx) over one period.

    Splits the period at the jump so each segment is smooth, then applies
    composite 32-point Gauss-Legendre with roughly `nodes` points total
    (at least 1024).  Float64 node locations; accuracy ~1e-14, far beyond
    the 1e-8/1e-10 oracle tolerances this backs.
    """
    if nodes < 1024:
        raise ValueError(f"nodes must be >= 1024, got {nodes}")
    with ctx.workprec():
        xi = mp.mpf(m.xi)
        pi = mp.pi

        def g(x):
            return eval_model(m, x, ctx) * mp.expj(-k * x)

        segs = [(-pi, xi), (xi, pi)] if -pi < xi else [(-pi, pi)]
        total = mp.mpc(0)
        for lo, hi in segs:
            if hi > lo:
                frac = float((hi - lo) / (2 * pi))
                total += _composite_gl(g, lo, hi, max(32, round(nodes * frac)))
        return total / (2 * pi)
