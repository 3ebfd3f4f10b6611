"""2D piecewise-smooth models with a jump curve, and their Fourier grids.

A model is F(x, y) = sum_l A_l(x) K_l(y - xi(x)) + G(x, y): a stack of
periodized Bernoulli kernels of orders 0..d_model attached to a curve
y = xi(x), with x-dependent magnitude profiles and an optional smooth
separable background.  The canonical synthetic instance uses the identity
curve and unit constant profiles.

Grid synthesis is exact (closed form) for the identity curve; trig-poly
curves go through a periodic trapezoid rule in x with a doubling check.
A slow 2D quadrature oracle provides independent verification values.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from mpmath import mp

from .kernels import kernel_scale, u_kernel
from .model1d import CoeffVector1D, TrigBackground, _GL32
from .numerics import ArithmeticContext

__all__ = [
    "Background2D",
    "CoeffGrid2D",
    "Curve",
    "Model2D",
    "coeff_grid",
    "eval2d",
    "load_grid",
    "quadrature2d_oracle",
    "save_grid",
    "slice_coeff_exact",
]

_I_POW = (1, 1j, -1, -1j)

Profile = Union[int, float, str, TrigBackground]


@dataclass(frozen=True)
class Curve:
    """Jump curve y = xi(x): the identity map or a real trig polynomial.

    For kind "trig", ``coeffs[k]`` holds b_k for k = 0..K with conjugate
    symmetry implied (b_0 real), matching TrigBackground storage.
    """

    kind: str
    coeffs: tuple = ()

    def __post_init__(self) -> None:
        if self.kind not in ("identity", "trig"):
            raise ValueError(f"unknown curve kind {self.kind!r}")
        object.__setattr__(self, "coeffs", tuple(self.coeffs))
        if self.kind == "identity" and self.coeffs:
            raise ValueError("identity curve takes no coefficients")
        if self.kind == "trig" and not self.coeffs:
            raise ValueError("trig curve needs coefficients (b_0 at least)")

    def xi(self, x, ctx: ArithmeticContext):
        """Curve value at x (not wrapped)."""
        with ctx.workprec():
            if self.kind == "identity":
                return mp.mpf(x)
            acc = mp.mpc(self.coeffs[0]).real + mp.mpf(0)
            for k in range(1, len(self.coeffs)):
                acc += 2 * (mp.mpc(self.coeffs[k]) * mp.expj(k * mp.mpf(x))).real
            return acc

    def slope_bound(self) -> float:
        """Cheap upper bound on sup |xi'|."""
        if self.kind == "identity":
            return 1.0
        return sum(
            2 * k * abs(complex(c)) for k, c in enumerate(self.coeffs)
        )


@dataclass(frozen=True)
class Background2D:
    """Separable-sum real trig polynomial G(x, y) = sum_s P_s(x) Q_s(y)."""

    terms: tuple  # tuple of (TrigBackground, TrigBackground)

    def __post_init__(self) -> None:
        object.__setattr__(self, "terms", tuple(self.terms))
        for p, q in self.terms:
            if not isinstance(p, TrigBackground) or not isinstance(
                q, TrigBackground
            ):
                raise TypeError("Background2D terms must be TrigBackground pairs")

    def eval(self, x, y, ctx: ArithmeticContext):
        with ctx.workprec():
            acc = mp.mpf(0)
            for p, q in self.terms:
                acc += p.eval(x, ctx) * q.eval(y, ctx)
            return acc

    def coeff2d(self, wx: int, wy: int):
        """Exact 2D Fourier coefficient (caller holds precision)."""
        acc = mp.mpc(0)
        for p, q in self.terms:
            acc += p.coeff(wx) * q.coeff(wy)
        return acc

    def slice_row(self, x, wy: int, ctx: ArithmeticContext):
        """wy-th Fourier coefficient in y of the slice G(x, .)."""
        acc = mp.mpc(0)
        for p, q in self.terms:
            acc += p.eval(x, ctx) * q.coeff(wy)
        return acc


@dataclass(frozen=True)
class Model2D:
    """Kernel stack on a curve plus optional separable background.

    ``magnitudes[l]`` is the profile A_l(x): a real constant or a
    TrigBackground used as a real trig polynomial of x.
    """

    d_model: int
    magnitudes: tuple
    curve: Curve
    background: Optional[Background2D] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "magnitudes", tuple(self.magnitudes))
        if len(self.magnitudes) != self.d_model + 1:
            raise ValueError(
                f"need {self.d_model + 1} profiles for d_model={self.d_model}, "
                f"got {len(self.magnitudes)}"
            )

    @classmethod
    def canonical(cls, d_model: int = 11) -> "Model2D":
        """Canonical synthetic instance: identity curve, all-ones profiles."""
        return cls(
            d_model=d_model,
            magnitudes=(1,) * (d_model + 1),
            curve=Curve("identity"),
            background=None,
        )

    def magnitude_value(self, l: int, x, ctx: ArithmeticContext):
        prof = self.magnitudes[l]
        if isinstance(prof, TrigBackground):
            return prof.eval(x, ctx)
        with ctx.workprec():
            return mp.mpf(prof)

    def magnitude_coeff(self, l: int, q: int):
        """Fourier coefficient of profile A_l at frequency q (caller prec)."""
        prof = self.magnitudes[l]
        if isinstance(prof, TrigBackground):
            return prof.coeff(q)
        return mp.mpc(prof) if q == 0 else mp.mpc(0)


@dataclass(frozen=True, eq=False)
class CoeffGrid2D:
    """Fourier grid Fhat(wx, wy) for |wx| <= M, |wy| <= N.

    ``values[wx + M][wy + N]`` stores the coefficient; ``row(wy)`` exposes
    one horizontal row as a CoeffVector1D over wx, which is exactly the
    input the slice-row reconstruction stage consumes.

    eq=False keeps identity semantics: grids are large and are compared
    entry-wise in tests, while identity hashing lets evaluation caches key
    off the object cheaply.
    """

    M: int
    N: int
    values: tuple
    diagnostics: dict = field(compare=False, default_factory=dict)

    def __post_init__(self) -> None:
        if self.M < 0 or self.N < 0:
            raise ValueError("M and N must be >= 0")
        object.__setattr__(
            self, "values", tuple(tuple(col) for col in self.values)
        )
        if len(self.values) != 2 * self.M + 1 or any(
            len(col) != 2 * self.N + 1 for col in self.values
        ):
            raise ValueError("grid shape does not match M, N")

    def c(self, wx: int, wy: int):
        if abs(wx) > self.M or abs(wy) > self.N:
            raise ValueError(f"({wx}, {wy}) outside grid ({self.M}, {self.N})")
        return self.values[wx + self.M][wy + self.N]

    def row(self, wy: int) -> CoeffVector1D:
        vals = tuple(self.values[i][wy + self.N] for i in range(2 * self.M + 1))
        return CoeffVector1D(self.M, vals)


def eval2d(m: Model2D, x, y, ctx: ArithmeticContext):
    """Pointwise model value (right-continuous across the curve in y)."""
    with ctx.workprec():
        xm = mp.mpf(x)
        offset = mp.mpf(y) - m.curve.xi(xm, ctx)
        acc = mp.mpf(0)
        for l in range(m.d_model + 1):
            a = m.magnitude_value(l, xm, ctx)
            if a != 0:
                scale = kernel_scale(l, ctx.precision_digits)
                acc += a * scale * u_kernel(l, offset, ctx)
        if m.background is not None:
            acc += m.background.eval(xm, mp.mpf(y), ctx)
        return acc


def slice_coeff_exact(m: Model2D, x, wy: int, ctx: ArithmeticContext):
    """wy-th Fourier coefficient (in y) of the slice F(x, .), closed form.

    For wy != 0 the kernel stack contributes
    exp(-i wy xi(x)) / 2pi * sum_l A_l(x) / (i wy)^(l+1); the zero mode
    carries only the background (the kernels are zero-mean in y).
    """
    with ctx.workprec():
        xm = mp.mpf(x)
        acc = mp.mpc(0)
        if wy != 0:
            s = mp.mpc(0)
            for l in range(m.d_model + 1):
                a = m.magnitude_value(l, xm, ctx)
                if a != 0:
                    denom = mp.mpc(_I_POW[(l + 1) % 4]) * mp.mpf(wy) ** (l + 1)
                    s += a / denom
            acc += mp.expj(-wy * m.curve.xi(xm, ctx)) * s / (2 * mp.pi)
        if m.background is not None:
            acc += m.background.slice_row(xm, wy, ctx)
        return acc


def _closed_form_grid(m: Model2D, M: int, N: int, ctx: ArithmeticContext):
    """Exact grid for the identity curve: profile spectra shifted to the
    anti-diagonal band."""
    with ctx.workprec():
        cols = []
        for wx in range(-M, M + 1):
            col = []
            for wy in range(-N, N + 1):
                c = mp.mpc(0)
                if wy != 0:
                    q = wx + wy
                    for l in range(m.d_model + 1):
                        a_hat = m.magnitude_coeff(l, q)
                        if a_hat != 0:
                            denom = (
                                mp.mpc(_I_POW[(l + 1) % 4])
                                * mp.mpf(wy) ** (l + 1)
                            )
                            c += a_hat / denom
                    c /= 2 * mp.pi
                if m.background is not None:
                    c += m.background.coeff2d(wx, wy)
                col.append(c)
            cols.append(tuple(col))
        return cols


def _trapezoid_grid(
    m: Model2D, M: int, N: int, ctx: ArithmeticContext, nodes: Optional[int]
):
    """Periodic trapezoid in x of the exact slice coefficients.

    The integrand is a trig polynomial in y already; in x it is analytic
    and periodic, so the trapezoid rule converges geometrically.  Node
    count defaults to 8 * max(M, ceil(N * max(1, sup|xi'|))).
    """
    slope = max(1.0, m.curve.slope_bound())
    T = nodes if nodes is not None else 8 * max(M, math.ceil(N * slope), 1)
    with ctx.workprec():
        two_pi = 2 * mp.pi
        xs = [-mp.pi + two_pi * t / T for t in range(T)]
        # slice values v[t][wy + N], then an explicit DFT over x
        v = []
        for x in xs:
            v.append([slice_coeff_exact(m, x, wy, ctx) for wy in range(-N, N + 1)])
        cols = []
        for wx in range(-M, M + 1):
            col = [mp.mpc(0)] * (2 * N + 1)
            for t, x in enumerate(xs):
                ph = mp.expj(-wx * x)
                row = v[t]
                for iy in range(2 * N + 1):
                    col[iy] += row[iy] * ph
            cols.append(tuple(c / T for c in col))
        return cols


def coeff_grid(
    m: Model2D,
    M: int,
    N: int,
    ctx: ArithmeticContext,
    nodes: Optional[int] = None,
    check_probes: int = 4,
) -> CoeffGrid2D:
    """Fourier grid of the model, |wx| <= M, |wy| <= N.

    Identity-curve models synthesize in closed form.  Trig-curve models use
    the periodic trapezoid rule; `check_probes` entries are recomputed at
    doubled node count and the worst deviation is recorded under
    diagnostics["doubling_error"].
    """
    if M < 0 or N < 0:
        raise ValueError("M and N must be >= 0")
    if m.curve.kind == "identity":
        values = _closed_form_grid(m, M, N, ctx)
        return CoeffGrid2D(M, N, tuple(values), {"method": "closed-form"})
    values = _trapezoid_grid(m, M, N, ctx, nodes)
    diag = {"method": "trapezoid"}
    if check_probes > 0:
        slope = max(1.0, m.curve.slope_bound())
        T = nodes if nodes is not None else 8 * max(M, math.ceil(N * slope), 1)
        probes = [
            (M, N),
            (max(-M, -3), max(-N, -1)),
            (min(M, 1), min(N, 1)),
            (0, min(N, 2)),
        ][: check_probes]
        dense = _trapezoid_grid(m, M, N, ctx, 2 * T)
        with ctx.workprec():
            worst = mp.mpf(0)
            for wx, wy in probes:
                a = values[wx + M][wy + N]
                b = dense[wx + M][wy + N]
                worst = max(worst, abs(a - b))
            diag["doubling_error"] = float(worst)
    return CoeffGrid2D(M, N, tuple(values), diag)


_ORACLE_CACHE: dict = {}


def _oracle_nodes(m: Model2D, ctx: ArithmeticContext, nodes: int):
    """Cached 2D quadrature nodes/weights/values with a y-split at the curve."""
    key = (m, nodes, ctx.precision_digits)
    hit = _ORACLE_CACHE.get(key)
    if hit is not None:
        return hit
    t32, w32 = _GL32
    with ctx.workprec():
        pi = mp.pi
        x_panels = max(1, nodes // 32)
        hx = 2 * pi / x_panels
        entries = []
        for px in range(x_panels):
            for ti, wi in zip(t32, w32):
                x = -pi + px * hx + hx / 2 * (1 + mp.mpf(ti))
                wx_weight = mp.mpf(wi) * hx / 2
                xi = m.curve.xi(x, ctx)
                # wrap the split point into the base period
                xi = xi - 2 * pi * mp.floor((xi + pi) / (2 * pi))
                inner = []
                segs = [(-pi, xi), (xi, pi)] if -pi < xi < pi else [(-pi, pi)]
                for lo, hi in segs:
                    frac = float((hi - lo) / (2 * pi))
                    y_panels = max(1, round(nodes * frac / 32))
                    hy = (hi - lo) / y_panels
                    for py in range(y_panels):
                        for tj, wj in zip(t32, w32):
                            y = lo + py * hy + hy / 2 * (1 + mp.mpf(tj))
                            wy_weight = mp.mpf(wj) * hy / 2
                            inner.append((y, wy_weight, eval2d(m, x, y, ctx)))
                entries.append((x, wx_weight, inner))
    out = (entries, {})
    _ORACLE_CACHE[key] = out
    return out


def quadrature2d_oracle(
    m: Model2D, wx: int, wy: int, ctx: ArithmeticContext, nodes: int = 512
):
    """Independent double integral for one grid entry.

    Gauss-Legendre panels on both axes with the y-range split at the curve,
    ~`nodes` points per axis (>= 512).  Model values are cached per
    (model, nodes, precision), and inner y-sums are cached per wy, so
    verifying a batch of entries costs one model sweep plus cheap sums.
    """
    if nodes < 512:
        raise ValueError(f"nodes must be >= 512, got {nodes}")
    entries, inner_cache = _oracle_nodes(m, ctx, nodes)
    with ctx.workprec():
        key = wy
        sums = inner_cache.get(key)
        if sums is None:
            sums = [
                sum(
                    (wyw * fv * mp.expj(-wy * y) for y, wyw, fv in inner),
                    mp.mpc(0),
                )
                for _, _, inner in entries
            ]
            inner_cache[key] = sums
        total = mp.mpc(0)
        for (x, wxw, _), s in zip(entries, sums):
            total += wxw * s * mp.expj(-wx * x)
        return total / (4 * mp.pi ** 2)


def save_grid(grid: CoeffGrid2D, path, precision_digits: int) -> None:
    """Write a grid file: one JSON header line, then CSV rows
    "omega_x, omega_y, re, im" with full-precision decimal strings."""
    with mp.workdps(precision_digits):
        with open(path, "w") as fh:
            header = {
                "M": grid.M,
                "N": grid.N,
                "precision": precision_digits,
            }
            fh.write(json.dumps(header) + "\n")
            for wx in range(-grid.M, grid.M + 1):
                for wy in range(-grid.N, grid.N + 1):
                    v = grid.c(wx, wy)
                    re = mp.nstr(mp.mpf(v.real), precision_digits, strip_zeros=False)
                    im = mp.nstr(mp.mpf(v.imag), precision_digits, strip_zeros=False)
                    fh.write(f"{wx}, {wy}, {re}, {im}\n")


def load_grid(path) -> CoeffGrid2D:
    """Read a grid file written by :func:`save_grid`."""
    with open(path) as fh:
        header = json.loads(fh.readline())
        M, N, prec = header["M"], header["N"], header["precision"]
        with mp.workdps(prec):
            vals = [
                [mp.mpc(0)] * (2 * N + 1) for _ in range(2 * M + 1)
            ]
            for line in fh:
                if not line.strip():
                    continue
                swx, swy, sre, sim = (s.strip() for s in line.split(","))
                vals[int(swx) + M][int(swy) + N] = mp.mpc(
                    mp.mpf(sre), mp.mpf(sim)
                )
        return CoeffGrid2D(M, N, tuple(tuple(col) for col in vals),
                           {"precision": prec})
