"""Reconstruction of a 1D piecewise-smooth function from Fourier data.

The pipeline separates a single interior jump (location + kernel magnitudes
up to order d) from a smooth remainder using only the coefficients
c_k, |k| <= M:

1. scaled moments  mtilde_k = 2pi (ik)^(d+1) c_k;
2. a coarse jump estimate from consecutive top indices at half order
   (conditioning-friendly, accuracy only O(M^-2)-ish, used as a branch hint);
3. full-order localization from decimated indices (j+1)N_1 via the root of
   an annihilation polynomial, with the hint selecting among the N_1
   possible arguments;
4. kernel magnitudes from a scaled Vandermonde system at the same nodes;
5. a residual coefficient vector representing the smooth remainder.

The jump-known variant (anchor fixed, e.g. at -pi for slice rows of a 2D
problem) skips localization and uses d+1 decimated nodes jM_1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from mpmath import mp

from .kernels import v_fourier_coeff, v_kernel
from .model1d import CoeffVector1D
from .numerics import ArithmeticContext, ComplexPoly, poly_roots, vandermonde_solve

__all__ = [
    "BranchAmbiguityError",
    "HalfOrderEstimate",
    "LocalizationError",
    "Moments",
    "Reconstruction1D",
    "ReconstructionError",
    "evaluate",
    "evaluate_complex",
    "full_order_localize",
    "half_order_localize",
    "moments",
    "reconstruct1d",
    "residual_coeffs",
    "solve_magnitudes",
    "solve_magnitudes_known_jump",
]

_I_POW = (1, 1j, -1, -1j)

# A candidate root counts as "near the unit circle" within this band.
_CIRCLE_BAND = 0.5


class ReconstructionError(Exception):
    """Base class for typed reconstruction failures."""


class LocalizationError(ReconstructionError):
    """No usable root near the unit circle, or decimation infeasible."""


class BranchAmbiguityError(LocalizationError):
    """The hint does not single out one N_1-th root branch."""


@dataclass(frozen=True)
class Moments:
    """Scaled moments mtilde_k = 2pi (ik)^(order+1) c_k at chosen indices."""

    order: int
    indices: tuple
    values: tuple

    def value_at(self, k: int):
        return self.values[self.indices.index(k)]


def moments(
    c: CoeffVector1D, indices, order: int, ctx: ArithmeticContext
) -> Moments:
    """Scaled moments of the coefficient vector at the given indices.

    Parameters
    ----------
    c : CoeffVector1D
    indices : iterable of int
        Nonzero frequencies with |k| <= c.M.
    order : int
        Scaling order; the factor is 2pi (ik)^(order+1).

    Raises
    ------
    ValueError
        If any index is 0 (the zero mode carries no jump information and the
        scaling is singular there) or outside the stored band.
    """
    idx = tuple(int(k) for k in indices)
    if any(k == 0 for k in idx):
        raise ValueError("moment index 0 is outside the scaling domain")
    with ctx.workprec():
        two_pi = 2 * mp.pi
        vals = []
        for k in idx:
            ik_pow = mp.mpc(_I_POW[(order + 1) % 4]) * mp.mpf(k) ** (order + 1)
            vals.append(two_pi * ik_pow * mp.mpc(c.c(k)))
        return Moments(order, idx, tuple(vals))


@dataclass(frozen=True)
class HalfOrderEstimate:
    """Coarse jump estimate used as the branch-selection hint."""

    kappa_h: object  # mpc on the unit circle
    xi_h: object  # mpf in [-pi, pi)
    d1: int
    circle_distance: float


def _closest_to_circle(roots):
    """(root, | |root|-1 |) minimizing distance of |root| to 1."""
    best = None
    best_dist = None
    for r in roots:
        dist = abs(abs(r) - 1)
        if best_dist is None or dist < best_dist:
            best, best_dist = r, dist
    return best, best_dist


def half_order_localize(
    c: CoeffVector1D,
    d1: int,
    ctx: ArithmeticContext,
    anchor: Optional[int] = None,
) -> HalfOrderEstimate:
    """Jump location from consecutive indices at reduced order d1.

    Builds the annihilation polynomial
    sum_j (-1)^j C(d1+1, j) mtilde_{k0+j} u^(d1+1-j)
    on the d1+2 consecutive indices starting at k0 (default M - d1 - 1, the
    top of the band) with moments scaled at order d1.  For a model whose
    jump stack has order exactly d1 and no smooth part the true
    kappa = exp(-i xi) is an exact root; in general the estimate carries an
    O(k0^-1) relative moment perturbation and is only a hint.

    Raises
    ------
    LocalizationError
        If the band cannot host the index window, or no root lies within
        0.5 of the unit circle in modulus.
    """
    if d1 < 0:
        raise ValueError(f"d1 must be >= 0, got {d1}")
    k0 = (c.M - d1 - 1) if anchor is None else int(anchor)
    if k0 < 1 or k0 + d1 + 1 > c.M:
        raise LocalizationError(
            f"band M={c.M} cannot host consecutive window at k0={k0}, d1={d1}"
        )
    mom = moments(c, range(k0, k0 + d1 + 2), d1, ctx)
    with ctx.workprec():
        deg = d1 + 1
        coeffs = [mp.mpc(0)] * (deg + 1)
        for j in range(deg + 1):
            sign = -1 if j % 2 else 1
            coeffs[deg - j] = sign * math.comb(deg, j) * mom.values[j]
        roots = poly_roots(ComplexPoly(coeffs), ctx)
        if not roots:
            raise LocalizationError("degenerate annihilation polynomial")
        z, dist = _closest_to_circle(roots)
        if dist > _CIRCLE_BAND:
            raise LocalizationError(
                f"closest root modulus {mp.nstr(abs(z), 6)} outside circle band"
            )
        kappa = z / abs(z)
        xi = -mp.arg(kappa)
        if xi >= mp.pi:  # canonical half-open wrap
            xi -= 2 * mp.pi
        return HalfOrderEstimate(kappa, xi, d1, float(dist))


def full_order_localize(
    c: CoeffVector1D,
    d: int,
    hint: HalfOrderEstimate,
    ctx: ArithmeticContext,
    n1: Optional[int] = None,
):
    """Full-order jump localization from decimated moments.

    Uses indices (j+1)N_1, j = 0..d+1 with N_1 = floor(M / (d+2)) by
    default.  The closest-to-circle root z of the annihilation polynomial
    approximates kappa^(N_1); its N_1-th roots are the candidate branches
    and the hint picks the one with smallest angular distance.

    Returns
    -------
    (kappa_tilde, xi_tilde, diagnostics) with kappa_tilde on the unit
    circle, xi_tilde = -arg(kappa_tilde) in [-pi, pi).

    Raises
    ------
    LocalizationError
        If N_1 < 1 (band too short for the order) or no root is near the
        unit circle.
    BranchAmbiguityError
        If every candidate branch is angularly farther than pi/N_1 from the
        hint.
    """
    if d < 0:
        raise ValueError(f"d must be >= 0, got {d}")
    N1 = n1 if n1 is not None else c.M // (d + 2)
    if N1 < 1:
        raise LocalizationError(
            f"decimation infeasible: M={c.M} < d+2={d + 2}"
        )
    if (d + 2) * N1 > c.M:
        raise LocalizationError(
            f"decimated window (d+2)*N1={(d + 2) * N1} exceeds band M={c.M}"
        )
    mom = moments(c, [(j + 1) * N1 for j in range(d + 2)], d, ctx)
    with ctx.workprec():
        deg = d + 1
        coeffs = [mp.mpc(0)] * (deg + 1)
        for j in range(deg + 1):
            sign = -1 if j % 2 else 1
            coeffs[deg - j] = sign * math.comb(deg, j) * mom.values[j]
        roots = poly_roots(ComplexPoly(coeffs), ctx)
        if not roots:
            raise LocalizationError("degenerate annihilation polynomial")
        z, dist = _closest_to_circle(roots)
        if dist > _CIRCLE_BAND:
            raise LocalizationError(
                f"closest root modulus {mp.nstr(abs(z), 6)} outside circle band"
            )
        theta = mp.arg(z)
        best = None
        best_gap = None
        best_r = -1
        for r in range(N1):
            cand = mp.expj((theta + 2 * mp.pi * r) / N1)
            gap = abs(mp.arg(cand * mp.conj(hint.kappa_h)))
            if best_gap is None or gap < best_gap:
                best, best_gap, best_r = cand, gap, r
        if best_gap > mp.pi / N1:
            raise BranchAmbiguityError(
                f"hint {mp.nstr(hint.xi_h, 6)} does not select a branch "
                f"(best angular gap {mp.nstr(best_gap, 6)} > pi/{N1})"
            )
        xi = -mp.arg(best)
        if xi >= mp.pi:
            xi -= 2 * mp.pi
        diagnostics = {
            "N1": N1,
            "circle_distance": float(dist),
            "branch_index": best_r,
            "branch_gap": float(best_gap),
            "hint_xi": float(hint.xi_h),
        }
        return best, xi, diagnostics


def solve_magnitudes(
    c: CoeffVector1D,
    d: int,
    kappa_tilde,
    ctx: ArithmeticContext,
    n1: int,
):
    """Kernel magnitudes given the localized jump.

    Solves the scaled Vandermonde system on nodes (j+1)N_1, j = 0..d with
    right-hand side mtilde_{(j+1)N_1} * kappa_tilde^(-(j+1)N_1); unknowns
    alpha_l map back to magnitudes via A_l = (-i)^(d-l) alpha_{d-l}.
    Returns a tuple of d+1 mpc values.
    """
    if n1 < 1 or (d + 1) * n1 > c.M:
        raise ValueError(f"invalid decimation step n1={n1} for M={c.M}, d={d}")
    mom = moments(c, [(j + 1) * n1 for j in range(d + 1)], d, ctx)
    with ctx.workprec():
        kap = mp.mpc(kappa_tilde)
        step = kap ** n1
        rhs = []
        power = mp.mpc(1)
        for j in range(d + 1):
            power *= step  # kappa^((j+1) n1)
            rhs.append(mom.values[j] * mp.conj(power) / abs(power) ** 2)
        alpha = vandermonde_solve(d, n1, rhs, ctx)
        mags = []
        for l in range(d + 1):
            mags.append(mp.mpc(_I_POW[(-(d - l)) % 4]) * alpha[d - l])
        return tuple(mags)


def solve_magnitudes_known_jump(
    c: CoeffVector1D,
    d: int,
    known_xi,
    ctx: ArithmeticContext,
    m1: Optional[int] = None,
):
    """Magnitudes when the jump location is known a priori.

    Decimates at M_1 = floor(M / (d+1)) (indices jM_1, j = 1..d+1); with
    kappa = exp(-i xi) known, the system right-hand side is
    mtilde_{jM_1} kappa^(-jM_1).  Returns (magnitudes, M_1).
    """
    M1 = m1 if m1 is not None else c.M // (d + 1)
    if M1 < 1 or (d + 1) * M1 > c.M:
        raise LocalizationError(
            f"known-jump decimation infeasible: M={c.M}, d={d}, M1={M1}"
        )
    mom = moments(c, [(j + 1) * M1 for j in range(d + 1)], d, ctx)
    with ctx.workprec():
        kap = mp.expj(-mp.mpf(known_xi))
        step = kap ** M1
        rhs = []
        power = mp.mpc(1)
        for j in range(d + 1):
            power *= step
            rhs.append(mom.values[j] * mp.conj(power) / abs(power) ** 2)
        alpha = vandermonde_solve(d, M1, rhs, ctx)
        mags = []
        for l in range(d + 1):
            mags.append(mp.mpc(_I_POW[(-(d - l)) % 4]) * alpha[d - l])
        return tuple(mags), M1


def residual_coeffs(
    c: CoeffVector1D,
    xi_tilde,
    magnitudes_tilde,
    ctx: ArithmeticContext,
) -> CoeffVector1D:
    """Coefficients of the smooth remainder: c_k minus the jump-part closed form.

    The jump part of c_k is exp(-ik xi) / 2pi * sum_l A_l / (ik)^(l+1);
    computed with one phase evaluation per frequency and an iterated
    division cascade over l (same closed form as v_fourier_coeff).
    """
    with ctx.workprec():
        xi = mp.mpf(xi_tilde)
        mags = [mp.mpc(a) for a in magnitudes_tilde]
        two_pi = 2 * mp.pi
        vals = []
        for k in range(-c.M, c.M + 1):
            ck = mp.mpc(c.c(k))
            if k != 0:
                inv_ik = mp.mpc(0, -1) / k  # 1/(ik)
                running = mp.expj(-k * xi) / two_pi
                phi = mp.mpc(0)
                for a in mags:
                    running *= inv_ik
                    if a != 0:
                        phi += a * running
                ck -= phi
            vals.append(ck)
        return CoeffVector1D(c.M, tuple(vals))


@dataclass(frozen=True)
class Reconstruction1D:
    """Immutable result of a 1D reconstruction.

    ``magnitudes_tilde`` are mpc (near-real for real input data);
    ``residual`` is the smooth-part coefficient vector; ``diagnostics`` is a
    JSON-friendly dict (floats/ints/strings only).
    """

    xi_tilde: object
    magnitudes_tilde: tuple
    residual: CoeffVector1D
    d: int
    known_jump: bool
    diagnostics: dict = field(compare=False, default_factory=dict)


def evaluate_complex(rec: Reconstruction1D, x, ctx: ArithmeticContext):
    """Reconstructed value at x: residual series plus recovered kernel stack."""
    with ctx.workprec():
        xm = mp.mpf(x)
        e = mp.expj(xm)
        # residual series sum_{|k|<=M} r_k e^{ikx} by iterated powers
        M = rec.residual.M
        acc = mp.mpc(0)
        power = mp.expj(-M * xm)
        for k in range(-M, M + 1):
            acc += mp.mpc(rec.residual.c(k)) * power
            power *= e
        for l, a in enumerate(rec.magnitudes_tilde):
            am = mp.mpc(a)
            if am != 0:
                acc += am * v_kernel(l, rec.xi_tilde, xm, ctx)
        return acc


def evaluate(rec: Reconstruction1D, x, ctx: ArithmeticContext):
    """Real part of the reconstructed value (models are real)."""
    return evaluate_complex(rec, x, ctx).real


def reconstruct1d(
    c: CoeffVector1D,
    d: int,
    ctx: ArithmeticContext,
    known_jump=None,
    d1: Optional[int] = None,
    assume_real: bool = True,
) -> Reconstruction1D:
    """One-call pipeline: localize (unless known), solve magnitudes, residual.

    Parameters
    ----------
    c : CoeffVector1D
    d : int
        Reconstruction order (kernel stack height - 1).
    known_jump : optional
        If given, the jump location is taken as known (no localization);
        pass a value constructed at working precision when exactness at the
        anchor matters.
    d1 : optional int
        Half-order for the hint stage; defaults to floor(d/2).
    assume_real : bool
        When True, an imaginary-residue probe is recorded in diagnostics.

    Raises
    ------
    LocalizationError, BranchAmbiguityError
        Propagated from the localization stages.
    """
    if d < 0:
        raise ValueError(f"d must be >= 0, got {d}")
    with ctx.workprec():
        if known_jump is not None:
            mags, M1 = solve_magnitudes_known_jump(c, d, known_jump, ctx)
            xi = mp.mpf(known_jump)
            diagnostics = {"stage": "known-jump", "M1": M1, "d": d}
        else:
            d1_eff = d1 if d1 is not None else d // 2
            hint = half_order_localize(c, d1_eff, ctx)
            kappa, xi, loc_diag = full_order_localize(c, d, hint, ctx)
            mags = solve_magnitudes(c, d, kappa, ctx, loc_diag["N1"])
            diagnostics = {"stage": "full", "d": d, "d1": d1_eff, **loc_diag}
        res = residual_coeffs(c, xi, mags, ctx)
        rec = Reconstruction1D(
            xi_tilde=xi,
            magnitudes_tilde=mags,
            residual=res,
            d=d,
            known_jump=known_jump is not None,
            diagnostics=diagnostics,
        )
        if assume_real:
            imag_max = mp.mpf(0)
            for q in range(8):
                v = evaluate_complex(rec, -mp.pi + mp.pi * q / 4, ctx)
                imag_max = max(imag_max, abs(v.imag))
            diagnostics["imag_residue"] = float(imag_max)
        return rec
