"""Characteristic roots, real-axis stability scans and complex domain sampling.

The method applied to y' = lambda*y obeys y_{n+1} = R1(mu) y_n + R0(mu) y_{n-1}
with mu = h*lambda, so growth is governed by the roots of

    zeta^2 - R1(mu) zeta - R0(mu) = 0.

Any object with a ``char_polys(mu)`` method (a designed pair or a built
method) can be scanned.  Complex-plane work goes through the polynomial
recurrences only; no arccosh branch cuts are involved.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

__all__ = [
    "INSIDE_TOL",
    "CharRoots",
    "ScanResult",
    "DomainSample",
    "char_roots",
    "max_abs_root",
    "real_axis_scan",
    "domain_sample",
    "write_scan_csv",
    "write_domain_csv",
]

# |zeta| <= 1 + INSIDE_TOL counts as stable: boundary points are inside.
INSIDE_TOL = 1e-9


@dataclass(frozen=True)
class CharRoots:
    """Both characteristic roots at a point mu, larger magnitude first."""

    zeta1: complex
    zeta2: complex
    mu: complex


_SPLIT = 134217729.0  # 2^27 + 1, Dekker splitting constant


def _two_prod(a, b):
    """a * b = p + e exactly (Dekker/Veltkamp split)."""
    p = a * b
    c = _SPLIT * a
    ahi = c - (c - a)
    alo = a - ahi
    c = _SPLIT * b
    bhi = c - (c - b)
    blo = b - bhi
    e = ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo
    return p, e


def _two_sum(a, b):
    s = a + b
    t = s - a
    e = (a - (s - t)) + (b - t)
    return s, e


def _compensated_discriminant(r1, r0):
    """r1^2 + 4 r0 without the cancellation of the plain difference.

    Where the roots nearly collide the naive evaluation loses half the
    digits; the compensated products remove the arithmetic error, leaving
    only the inherent rounding of (r1, r0) themselves (which is what limits
    repeated-root resolution to ~sqrt(eps), see real_axis_scan).
    """
    p, ep = _two_prod(r1, r1)
    s, es = _two_sum(p, 4.0 * r0)
    return s + (es + ep)


def _roots(r1, r0):
    """Vectorized stable quadratic solve of zeta^2 - r1 zeta - r0 = 0.

    For real coefficient pairs: a compensated discriminant decides between
    the real-pair and conjugate-pair branches; the larger-magnitude real
    root takes the non-cancelling sign and the partner comes from the root
    product zeta1 * zeta2 = -r0.
    """
    if np.iscomplexobj(r1) or np.iscomplexobj(r0):
        r1 = np.asarray(r1, dtype=complex)
        r0 = np.asarray(r0, dtype=complex)
        sq = np.sqrt(r1 * r1 + 4.0 * r0)
        sign = np.where(np.real(np.conj(r1) * sq) >= 0.0, 1.0, -1.0)
        z1 = 0.5 * (r1 + sign * sq)
        with np.errstate(divide="ignore", invalid="ignore"):
            z2 = np.where(z1 != 0.0, -r0 / np.where(z1 != 0.0, z1, 1.0), 0.0)
        return z1, z2

    r1 = np.asarray(r1, dtype=float)
    r0 = np.asarray(r0, dtype=float)
    disc = _compensated_discriminant(r1, r0)
    sq = np.sqrt(np.abs(disc))
    # Conjugate pair: real part r1/2, imaginary part sqrt(-disc)/2.
    conj_z1 = 0.5 * (r1 + 1j * sq)
    # Real pair: non-cancelling combination, partner via the product.
    big = 0.5 * (r1 + np.where(r1 >= 0.0, sq, -sq))
    with np.errstate(divide="ignore", invalid="ignore"):
        small = np.where(big != 0.0, -r0 / np.where(big != 0.0, big, 1.0), 0.0)
    real_case = disc >= 0.0
    z1 = np.where(real_case, big + 0j, conj_z1)
    z2 = np.where(real_case, small + 0j, np.conj(conj_z1))
    return z1, z2


def char_roots(pair, mu) -> CharRoots:
    """Characteristic roots of ``pair`` (a StabilityPair or TwoStepMethod) at mu."""
    r1, r0 = pair.char_polys(mu)
    z1, z2 = _roots(r1, r0)
    return CharRoots(complex(z1), complex(z2), complex(mu))


def max_abs_root(pair, mu):
    """max(|zeta1|, |zeta2|) at mu (scalar or ndarray)."""
    r1, r0 = pair.char_polys(mu)
    z1, z2 = _roots(r1, r0)
    out = np.maximum(np.abs(z1), np.abs(z2))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ScanResult:
    """Uniform real-axis scan with the measured stable prefix length."""

    mu: np.ndarray
    max_abs_root: np.ndarray
    stable_length: float
    tol: float

    def rows(self):
        return list(zip(self.mu.tolist(), self.max_abs_root.tolist()))


def real_axis_scan(pair, mu_min: float, samples: int, tol: float = INSIDE_TOL) -> ScanResult:
    """Scan mu in [mu_min, 0] and report the contiguous stable prefix from 0.

    The prefix is the largest run of consecutive samples, walking down from
    mu = 0, with max_abs_root <= 1 + tol.  The boundary lies between the last
    inside sample and the first outside one, so the reported length is the
    midpoint of that bracketing cell (at most half a cell off, unbiased).
    When no sample violates the bound the whole scanned range is reported.

    A repeated root sitting exactly on the unit circle (the undamped pair's
    interior touching points, where the domain genuinely pinches to a point)
    can only be resolved to ~sqrt(eps) from rounded coefficients, so a grid
    landing within ~1e-8 of such a point may end the prefix there.  Damped
    pairs keep their interior roots strictly inside the circle and are free
    of the effect.
    """
    if samples < 2:
        raise ValueError(f"samples must be >= 2, got {samples}")
    if not mu_min < 0.0:
        raise ValueError(f"mu_min must be negative, got {mu_min}")
    mu = np.linspace(mu_min, 0.0, samples)
    mar = max_abs_root(pair, mu)
    inside = mar <= 1.0 + tol
    cell = -mu_min / (samples - 1)
    # First violation walking from mu = 0 downwards.
    violations = np.nonzero(~inside[::-1])[0]
    if violations.size == 0:
        length = -float(mu[0])
    elif violations[0] == 0:
        length = 0.0
    else:
        length = -float(mu[samples - violations[0]]) + 0.5 * cell
    return ScanResult(mu=mu, max_abs_root=mar, stable_length=length, tol=tol)


@dataclass(frozen=True)
class DomainSample:
    """Boolean inside/outside mask over a rectangle in the complex mu-plane."""

    re: np.ndarray  # grid abscissae, length = resolution
    im: np.ndarray  # grid ordinates, symmetric about 0, length = resolution
    mask: np.ndarray  # shape (len(im), len(re)), True = inside
    tol: float


def domain_sample(pair, re_min: float, im_max: float, resolution: int,
                  re_max: float | None = None, tol: float = INSIDE_TOL) -> DomainSample:
    """Sample the stability domain on a uniform grid.

    The rectangle spans [re_min, re_max] x [-im_max, im_max]; ``re_max``
    defaults to a small positive margin (4% of |re_min|) so the domain
    boundary near the origin is visible.  Real coefficients make the mask
    exactly symmetric under conjugation.
    """
    if not re_min < 0.0:
        raise ValueError(f"re_min must be negative, got {re_min}")
    if not im_max > 0.0:
        raise ValueError(f"im_max must be positive, got {im_max}")
    if resolution < 16:
        raise ValueError(f"resolution must be >= 16, got {resolution}")
    if re_max is None:
        re_max = 0.04 * abs(re_min)
    re = np.linspace(re_min, re_max, resolution)
    im = np.linspace(-im_max, im_max, resolution)
    grid = re[np.newaxis, :] + 1j * im[:, np.newaxis]
    mar = max_abs_root(pair, grid)
    return DomainSample(re=re, im=im, mask=mar <= 1.0 + tol, tol=tol)


def write_scan_csv(path, scan: ScanResult) -> None:
    """Rows ``mu,max_abs_root`` in ascending mu order."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["mu", "max_abs_root"])
        for mu, mar in zip(scan.mu, scan.max_abs_root):
            writer.writerow([repr(float(mu)), repr(float(mar))])


def write_domain_csv(path, dom: DomainSample) -> None:
    """Rows ``mu_re,mu_im,inside`` (inside as 0/1), im-major order."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["mu_re", "mu_im", "inside"])
        for i, imv in enumerate(dom.im):
            for j, rev in enumerate(dom.re):
                writer.writerow([repr(float(rev)), repr(float(imv)),
                                 int(dom.mask[i, j])])
