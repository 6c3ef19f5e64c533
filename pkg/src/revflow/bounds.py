r"""A-priori radii and the small-volume criterion.

From the warp functions define the increasing radial antiderivatives

    beta(r)  = int_0^r f(s) h(s)^(n-1) ds
    delta(r) = int_0^r h(s)^(n-1) ds.

For a revolution graph over an axial slab [a, b] enclosing volume V with
lateral n-volume A, the reference radii are

    r1 = beta^-1( V / ((b-a) sigma) )     radius of the volume-matching cylinder
    r2 = delta^-1( A / sigma + delta(r1) )  a-priori upper bound on max r
    r3 = beta^-1( V / (2 (b-a) sigma) )   half-volume radius, 0 < r3 < r1 < r2

with sigma the volume of the unit (n-1)-sphere.  The small-volume criterion
A <= (V/(b-a)) * delta(r1)/beta(r1) is sufficient for global existence of
the flow and convergence to a constant-mean-curvature limit; for f == 1 the
threshold reduces to V/(b-a), and for n = 2 in constant curvature lam it has
the closed form (2 pi / -lam) (-1 + sqrt(1 - lam V / (pi (b-a)))).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "BoundsReport",
    "unit_sphere_area",
    "beta",
    "delta",
    "invert_increasing",
    "compute_bounds",
]


def unit_sphere_area(n: int) -> float:
    """Volume of the unit (n-1)-sphere: 2 pi^(n/2) / Gamma(n/2)."""
    if int(n) != n or n < 2:
        raise ValueError("n must be an integer >= 2")
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def _simpson_from_zero(g, upper, rel_tol):
    """Integrate g from 0 to each entry of ``upper`` by composite Simpson.

    The subinterval count doubles (reusing all previous evaluations) until
    the standard Simpson error estimate |S_2N - S_N| / 15 is below
    ``rel_tol`` relative for every integral.  All upper limits are handled
    in one vectorized pass on a shared normalized grid.
    """
    u = np.atleast_1d(np.asarray(upper, dtype=float))
    if np.any(u < 0.0) or not np.all(np.isfinite(u)):
        raise ValueError("upper limits must be finite and >= 0")
    if u.size == 0:
        return u.copy()

    def simpson(grid_vals, intervals):
        wts = np.full(intervals + 1, 2.0)
        wts[1::2] = 4.0
        wts[0] = wts[-1] = 1.0
        wts /= 3.0 * intervals
        return u * (grid_vals @ wts)

    intervals = 8
    s = np.linspace(0.0, 1.0, intervals + 1)
    vals_grid = g(np.outer(u, s))
    prev = simpson(vals_grid, intervals)
    while intervals <= 2 ** 20:
        mid = 0.5 * (s[:-1] + s[1:])
        mid_vals = g(np.outer(u, mid))
        intervals *= 2
        s_new = np.empty(intervals + 1)
        s_new[::2] = s
        s_new[1::2] = mid
        grid_new = np.empty((u.size, intervals + 1))
        grid_new[:, ::2] = vals_grid
        grid_new[:, 1::2] = mid_vals
        s, vals_grid = s_new, grid_new
        vals = simpson(vals_grid, intervals)
        scale = np.maximum(np.abs(vals), 1e-300)
        if np.all(np.abs(vals - prev) <= 15.0 * rel_tol * scale):
            return vals
        prev = vals
    raise RuntimeError("adaptive Simpson failed to reach the requested tolerance")


def _check_radii_in_domain(space, r):
    if space.r_max_domain < math.inf and np.any(np.asarray(r) > space.r_max_domain):
        raise ValueError(f"radius beyond the ambient domain (r_max={space.r_max_domain:g})")


def beta(space, r, rel_tol: float = 1e-12):
    """beta(r) = int_0^r f h^(n-1), adaptive composite Simpson."""
    _check_radii_in_domain(space, r)
    nm1 = space.n - 1

    def g(x):
        w = space.warp(x)
        h = w[3]
        return w[0] * (h if nm1 == 1 else h ** nm1)

    out = _simpson_from_zero(g, r, rel_tol)
    return float(out[0]) if np.ndim(r) == 0 else out


def delta(space, r, rel_tol: float = 1e-12):
    """delta(r) = int_0^r h^(n-1), adaptive composite Simpson."""
    _check_radii_in_domain(space, r)
    nm1 = space.n - 1

    def g(x):
        h = space.warp(x)[3]
        return h if nm1 == 1 else h ** nm1

    out = _simpson_from_zero(g, r, rel_tol)
    return float(out[0]) if np.ndim(r) == 0 else out


def invert_increasing(g, y: float, r_max: float = math.inf) -> float:
    """Solve g(x) = y for a strictly increasing g on [0, r_max).

    Bracket expansion by doubling followed by bisection to 1e-14 relative
    width; the result satisfies |g(x) - y| <= 1e-12 * max(1, |y|).  Raises
    ``ValueError`` when y is unreachable within the domain.
    """
    resid_tol = 1e-12 * max(1.0, abs(y))
    g0 = g(0.0)
    if y < g0 - resid_tol:
        raise ValueError(f"target {y!r} below g(0)={g0!r}")
    if y <= g0:
        return 0.0

    cap = math.inf if r_max == math.inf else r_max * (1.0 - 1e-12)
    hi = min(1.0, cap)
    while g(hi) < y:
        if hi >= cap:
            raise ValueError(f"target {y!r} unreachable within the domain (r_max={r_max:g})")
        hi = min(2.0 * hi, cap)

    lo = 0.0
    while hi - lo > 1e-14 * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if g(mid) < y:
            lo = mid
        else:
            hi = mid
    x = 0.5 * (lo + hi)

    resid = abs(g(x) - y)
    if resid > resid_tol:
        raise RuntimeError(f"inversion residual {resid:.3e} exceeds {resid_tol:.3e}")
    return x


@dataclass
class BoundsReport:
    """Reference radii, the small-volume threshold, and sigma."""

    r1: float
    r2: float
    r3: float
    small_volume_threshold: float
    criterion_met: bool
    sigma: float

    def __post_init__(self):
        if not 0.0 < self.r3 < self.r1 < self.r2:
            raise ValueError(
                f"expected 0 < r3 < r1 < r2, got r3={self.r3!r} r1={self.r1!r} r2={self.r2!r}")

    def to_dict(self):
        return {
            "r1": self.r1,
            "r2": self.r2,
            "r3": self.r3,
            "small_volume_threshold": self.small_volume_threshold,
            "criterion_met": self.criterion_met,
            "sigma": self.sigma,
        }


def compute_bounds(space, a: float, b: float, V: float, area_M: float) -> BoundsReport:
    """Compute r1, r2, r3 and the small-volume criterion for one hypersurface."""
    if not b > a:
        raise ValueError("need b > a")
    if not V > 0.0:
        raise ValueError("need V > 0")
    if not area_M > 0.0:
        raise ValueError("need area_M > 0")

    sigma = unit_sphere_area(space.n)
    rmax = space.r_max_domain
    beta_fn = lambda x: beta(space, x)
    delta_fn = lambda x: delta(space, x)

    r1 = invert_increasing(beta_fn, V / ((b - a) * sigma), r_max=rmax)
    r3 = invert_increasing(beta_fn, V / (2.0 * (b - a) * sigma), r_max=rmax)
    r2 = invert_increasing(delta_fn, area_M / sigma + delta(space, r1), r_max=rmax)

    threshold = (V / (b - a)) * delta(space, r1) / beta(space, r1)
    return BoundsReport(r1=r1, r2=r2, r3=r3,
                        small_volume_threshold=threshold,
                        criterion_met=bool(area_M <= threshold),
                        sigma=sigma)
