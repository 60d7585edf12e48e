"""Plane-wave families: one-parameter oscillation and concentration profiles,
the wave-factor ODE, and numerical weak-limit extraction.

The metric ansatz is
    g = -2 du dub + H(ub)^2 (exp(G(ub)) dX^2 + exp(-G(ub)) dY^2),
whose only curvature component is
    Ric_ubub = -(1/2) G'(ub)^2 - 2 H''(ub) / H(ub),
so vacuum members solve H'' = -(1/4) (G')^2 H.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .grids import Grid1D
from .odesolve import FocusingError, rk4_second_order
from .quadrature import gauss_legendre_integrate


@dataclass(frozen=True)
class SeedProfile:
    """Smooth seed k with analytic derivative; optionally compactly supported."""

    name: str
    k: Callable[[np.ndarray], np.ndarray]
    dk: Callable[[np.ndarray], np.ndarray]
    support: tuple[float, float] | None = None  # None: not compactly supported

    def normalized(self, target: float = 1.0) -> "SeedProfile":
        """Rescale so the integral of (k')^2 equals target."""
        lo, hi = self.support if self.support else (-1.0, 1.0)
        val = gauss_legendre_integrate(lambda x: self.dk(x) ** 2, lo, hi, n=256)
        scale = np.sqrt(target / val)
        return SeedProfile(
            self.name + "~normalized",
            lambda x, s=scale: s * self.k(x),
            lambda x, s=scale: s * self.dk(x),
            self.support,
        )


def _smooth_bump(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 0.5
    xi = x[inside]
    out[inside] = np.exp(-1.0 / (1.0 - 4.0 * xi * xi) + 1.0)
    return out


def _smooth_bump_d(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 0.5
    xi = x[inside]
    out[inside] = np.exp(-1.0 / (1.0 - 4.0 * xi * xi) + 1.0) * (-8.0 * xi / (1.0 - 4.0 * xi * xi) ** 2)
    return out


SEEDS = {
    # C^infty bump supported in [-1/2, 1/2]
    "bump": SeedProfile("bump", _smooth_bump, _smooth_bump_d, (-0.5, 0.5)),
    # slowly varying positive profile for oscillation families
    "cosine": SeedProfile(
        "cosine",
        lambda x: 1.0 + 0.5 * np.cos(2.0 * np.pi * np.asarray(x, dtype=float)),
        lambda x: -np.pi * np.sin(2.0 * np.pi * np.asarray(x, dtype=float)),
    ),
    "const": SeedProfile("const", lambda x: np.ones_like(np.asarray(x, float)),
                         lambda x: np.zeros_like(np.asarray(x, float))),
}


@dataclass
class WaveProfile:
    """Sampled (G, G') with the analytic generators retained."""

    lam: float
    grid: Grid1D
    g: Callable[[np.ndarray], np.ndarray]
    dg: Callable[[np.ndarray], np.ndarray]

    def g_values(self):
        return self.g(self.grid.points())

    def dg_values(self):
        return self.dg(self.grid.points())


def make_burnett_G(lam: float, seed: SeedProfile, grid: Grid1D) -> WaveProfile:
    """Oscillation profile G(ub) = lam * k(ub) * sin(ub / lam)."""
    if lam <= 0:
        raise ValueError("family parameter must be positive")

    def g(ub):
        return lam * seed.k(ub) * np.sin(ub / lam)

    def dg(ub):
        return lam * seed.dk(ub) * np.sin(ub / lam) + seed.k(ub) * np.cos(ub / lam)

    return WaveProfile(lam, grid, g, dg)


def make_shell_G(lam: float, seed: SeedProfile, grid: Grid1D, offset: float = 0.0) -> WaveProfile:
    """Concentration profile G(ub) = sqrt(lam) * k((ub - offset) / lam).

    The seed must be compactly supported and is rescaled to unit derivative
    energy; the grid must put at least 32 nodes across the support.
    """
    if lam <= 0:
        raise ValueError("family parameter must be positive")
    if seed.support is None:
        raise ValueError("shell profile needs a compactly supported seed")
    seed = seed.normalized(1.0)
    width = (seed.support[1] - seed.support[0]) * lam
    if width / grid.h < 32:
        raise ValueError(
            f"grid too coarse for lam={lam:g}: {width / grid.h:.1f} nodes across the pulse (need >= 32)"
        )
    root = np.sqrt(lam)

    def g(ub):
        return root * seed.k((np.asarray(ub, float) - offset) / lam)

    def dg(ub):
        return seed.dk((np.asarray(ub, float) - offset) / lam) / root

    return WaveProfile(lam, grid, g, dg)


@dataclass
class WaveFactor:
    grid: Grid1D
    h: np.ndarray
    dh: np.ndarray
    ddh: np.ndarray  # read back from the ODE right-hand side
    rk4_error: float  # Richardson half-step estimate, max over the interval


def solve_H(profile: WaveProfile, richardson: bool = True) -> WaveFactor:
    """Integrate H'' = -(1/4) G'(ub)^2 H with H = 1, H' = 0 at the grid start."""
    grid = profile.grid

    def rhs(ub, y, v):
        return -0.25 * profile.dg(ub) ** 2 * y

    ys, vs, accs = rk4_second_order(rhs, np.array(1.0), np.array(0.0), grid)
    ys, vs, accs = ys.ravel(), vs.ravel(), accs.ravel()
    if np.any(ys <= 0.0):
        i = int(np.argmax(ys <= 0.0))
        raise FocusingError(
            f"wave factor H crossed zero at ub={grid.points()[i]:.6g}",
            location=grid.points()[i],
        )
    err = np.nan
    if richardson:
        y2, _, _ = rk4_second_order(rhs, np.array(1.0), np.array(0.0), grid.refined(2))
        err = float(np.abs(y2.ravel()[::2] - ys).max())
    return WaveFactor(grid, ys, vs, accs, err)


def ricci_uu(profile: WaveProfile, factor: WaveFactor) -> np.ndarray:
    """Ric_ubub = -(1/2)(G')^2 - 2 H''/H on the grid (H'' from the ODE)."""
    if np.any(factor.h <= 0.0):
        raise ValueError("wave factor must be positive")
    return -0.5 * profile.dg_values() ** 2 - 2.0 * factor.ddh / factor.h


def weak_limit_pairings(
    family: Callable[[float], WaveProfile],
    phi: Callable[[np.ndarray], np.ndarray],
    lam_seq,
) -> np.ndarray:
    """Trapezoid pairings of (G_lam')^2 against a test function, one per lam."""
    out = []
    for lam in lam_seq:
        prof = family(lam)
        ub = prof.grid.points()
        out.append(np.trapezoid(prof.dg(ub) ** 2 * phi(ub), ub))
    return np.array(out)


def jump_detect(factor: WaveFactor, window: float, flat_tol: float = 1e-8):
    """Locate the H'' concentration and return (location, H' jump across it).

    Returns None when H'' shows no concentration (flat profile).
    """
    ub = factor.grid.points()
    curv = np.abs(factor.ddh)
    if curv.max() <= flat_tol:
        return None
    i = int(np.argmax(curv))
    loc = ub[i]
    lo, hi = loc - window, loc + window
    if lo < ub[0] or hi > ub[-1]:
        raise ValueError("window extends past the solution interval")
    dh_lo = np.interp(lo, ub, factor.dh)
    dh_hi = np.interp(hi, ub, factor.dh)
    return loc, float(dh_hi - dh_lo)
