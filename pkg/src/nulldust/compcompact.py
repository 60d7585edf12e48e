"""Directional frequency decomposition and weak-product-limit tests.

A field on the periodic box splits exactly into low, first-direction-dominant
and second-direction-dominant parts through smooth Fourier multipliers:

    low  mask: chi(|xi|/(2 C1))
    pass mask: (1 - chi(|xi|/(2 C1))) * chi(100 C1 |xi_perp| / |xi_par|)
    rest: the complement, so the three masks sum to one on every lattice point

with chi a smooth plateau cutoff (1 on [-1, 1], 0 outside [-2, 2]).  The pass
mask of the first kind lives where 50 C1 |xi_2| <= |xi_1| and the second kind
where 50 C1 |xi_1| <= |xi_2|; products of two such parts have no spectrum
below |xi| = C1, which is the mechanism that lets transversely regular
oscillating sequences multiply without a convergence defect.

The radial and directional cutoffs act on the two null-frequency axes
(xi_1, xi_2); in the 4D variant the transverse axes ride along, which is
exactly the separation the product-support argument controls.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .rates import fit_rate
from .testfunctions import plateau


def cutoff_chi(t):
    """Smooth plateau: 1 on [-1, 1], 0 outside (-2, 2), monotone between."""
    return 1.0 - plateau(np.abs(np.asarray(t, dtype=float)) - 1.0)


@dataclass(frozen=True)
class PeriodicBox:
    """Periodic box [0, 2 pi)^dim sampled with shape[i] nodes per axis."""

    shape: tuple

    def __post_init__(self):
        if len(self.shape) not in (2, 4):
            raise ValueError("only 2D (u, ub) and 4D (u, ub, y1, y2) boxes supported")

    @property
    def dim(self):
        return len(self.shape)

    def axes(self):
        return [np.arange(n) * (2.0 * np.pi / n) for n in self.shape]

    def mesh(self):
        return np.meshgrid(*self.axes(), indexing="ij")

    def freqs(self):
        """Integer frequency lattice per axis, broadcast-shaped."""
        out = []
        for ax, n in enumerate(self.shape):
            k = np.fft.fftfreq(n, d=1.0 / n)
            shape = [1] * self.dim
            shape[ax] = n
            out.append(k.reshape(shape))
        return out

    def nyquist(self):
        return min(self.shape[0], self.shape[1]) // 2

    def integrate(self, field):
        return float(field.mean() * (2.0 * np.pi) ** self.dim)


def _masks(box: PeriodicBox, c1: float, mode: str):
    """(low, pass, rest) multipliers; mode selects which axis dominates the pass mask."""
    k = box.freqs()
    k1, k2 = np.abs(k[0]), np.abs(k[1])
    radial = np.sqrt(k1**2 + k2**2)
    low = cutoff_chi(radial / (2.0 * c1))
    if mode == "x1":
        par, perp = k1, k2
    elif mode == "x2":
        par, perp = k2, k1
    else:
        raise ValueError("mode must be 'x1' or 'x2'")
    with np.errstate(divide="ignore", invalid="ignore"):
        arg = np.where(par > 0, 100.0 * c1 * perp / np.where(par > 0, par, 1.0), np.inf)
    directional = np.where(np.isfinite(arg), cutoff_chi(arg), 0.0)
    pass_mask = (1.0 - low) * directional
    rest = (1.0 - low) * (1.0 - directional)
    return low, pass_mask, rest


@dataclass
class FrequencyDecomposition:
    """Exact three-part split of a real field.

    mode 'x1': h1 is the strictly masked first-axis-dominant part, h2 the
    complement; mode 'x2' mirrors this (h2 strictly masked).  support_check
    consumes the strictly masked parts of an ('x1', 'x2') pair.
    """

    box: PeriodicBox
    c1: float
    mode: str
    low: np.ndarray
    h1: np.ndarray
    h2: np.ndarray
    masks: tuple

    def parts(self):
        return self.low, self.h1, self.h2


def decompose(field: np.ndarray, box: PeriodicBox, c1: float, mode: str = "x1") -> FrequencyDecomposition:
    """Split a real field with the smooth directional multipliers.

    The low-pass reaches |xi| = 4 C1, so 4 C1 must stay inside the lattice's
    Nyquist band.
    """
    if c1 <= 1.0:
        raise ValueError("frequency threshold must exceed 1")
    if 4.0 * c1 > box.nyquist():
        raise ValueError(f"4 C1 = {4 * c1:g} exceeds the Nyquist band {box.nyquist()}")
    field = np.asarray(field, dtype=float)
    if field.shape != box.shape:
        raise ValueError(f"field shape {field.shape} != box shape {box.shape}")
    low_m, pass_m, rest_m = _masks(box, c1, mode)
    spec = np.fft.fftn(field)
    low = np.fft.ifftn(spec * low_m).real
    strict = np.fft.ifftn(spec * pass_m).real
    rest = np.fft.ifftn(spec * rest_m).real
    if mode == "x1":
        h1, h2 = strict, rest
    else:
        h1, h2 = rest, strict
    return FrequencyDecomposition(box, c1, mode, low, h1, h2, (low_m, pass_m, rest_m))


def partition_defect(d: FrequencyDecomposition, field: np.ndarray) -> float:
    """max |f - low - h1 - h2| (multipliers sum to the all-pass exactly)."""
    return float(np.abs(field - d.low - d.h1 - d.h2).max())


def support_check(d1: FrequencyDecomposition, d2: FrequencyDecomposition, rel_tol: float = 1e-10):
    """Verify the product of the strictly masked parts has no spectrum below C1.

    d1 must be an 'x1' decomposition and d2 an 'x2' one on the same box.
    Returns (ok, min_radius) where min_radius is the smallest |xi| carrying
    relative spectral mass above rel_tol (inf for a zero product).
    """
    if d1.mode != "x1" or d2.mode != "x2":
        raise ValueError("support_check pairs an 'x1' decomposition with an 'x2' one")
    if d1.box != d2.box or d1.c1 != d2.c1:
        raise ValueError("decompositions live on different boxes or thresholds")
    box, c1 = d1.box, d1.c1
    prod = d1.h1 * d2.h2
    spec = np.abs(np.fft.fftn(prod))
    peak = spec.max()
    if peak == 0.0:
        return True, np.inf
    k = box.freqs()
    radial = np.sqrt(sum(ki.astype(float) ** 2 for ki in k))
    carrying = spec > rel_tol * peak
    inside = carrying & (radial < c1)
    ok = not bool(inside.any())
    min_radius = float(radial[carrying].min()) if carrying.any() else np.inf
    return ok, min_radius


@dataclass
class SequencePair:
    """Oscillatory family pair with complementary directional regularity.

    f(n) is uniformly H^1 along the axes in f_regular ('u', 'y1', 'y2'), and
    h(n) along h_regular; f_inf/h_inf are the weak limits.
    """

    name: str
    box: PeriodicBox
    f: Callable[[int], np.ndarray]
    h: Callable[[int], np.ndarray]
    f_inf: np.ndarray
    h_inf: np.ndarray
    f_regular: tuple
    h_regular: tuple
    expects_defect: bool = False  # True for negative controls violating the bounds

    def spot_check_bounds(self, n_values=(4, 64)) -> dict:
        """H^1 seminorms along the declared regular axes at sample members."""
        axis_of = {"u": 0, "ub": 1, "y1": 2, "y2": 3}
        out = {}
        for label, gen, axes in (("f", self.f, self.f_regular), ("h", self.h, self.h_regular)):
            worst = 0.0
            for n in n_values:
                field = gen(n)
                spec = np.fft.fftn(field)
                for ax_name in axes:
                    ax = axis_of[ax_name]
                    if ax >= self.box.dim:
                        continue
                    k = self.box.freqs()[ax]
                    d = np.fft.ifftn(spec * (1j * k)).real
                    worst = max(worst, float(np.sqrt(self.box.integrate(d * d))))
            out[label] = worst
        return out


def weak_product_test(pair: SequencePair, psi: np.ndarray, n_values) -> dict:
    """Pairings of f_n h_n against psi per n, with the product-limit verdict.

    verdict: the pairing gap to int f_inf h_inf psi at the largest n is below
    tolerance and the gaps do not grow.
    """
    box = pair.box
    target = box.integrate(pair.f_inf * pair.h_inf * psi)
    pairings, gaps = [], []
    for n in n_values:
        v = box.integrate(pair.f(n) * pair.h(n) * psi)
        pairings.append(v)
        gaps.append(abs(v - target))
    gaps_arr = np.array(gaps)
    converged = gaps_arr[-1] <= 1e-3 * (1.0 + abs(target)) and gaps_arr[-1] <= gaps_arr[0] + 1e-12
    slope = None
    if len(n_values) >= 4 and np.all(gaps_arr > 1e-14):
        slope = fit_rate(1.0 / np.asarray(n_values, float), gaps_arr).slope
    return {
        "pair": pair.name,
        "n": list(n_values),
        "pairings": pairings,
        "target": target,
        "gaps": gaps,
        "slope_vs_inv_n": slope,
        "product_converges": bool(converged),
        "expects_defect": pair.expects_defect,
    }


def transverse_pair(box: PeriodicBox) -> SequencePair:
    """f_n oscillates along ub with smooth u-dependence, h_n the reverse.

    The amplitudes are not band-limited, so the product pairings decay
    through the test function's spectrum instead of vanishing identically.
    """
    mesh = box.mesh()
    u, ub = mesh[0], mesh[1]
    amp_f = np.exp(0.3 * np.sin(u) + 0.2 * np.cos(ub))
    amp_h = np.exp(0.25 * np.sin(ub) + 0.2 * np.cos(u))

    return SequencePair(
        "transverse",
        box,
        lambda n: amp_f * np.sin(n * ub),
        lambda n: amp_h * np.sin(n * u),
        np.zeros(box.shape),
        np.zeros(box.shape),
        f_regular=("u",),
        h_regular=("ub",),
    )


def resonant_pair(box: PeriodicBox) -> SequencePair:
    """Negative control: both factors oscillate along ub; sin^2 averages to 1/2."""
    mesh = box.mesh()
    ub = mesh[1]
    return SequencePair(
        "resonant",
        box,
        lambda n: np.sin(n * ub),
        lambda n: np.sin(n * ub),
        np.zeros(box.shape),
        np.zeros(box.shape),
        f_regular=("u",),
        h_regular=("u",),  # NOT ub-regular: the hypothesis the control violates
        expects_defect=True,
    )


def strong_weak_pair(box: PeriodicBox) -> SequencePair:
    """f fixed and smooth, h_n weakly convergent to a nonzero limit."""
    mesh = box.mesh()
    u, ub = mesh[0], mesh[1]
    f0 = np.exp(0.2 * np.sin(u) + 0.1 * np.cos(ub))
    h_inf = 1.0 + 0.5 * np.cos(u)
    return SequencePair(
        "strong_weak",
        box,
        lambda n: f0,
        lambda n: h_inf + np.sin(n * u) * (1.0 + 0.2 * np.cos(ub)),
        f0,
        h_inf,
        f_regular=("u",),
        h_regular=("ub",),
    )


PAIRS = {
    "transverse": transverse_pair,
    "resonant": resonant_pair,
    "strong-weak": strong_weak_pair,
}


def random_masked_decompositions(box: PeriodicBox, c1: float, rng: np.random.Generator):
    """Random real fields band-limited to half Nyquist (so products do not
    alias), decomposed in the two modes."""
    half = box.nyquist() // 2
    k = box.freqs()
    band = np.ones(box.shape, dtype=bool)
    for ki in k:
        band &= np.abs(ki) <= half
    fields = []
    for _ in range(2):
        spec = rng.standard_normal(box.shape) + 1j * rng.standard_normal(box.shape)
        spec *= band
        field = np.fft.ifftn(spec)
        fields.append(field.real + field.imag)  # real field, generic spectrum
    return decompose(fields[0], box, c1, "x1"), decompose(fields[1], box, c1, "x2")
