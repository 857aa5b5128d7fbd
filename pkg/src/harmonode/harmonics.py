"""Real spherical-harmonic basis, quadrature grids, expansion and energies.

The basis is the fully normalized real spherical harmonic set: orthonormal
under the surface integral over the unit sphere, with the Condon-Shortley
phase folded into the Legendre recurrence (documented so independent oracles
can reproduce signs; the per-degree energies are phase-independent).

Functions on the sphere are sampled on a product grid of Gauss-Legendre
nodes in cos(theta) times uniformly spaced phi. The product rule integrates
products of two band-limited functions exactly, so expansion coefficients of
band-limited inputs are exact up to round-off.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

DEFAULT_L_MAX = 16
# Lands n_theta = 64 (n_phi = 128) for l_max = 16; calibrated so per-degree
# energies of force functions are stable under grid doubling.
DEFAULT_OVERSAMPLE = 1.88


class QuadratureGrid:
    """Product quadrature grid: Gauss-Legendre in cos(theta), uniform phi.

    Immutable after construction; a single grid may serve any number of
    concurrent expansions. Serves expansions up to l_max with
    n_theta >= 2 * (l_max + 1).
    """

    def __init__(self, n_theta: int, n_phi: int):
        if n_theta < 2 or n_phi < 2:
            raise ValueError(f"grid must have at least 2 nodes per axis, got {n_theta}x{n_phi}")
        self.n_theta = int(n_theta)
        self.n_phi = int(n_phi)
        x, w = _gauss_legendre(self.n_theta)
        self.cos_theta = x
        self.weights = w
        self.theta = np.arccos(np.clip(x, -1.0, 1.0))
        self.sin_theta = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
        self.phi = np.arange(self.n_phi) * (2.0 * np.pi / self.n_phi)
        self.delta_phi = 2.0 * np.pi / self.n_phi

    def max_degree(self) -> int:
        """Largest l_max this grid can expand exactly for band-limited input."""
        return self.n_theta // 2 - 1

    def unit_vectors(self) -> np.ndarray:
        """Cartesian unit vectors of every grid point, shape (n_theta, n_phi, 3)."""
        st = self.sin_theta[:, None]
        return np.stack(
            [
                st * np.cos(self.phi)[None, :],
                st * np.sin(self.phi)[None, :],
                np.broadcast_to(self.cos_theta[:, None], (self.n_theta, self.n_phi)).copy(),
            ],
            axis=-1,
        )

    def integrate(self, values: np.ndarray) -> float:
        """Surface integral of grid samples: sum_j sum_k w_j * dphi * f[j, k]."""
        return float(self.weights @ values.sum(axis=1) * self.delta_phi)

    def norm2(self, values: np.ndarray) -> float:
        """L2 norm of grid samples under the quadrature measure."""
        return math.sqrt(max(self.integrate(values * values), 0.0))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, QuadratureGrid)
            and self.n_theta == other.n_theta
            and self.n_phi == other.n_phi
        )

    def __repr__(self) -> str:
        return f"QuadratureGrid({self.n_theta}x{self.n_phi})"


@dataclass(frozen=True)
class SphericalSamples:
    """Real-valued samples of a spherical function on a quadrature grid."""

    grid: QuadratureGrid
    values: np.ndarray

    def __post_init__(self):
        expected = (self.grid.n_theta, self.grid.n_phi)
        if self.values.shape != expected:
            raise ValueError(f"sample shape {self.values.shape} does not match grid {expected}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("sample values must be finite")


@dataclass(frozen=True)
class HarmonicExpansion:
    """Truncated coefficients a_lm of a spherical function.

    Coefficients are stored flat, degree-major: index(l, m) = l*l + l + m,
    covering 0 <= l <= l_max and -l <= m <= l.
    """

    l_max: int
    coefficients: np.ndarray
    grid: QuadratureGrid

    def __post_init__(self):
        expected = (self.l_max + 1) ** 2
        if self.coefficients.shape != (expected,):
            raise ValueError(
                f"expected {expected} coefficients for l_max={self.l_max}, "
                f"got shape {self.coefficients.shape}"
            )
        if not np.all(np.isfinite(self.coefficients)):
            raise ValueError("coefficients must be finite")

    def coefficient(self, l: int, m: int) -> float:
        if not (0 <= l <= self.l_max and -l <= m <= l):
            raise ValueError(f"no coefficient for (l={l}, m={m}) at l_max={self.l_max}")
        return float(self.coefficients[l * l + l + m])

    def rows(self):
        """Yield (l, m, a_lm) in storage order, for CSV export."""
        for l in range(self.l_max + 1):
            for m in range(-l, l + 1):
                yield l, m, float(self.coefficients[l * l + l + m])


@lru_cache(maxsize=16)
def _gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _legendre_table(l_max: int, x: np.ndarray) -> np.ndarray:
    """Fully normalized associated Legendre values, shape (l_max+1, l_max+1, len(x)).

    Entry [l, m] holds P_lm(x) normalized so the real harmonics built from it
    are orthonormal; Condon-Shortley phase included. The (l, m) recurrence
    uses only ratios of small integers, stable with no factorial overflow
    well past l = 64.
    """
    x = np.asarray(x, dtype=float)
    s = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    table = np.zeros((l_max + 1, l_max + 1) + x.shape)
    table[0, 0] = 1.0 / math.sqrt(4.0 * math.pi)
    for m in range(1, l_max + 1):
        table[m, m] = -math.sqrt((2.0 * m + 1.0) / (2.0 * m)) * s * table[m - 1, m - 1]
    for m in range(l_max):
        table[m + 1, m] = math.sqrt(2.0 * m + 3.0) * x * table[m, m]
    for m in range(l_max + 1):
        for l in range(m + 2, l_max + 1):
            a = math.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            b = math.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
            table[l, m] = a * (x * table[l - 1, m] - b * table[l - 2, m])
    return table


@lru_cache(maxsize=16)
def _grid_legendre_table(n_theta: int, l_max: int) -> np.ndarray:
    table = _legendre_table(l_max, _gauss_legendre(n_theta)[0])
    table.setflags(write=False)
    return table


@lru_cache(maxsize=16)
def _grid_trig_table(n_phi: int, l_max: int) -> tuple[np.ndarray, np.ndarray]:
    phi = np.arange(n_phi) * (2.0 * np.pi / n_phi)
    orders = np.arange(l_max + 1)[:, None]
    cos_t = np.cos(orders * phi[None, :])
    sin_t = np.sin(orders * phi[None, :])
    cos_t.setflags(write=False)
    sin_t.setflags(write=False)
    return cos_t, sin_t


def real_sph_harm(l: int, m: int, theta, phi):
    """Evaluate the orthonormal real spherical harmonic of degree l, order m.

    theta is the polar angle from +z in [0, pi]; phi the azimuth from +x.
    Accepts scalars or broadcastable arrays.
    """
    if l < 0 or abs(m) > l:
        raise ValueError(f"order must satisfy |m| <= l with l >= 0, got (l={l}, m={m})")
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    table = _legendre_table(l, np.cos(theta))
    plm = table[l, abs(m)]
    if m == 0:
        out = plm
    elif m > 0:
        out = math.sqrt(2.0) * plm * np.cos(m * phi)
    else:
        out = math.sqrt(2.0) * plm * np.sin(-m * phi)
    return out if out.shape else float(out)


def build_grid(l_max: int, oversample: float = DEFAULT_OVERSAMPLE) -> QuadratureGrid:
    """Build a grid able to expand up to l_max: n_theta >= 2(l_max+1), n_phi = 2 n_theta.

    oversample >= 1 scales the node count; force functions are not band
    limited, so the default leaves headroom above the exactness threshold.
    """
    if l_max < 0:
        raise ValueError(f"l_max must be non-negative, got {l_max}")
    if oversample < 1.0:
        raise ValueError(f"oversample must be >= 1, got {oversample}")
    base = 2 * (l_max + 1)
    n_theta = max(base, math.ceil(oversample * base))
    return QuadratureGrid(n_theta, 2 * n_theta)


def expand(samples: SphericalSamples, l_max: int) -> HarmonicExpansion:
    """Project grid samples onto the basis: a_lm = sum w_j dphi f(j,k) Y_lm(j,k).

    Exact to round-off for inputs band limited at or below l_max. Raises
    ValueError when the grid is too coarse for the requested degree.
    """
    grid = samples.grid
    if grid.n_theta < 2 * (l_max + 1):
        raise ValueError(
            f"grid with n_theta={grid.n_theta} is too coarse for l_max={l_max}; "
            f"need n_theta >= {2 * (l_max + 1)}"
        )
    cos_t, sin_t = _grid_trig_table(grid.n_phi, l_max)
    plm = _grid_legendre_table(grid.n_theta, l_max)

    # Separable transform: azimuthal projection first, then weighted polar sum.
    g_cos = samples.values @ cos_t.T * grid.delta_phi  # (n_theta, l_max+1)
    g_sin = samples.values @ sin_t.T * grid.delta_phi
    weighted = plm * grid.weights[None, None, :]  # (l, m, n_theta)

    coeffs = np.zeros((l_max + 1) ** 2)
    a_cos = np.einsum("lmj,jm->lm", weighted, g_cos)
    a_sin = np.einsum("lmj,jm->lm", weighted, g_sin)
    root2 = math.sqrt(2.0)
    for l in range(l_max + 1):
        base = l * l + l
        coeffs[base] = a_cos[l, 0]
        for m in range(1, l + 1):
            coeffs[base + m] = root2 * a_cos[l, m]
            coeffs[base - m] = root2 * a_sin[l, m]
    return HarmonicExpansion(l_max=l_max, coefficients=coeffs, grid=grid)


def reconstruct(expansion: HarmonicExpansion, theta, phi):
    """Evaluate the truncated series sum_l sum_m a_lm Y_lm at (theta, phi)."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    shape = np.broadcast_shapes(theta.shape, phi.shape)
    theta_b = np.broadcast_to(theta, shape).ravel()
    phi_b = np.broadcast_to(phi, shape).ravel()
    table = _legendre_table(expansion.l_max, np.cos(theta_b))
    out = np.zeros(theta_b.shape)
    root2 = math.sqrt(2.0)
    for l in range(expansion.l_max + 1):
        base = l * l + l
        out += expansion.coefficients[base] * table[l, 0]
        for m in range(1, l + 1):
            plm = table[l, m]
            out += expansion.coefficients[base + m] * root2 * plm * np.cos(m * phi_b)
            out += expansion.coefficients[base - m] * root2 * plm * np.sin(m * phi_b)
    out = out.reshape(shape)
    return out if shape else float(out)


def reconstruct_on_grid(expansion: HarmonicExpansion) -> np.ndarray:
    """Synthesize the truncated series on the expansion's own grid."""
    grid = expansion.grid
    l_max = expansion.l_max
    cos_t, sin_t = _grid_trig_table(grid.n_phi, l_max)
    plm = _grid_legendre_table(grid.n_theta, l_max)
    root2 = math.sqrt(2.0)

    h_cos = np.zeros((l_max + 1, grid.n_theta))
    h_sin = np.zeros((l_max + 1, grid.n_theta))
    for l in range(l_max + 1):
        base = l * l + l
        h_cos[0] += expansion.coefficients[base] * plm[l, 0]
        for m in range(1, l + 1):
            h_cos[m] += root2 * expansion.coefficients[base + m] * plm[l, m]
            h_sin[m] += root2 * expansion.coefficients[base - m] * plm[l, m]
    return h_cos.T @ cos_t + h_sin.T @ sin_t


def truncation_error(samples: SphericalSamples, expansion: HarmonicExpansion) -> float:
    """Relative L2 residual of the truncated series against the samples.

    Both norms are evaluated with the grid quadrature. Raises ValueError for
    an identically zero input, whose relative error is undefined.
    """
    if expansion.grid != samples.grid:
        raise ValueError("expansion was not built on the samples' grid")
    denom = samples.grid.norm2(samples.values)
    if denom == 0.0:
        raise ValueError("relative truncation error is undefined for a zero function")
    residual = samples.values - reconstruct_on_grid(expansion)
    return samples.grid.norm2(residual) / denom


def frequency_energies(expansion: HarmonicExpansion) -> np.ndarray:
    """Per-degree energies: component l is sqrt(sum_m a_lm^2), length l_max+1.

    Each degree spans a rotation-closed subspace, so these are invariant to
    rigid rotation of the underlying function.
    """
    energies = np.zeros(expansion.l_max + 1)
    for l in range(expansion.l_max + 1):
        block = expansion.coefficients[l * l : (l + 1) * (l + 1)]
        energies[l] = math.sqrt(float(block @ block))
    return energies
