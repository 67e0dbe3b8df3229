"""One-dimensional lattice primitives and the binary partition chain.

All entropies and capacities are in bits. Every function here is pure and
safe to call concurrently.
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import erfc

LOG2E = np.log2(np.e)
TWO_PI_E = 2.0 * np.pi * np.e

# Relative truncation for theta-series / coset sums.
SERIES_RTOL = 1e-15

# Tail-mass threshold used by recommended_chain for both the top-lattice
# flatness condition and the bottom-level noise containment condition.
TAIL_THRESHOLD = 2.0 ** -16


@dataclass(frozen=True)
class ScaledIntegerLattice:
    """The lattice v*Z for a positive spacing v."""

    spacing: float

    def __post_init__(self):
        if not self.spacing > 0:
            raise ValueError(f"lattice spacing must be positive, got {self.spacing}")

    @property
    def volume(self) -> float:
        return self.spacing


@dataclass(frozen=True)
class PartitionChain:
    """Binary partition chain eta*Z / 2*eta*Z / ... / eta*2^r*Z.

    Level ell (0 <= ell <= r) is the lattice with spacing eta * 2**ell;
    level 0 is the top (finest) lattice, level r the bottom (coarsest).
    """

    eta: float
    r: int

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError(f"eta must be positive, got {self.eta}")
        if self.r < 1:
            raise ValueError(f"need at least one coded level, got r={self.r}")

    def level(self, ell: int) -> ScaledIntegerLattice:
        if not 0 <= ell <= self.r:
            raise ValueError(f"level {ell} outside [0, {self.r}]")
        return ScaledIntegerLattice(self.eta * 2.0 ** ell)

    @property
    def top(self) -> ScaledIntegerLattice:
        return self.level(0)

    @property
    def bottom(self) -> ScaledIntegerLattice:
        return self.level(self.r)


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def flatness_factor(lat: ScaledIntegerLattice, sigma: float) -> float:
    """Deviation of the lattice-periodized Gaussian from uniform.

    Computed through the dual theta series: 2 * sum_{k>=1}
    exp(-2 pi^2 sigma^2 k^2 / v^2), summed until the next term is
    negligible relative to the accumulated value.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    a = 2.0 * np.pi ** 2 * sigma ** 2 / lat.spacing ** 2
    total = 0.0
    k = 1
    while True:
        term = np.exp(-a * k * k)
        total += term
        if term <= SERIES_RTOL * total or term == 0.0:
            break
        k += 1
    return 2.0 * total


def aliased_density(lat: ScaledIntegerLattice, sigma: float, x) -> np.ndarray:
    """Density of Gaussian noise folded onto a fundamental cell of v*Z.

    Accepts scalar or array x. Uses the direct coset sum when sigma is
    small relative to the spacing and the dual (Fourier) series when it
    is large, so both regimes stay cheap and accurate.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    v = lat.spacing
    x = np.asarray(x, dtype=float)
    x0 = x - v * np.round(x / v)  # reduce to [-v/2, v/2]
    ratio = sigma / v
    if ratio <= 1.0:
        kmax = int(np.ceil(10.0 * ratio)) + 2
        ks = np.arange(-kmax, kmax + 1, dtype=float)
        z = (x0[..., None] - ks * v) / sigma
        out = np.exp(-0.5 * z * z).sum(axis=-1) / (np.sqrt(2.0 * np.pi) * sigma)
    else:
        # 1/v * (1 + 2 sum_k exp(-2 pi^2 sigma^2 k^2 / v^2) cos(2 pi k x / v))
        a = 2.0 * np.pi ** 2 * ratio ** 2
        kmax = max(1, int(np.ceil(np.sqrt(40.0 / a))) + 1)
        ks = np.arange(1, kmax + 1, dtype=float)
        coef = np.exp(-a * ks * ks)
        out = (1.0 + 2.0 * (coef * np.cos(2.0 * np.pi * ks * x0[..., None] / v)).sum(axis=-1)) / v
    return out


def aliased_entropy(lat: ScaledIntegerLattice, sigma_sq: float) -> float:
    """Differential entropy (bits) of the folded Gaussian on one cell."""
    if not sigma_sq > 0:
        raise ValueError("sigma_sq must be positive")
    v = lat.spacing
    sigma = np.sqrt(sigma_sq)

    def integrand(x):
        f = float(aliased_density(lat, sigma, x))
        if f <= 0.0:
            return 0.0
        return -f * np.log2(f)

    # Interior break points keep adaptive quadrature honest when the
    # density is sharply peaked (sigma << v).
    pts = sorted({min(k * sigma, 0.49 * v) for k in (1, 2, 3, 5, 8)})
    pts = [p for p in pts if 0.0 < p < 0.5 * v]
    half, _ = quad(integrand, 0.0, 0.5 * v, points=pts or None,
                   epsabs=5e-13, epsrel=1e-11, limit=400)
    return 2.0 * half


def mod_capacity(lat: ScaledIntegerLattice, sigma_sq: float) -> float:
    """Capacity (bits) of the mod-lattice channel: log V - h(lat, sigma^2)."""
    return np.log2(lat.volume) - aliased_entropy(lat, sigma_sq)


def partition_capacity(chain: PartitionChain, ell: int, sigma_sq: float) -> float:
    """Capacity (bits) of the binary level-ell channel of the chain."""
    if not 1 <= ell <= chain.r:
        raise ValueError(f"level {ell} outside [1, {chain.r}]")
    c = mod_capacity(chain.level(ell), sigma_sq) - mod_capacity(chain.level(ell - 1), sigma_sq)
    return float(np.clip(c, 0.0, 1.0))


def gaussian_tail_mass(a: float, sigma: float) -> float:
    """Mass of N(0, sigma^2) outside [-a, a]."""
    return float(erfc(a / (np.sqrt(2.0) * sigma)))


def recommended_chain(N: int, sigma_tilde_sq: float) -> PartitionChain:
    """Chain settings for block length N and rescaled noise sigma_tilde_sq.

    The top spacing is sigma_tilde / sqrt(N) (so the top lattice looks
    flat to the noise with huge margin), and r is the smallest depth for
    which the noise is contained in half the bottom spacing up to mass
    2^-16. Both tail conditions are asserted before returning.
    """
    if not _is_power_of_two(N) or N < 2:
        raise ValueError(f"N must be a power of two >= 2, got {N}")
    if not sigma_tilde_sq > 0:
        raise ValueError("sigma_tilde_sq must be positive")
    sigma = np.sqrt(sigma_tilde_sq)
    eta = sigma / np.sqrt(N)
    r = 1
    while gaussian_tail_mass(eta * 2.0 ** (r - 1), sigma) >= TAIL_THRESHOLD:
        r += 1
    chain = PartitionChain(eta=eta, r=r)
    if flatness_factor(chain.top, sigma) >= TAIL_THRESHOLD:
        raise AssertionError("top-lattice flatness condition violated")
    return chain
