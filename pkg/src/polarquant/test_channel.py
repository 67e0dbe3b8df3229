"""Discrete-Gaussian test channel: parameter derivation and sampling."""

from dataclasses import dataclass

import numpy as np

from .partition_chain import PartitionChain, ScaledIntegerLattice, flatness_factor

# epsilon_1 / epsilon_2 widths from the moment-gap bounds.
MOMENT2_WIDTH = np.sqrt(np.pi / (np.pi - 1.0 / np.e))  # ~1.06
MOMENT4_WIDTH = np.sqrt(np.pi / (np.pi - 2.0 / np.e))

# Tabulation radius for discrete-Gaussian pmfs, in units of sigma.
TRUNCATION_SIGMAS = 12.0


@dataclass(frozen=True)
class TestChannelParams:
    """Source/distortion parameters and their MMSE-derived quantities."""

    sigma_s_sq: float
    delta: float

    @property
    def sigma_r_sq(self) -> float:
        return self.sigma_s_sq - self.delta

    @property
    def alpha(self) -> float:
        return self.sigma_r_sq / self.sigma_s_sq

    @property
    def sigma_tilde_sq(self) -> float:
        return self.sigma_r_sq * self.delta / self.sigma_s_sq


def derive_params(sigma_s_sq: float, delta: float) -> TestChannelParams:
    """Build TestChannelParams, rejecting degenerate settings."""
    if not sigma_s_sq > 0:
        raise ValueError("sigma_s_sq must be positive")
    if not 0 < delta < sigma_s_sq:
        raise ValueError(
            f"delta must lie in (0, sigma_s_sq); got delta={delta}, sigma_s_sq={sigma_s_sq}")
    return TestChannelParams(sigma_s_sq=float(sigma_s_sq), delta=float(delta))


def delta_for_fixed_rescaled_noise(sigma_s_sq: float, sigma_tilde_sq: float) -> float:
    """Distortion target that keeps sigma_tilde_sq fixed for a given source variance.

    Smaller root of delta^2 - sigma_s_sq*delta + sigma_s_sq*sigma_tilde_sq = 0.
    """
    disc = sigma_s_sq ** 2 - 4.0 * sigma_s_sq * sigma_tilde_sq
    if disc < 0:
        raise ValueError("sigma_s_sq too small for the requested sigma_tilde_sq")
    return 0.5 * (sigma_s_sq - np.sqrt(disc))


@dataclass(frozen=True)
class ConditionReport:
    """Flatness factors entering the distortion-moment lemmas."""

    eps_flat: float   # epsilon_Lambda(sigma_tilde)
    eps1: float       # epsilon_Lambda(sigma_r / 1.06...)
    eps2: float       # epsilon_Lambda(sigma_r / 1.08...)
    flat_ok: bool     # eps_flat <= 1/2
    moment4_ok: bool  # eps2 <= 1

    @property
    def all_ok(self) -> bool:
        return self.flat_ok and self.moment4_ok


def check_conditions(chain: PartitionChain, params: TestChannelParams) -> ConditionReport:
    top = chain.top
    sigma_r = np.sqrt(params.sigma_r_sq)
    eps_flat = flatness_factor(top, np.sqrt(params.sigma_tilde_sq))
    eps1 = flatness_factor(top, sigma_r / MOMENT2_WIDTH)
    eps2 = flatness_factor(top, sigma_r / MOMENT4_WIDTH)
    return ConditionReport(
        eps_flat=eps_flat,
        eps1=eps1,
        eps2=eps2,
        flat_ok=bool(eps_flat <= 0.5),
        moment4_ok=bool(eps2 <= 1.0),
    )


class DiscreteGaussian:
    """Discrete Gaussian on v*Z centered at c, sampled by inverse CDF.

    The pmf is tabulated on |point - c| <= 12 sigma; the omitted mass is
    ~exp(-72) and far below any tolerance used here.
    """

    def __init__(self, lat: ScaledIntegerLattice, sigma: float, center: float = 0.0):
        if not sigma > 0:
            raise ValueError("sigma must be positive")
        v = lat.spacing
        k_center = int(np.round(center / v))
        k_radius = int(np.ceil(TRUNCATION_SIGMAS * sigma / v)) + 1
        ks = np.arange(k_center - k_radius, k_center + k_radius + 1)
        self.points = ks * v
        logits = -0.5 * ((self.points - center) / sigma) ** 2
        w = np.exp(logits - logits.max())
        self.pmf = w / w.sum()
        self._cdf = np.cumsum(self.pmf)
        self.sigma = sigma
        self.center = center
        self.lattice = lat

    def sample(self, rng: np.random.Generator, size=None) -> np.ndarray:
        u = rng.random(size)
        idx = np.searchsorted(self._cdf, u, side="right")
        return self.points[idx]


def sample_discrete_gaussian(spec: DiscreteGaussian, rng: np.random.Generator,
                             size=None) -> np.ndarray:
    return spec.sample(rng, size)


def sample_pair(params: TestChannelParams, chain: PartitionChain, N: int,
                rng: np.random.Generator):
    """One draw of the approximate test channel: (x, y') with y' = x + noise."""
    dg = DiscreteGaussian(chain.top, np.sqrt(params.sigma_r_sq))
    x = dg.sample(rng, N)
    y = x + rng.normal(0.0, np.sqrt(params.delta), size=N)
    return x, y
