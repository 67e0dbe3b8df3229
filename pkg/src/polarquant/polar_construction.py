"""Polarization machinery: the binary transform, partition-channel
likelihoods, successive-cancellation passes, and Bhattacharyya estimation."""

import numpy as np
from scipy.special import expit

from .partition_chain import PartitionChain

# Log-likelihood ratios (natural log) are clipped here; saturation is far
# beyond decision relevance while exp() stays finite.
LLR_CAP = 700.0


def _check_block_length(n: int) -> int:
    if n < 1 or (n & (n - 1)) != 0:
        raise ValueError(f"block length must be a power of two, got {n}")
    return int(np.log2(n))


def polar_transform(u) -> np.ndarray:
    """x = u G_N over GF(2), last axis; natural (non-bit-reversed) order.

    The transform is an involution: applying it twice gives the input back.
    """
    u = np.asarray(u)
    N = u.shape[-1]
    _check_block_length(N)
    x = (u.astype(np.uint8) & 1).copy()
    step = N
    while step > 1:
        h = step // 2
        view = x.reshape(x.shape[:-1] + (N // step, step))
        view[..., :h] ^= view[..., h:]
        step = h
    return x


def _check_llr(a, b):
    # exact check-node combine, stable in the log domain
    return np.logaddexp(0.0, a + b) - np.logaddexp(a, b)


def sc_pass(llr, mode, frozen_mask=None, frozen_bits=None, genie=None,
            uniforms=None):
    """One successive-cancellation pass over a batch of blocks.

    Parameters
    ----------
    llr : (B, N) array
        Per-coordinate channel LLRs (natural log, P(y|0)/P(y|1)).
    mode : {'sample', 'map', 'genie'}
        sample draws each bit from its posterior (uses `uniforms`),
        map takes the argmax, genie follows the supplied `genie` bits.
    frozen_mask : (N,) bool, optional
        Indices forced to `frozen_bits` regardless of mode.
    frozen_bits : (N,) or (B, N) array, optional
    genie : (B, N) array, required in genie mode
    uniforms : (B, N) array, required in sample mode

    Returns
    -------
    u : (B, N) uint8 — decided bits
    posteriors : (B, N) float — P(u_i = 1 | u_{1:i-1}, llr)
    x : (B, N) uint8 — u G_N (the partial-sum codeword)
    """
    llr = np.clip(np.asarray(llr, dtype=float), -LLR_CAP, LLR_CAP)
    if llr.ndim != 2:
        raise ValueError("llr must be (batch, N)")
    B, N = llr.shape
    _check_block_length(N)
    if mode == "genie" and genie is None:
        raise ValueError("genie mode needs genie bits")
    if mode == "sample" and uniforms is None:
        raise ValueError("sample mode needs pre-drawn uniforms")
    if frozen_mask is not None:
        frozen_bits = np.asarray(frozen_bits)

    u_out = np.empty((B, N), dtype=np.uint8)
    p_out = np.empty((B, N), dtype=float)
    pos = [0]

    def rec(l):
        n = l.shape[1]
        if n == 1:
            i = pos[0]
            pos[0] += 1
            L = l[:, 0]
            p1 = expit(-L)
            p_out[:, i] = p1
            if mode == "genie":
                u = genie[:, i].astype(np.uint8)
            elif frozen_mask is not None and frozen_mask[i]:
                fb = frozen_bits[..., i]
                u = np.broadcast_to(fb, (B,)).astype(np.uint8)
            elif mode == "map":
                u = (L < 0).astype(np.uint8)
            else:
                u = (uniforms[:, i] < p1).astype(np.uint8)
            u_out[:, i] = u
            return u[:, None].copy()
        h = n // 2
        la, lb = l[:, :h], l[:, h:]
        c = rec(np.clip(_check_llr(la, lb), -LLR_CAP, LLR_CAP))
        d = rec(np.clip(lb + (1.0 - 2.0 * c) * la, -LLR_CAP, LLR_CAP))
        return np.concatenate([c ^ d, d], axis=1)

    x = rec(llr)
    return u_out, p_out, x


def coset_log_density(d, spacing: float, sigma: float) -> np.ndarray:
    """log sum_k exp(-(d - k*spacing)^2 / (2 sigma^2)), up to a constant.

    The sum is reduced to the fundamental cell first, so every term is
    <= 1 and the truncation tail is negligible at ~10 sigma.
    """
    d = np.asarray(d, dtype=float)
    v = spacing
    x0 = d - v * np.round(d / v)
    inv2s = 0.5 / (sigma * sigma)
    base = -x0 * x0 * inv2s
    s = np.ones_like(x0)
    kmax = int(np.ceil(10.0 * sigma / v)) + 2
    for k in range(1, kmax + 1):
        s += np.exp((x0 * x0 - (x0 - k * v) ** 2) * inv2s)
        s += np.exp((x0 * x0 - (x0 + k * v) ** 2) * inv2s)
    return base + np.log(s)


def level_llr_batch(t, rep_prev, chain: PartitionChain, ell: int,
                    sigma: float) -> np.ndarray:
    """Partition-channel LLRs at level ell for observations already
    MMSE-scaled, given the representative of the previous levels."""
    v_level = chain.eta * 2.0 ** ell
    half = chain.eta * 2.0 ** (ell - 1)
    d0 = np.asarray(t, dtype=float) - np.asarray(rep_prev, dtype=float)
    l0 = coset_log_density(d0, v_level, sigma)
    l1 = coset_log_density(d0 - half, v_level, sigma)
    return np.clip(l0 - l1, -LLR_CAP, LLR_CAP)


def level_llr(t: float, prev_bits, chain: PartitionChain,
              sigma_tilde_sq: float) -> float:
    """Scalar partition-channel LLR; prev_bits are the level 1..ell-1 labels."""
    prev_bits = np.asarray(prev_bits, dtype=float).ravel()
    ell = prev_bits.size + 1
    if ell > chain.r:
        raise ValueError(f"level {ell} exceeds chain depth {chain.r}")
    rep = chain.eta * float(np.sum(prev_bits * 2.0 ** np.arange(prev_bits.size)))
    out = level_llr_batch(np.array([[t]]), np.array([[rep]]), chain, ell,
                          np.sqrt(sigma_tilde_sq))
    return float(out[0, 0])


class PartitionChannelPlug:
    """Symmetric binary-input channel of one partition level under
    aliased Gaussian noise; used to sample construction trials."""

    def __init__(self, chain: PartitionChain, ell: int, sigma: float):
        if not 1 <= ell <= chain.r:
            raise ValueError(f"level {ell} outside [1, {chain.r}]")
        self.chain = chain
        self.ell = ell
        self.sigma = sigma
        self._half = chain.eta * 2.0 ** (ell - 1)

    def sample_llr(self, rng: np.random.Generator, bits) -> np.ndarray:
        bits = np.asarray(bits)
        t = self._half * bits + rng.normal(0.0, self.sigma, size=bits.shape)
        return level_llr_batch(t, np.zeros_like(t), self.chain, self.ell,
                               self.sigma)


class ErasureChannelPlug:
    """Synthetic binary erasure channel used to validate the SC machinery."""

    def __init__(self, epsilon: float):
        if not 0.0 <= epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")
        self.epsilon = epsilon

    def sample_llr(self, rng: np.random.Generator, bits) -> np.ndarray:
        bits = np.asarray(bits)
        erased = rng.random(bits.shape) < self.epsilon
        llr = np.where(bits == 0, LLR_CAP, -LLR_CAP)
        return np.where(erased, 0.0, llr)


def exact_bhattacharyya_erasure(epsilon: float, N: int) -> np.ndarray:
    """Exact subchannel Bhattacharyya parameters for the erasure channel,
    in the decoding order used by sc_pass."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    m = _check_block_length(N)
    z = np.array([epsilon], dtype=float)
    for _ in range(m):
        minus = 2.0 * z - z * z
        plus = z * z
        z = np.stack([minus, plus], axis=-1).reshape(-1)
    return z


def estimate_bhattacharyya(channel, N: int, M: int, rng: np.random.Generator,
                           batch: int = 512):
    """Monte-Carlo Bhattacharyya estimates for the N subchannels of
    `channel`, via genie-aided SC posteriors on uniform random inputs.

    Returns (z_hat, standard_error), each length N.
    """
    _check_block_length(N)
    if M < 1000:
        raise ValueError(f"need at least 1000 trials, got {M}")
    total = np.zeros(N)
    total_sq = np.zeros(N)
    done = 0
    while done < M:
        b = min(batch, M - done)
        x = rng.integers(0, 2, size=(b, N), dtype=np.uint8)
        llr = channel.sample_llr(rng, x)
        u = polar_transform(x)
        _, p, _ = sc_pass(llr, mode="genie", genie=u)
        w = 2.0 * np.sqrt(p * (1.0 - p))
        total += w.sum(axis=0)
        total_sq += (w * w).sum(axis=0)
        done += b
    z = total / M
    var = np.maximum(total_sq / M - z * z, 0.0)
    se = np.sqrt(var / M)
    return z, se


def selection_threshold(N: int, beta: float) -> float:
    if not 0.0 < beta < 0.5:
        raise ValueError(f"beta must lie in (0, 1/2), got {beta}")
    return 1.0 - 2.0 ** (-float(N) ** beta)


def select_sets(z_estimates, beta: float):
    """Split indices into (information, frozen) by the polarization threshold."""
    z = np.asarray(z_estimates, dtype=float)
    thr = selection_threshold(z.size, beta)
    info = np.flatnonzero(z < thr)
    frozen = np.flatnonzero(z >= thr)
    return info, frozen
