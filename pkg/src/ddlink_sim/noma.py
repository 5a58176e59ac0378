"""Power-domain user multiplexing: allocation, superposition, rates."""

import numpy as np

from dataclasses import dataclass

from .equalizer import LinkSnrs
from .grids import DDGrid, DDVector, TFGrid, sfft


class ZeroGain(ValueError):
    """Raised when a user's subchannel gain is exactly zero."""


@dataclass(frozen=True)
class PowerAllocation:
    """Power shares, entry 0 for the HM user, entries 1..U for LM users."""

    shares: np.ndarray

    def __post_init__(self):
        shares = np.asarray(self.shares, dtype=float)
        if shares.ndim != 1 or shares.size < 1:
            raise ValueError("shares must be a non-empty 1-D array")
        if np.any(shares < 0.0) or np.any(shares > 1.0):
            raise ValueError("power shares must lie in [0, 1]")
        if abs(shares.sum() - 1.0) > 1e-12:
            raise ValueError(f"power shares must sum to 1, got {shares.sum()!r}")
        object.__setattr__(self, "shares", shares)


@dataclass(frozen=True)
class UserRates:
    """Spectral efficiencies of one trial in b/s/Hz.

    se_hm is the HM user's own-detection rate; se_hm_at_lm and se_lm hold
    the two LM-side stages per user; se_lm_min is the worst-user summary
    under the configured stage convention.
    """

    se_hm: float
    se_hm_at_lm: np.ndarray
    se_lm: np.ndarray
    se_lm_min: float


def allocate_power(hm_share: float, subchannel_gains: np.ndarray) -> PowerAllocation:
    """Split the unit transmit power: p0 to the HM user, the rest
    inversely weighted by LM subchannel magnitude so weaker users get
    more power.

    Scaling every gain by a common factor leaves the shares unchanged.
    """
    if not 0.0 <= hm_share <= 1.0:
        raise ValueError(f"hm_share must lie in [0, 1], got {hm_share!r}")
    magnitudes = np.abs(np.asarray(subchannel_gains, dtype=complex))
    if magnitudes.size == 0:
        raise ValueError("at least one subchannel gain is required")
    if np.any(magnitudes == 0.0):
        raise ZeroGain("inverse-magnitude weighting undefined for a zero subchannel gain")
    inverse = 1.0 / magnitudes
    lm_shares = (1.0 - hm_share) * inverse / inverse.sum()
    return PowerAllocation(np.concatenate(([hm_share], lm_shares)))


def superpose(signals, allocation: PowerAllocation) -> DDVector:
    """Weighted sum sum_u sqrt(p_u) * s_u of the users' DD vectors."""
    if len(signals) != allocation.shares.size:
        raise ValueError(
            f"got {len(signals)} signals for {allocation.shares.size} power shares"
        )
    first = signals[0]
    total = np.zeros_like(first.data)
    for share, sig in zip(allocation.shares, signals):
        if (sig.n_doppler, sig.n_delay) != (first.n_doppler, first.n_delay):
            raise ValueError("all signals must share the same grid dimensions")
        total = total + np.sqrt(share) * sig.data
    return DDVector(total, first.n_doppler, first.n_delay)


def embed_lm_subcarrier(symbols: np.ndarray, user: int, n_doppler: int, n_delay: int) -> DDGrid:
    """Place one LM user's time-slot symbols on its dedicated subcarrier
    (column user - 1 of the TF grid, zero elsewhere) and move the frame
    to the DD domain."""
    symbols = np.asarray(symbols, dtype=complex)
    if symbols.shape != (n_doppler,):
        raise ValueError(f"expected {n_doppler} time-slot symbols, got shape {symbols.shape}")
    if not 1 <= user <= n_delay:
        raise ValueError(f"user must lie in [1, {n_delay}], got {user}")
    tf = np.zeros((n_doppler, n_delay), dtype=complex)
    tf[:, user - 1] = symbols
    return sfft(TFGrid(tf))


def spectral_efficiency(snr: float) -> float:
    """Shannon rate log2(1 + snr) in b/s/Hz."""
    if snr < 0:
        raise ValueError(f"snr must be >= 0, got {snr!r}")
    return float(np.log2(1.0 + snr))


def assemble_rates(snrs: LinkSnrs, include_hm_stage: bool = True) -> UserRates:
    """Map the trial's SNRs to spectral efficiencies.

    The worst-user summary takes, per user, the weaker of the two LM-side
    stages (or the LM stage alone when include_hm_stage is False), then
    the minimum across users.
    """
    se_hm = spectral_efficiency(snrs.hm)
    se_hm_at_lm = np.log2(1.0 + np.asarray(snrs.hm_at_lm, dtype=float))
    se_lm = np.log2(1.0 + np.asarray(snrs.lm, dtype=float))
    per_user = np.minimum(se_hm_at_lm, se_lm) if include_hm_stage else se_lm
    return UserRates(se_hm, se_hm_at_lm, se_lm, float(per_user.min()))
