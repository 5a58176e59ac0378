"""MMSE detection spectra and closed-form link SNRs.

The HM receiver equalizes in the spectral domain: the combined desired
channel diagonalizes to one complex eigenvalue per spectral bin, the
regularized inverse of that diagonal is the whole equalizer, and every
average power the SNR formulas need reduces to a mean over the bins.
`empirical_hm_sinr` is the independent cross-check: it runs actual
symbols through the dense channel matrices and a dense least-squares
equalizer and measures the same ratio from the samples.
"""

from dataclasses import dataclass

import numpy as np

from .channel import (
    EigenSpectra,
    HMChannelRealization,
    hm_channel_matrices,
    lm_subchannel_gains,
)
from .config import SystemConfig


class DegenerateSpectrum(ValueError):
    """Raised when every equalizer coefficient is zero (dead channel)."""


@dataclass(frozen=True)
class EqualizerSpectrum:
    """Diagonal MMSE equalizer in the spectral domain."""

    delta: np.ndarray
    regularizer: float
    weights: np.ndarray


@dataclass(frozen=True)
class DetectionPowerTerms:
    """Per-symbol power factors at the HM equalizer output.

    desired: energy of the equalized main-tap channel (scales both the
    useful signal and the co-scheduled users' superposed power).
    leakage: energy of the equalized Doppler-leakage channel.
    noise: equalizer output noise energy per unit noise variance.
    """

    desired: float
    leakage: float
    noise: float


@dataclass(frozen=True)
class LinkSnrs:
    """The three detection SNRs of one trial."""

    hm: float
    hm_at_lm: np.ndarray
    lm: np.ndarray


@dataclass(frozen=True)
class EmpiricalSinr:
    value: float
    stderr: float
    n_frames: int


def uniform_weights(n_antennas: int) -> np.ndarray:
    """Unit-power transmit weights, identical on every antenna."""
    return np.full(n_antennas, 1.0 / np.sqrt(n_antennas), dtype=complex)


def mmse_spectrum(eigenvalues: np.ndarray, weights: np.ndarray, regularizer: float) -> EqualizerSpectrum:
    """Regularized inverse of the combined per-bin eigenvalue.

    delta_i = conj(c_i) / (|c_i|^2 + rho) with c_i the weighted sum of
    the per-antenna eigenvalues.  Bins with c_i = 0 get delta_i = 0.
    """
    if regularizer <= 0:
        raise ValueError(f"regularizer must be > 0, got {regularizer!r}")
    combined = weights @ eigenvalues
    delta = np.conj(combined) / (np.abs(combined) ** 2 + regularizer)
    return EqualizerSpectrum(delta, float(regularizer), np.asarray(weights, dtype=complex))


def detection_power_terms(
    spectrum: EqualizerSpectrum,
    lambda_main: np.ndarray,
    lambda_idi: np.ndarray,
    weights: np.ndarray,
) -> DetectionPowerTerms:
    """Average the equalized channel energies over the spectral grid."""
    c_main = weights @ lambda_main
    c_idi = weights @ lambda_idi
    desired = float(np.mean(np.abs(spectrum.delta * c_main) ** 2))
    leakage = float(np.mean(np.abs(spectrum.delta * c_idi) ** 2))
    noise = float(np.mean(np.abs(spectrum.delta) ** 2))
    return DetectionPowerTerms(desired, leakage, noise)


def hm_detection_snr(terms: DetectionPowerTerms, p0: float, rho_t: float) -> float:
    """HM own-signal SNR after equalization.

    The useful share p0 rides the desired energy; the other users'
    share (1 - p0) rides it too, the leakage energy carries the full
    unit transmit power, and the noise term is SNR-free because the
    transmit power is normalized to one.
    """
    if terms.noise == 0.0:
        raise DegenerateSpectrum("all equalizer coefficients are zero")
    signal = p0 * rho_t * terms.desired
    return signal / ((1.0 - p0) * rho_t * terms.desired + rho_t * terms.leakage + terms.noise)


def hm_at_lm_power_terms(
    spectrum: EqualizerSpectrum, eigenvalues: np.ndarray, weights: np.ndarray
) -> tuple[float, float]:
    """(forward, noise) energies for detecting the HM signal at an LM user."""
    combined = weights @ eigenvalues
    forward = float(np.mean(np.abs(spectrum.delta) ** 2 * np.abs(combined) ** 2))
    noise = float(np.mean(np.abs(spectrum.delta) ** 2))
    return forward, noise


def hm_at_lm_snr(
    spectrum: EqualizerSpectrum,
    eigenvalues: np.ndarray,
    weights: np.ndarray,
    p0: float,
    rho_t: float,
) -> float:
    """SNR of the HM signal detected (for cancellation) at an LM user.

    The remaining users' aggregate share 1 - p0 is the interference.
    """
    forward, noise = hm_at_lm_power_terms(spectrum, eigenvalues, weights)
    if noise == 0.0:
        raise DegenerateSpectrum("all equalizer coefficients are zero")
    return p0 * rho_t * forward / ((1.0 - p0) * rho_t * forward + noise)


def lm_detection_snr(power_share: float, rho_t: float, subchannel_gain: complex) -> float:
    """SNR of an LM user's own signal on its dedicated subcarrier."""
    if power_share < 0:
        raise ValueError(f"power_share must be >= 0, got {power_share!r}")
    return power_share * rho_t * float(np.abs(subchannel_gain) ** 2)


def spectral_decomposition_residual(
    spectrum: EqualizerSpectrum, spectra: EigenSpectra, weights: np.ndarray
) -> float:
    """Relative error of the equalized full spectrum against its split.

    Compares delta * c_full per bin with the sum of the equalized main
    and leakage images; exact up to rounding when the spectra come from
    the same realization.
    """
    total = spectrum.delta * (weights @ spectra.lambda_full)
    parts = spectrum.delta * (weights @ spectra.lambda_main) + spectrum.delta * (
        weights @ spectra.lambda_idi
    )
    num = float(np.abs(total - parts).max())
    if num == 0.0:
        return 0.0
    den = float(np.abs(total).max())
    return num / den if den > 0.0 else float("inf")


# === signal-level oracle =============================================


def empirical_hm_sinr(
    ch: HMChannelRealization,
    lm_channels,
    cfg: SystemConfig,
    rho_t: float,
    rng: np.random.Generator,
    n_symbols: int = 100_000,
    weights: np.ndarray | None = None,
) -> EmpiricalSinr:
    """Measure the HM detection SINR from transmitted symbols.

    Independent of the spectral fast path: builds the dense channel
    matrices, solves the regularized normal equations for the equalizer,
    transmits white unit-power symbol vectors for all U + 1 users with
    the configured power split, adds noise of variance 1/rho_t, and
    compares the known equalized signal component against the residual.
    The closed-form `hm_detection_snr` should agree with the returned
    value up to the cross terms it neglects plus Monte Carlo noise.
    """
    from .noma import allocate_power  # local import, noma depends on this module

    n, m = cfg.N, cfg.M
    nm = n * m
    v = uniform_weights(cfg.A) if weights is None else np.asarray(weights, dtype=complex)

    h_main = np.zeros((nm, nm), dtype=complex)
    h_full = np.zeros((nm, nm), dtype=complex)
    for antenna in range(cfg.A):
        main_a, _, full_a = hm_channel_matrices(ch, antenna, n, m)
        h_main += v[antenna] * main_a
        h_full += v[antenna] * full_a

    gram = h_main.conj().T @ h_main + cfg.rho * np.eye(nm)
    equalizer = np.linalg.solve(gram, h_main.conj().T)
    signal_map = equalizer @ h_main

    gains = np.array([v @ lm_subchannel_gains(lm, lm.user - 1, m) for lm in lm_channels])
    shares = allocate_power(cfg.p0, gains).shares
    amp = np.sqrt(shares)

    sigma = np.sqrt(1.0 / rho_t)
    n_frames = max(1, int(np.ceil(n_symbols / nm)))
    sig_power = np.empty(n_frames)
    res_power = np.empty(n_frames)
    root_half = np.sqrt(0.5)
    for frame in range(n_frames):
        streams = root_half * (
            rng.standard_normal((len(shares), nm)) + 1j * rng.standard_normal((len(shares), nm))
        )
        superposed = amp @ streams
        noise = sigma * root_half * (rng.standard_normal(nm) + 1j * rng.standard_normal(nm))
        received = h_full @ superposed + noise
        equalized = equalizer @ received
        signal = amp[0] * (signal_map @ streams[0])
        residual = equalized - signal
        sig_power[frame] = np.vdot(signal, signal).real
        res_power[frame] = np.vdot(residual, residual).real

    s_mean = sig_power.mean()
    r_mean = res_power.mean()
    value = float(s_mean / r_mean)
    if s_mean == 0.0:
        return EmpiricalSinr(0.0, 0.0, n_frames)
    if n_frames > 1:
        # Delta method for the ratio of two correlated means.
        s_var = sig_power.var(ddof=1) / n_frames
        r_var = res_power.var(ddof=1) / n_frames
        covar = np.cov(sig_power, res_power, ddof=1)[0, 1] / n_frames
        rel_var = s_var / s_mean**2 + r_var / r_mean**2 - 2.0 * covar / (s_mean * r_mean)
        stderr = float(value * np.sqrt(max(rel_var, 0.0)))
    else:
        stderr = float("nan")
    return EmpiricalSinr(value, stderr, n_frames)
