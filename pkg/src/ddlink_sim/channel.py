"""Multipath channels on the delay-Doppler grid.

The high-mobility (HM) channel carries L_0 paths, each with an integer
delay tap, an integer Doppler tap and a fractional Doppler offset.  The
offset smears the path across neighbouring Doppler bins: the q = 0
subpath carries the desired signal while the q != 0 subpaths act as
inter-Doppler interference (IDI).  Low-mobility (LM) channels are
delay-only.

All channel matrices are block circulant under the k + N*l vector
layout, so their eigenvalues can be evaluated directly on the spectral
grid (`hm_eigen_spectra`, `lm_eigen_spectrum`) without forming the dense
matrices; the dense builders exist as the independent cross-check.
"""

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .config import SystemConfig

# LM users see between 1 and 4 paths, drawn uniformly per realization.
LM_PATH_RANGE = (1, 4)


# === realizations ====================================================


@dataclass(frozen=True)
class HMPath:
    """One propagation path of the high-mobility channel.

    The per-antenna complex gains share the path's delay/Doppler
    geometry; `fractional_doppler` is the offset kappa in (-1/2, 1/2]
    between the true Doppler shift and the nearest grid bin.
    """

    doppler_tap: int
    delay_tap: int
    fractional_doppler: float
    gains: np.ndarray

    def __post_init__(self):
        if not -0.5 < self.fractional_doppler <= 0.5:
            raise ValueError(
                f"fractional_doppler must lie in (-1/2, 1/2], got {self.fractional_doppler!r}"
            )
        gains = np.atleast_1d(np.asarray(self.gains, dtype=complex))
        if gains.ndim != 1 or not np.isfinite(gains).all():
            raise ValueError("gains must be a finite 1-D complex array")
        object.__setattr__(self, "gains", gains)


@dataclass(frozen=True)
class HMChannelRealization:
    """Path set of one HM channel draw, shared across antennas."""

    paths: tuple
    subpath_halfwidth: int

    def __post_init__(self):
        paths = tuple(self.paths)
        if not paths:
            raise ValueError("a channel realization needs at least one path")
        counts = {p.gains.size for p in paths}
        if len(counts) != 1:
            raise ValueError(f"paths disagree on antenna count: {sorted(counts)}")
        if self.subpath_halfwidth < 0:
            raise ValueError("subpath_halfwidth must be >= 0")
        object.__setattr__(self, "paths", paths)

    @property
    def n_antennas(self) -> int:
        return self.paths[0].gains.size


@dataclass(frozen=True)
class LMPath:
    delay_tap: int
    gains: np.ndarray

    def __post_init__(self):
        gains = np.atleast_1d(np.asarray(self.gains, dtype=complex))
        if gains.ndim != 1 or not np.isfinite(gains).all():
            raise ValueError("gains must be a finite 1-D complex array")
        object.__setattr__(self, "gains", gains)


@dataclass(frozen=True)
class LMChannelRealization:
    """Delay-only channel of one low-mobility user."""

    user: int
    paths: tuple

    def __post_init__(self):
        paths = tuple(self.paths)
        if not paths:
            raise ValueError("a channel realization needs at least one path")
        counts = {p.gains.size for p in paths}
        if len(counts) != 1:
            raise ValueError(f"paths disagree on antenna count: {sorted(counts)}")
        if self.user < 1:
            raise ValueError("user indices start at 1")
        object.__setattr__(self, "paths", paths)

    @property
    def n_antennas(self) -> int:
        return self.paths[0].gains.size


@dataclass(frozen=True)
class EigenSpectra:
    """Per-antenna eigenvalue spectra of one HM realization.

    Each array has shape (A, N*M) in spectral order i = m_del*N + m_dopp.
    lambda_main holds the q = 0 subpath image, lambda_idi the truncated
    q != 0 leakage, and lambda_full the independently summed total;
    lambda_full equals lambda_main + lambda_idi up to rounding.
    """

    lambda_main: np.ndarray
    lambda_idi: np.ndarray
    lambda_full: np.ndarray

    @property
    def n_antennas(self) -> int:
        return self.lambda_main.shape[0]


# === subpath leakage =================================================


def _subpath_ratios(qs: np.ndarray, kappa: float, n_doppler: int) -> np.ndarray:
    """Leakage ratio of each Doppler offset q for one path.

    Ratio of the subpath amplitude at offset q to the full path
    amplitude.  Offsets where q + kappa is an exact multiple of N take
    the analytic limit 1; other integer offsets are exactly 0, which
    keeps the zero-offset (kappa = 0) case free of rounding dust.
    """
    qs = np.asarray(qs)
    t = qs + kappa
    out = np.empty(qs.shape, dtype=complex)
    exact = t == np.floor(t)
    if np.any(exact):
        out[exact] = np.where(np.mod(t[exact].astype(np.int64), n_doppler) == 0, 1.0, 0.0)
    rest = ~exact
    if np.any(rest):
        theta = -qs[rest] - kappa
        num = np.exp(-2j * np.pi * theta) - 1.0
        den = n_doppler * np.exp(-1j * (2.0 * np.pi / n_doppler) * theta) - n_doppler
        out[rest] = num / den
    return out


def subpath_ratio(q: int, kappa: float, n_doppler: int) -> complex:
    """Scalar form of the subpath leakage ratio."""
    return complex(_subpath_ratios(np.array([q]), kappa, n_doppler)[0])


def subpath_coefficient(
    alpha: complex,
    doppler_hz: float,
    delay_s: float,
    q: int,
    kappa: float,
    n_doppler: int,
) -> complex:
    """Effective gain of one subpath: path gain, delay-Doppler phase, leakage."""
    return alpha * np.exp(-2j * np.pi * doppler_hz * delay_s) * subpath_ratio(q, kappa, n_doppler)


def _tap_phase(doppler_tap: int, kappa: float, delay_tap: int, n_doppler: int, n_delay: int) -> complex:
    # Doppler-delay product phase; the physical scales cancel, leaving
    # only grid units: nu*tau = (k + kappa)*l / (N*M).
    return np.exp(-2j * np.pi * (doppler_tap + kappa) * delay_tap / (n_doppler * n_delay))


# === sampling ========================================================


def doppler_tap_span(cfg: SystemConfig) -> int:
    """Largest integer Doppler tap k_max implied by the configured mobility."""
    return int(np.floor(cfg.nu_max_hz * cfg.N / cfg.delta_f))


def _draw_delay_taps(n_paths: int, l_max: int, rng: np.random.Generator) -> np.ndarray:
    """First tap at 0; the rest spread over [0, l_max], without
    replacement whenever the range is large enough."""
    taps = np.zeros(n_paths, dtype=np.int64)
    if n_paths > 1:
        replace_draws = l_max + 1 <= n_paths - 1
        taps[1:] = rng.choice(l_max + 1, size=n_paths - 1, replace=replace_draws)
    return taps


def sample_hm_channel(cfg: SystemConfig, rng: np.random.Generator) -> HMChannelRealization:
    """Draw one HM realization.

    Doppler taps are uniform over [-k_max, k_max], fractional offsets
    uniform over (-1/2, 1/2], delay taps per `_draw_delay_taps`, and
    per-antenna gains i.i.d. complex normal with variance 1/L_0 so the
    average path powers sum to one.  Draw order is fixed: Doppler taps,
    offsets, delays, then gains.
    """
    k_max = doppler_tap_span(cfg)
    doppler = rng.integers(-k_max, k_max + 1, size=cfg.L_0)
    kappa = 0.5 - rng.random(cfg.L_0)  # maps [0, 1) onto (-1/2, 1/2]
    delays = _draw_delay_taps(cfg.L_0, cfg.l_max, rng)
    scale = np.sqrt(0.5 / cfg.L_0)
    gains = scale * (
        rng.standard_normal((cfg.L_0, cfg.A)) + 1j * rng.standard_normal((cfg.L_0, cfg.A))
    )
    paths = tuple(
        HMPath(int(doppler[p]), int(delays[p]), float(kappa[p]), gains[p])
        for p in range(cfg.L_0)
    )
    return HMChannelRealization(paths, cfg.N_p)


def sample_lm_channel(cfg: SystemConfig, user: int, rng: np.random.Generator) -> LMChannelRealization:
    """Draw one LM user's delay-only channel.

    The path count is uniform over LM_PATH_RANGE, delays follow the same
    policy as the HM channel, and gains are complex normal with variance
    1/L_u.  Draw order: path count, delays, gains.
    """
    if not 1 <= user <= cfg.U:
        raise ValueError(f"user must lie in [1, U={cfg.U}], got {user}")
    n_paths = int(rng.integers(LM_PATH_RANGE[0], LM_PATH_RANGE[1] + 1))
    delays = _draw_delay_taps(n_paths, cfg.l_max, rng)
    scale = np.sqrt(0.5 / n_paths)
    gains = scale * (
        rng.standard_normal((n_paths, cfg.A)) + 1j * rng.standard_normal((n_paths, cfg.A))
    )
    paths = tuple(LMPath(int(delays[p]), gains[p]) for p in range(n_paths))
    return LMChannelRealization(user, paths)


def without_fractional_doppler(ch: HMChannelRealization) -> HMChannelRealization:
    """Paired copy with every fractional offset forced to zero.

    Same taps and gains; only the offsets change, so comparing against
    the original isolates the cost of fractional Doppler.
    """
    return HMChannelRealization(
        tuple(replace(p, fractional_doppler=0.0) for p in ch.paths),
        ch.subpath_halfwidth,
    )


# === dense matrices ==================================================


def _shift_columns(n_doppler: int, n_delay: int, doppler_shift: int, delay_shift: int) -> np.ndarray:
    """Column index hit by each row for one cyclic delay-Doppler shift."""
    i = np.arange(n_doppler * n_delay)
    k = i % n_doppler
    l = i // n_doppler
    return (k - doppler_shift) % n_doppler + n_doppler * ((l - delay_shift) % n_delay)


def hm_channel_matrices(
    ch: HMChannelRealization, antenna: int, n_doppler: int, n_delay: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Dense (main, idi, full) channel matrices for one antenna.

    Each subpath contributes a scaled cyclic shift: Doppler by
    k_p - q, delay by l_p.  The full matrix is the exact sum of the
    other two by construction.
    """
    nm = n_doppler * n_delay
    main = np.zeros((nm, nm), dtype=complex)
    idi = np.zeros((nm, nm), dtype=complex)
    rows = np.arange(nm)
    for path in ch.paths:
        base = path.gains[antenna] * _tap_phase(
            path.doppler_tap, path.fractional_doppler, path.delay_tap, n_doppler, n_delay
        )
        for q in range(-ch.subpath_halfwidth, ch.subpath_halfwidth + 1):
            coeff = base * subpath_ratio(q, path.fractional_doppler, n_doppler)
            if coeff == 0:
                continue
            cols = _shift_columns(n_doppler, n_delay, path.doppler_tap - q, path.delay_tap)
            target = main if q == 0 else idi
            target[rows, cols] += coeff
    return main, idi, main + idi


def lm_channel_matrix(
    ch: LMChannelRealization, antenna: int, n_doppler: int, n_delay: int
) -> np.ndarray:
    """Dense delay-only channel matrix for one antenna."""
    nm = n_doppler * n_delay
    h = np.zeros((nm, nm), dtype=complex)
    rows = np.arange(nm)
    for path in ch.paths:
        cols = _shift_columns(n_doppler, n_delay, 0, path.delay_tap)
        h[rows, cols] += path.gains[antenna]
    return h


# === fast eigen spectra ==============================================


@lru_cache(maxsize=8)
def _dft_phase_table(n: int) -> np.ndarray:
    # w[m, s] = exp(-2j*pi*m*s/n); read-only lookup for shift eigenvalues.
    idx = np.arange(n)
    table = np.exp(-2j * np.pi * np.outer(idx, idx) / n)
    table.setflags(write=False)
    return table


def hm_eigen_spectra(ch: HMChannelRealization, n_doppler: int, n_delay: int) -> EigenSpectra:
    """Eigenvalue spectra of the (main, idi, full) matrices, all antennas.

    A cyclic shift by (dk, dl) has eigenvalue
    exp(-2j*pi*(m_del*dl/M + m_dopp*dk/N)) at spectral index
    i = m_del*N + m_dopp, so each spectrum is a small sum of phase-table
    rows; no dense matrix is formed.  lambda_full sums every subpath
    independently rather than adding the other two arrays.
    """
    n_paths = len(ch.paths)
    n_ant = ch.n_antennas
    table_n = _dft_phase_table(n_doppler)
    table_m = _dft_phase_table(n_delay)
    qs = np.arange(-ch.subpath_halfwidth, ch.subpath_halfwidth + 1)
    q0 = ch.subpath_halfwidth

    dopp_main = np.empty((n_paths, n_doppler), dtype=complex)
    dopp_idi = np.empty((n_paths, n_doppler), dtype=complex)
    dopp_full = np.empty((n_paths, n_doppler), dtype=complex)
    delay_resp = np.empty((n_paths, n_delay), dtype=complex)
    weights = np.empty((n_paths, n_ant), dtype=complex)

    for idx, path in enumerate(ch.paths):
        ratios = _subpath_ratios(qs, path.fractional_doppler, n_doppler)
        resp = table_n[:, (path.doppler_tap - qs) % n_doppler]  # (N, Q)
        dopp_main[idx] = resp[:, q0] * ratios[q0]
        leak = ratios.copy()
        leak[q0] = 0.0
        dopp_idi[idx] = resp @ leak
        dopp_full[idx] = resp @ ratios
        delay_resp[idx] = table_m[:, path.delay_tap % n_delay]
        weights[idx] = path.gains * _tap_phase(
            path.doppler_tap, path.fractional_doppler, path.delay_tap, n_doppler, n_delay
        )

    def accumulate(dopp: np.ndarray) -> np.ndarray:
        lam = np.einsum("pa,pm,pn->amn", weights, delay_resp, dopp)
        return lam.reshape(n_ant, n_delay * n_doppler)

    return EigenSpectra(accumulate(dopp_main), accumulate(dopp_idi), accumulate(dopp_full))


def lm_eigen_spectrum(ch: LMChannelRealization, n_doppler: int, n_delay: int) -> np.ndarray:
    """Eigenvalue spectrum of an LM channel, shape (A, N*M).

    Delay-only shifts make the spectrum constant along the Doppler
    frequency axis.
    """
    table_m = _dft_phase_table(n_delay)
    gains = np.stack([p.gains for p in ch.paths])  # (P, A)
    delay_resp = table_m[:, [p.delay_tap % n_delay for p in ch.paths]]  # (M, P)
    lam_delay = delay_resp @ gains  # (M, A)
    lam = np.repeat(lam_delay.T[:, :, None], n_doppler, axis=2)  # (A, M, N)
    return lam.reshape(ch.n_antennas, n_delay * n_doppler)


# === per-subcarrier gains ============================================


def lm_subchannel_gain(ch: LMChannelRealization, antenna: int, subcarrier: int, n_delay: int) -> complex:
    """Frequency response of one LM channel at one subcarrier."""
    total = 0.0 + 0.0j
    for path in ch.paths:
        total += path.gains[antenna] * np.exp(2j * np.pi * path.delay_tap * subcarrier / n_delay)
    return total


def lm_subchannel_gains(ch: LMChannelRealization, subcarrier: int, n_delay: int) -> np.ndarray:
    """Per-antenna frequency response at one subcarrier, shape (A,)."""
    gains = np.stack([p.gains for p in ch.paths])  # (P, A)
    phases = np.exp(
        2j * np.pi * np.array([p.delay_tap for p in ch.paths]) * subcarrier / n_delay
    )
    return phases @ gains
