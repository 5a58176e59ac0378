"""Link-level simulator for a delay-Doppler downlink with power-domain
multiple access: one high-mobility user occupies the full delay-Doppler
grid while several low-mobility users ride dedicated subcarriers, and
fractional Doppler leaks energy between Doppler bins of the mobile
user's channel.  The package quantifies that leakage's cost in spectral
efficiency and outage probability with paired Monte Carlo trials.
"""

__version__ = "0.1.0"

from .channel import (
    EigenSpectra,
    HMChannelRealization,
    LMChannelRealization,
    hm_channel_matrices,
    hm_eigen_spectra,
    lm_eigen_spectrum,
    lm_subchannel_gains,
    sample_hm_channel,
    sample_lm_channel,
    subpath_ratio,
    without_fractional_doppler,
)
from .config import (
    ConfigError,
    ParseError,
    SystemConfig,
    ValidationError,
    config_from_dict,
    load_config,
)
from .equalizer import (
    DegenerateSpectrum,
    EqualizerSpectrum,
    LinkSnrs,
    detection_power_terms,
    empirical_hm_sinr,
    hm_at_lm_snr,
    hm_detection_snr,
    lm_detection_snr,
    mmse_spectrum,
    uniform_weights,
)
from .grids import (
    DDGrid,
    DDVector,
    NotBlockCirculant,
    SpectralBasis,
    TFGrid,
    build_basis,
    devectorize,
    diagonalize_bccb,
    isfft,
    sfft,
    vectorize,
)
from .noma import (
    PowerAllocation,
    UserRates,
    ZeroGain,
    allocate_power,
    assemble_rates,
    spectral_efficiency,
    superpose,
)
from .simkit import (
    SweepPoint,
    SweepSummary,
    TrialResult,
    db_to_linear,
    derive_trial_seed,
    outage_probability,
    run_sweep,
    run_trial,
)
from .validation import CheckResult, run_validation

__all__ = [
    "__version__",
    "CheckResult",
    "ConfigError",
    "DDGrid",
    "DDVector",
    "DegenerateSpectrum",
    "EigenSpectra",
    "EqualizerSpectrum",
    "HMChannelRealization",
    "LMChannelRealization",
    "LinkSnrs",
    "NotBlockCirculant",
    "ParseError",
    "PowerAllocation",
    "SpectralBasis",
    "SweepPoint",
    "SweepSummary",
    "SystemConfig",
    "TFGrid",
    "TrialResult",
    "UserRates",
    "ValidationError",
    "ZeroGain",
    "allocate_power",
    "assemble_rates",
    "build_basis",
    "config_from_dict",
    "db_to_linear",
    "derive_trial_seed",
    "detection_power_terms",
    "devectorize",
    "diagonalize_bccb",
    "empirical_hm_sinr",
    "hm_at_lm_snr",
    "hm_channel_matrices",
    "hm_detection_snr",
    "hm_eigen_spectra",
    "isfft",
    "lm_detection_snr",
    "lm_eigen_spectrum",
    "lm_subchannel_gains",
    "load_config",
    "mmse_spectrum",
    "outage_probability",
    "run_sweep",
    "run_trial",
    "sample_hm_channel",
    "sample_lm_channel",
    "sfft",
    "spectral_efficiency",
    "subpath_ratio",
    "superpose",
    "uniform_weights",
    "vectorize",
    "without_fractional_doppler",
]
