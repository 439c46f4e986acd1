"""Nonparametric conditional cure-rate estimation with extreme-value
extrapolation beyond the end of follow-up."""

from .errors import (
    BadAlpha,
    BadStatus,
    CureTailError,
    DegenerateCovariate,
    DegenerateDenominator,
    EmptyFile,
    EmptyGrid,
    MissingColumn,
    NoMass,
    NonFiniteValue,
    NonPositiveTau,
)
from .kernel_beran import (
    ConditionalCdfCurve,
    KernelSpec,
    beran_cdf,
    conditional_subcdf,
    kernel_value,
    kernel_weights,
    select_bandwidth,
)
from .survdata import Observation, SurvivalSample, load_csv, make_sample, max_followup
from .tail import (
    DEFAULT_GRID,
    TailEstimate,
    TuningPair,
    estimate_tail,
    f_hat,
    gamma_hat,
    limit_targets,
    p_hat,
    select_tuning,
    truncate_gamma,
)

__version__ = "0.1.0"
