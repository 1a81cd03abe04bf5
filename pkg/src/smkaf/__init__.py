"""Set-membership kernel adaptive filters (SM-NKLMS, SM-KAP), their linear
and kernel baselines, and a Monte-Carlo time-series prediction harness."""

__version__ = "0.1.0"

from .base import OnlineFilter, UpdateOutcome
from .exceptions import (
    ConfigError,
    DimensionError,
    EmptyInputError,
    SeriesParseError,
    SingularSystemError,
    SmkafError,
)
from .harness import (
    ALGORITHMS,
    ExperimentConfig,
    ExperimentReport,
    make_filter,
    robustness_sweep,
    run_experiment,
    run_trial,
)
from .kernel_filters import KAPA2, KLMS, SMKAP, SMNKLMS, Dictionary, kernel_predict
from .kernels import KernelSpec, cross_gram, gram, kernel_eval, regularized_solve
from .linear import APA, LMS, NLMS, SMAPA, SMNLMS, linear_predict
from .timeseries import (
    EmbeddedDataset,
    MackeyGlassParams,
    SeriesConfig,
    add_noise,
    embed,
    generate_mackey_glass,
    load_series,
    make_series,
    normalize,
)
