"""proxycast: pick a daily proxy for an annual indicator and forecast it.

Pipeline: standardize and impute daily candidates, annualize, rank against the
annual target under five similarity measures, Borda-select the proxy, then fit
regularized gradient-boosted trees and emit a multi-step forecast with
inflation-adjusted prediction intervals.
"""

from .boosting import (
    BoostedEnsemble,
    FeatureSpec,
    HyperParams,
    Metrics,
    RegressionTree,
    SupervisedFrame,
    build_features,
    chrono_split,
    compute_metrics,
    default_grid,
    ensemble_from_dict,
    ensemble_to_dict,
    fit_boosted_ensemble,
    grid_search,
    predict,
    recursive_forecast,
)
from .config import RunConfig, load_config
from .errors import (
    ConfigError,
    DataError,
    NumericError,
    OfflineError,
    ProxycastError,
    ZeroVarianceError,
)
from .intervals import IntervalForecast, build_intervals, residual_quantiles
from .selection import (
    ConsensusResult,
    MethodRanking,
    consensus_select,
    rank_by_method,
)
from .series import (
    AnnualSeries,
    AutoencoderConfig,
    DataMatrix,
    NormalizationParams,
    TimeSeries,
    annualize,
    impute_autoencoder,
    sparse_years,
    z_normalize,
    z_normalize_values,
)
from .similarity import (
    SimilarityConfig,
    dtw,
    edr,
    embed_as_trajectory,
    euclidean,
    hausdorff,
    lcs_length,
    lcss_distance,
    soft_dtw,
)

__version__ = "0.1.0"

__all__ = [
    "AnnualSeries",
    "AutoencoderConfig",
    "BoostedEnsemble",
    "ConfigError",
    "ConsensusResult",
    "DataError",
    "DataMatrix",
    "FeatureSpec",
    "HyperParams",
    "IntervalForecast",
    "Metrics",
    "MethodRanking",
    "NormalizationParams",
    "NumericError",
    "OfflineError",
    "ProxycastError",
    "RegressionTree",
    "RunConfig",
    "SimilarityConfig",
    "SupervisedFrame",
    "TimeSeries",
    "ZeroVarianceError",
    "annualize",
    "build_features",
    "build_intervals",
    "chrono_split",
    "compute_metrics",
    "consensus_select",
    "default_grid",
    "dtw",
    "edr",
    "embed_as_trajectory",
    "ensemble_from_dict",
    "ensemble_to_dict",
    "euclidean",
    "fit_boosted_ensemble",
    "grid_search",
    "hausdorff",
    "impute_autoencoder",
    "lcs_length",
    "lcss_distance",
    "load_config",
    "predict",
    "rank_by_method",
    "recursive_forecast",
    "residual_quantiles",
    "soft_dtw",
    "sparse_years",
    "z_normalize",
    "z_normalize_values",
]
