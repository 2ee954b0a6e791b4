"""Gaussian-HMM stock closing-price forecasting.

Two predictors over daily OHLCV bars: MAP search over discretized
fractional-change observations, and a successive-fluctuation baseline.
"""

from ._stockhmm import (
    ArchiveLoadResult,
    ArgumentError,
    BacktestReport,
    CsvLoadResult,
    DataError,
    DeltaObservation,
    FitConfig,
    FitReport,
    FluctModel,
    Forecast,
    ForwardResult,
    FractionalFeatures,
    GaussianHmm,
    GridSpec,
    IncrementalScorer,
    MapChoice,
    Method,
    ModelDocument,
    NumericError,
    ObservationVector,
    PredictorConfig,
    SplitSeries,
    StockBar,
    SymbolSeries,
    advance_posterior,
    build_grid,
    build_report,
    chronological_split,
    clean,
    delta_features,
    deserialize_model,
    fit_baum_welch,
    fit_fluct,
    forward_log_likelihood,
    forward_pass,
    format_report_summary,
    fractional_features,
    load_csv,
    load_json_archive,
    load_model,
    log_gaussian_density,
    mae,
    make_fluct_model,
    map_next_observation,
    mape,
    method_name,
    parse_method,
    predict_close,
    predict_close_fluct,
    predict_next_delta,
    rmse,
    rolling_forecast,
    rolling_forecast_fluct,
    save_model,
    serialize_model,
    to_matrix,
)

__version__ = "0.1.0"

__all__ = [
    "ArchiveLoadResult",
    "ArgumentError",
    "BacktestReport",
    "CsvLoadResult",
    "DataError",
    "DeltaObservation",
    "FitConfig",
    "FitReport",
    "FluctModel",
    "Forecast",
    "ForwardResult",
    "FractionalFeatures",
    "GaussianHmm",
    "GridSpec",
    "IncrementalScorer",
    "MapChoice",
    "Method",
    "ModelDocument",
    "NumericError",
    "ObservationVector",
    "PredictorConfig",
    "SplitSeries",
    "StockBar",
    "SymbolSeries",
    "advance_posterior",
    "build_grid",
    "build_report",
    "chronological_split",
    "clean",
    "delta_features",
    "deserialize_model",
    "fit_baum_welch",
    "fit_fluct",
    "forward_log_likelihood",
    "forward_pass",
    "format_report_summary",
    "fractional_features",
    "load_csv",
    "load_json_archive",
    "load_model",
    "log_gaussian_density",
    "mae",
    "make_fluct_model",
    "map_next_observation",
    "mape",
    "method_name",
    "parse_method",
    "predict_close",
    "predict_close_fluct",
    "predict_next_delta",
    "rmse",
    "rolling_forecast",
    "rolling_forecast_fluct",
    "save_model",
    "serialize_model",
    "to_matrix",
]
