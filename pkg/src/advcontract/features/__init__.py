"""Deployment and implementation features, and their numeric encoding."""

from advcontract.features.deployment import (
    NotADeploymentError,
    compute_rescue_window,
    extract_deployment_features,
    rescue_missed,
)
from advcontract.features.encode import (
    NUMERIC_COLUMNS,
    NormalizerStats,
    decode_category,
    encode,
    encode_many,
    feature_names,
    fit_normalizer,
)
from advcontract.features.implementation import FeatureConfig, extract_implementation_features, reachable_statements
from advcontract.features.model import DeploymentFeatures, FeatureRecord, ImplementationFeatures

__all__ = [
    "NUMERIC_COLUMNS",
    "DeploymentFeatures",
    "FeatureConfig",
    "FeatureRecord",
    "ImplementationFeatures",
    "NormalizerStats",
    "NotADeploymentError",
    "compute_rescue_window",
    "decode_category",
    "encode",
    "encode_many",
    "extract_deployment_features",
    "extract_implementation_features",
    "feature_names",
    "fit_normalizer",
    "reachable_statements",
    "rescue_missed",
]
