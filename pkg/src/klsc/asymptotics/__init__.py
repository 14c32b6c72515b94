"""Series expansions at the origin, cone models and regularity."""

from .expansion import (
    ConeModel,
    RegularityReport,
    aligned_constant,
    cone_model,
    expansion,
    formal_antiderivative,
    formal_constant_offset,
    leading_order,
    log_obstruction,
    magnitude,
    metric_expansion,
    omitted_terms,
    quotient_check,
    r_exponent,
    regularity_class,
    taylor_series_at_zero,
)
from .series import LogTaylorSeries, require_taylor

__all__ = [
    "ConeModel", "LogTaylorSeries", "RegularityReport", "aligned_constant", "cone_model", "expansion",
    "formal_antiderivative", "formal_constant_offset", "leading_order", "log_obstruction",
    "magnitude", "metric_expansion", "omitted_terms", "quotient_check", "r_exponent", "regularity_class", "require_taylor",
    "taylor_series_at_zero",
]
