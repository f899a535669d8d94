#pragma once

#include "weaknas/predictor.hpp"

namespace weaknas::detail {

FittedPredictor fit_gbrt(const FeatureMatrix& features, std::span<const double> targets, const PredictorConfig& config);
FittedPredictor fit_forest(const FeatureMatrix& features, std::span<const double> targets,
                           const PredictorConfig& config);
FittedPredictor fit_mlp(const FeatureMatrix& features, std::span<const double> targets, const PredictorConfig& config);

}  // namespace weaknas::detail
