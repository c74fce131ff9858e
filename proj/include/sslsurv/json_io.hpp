#pragma once

#include "sslsurv/combine.hpp"
#include "sslsurv/inference.hpp"
#include "sslsurv/pipeline.hpp"
#include "sslsurv/scores.hpp"
#include "sslsurv/simulate.hpp"
#include "sslsurv/study.hpp"
#include "sslsurv/supervised.hpp"

#include <json.hpp>

#include <string>

namespace sslsurv {

using Json = nlohmann::json;

//! Coordinates are reported one-based in every serialized form.
Json to_json(const Vector& v);
Json to_json(const SupervisedFit& fit);
Json to_json(const ScoreBundle& bundle);
Json to_json(const CombinationWeights& weights);
Json to_json(const SslFit& fit);
Json to_json(const InferenceReport& report);
Json to_json(const GroundTruth& truth);
Json to_json(const StudyConfig& config);
Json to_json(const MetricsTable& table);
Json to_json(const FitResult& result);

Vector vector_from_json(const Json& j);
//! Reads the "ssl" block written for an SslFit (replicates included).
SslFit ssl_fit_from_json(const Json& j);

//! coord,Est,SE,CI_lower,CI_upper,PVal,conservative
std::string inference_csv(const InferenceReport& report);

} // namespace sslsurv
