#pragma once
#include <json.hpp>

#include "curveflow/chart.hpp"
#include "curveflow/flow.hpp"

namespace curveflow {

nlohmann::json to_json(const ConstantsReport& c);
nlohmann::json to_json(const Check& c);
nlohmann::json to_json(const VerifyReport& r);
nlohmann::json to_json(const FlowConfig& c);
nlohmann::json to_json(const DiagRow& r);

}  // namespace curveflow
