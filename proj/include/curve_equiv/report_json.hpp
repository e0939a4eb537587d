// JSON views of the result records (nlohmann::json ADL serializers).
#pragma once

#include "curve_equiv/fit.hpp"
#include "curve_equiv/report.hpp"
#include "curve_equiv/simstudy.hpp"
#include "json.hpp"

namespace curve_equiv {

void to_json(nlohmann::json& j, const Interval& v);
void to_json(nlohmann::json& j, const FittedGroup& v);
void to_json(nlohmann::json& j, const FittedPair& v);
void to_json(nlohmann::json& j, const CiReport& v);
void to_json(nlohmann::json& j, const TestReport& v);
void to_json(nlohmann::json& j, const MethodOC& v);
void to_json(nlohmann::json& j, const Scenario& v);
void to_json(nlohmann::json& j, const OperatingCharacteristics& v);

}  // namespace curve_equiv
