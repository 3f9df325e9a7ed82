#pragma once

#include <json.hpp>

#include "cpdshift/roots.hpp"
#include "cpdshift/triplet.hpp"
#include "cpdshift/wshift.hpp"

namespace cpd {

using Json = nlohmann::ordered_json;

// Parsers throw Error(InvalidSpec) on malformed input, including unknown keys.

Json to_json(const MomentSequence& seq);
MomentSequence sequence_from_json(const Json& j);

/// {"atoms": [[node, mass], ...]}, nodes ascending.
Json to_json(const AtomicMeasure& mu);
AtomicMeasure measure_from_json(const Json& j);

/// {"type": "eventually_constant", "head": [...], "tail": x}
/// | {"type": "berger", "measure": {...}} | {"type": "poly3iso", "p": [...]},
/// each with an optional global "scale".
Json to_json(const WeightedShift& t);
WeightedShift shift_from_json(const Json& j);

Json to_json(const ScalarTriplet& t);
ScalarTriplet triplet_from_json(const Json& j, const ToleranceConfig& tol = {});

Json to_json(const SubnormalityCertificate& c);
Json to_json(const ToleranceConfig& tol);
Json to_json(const Witness& w);
Json to_json(const ClassVerdict& v);
Json to_json(const NormaloidVerdict& v);
Json to_json(const ClassReport& r);
Json to_json(const RootEvidence& e);

}  // namespace cpd
