#ifndef HAARPERM_JSON_IO_HPP
#define HAARPERM_JSON_IO_HPP

#include "haarperm/bmo.hpp"
#include "haarperm/decompose.hpp"
#include "haarperm/dyadic.hpp"
#include "haarperm/generators.hpp"
#include "haarperm/norms.hpp"
#include "haarperm/rearrangement.hpp"

#include <nlohmann/json_fwd.hpp>

#include <string>

namespace haarperm {

using Json = nlohmann::json;

// Encodings are stable: intervals are [n, k] pairs, interval sets arrays of
// pairs in canonical order, rationals "p/q" decimal strings.

Json interval_to_json(const DyadicInterval& I);
DyadicInterval interval_from_json(const Json& j);

Json interval_set_to_json(const IntervalSet& S);
IntervalSet interval_set_from_json(const Json& j);

Json expansion_to_json(const HaarExpansion& x);
HaarExpansion expansion_from_json(const Json& j);

Json squares_to_json(const CoeffSquares& s);
CoeffSquares squares_from_json(const Json& j);

Json rearrangement_to_json(const Rearrangement& tau);
Rearrangement rearrangement_from_json(const Json& j);

Json certificate_to_json(const PropertyPCertificate& cert);
PropertyPCertificate certificate_from_json(const Json& j);

Json cascade_params_to_json(const CascadeParams& p);
CascadeParams cascade_params_from_json(const Json& j);

Json stage_reports_to_json(const CascadeBundle& bundle);

Json carleson_report_to_json(const CarlesonReport& r);
Json verdict_to_json(const VerifyVerdict& v);
Json sandwich_report_to_json(const SandwichReport& r);
Json generation_tree_to_json(const GenerationTree& t);

/// Parses text, mapping nlohmann's byte offsets to line/column in errors.
Json parse_json_text(const std::string& text);

/// Reads and parses a file; errors carry the path and line/column.
Json load_json_file(const std::string& path);

/// Serializes with 2-space indentation and writes atomically (temp file in
/// the target directory, then rename).
void write_json_file(const std::string& path, const Json& j);

} // namespace haarperm

#endif
