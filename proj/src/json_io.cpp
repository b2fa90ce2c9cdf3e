#include "haarperm/json_io.hpp"

#include "haarperm/errors.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace haarperm {

namespace {

[[noreturn]] void shape_error(const std::string& what) {
    throw ParseError(what);
}

std::uint64_t expect_u64(const Json& j, const std::string& what) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0)) {
        shape_error(what + " must be a nonnegative integer");
    }
    return j.get<std::uint64_t>();
}

int expect_int(const Json& j, const std::string& what) {
    if (!j.is_number_integer()) shape_error(what + " must be an integer");
    return j.get<int>();
}

Rational rational_field(const Json& j, const std::string& what) {
    if (!j.is_string()) shape_error(what + " must be a \"p/q\" string");
    return parse_rational(j.get<std::string>());
}

} // namespace

Json interval_to_json(const DyadicInterval& I) {
    return Json::array({I.depth, I.index});
}

DyadicInterval interval_from_json(const Json& j) {
    if (!j.is_array() || j.size() != 2) {
        shape_error("interval must be a two-element array [n, k]");
    }
    const int n = expect_int(j[0], "interval depth");
    const std::uint64_t k = expect_u64(j[1], "interval index");
    try {
        return DyadicInterval(n, k);
    } catch (const ValidationError& e) {
        shape_error(e.what());
    }
}

Json interval_set_to_json(const IntervalSet& S) {
    Json arr = Json::array();
    for (const auto& I : S) arr.push_back(interval_to_json(I));
    return arr;
}

IntervalSet interval_set_from_json(const Json& j) {
    if (!j.is_array()) shape_error("interval set must be an array of [n, k] pairs");
    std::vector<DyadicInterval> items;
    items.reserve(j.size());
    for (const auto& e : j) items.push_back(interval_from_json(e));
    return IntervalSet(std::move(items));
}

Json expansion_to_json(const HaarExpansion& x) {
    Json arr = Json::array();
    for (const auto& [I, c] : x.coefficients()) {
        arr.push_back(Json{{"interval", interval_to_json(I)}, {"coeff", format_rational(c)}});
    }
    return arr;
}

HaarExpansion expansion_from_json(const Json& j) {
    if (!j.is_array()) shape_error("expansion must be an array of {interval, coeff} objects");
    HaarExpansion x;
    for (const auto& e : j) {
        if (!e.is_object() || !e.contains("interval") || !e.contains("coeff")) {
            shape_error("expansion entry must carry \"interval\" and \"coeff\"");
        }
        const DyadicInterval I = interval_from_json(e.at("interval"));
        const Rational c = rational_field(e.at("coeff"), "coefficient");
        if (x.coeff(I) != 0) shape_error("duplicate expansion interval " + I.to_string());
        x.set(I, c);
    }
    return x;
}

Json squares_to_json(const CoeffSquares& s) {
    Json arr = Json::array();
    for (const auto& [I, v] : s) {
        arr.push_back(Json{{"interval", interval_to_json(I)}, {"value", format_rational(v)}});
    }
    return arr;
}

CoeffSquares squares_from_json(const Json& j) {
    if (!j.is_array()) shape_error("squares must be an array of {interval, value} objects");
    CoeffSquares s;
    for (const auto& e : j) {
        if (!e.is_object() || !e.contains("interval") || !e.contains("value")) {
            shape_error("squares entry must carry \"interval\" and \"value\"");
        }
        const DyadicInterval I = interval_from_json(e.at("interval"));
        if (s.count(I)) shape_error("duplicate squares interval " + I.to_string());
        s.emplace(I, rational_field(e.at("value"), "squared coefficient"));
    }
    return s;
}

Json rearrangement_to_json(const Rearrangement& tau) {
    Json map = Json::array();
    for (const auto& [from, to] : tau.pairs()) {
        map.push_back(Json{{"from", interval_to_json(from)}, {"to", interval_to_json(to)}});
    }
    return Json{{"depth", tau.universe().max_depth},
                {"total", tau.total()},
                {"map", std::move(map)}};
}

Rearrangement rearrangement_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("depth") || !j.contains("map")) {
        shape_error("rearrangement must carry \"depth\" and \"map\"");
    }
    const Universe U(expect_int(j.at("depth"), "depth"));
    if (!j.at("map").is_array()) shape_error("\"map\" must be an array");
    std::vector<Rearrangement::Pair> pairs;
    std::set<std::pair<int, std::uint64_t>> froms;
    for (const auto& e : j.at("map")) {
        if (!e.is_object() || !e.contains("from") || !e.contains("to")) {
            shape_error("map entry must carry \"from\" and \"to\"");
        }
        const DyadicInterval from = interval_from_json(e.at("from"));
        if (!froms.emplace(from.depth, from.index).second) {
            shape_error("duplicate \"from\" interval " + from.to_string());
        }
        pairs.emplace_back(from, interval_from_json(e.at("to")));
    }
    return Rearrangement::validate(U, std::move(pairs));
}

Json certificate_to_json(const PropertyPCertificate& cert) {
    Json blocks = Json::array();
    for (const auto& b : cert.blocks) {
        blocks.push_back(Json{{"L", interval_set_to_json(b.preimage)},
                              {"E", interval_set_to_json(b.error)}});
    }
    return Json{{"root", interval_to_json(cert.root)},
                {"mode", cert.weak_mode ? "weak" : "strong"},
                {"blocks", std::move(blocks)},
                {"constants",
                 Json{{"error_carleson", format_rational(cert.error_carleson)},
                      {"homogeneity", format_rational(cert.homogeneity)},
                      {"mass", format_rational(cert.mass)},
                      {"weak_sup", format_rational(cert.weak_sup)}}}};
}

PropertyPCertificate certificate_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("root") || !j.contains("mode") || !j.contains("blocks")) {
        shape_error("certificate must carry \"root\", \"mode\" and \"blocks\"");
    }
    PropertyPCertificate cert;
    cert.root = interval_from_json(j.at("root"));
    const std::string mode = j.at("mode").is_string() ? j.at("mode").get<std::string>() : "";
    if (mode == "strong") {
        cert.weak_mode = false;
    } else if (mode == "weak") {
        cert.weak_mode = true;
    } else {
        shape_error("certificate mode must be \"strong\" or \"weak\"");
    }
    if (!j.at("blocks").is_array()) shape_error("\"blocks\" must be an array");
    for (const auto& b : j.at("blocks")) {
        if (!b.is_object() || !b.contains("L") || !b.contains("E")) {
            shape_error("certificate block must carry \"L\" and \"E\"");
        }
        cert.blocks.push_back(
            {interval_set_from_json(b.at("L")), interval_set_from_json(b.at("E"))});
    }
    if (j.contains("constants") && j.at("constants").is_object()) {
        const Json& c = j.at("constants");
        auto opt = [&](const char* key) {
            return c.contains(key) && c.at(key).is_string()
                       ? parse_rational(c.at(key).get<std::string>())
                       : Rational(0);
        };
        cert.error_carleson = opt("error_carleson");
        cert.homogeneity = opt("homogeneity");
        cert.mass = opt("mass");
        cert.weak_sup = opt("weak_sup");
    }
    return cert;
}

Json cascade_params_to_json(const CascadeParams& p) {
    Json stages = Json::array();
    for (const auto& s : p.stages) {
        stages.push_back(
            Json{{"kn_depth", s.kn_depth}, {"l_n", s.l_n}, {"eps_exp", s.eps_exp}});
    }
    return Json{{"depth", p.depth}, {"stages", std::move(stages)}};
}

CascadeParams cascade_params_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("depth") || !j.contains("stages")) {
        shape_error("parameters must carry \"depth\" and \"stages\"");
    }
    CascadeParams p;
    p.depth = expect_int(j.at("depth"), "depth");
    if (!j.at("stages").is_array()) shape_error("\"stages\" must be an array");
    for (const auto& s : j.at("stages")) {
        if (!s.is_object() || !s.contains("kn_depth") || !s.contains("l_n") ||
            !s.contains("eps_exp")) {
            shape_error("stage must carry \"kn_depth\", \"l_n\" and \"eps_exp\"");
        }
        p.stages.push_back({expect_int(s.at("kn_depth"), "kn_depth"),
                            expect_int(s.at("l_n"), "l_n"),
                            expect_int(s.at("eps_exp"), "eps_exp")});
    }
    return p;
}

namespace {

Json extension_to_json(const ExtensionStats& s) {
    return Json{{"identity", s.identity}, {"first_fit", s.first_fit}, {"skipped", s.skipped}};
}

} // namespace

Json stage_reports_to_json(const CascadeBundle& bundle) {
    Json stages = Json::array();
    for (const auto& r : bundle.stages) {
        Json covers = Json::array();
        for (const auto& c : r.generation_covers) covers.push_back(c.to_string());
        stages.push_back(Json{{"kn_depth", r.used.kn_depth},
                              {"l_n", r.used.l_n},
                              {"l_n_default", r.l_n_default},
                              {"eps_exp", r.used.eps_exp},
                              {"K_n", interval_to_json(r.base)},
                              {"S_n", interval_to_json(r.compressed)},
                              {"generation_covers", std::move(covers)},
                              {"slot_mass", r.slot_mass.to_string()},
                              {"cumulative_slot_mass", r.cumulative_mass.to_string()}});
    }
    return Json{{"stages", std::move(stages)},
                {"extension",
                 Json{{"rho", extension_to_json(bundle.rho_extension)},
                      {"sigma", extension_to_json(bundle.sigma_extension)},
                      {"tau", extension_to_json(bundle.tau_extension)}}}};
}

Json carleson_report_to_json(const CarlesonReport& r) {
    Json j{{"constant", format_rational(r.constant)}};
    j["witness"] = r.witness ? interval_to_json(*r.witness) : Json(nullptr);
    if (!r.per_interval_sums.empty()) {
        Json sums = Json::array();
        for (const auto& [J, s] : r.per_interval_sums) {
            sums.push_back(Json{{"interval", interval_to_json(J)}, {"sum", format_rational(s)}});
        }
        j["per_interval_sums"] = std::move(sums);
    }
    return j;
}

Json verdict_to_json(const VerifyVerdict& v) {
    Json j{{"structural_ok", v.structural_ok}, {"message", v.message}};
    j["offending"] = v.offending ? interval_to_json(*v.offending) : Json(nullptr);
    Json constants{{"error_carleson", format_rational(v.error_carleson)},
                   {"homogeneity", format_rational(v.homogeneity)},
                   {"mass", format_rational(v.mass)},
                   {"overall", format_rational(v.overall)}};
    constants["weak_sup"] = v.weak_sup ? Json(format_rational(*v.weak_sup)) : Json(nullptr);
    j["constants"] = std::move(constants);
    return j;
}

Json sandwich_report_to_json(const SandwichReport& r) {
    return Json{{"distortion", format_rational(r.distortion)},
                {"witness", interval_set_to_json(r.distortion_witness)},
                {"lower_bound", r.lower_bound},
                {"upper_bound_sq", format_rational(r.upper_bound_sq)},
                {"certified", r.certified}};
}

Json generation_tree_to_json(const GenerationTree& t) {
    Json gens = Json::array();
    for (const auto& g : t.generations) gens.push_back(interval_set_to_json(g));
    Json nodes = Json::array();
    for (const auto& n : t.nodes) {
        Json trace = Json::array();
        for (const auto& e : n.result.trace) trace.push_back(e.to_string());
        nodes.push_back(Json{{"node", interval_to_json(n.node)},
                             {"generation", n.generation},
                             {"red", interval_set_to_json(n.result.red)},
                             {"green", interval_set_to_json(n.result.green)},
                             {"trace", std::move(trace)}});
    }
    return Json{{"generations", std::move(gens)},
                {"nodes", std::move(nodes)},
                {"nesting_ok", t.nesting_ok},
                {"packing_ok", t.packing_ok},
                {"violation", t.violation}};
}

Json parse_json_text(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        // Map the byte offset to line/column for the error message.
        std::size_t line = 1, col = 1;
        const std::size_t upto = std::min(text.size(), e.byte > 0 ? e.byte - 1 : 0);
        for (std::size_t i = 0; i < upto; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ParseError("malformed JSON at line " + std::to_string(line) + ", column " +
                         std::to_string(col) + ": " + e.what());
    }
}

Json load_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_json_text(buf.str());
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void write_json_file(const std::string& path, const Json& j) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) {
        fs::create_directories(target.parent_path());
    }
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << j.dump(2) << "\n";
    }
    fs::rename(tmp, target);
}

} // namespace haarperm
