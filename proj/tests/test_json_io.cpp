#include "haarperm/json_io.hpp"

#include "haarperm/generators.hpp"

#include "doctest.h"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>

using namespace haarperm;

namespace {
DyadicInterval iv(int n, std::uint64_t k) { return DyadicInterval(n, k); }
} // namespace

TEST_CASE("rational formatting") {
    CHECK(format_rational(Rational(3)) == "3/1");
    CHECK(format_rational(Rational(-7, 4)) == "-7/4");
    CHECK(parse_rational("21/16") == Rational(21, 16));
    CHECK(parse_rational("5") == Rational(5));
    CHECK(parse_rational("6/-4") == Rational(-3, 2));
    CHECK_THROWS_AS(parse_rational("1/0"), ParseError);
    CHECK_THROWS_AS(parse_rational("a/2"), ParseError);
    CHECK_THROWS_AS(parse_rational(""), ParseError);
}

TEST_CASE("interval and set round trips") {
    const DyadicInterval I = interval_from_json(interval_to_json(iv(5, 19)));
    CHECK(I == iv(5, 19));
    CHECK_THROWS_AS(interval_from_json(Json::array({2, 4})), ParseError);
    CHECK_THROWS_AS(interval_from_json(Json::array({1})), ParseError);

    const IntervalSet S{iv(2, 3), iv(0, 0), iv(1, 1)};
    const Json j = interval_set_to_json(S);
    // canonical order on output regardless of construction order
    CHECK(j[0] == Json::array({0, 0}));
    CHECK(interval_set_from_json(j) == S);
    // order-insensitive input
    Json shuffled = Json::array({Json::array({2, 3}), Json::array({0, 0}), Json::array({1, 1})});
    CHECK(interval_set_from_json(shuffled) == S);
}

TEST_CASE("expansion round trip") {
    HaarExpansion x;
    x.set(iv(1, 0), Rational(-3, 8));
    x.set(iv(4, 11), Rational(7));
    CHECK(expansion_from_json(expansion_to_json(x)) == x);
    Json dup = Json::array({Json{{"interval", {1, 0}}, {"coeff", "1/2"}},
                            Json{{"interval", {1, 0}}, {"coeff", "1/3"}}});
    CHECK_THROWS_AS(expansion_from_json(dup), ParseError);
}

TEST_CASE("rearrangement round trip and duplicate rejection") {
    const Rearrangement tau = random_rearrangement(3, 99, false);
    const Json j = rearrangement_to_json(tau);
    CHECK(j.at("depth") == 3);
    CHECK(j.at("total") == true);
    const Rearrangement back = rearrangement_from_json(j);
    CHECK(back.pairs() == tau.pairs());
    CHECK(back.universe().max_depth == 3);

    Json dup = Json{{"depth", 2},
                    {"map", Json::array({Json{{"from", {1, 0}}, {"to", {1, 1}}},
                                         Json{{"from", {1, 0}}, {"to", {1, 0}}}})}};
    CHECK_THROWS_AS(rearrangement_from_json(dup), ParseError);
}

TEST_CASE("certificate round trip") {
    const Rearrangement tau = random_rearrangement(3, 7, false);
    const auto [cert, tree] =
        generational_decomposition(tau, DyadicInterval(0, 0), std::nullopt, 4);
    const PropertyPCertificate back = certificate_from_json(certificate_to_json(cert));
    CHECK(back.root == cert.root);
    CHECK(back.weak_mode == cert.weak_mode);
    REQUIRE(back.blocks.size() == cert.blocks.size());
    for (std::size_t i = 0; i < back.blocks.size(); ++i) {
        CHECK(back.blocks[i].preimage == cert.blocks[i].preimage);
        CHECK(back.blocks[i].error == cert.blocks[i].error);
    }
    CHECK(back.error_carleson == cert.error_carleson);
    CHECK(back.homogeneity == cert.homogeneity);
    CHECK(back.mass == cert.mass);
    CHECK(back.weak_sup == cert.weak_sup);
}

TEST_CASE("cascade params round trip") {
    CascadeParams p;
    p.depth = 10;
    p.stages = {{3, 4, 3}, {5, 3, 2}};
    const CascadeParams back = cascade_params_from_json(cascade_params_to_json(p));
    CHECK(back.depth == 10);
    REQUIRE(back.stages.size() == 2);
    CHECK(back.stages[1].kn_depth == 5);
    CHECK(back.stages[1].l_n == 3);
    CHECK(back.stages[1].eps_exp == 2);
}

TEST_CASE("parse errors carry line and column") {
    try {
        parse_json_text("{\n  \"a\": }\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("line 2") != std::string::npos);
    }
}

TEST_CASE("atomic file write and reload") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "haarperm_json_test";
    fs::create_directories(dir);
    const std::string path = (dir / "report.json").string();
    const Json payload{{"constant", "3/1"}, {"witness", Json::array({0, 0})}};
    write_json_file(path, payload);
    CHECK(load_json_file(path) == payload);
    CHECK(!fs::exists(path + ".tmp"));
    fs::remove_all(dir);
    CHECK_THROWS_AS(load_json_file(path), ParseError);
}
