// haarperm command line: exact Carleson/BMO computation, stopping-time
// decompositions and verifiers, norm-bound oracles, and generators for
// rearrangements of the Haar system on a truncated dyadic universe.
//
// Exit codes: 0 success, 1 validation or usage failure, 2 a verifier ran
// and the property failed (the report is still written).

#include "haarperm/bmo.hpp"
#include "haarperm/decompose.hpp"
#include "haarperm/errors.hpp"
#include "haarperm/generators.hpp"
#include "haarperm/json_io.hpp"
#include "haarperm/norms.hpp"
#include "haarperm/rearrangement.hpp"

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace haarperm;

struct CommonOpts {
    std::string input;
    std::string tau_path;
    std::string certificate;
    std::string out;
    std::string format = "json";
    std::string mode = "exhaustive";
    std::string A = "2";
    int K = 1;
    int depth = -1;
    long budget = 0;
    std::uint64_t seed = 0;
    bool level_preserving = false;
};

void emit(const CommonOpts& opts, const Json& report) {
    if (!opts.out.empty()) {
        write_json_file(opts.out, report);
        return;
    }
    if (opts.format == "table") {
        // flat "key: value" lines for quick reading
        for (const auto& [key, value] : report.items()) {
            std::cout << key << ": " << value.dump() << "\n";
        }
    } else {
        std::cout << report.dump(2) << "\n";
    }
}

Rearrangement load_tau(const CommonOpts& opts) {
    if (opts.tau_path.empty()) throw ParamError("--tau is required");
    Rearrangement tau = rearrangement_from_json(load_json_file(opts.tau_path));
    if (opts.depth >= 0 && tau.universe().max_depth != opts.depth) {
        throw ValidationError("--depth " + std::to_string(opts.depth) +
                              " does not match the rearrangement universe depth " +
                              std::to_string(tau.universe().max_depth));
    }
    return tau;
}

void check_depth(const CommonOpts& opts, const IntervalSet& S, const std::string& what) {
    if (opts.depth < 0) return;
    for (const auto& I : S) {
        if (I.depth > opts.depth) {
            throw ValidationError(what + " interval " + I.to_string() +
                                  " exceeds --depth " + std::to_string(opts.depth));
        }
    }
}

int run_carleson(const CommonOpts& opts) {
    const IntervalSet S = interval_set_from_json(load_json_file(opts.input));
    check_depth(opts, S, "input");
    emit(opts, carleson_report_to_json(carleson_constant(S)));
    return 0;
}

int run_bmo(const CommonOpts& opts) {
    const HaarExpansion x = expansion_from_json(load_json_file(opts.input));
    check_depth(opts, x.support(), "input");
    const Rational nsq = bmo_norm_sq(x);
    emit(opts, Json{{"norm_sq", format_rational(nsq)}, {"norm", rational_sqrt(nsq)}});
    return 0;
}

int run_decompose(const CommonOpts& opts) {
    const Rearrangement tau = load_tau(opts);
    const Json in = load_json_file(opts.input);
    if (!in.is_object() || !in.contains("J")) {
        throw ParseError("decompose input must carry \"J\" (and optional \"family\")");
    }
    const DyadicInterval J = interval_from_json(in.at("J"));
    std::optional<IntervalSet> family;
    if (in.contains("family") && !(in.at("family").is_string() &&
                                   in.at("family").get<std::string>() == "all")) {
        family = interval_set_from_json(in.at("family"));
    }
    const Rational A = parse_rational(opts.A);
    auto [cert, tree] = generational_decomposition(tau, J, family, A);
    emit(opts, Json{{"certificate", certificate_to_json(cert)},
                    {"tree", generation_tree_to_json(tree)}});
    return 0;
}

int run_verify(const CommonOpts& opts) {
    const Rearrangement tau = load_tau(opts);
    if (opts.certificate.empty()) throw ParamError("--certificate is required");
    const PropertyPCertificate cert = certificate_from_json(load_json_file(opts.certificate));
    VerifyVerdict verdict;
    if (cert.weak_mode) {
        if (opts.input.empty()) {
            throw ParamError("weak certificates need --input with the restricted family");
        }
        const IntervalSet B = interval_set_from_json(load_json_file(opts.input));
        verdict = verify_weak_property_p(tau, B, cert.root, cert);
    } else {
        verdict = verify_property_p(tau, cert.root, cert);
    }
    emit(opts, verdict_to_json(verdict));
    return verdict.structural_ok ? 0 : 2;
}

int run_split_jones(const CommonOpts& opts) {
    const IntervalSet B = interval_set_from_json(load_json_file(opts.input));
    check_depth(opts, B, "input");
    Json parts = Json::array();
    for (const auto& part : jones_split(B)) {
        parts.push_back(interval_set_to_json(part));
    }
    emit(opts, Json{{"parts", std::move(parts)}});
    return 0;
}

int run_split_coeff(const CommonOpts& opts) {
    const Rearrangement tau = load_tau(opts);
    const Json in = load_json_file(opts.input);
    if (!in.is_object() || !in.contains("J") || !in.contains("squares")) {
        throw ParseError("coefficient split input must carry \"J\" and \"squares\"");
    }
    const DyadicInterval J = interval_from_json(in.at("J"));
    const CoeffSquares squares = squares_from_json(in.at("squares"));
    Json classes = Json::array();
    for (const auto& cls : coefficient_split(squares, opts.K, J, tau)) {
        classes.push_back(interval_set_to_json(cls));
    }
    emit(opts, Json{{"classes", std::move(classes)}});
    return 0;
}

int run_bounds(const CommonOpts& opts) {
    const Rearrangement tau = load_tau(opts);
    const bool exhaustive = opts.mode == "exhaustive";
    const SandwichReport rep =
        sandwich(tau, exhaustive, static_cast<int>(opts.budget), opts.seed);
    emit(opts, sandwich_report_to_json(rep));
    return 0;
}

int run_example(const CommonOpts& opts) {
    const CascadeParams params = cascade_params_from_json(load_json_file(opts.input));
    const CascadeBundle bundle = build_cascade(params);
    if (opts.out.empty()) throw ParamError("--out directory is required");
    namespace fs = std::filesystem;
    fs::create_directories(opts.out);
    const fs::path dir(opts.out);
    write_json_file((dir / "rho.json").string(), rearrangement_to_json(bundle.rho));
    write_json_file((dir / "sigma.json").string(), rearrangement_to_json(bundle.sigma));
    write_json_file((dir / "tau.json").string(), rearrangement_to_json(bundle.tau));
    write_json_file((dir / "stage_report.json").string(), stage_reports_to_json(bundle));
    std::cout << "bundle written to " << dir.string() << "\n";
    return 0;
}

int run_random(const CommonOpts& opts) {
    if (opts.depth < 0) throw ParamError("--depth is required");
    const Rearrangement tau = random_rearrangement(opts.depth, opts.seed, opts.level_preserving);
    emit(opts, rearrangement_to_json(tau));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"rearrangements of the Haar system on dyadic BMO: exact "
                 "Carleson/BMO computation, decompositions, verifiers, "
                 "norm oracles and generators"};
    app.require_subcommand(1);

    CommonOpts opts;
    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--input", opts.input, "input artifact path");
        cmd->add_option("--tau", opts.tau_path, "rearrangement file");
        cmd->add_option("--certificate", opts.certificate, "certificate file");
        cmd->add_option("--depth", opts.depth, "universe depth consistency check");
        cmd->add_option("--A", opts.A, "threshold parameter, rational \"p/q\"");
        cmd->add_option("--K", opts.K, "number of classes for the coefficient split");
        cmd->add_option("--seed", opts.seed, "random seed");
        cmd->add_option("--budget", opts.budget, "search budget");
        cmd->add_option("--mode", opts.mode, "exhaustive|greedy")
            ->check(CLI::IsMember({"exhaustive", "greedy"}));
        cmd->add_option("--out", opts.out, "output path (stdout when absent)");
        cmd->add_option("--format", opts.format, "json|table")
            ->check(CLI::IsMember({"json", "table"}));
    };

    auto* carleson = app.add_subcommand("carleson", "Carleson constant of a collection");
    add_common(carleson);
    auto* bmo = app.add_subcommand("bmo", "BMO norm of a Haar expansion");
    add_common(bmo);
    auto* decompose = app.add_subcommand("decompose", "generational decomposition under J");
    add_common(decompose);
    auto* verify = app.add_subcommand("verify", "verify a decomposition certificate");
    add_common(verify);
    auto* split = app.add_subcommand("split", "collection and coefficient splittings");
    split->require_subcommand(1);
    auto* split_jones = split->add_subcommand("jones", "density peeling into parts with constant <= 4");
    add_common(split_jones);
    auto* split_coeff = split->add_subcommand("coeff", "scale-wise round robin into K classes");
    add_common(split_coeff);
    auto* bounds = app.add_subcommand("bounds", "distortion / operator norm sandwich");
    add_common(bounds);
    auto* example = app.add_subcommand("example", "example constructions");
    example->require_subcommand(1);
    auto* section5 = example->add_subcommand("section5", "multi-stage slot construction bundle");
    add_common(section5);
    auto* random_cmd = app.add_subcommand("random", "seeded random rearrangement");
    add_common(random_cmd);
    random_cmd->add_flag("--level-preserving", opts.level_preserving,
                         "permute inside each level only");

    CLI11_PARSE(app, argc, argv);

    try {
        if (carleson->parsed()) return run_carleson(opts);
        if (bmo->parsed()) return run_bmo(opts);
        if (decompose->parsed()) return run_decompose(opts);
        if (verify->parsed()) return run_verify(opts);
        if (split->parsed()) {
            if (split_jones->parsed()) return run_split_jones(opts);
            if (split_coeff->parsed()) return run_split_coeff(opts);
        }
        if (bounds->parsed()) return run_bounds(opts);
        if (example->parsed() && section5->parsed()) return run_example(opts);
        if (random_cmd->parsed()) return run_random(opts);
        std::cerr << "no subcommand selected\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}
