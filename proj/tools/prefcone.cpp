// Batch interface: compile, check, report, generators and the random-instance harness.
// Machine-readable JSON goes to stdout, everything else to stderr.
// Exit codes: 0 success or consistent, 1 harness violation, 2 usage/file/validation error, 3 inconsistent.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "prefcone/harness.hpp"
#include "prefcone/session.hpp"

using namespace prefcone;

namespace {

constexpr int kExitViolation = 1;
constexpr int kExitError = 2;
constexpr int kExitInconsistent = 3;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct Loaded {
    DecisionProblem problem;
    Session session;
};

Loaded load(const std::string& problem_path, const std::string& session_path) {
    DecisionProblem problem;
    try {
        problem = load_problem(read_file(problem_path));
    } catch (const ValidationError& e) {
        throw ValidationError(problem_path + "#" + e.where(), e.rule());
    }
    try {
        auto session = load_session(read_file(session_path), &problem);
        if (session.cache_status() == CacheStatus::Rebuilt)
            std::cerr << session_path << ": cached report disagrees with replay; rebuilt\n";
        return {std::move(problem), std::move(session)};
    } catch (const ValidationError& e) {
        throw ValidationError(session_path + "#" + e.where(), e.rule());
    }
}

Json constraint_json(const Constraint& c) {
    Json j;
    j["provenance"] = describe(c.provenance);
    j["strict"] = c.strict;
    j["w"] = vector_json(c.w);
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Preference-cone inference over partially elicited multilinear utilities"};
    app.require_subcommand(1);

    std::string problem_path, session_path;
    auto add_files = [&](CLI::App* sub) {
        sub->add_option("problem", problem_path, "Problem document (.mlprob.json)")->required();
        sub->add_option("session", session_path, "Session document (.mlsess.json)")->required();
    };

    auto* compile_cmd = app.add_subcommand("compile", "Print the compiled constraint store");
    add_files(compile_cmd);

    auto* check_cmd = app.add_subcommand("check", "Consistency status and conflict core (exit 0 consistent, 3 not)");
    add_files(check_cmd);

    auto* report_cmd = app.add_subcommand("report", "Dominance and potential-optimality report");
    add_files(report_cmd);
    std::vector<std::string> pair;
    report_cmd->add_option("--pairs", pair, "Single dominance query p,q with witnesses")->delimiter(',')->expected(2);

    auto* generators_cmd = app.add_subcommand("generators", "Extreme rays and lineality space of the scaling cone");
    add_files(generators_cmd);
    std::size_t cap = kDefaultGeneratorCap;
    generators_cmd->add_option("--cap", cap, "Largest dimension to enumerate")->capture_default_str();
    bool exact = false;
    generators_cmd->add_flag("--exact", exact, "Rational arithmetic; rays printed as exact fractions");

    auto* harness_cmd = app.add_subcommand("harness", "Randomized soundness/completeness/monotonicity checks");
    harness::Options hopts;
    harness_cmd->add_option("--seed", hopts.seed, "Seed for all randomness")->capture_default_str();
    harness_cmd->add_option("--n", hopts.attributes, "Attributes per instance")
        ->check(CLI::Range(1, 4))
        ->capture_default_str();
    harness_cmd->add_option("--trials", hopts.trials, "Random instances")->capture_default_str();
    harness_cmd->add_option("--samples", hopts.samples, "Admissible scalings per instance")->capture_default_str();
    harness_cmd->add_flag("--exact", hopts.exact, "Enumerate generators in rational arithmetic");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitError;
    }

    try {
        if (harness_cmd->parsed()) {
            const auto summary = harness::run(hopts);
            for (const auto& v : summary.violations) std::cerr << v << "\n";
            Json j;
            j["seed"] = hopts.seed;
            j["n"] = hopts.attributes;
            j["trials"] = summary.trials;
            j["verdicts"] = summary.verdicts;
            j["incomparable"] = summary.incomparable;
            j["samples"] = summary.samples;
            j["violations"] = summary.violations.size();
            std::cout << canonical_dump(j);
            std::cerr << summary.trials << " trials, " << summary.verdicts << " verdicts, "
                      << summary.violations.size() << " violations\n";
            return summary.ok() ? 0 : kExitViolation;
        }

        const auto [problem, session] = load(problem_path, session_path);

        if (compile_cmd->parsed()) {
            Json j = header_json(session.id(), session.version());
            j["coordinates"] = coordinate_labels(problem);
            Json rows = Json::array();
            for (const auto& c : session.cone().constraints()) rows.push_back(constraint_json(c));
            j["constraints"] = std::move(rows);
            std::cout << canonical_dump(j);
            return 0;
        }

        if (check_cmd->parsed()) {
            const auto& f = session.feasibility();
            Json j = header_json(session.id(), session.version());
            j["consistency"] = consistency_json(f);
            std::cout << canonical_dump(j);
            std::cerr << to_string(f.status);
            if (!f.conflict.empty()) {
                std::cerr << "; conflict core:";
                for (const auto& id : f.conflict) std::cerr << " " << id;
            }
            std::cerr << "\n";
            if (f.status == ConsistencyStatus::Indeterminate) return kExitError;
            return f.consistent() ? 0 : kExitInconsistent;
        }

        if (report_cmd->parsed()) {
            if (!pair.empty()) {
                std::cout << canonical_dump(session.dominance(pair[0], pair[1]));
                return session.feasibility().consistent() ? 0 : kExitInconsistent;
            }
            std::cout << canonical_dump(session.report());
            return 0;
        }

        if (generators_cmd->parsed()) {
            Json j = header_json(session.id(), session.version());
            j["dimension"] = problem.dimension();
            j["coordinates"] = coordinate_labels(problem);
            j["generators"] = exact ? generators_json(dual_generators_exact(session.cone().constraints(), {cap}))
                                    : generators_json(dual_generators(session.cone().constraints(), {cap}));
            std::cout << canonical_dump(j);
            return 0;
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
