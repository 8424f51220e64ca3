#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "susym/generators.hpp"
#include "susym/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

int run_scenario_file(const std::string& path, const std::string& stages_csv, double tol,
                      int points, bool seed_set, std::uint64_t seed_flag,
                      const std::vector<double>& window, const std::string& out_dir) {
    json doc;
    try {
        std::ifstream in(path);
        if (!in) {
            std::cerr << "error: cannot open " << path << "\n";
            return 2;
        }
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        std::cerr << "error: malformed JSON in " << path << ": " << e.what() << "\n";
        return 2;
    }

    susym::Scenario sc;
    susym::Config cfg;
    std::vector<std::string> stage_override = split_csv(stages_csv);
    try {
        sc = susym::parse_scenario(doc);

        cfg.seed = sc.seed;
        if (const char* env = std::getenv("SUSY_MATRIX_SEED")) {
            try {
                cfg.seed = std::stoull(env);
            } catch (const std::exception&) {
                std::cerr << "error: SUSY_MATRIX_SEED must be a nonnegative integer\n";
                return 2;
            }
        }
        if (seed_set) cfg.seed = seed_flag;
        if (sc.window) cfg.window = *sc.window;
        if (!window.empty()) {
            if (window.size() != 2 || !(window[0] < window[1])) {
                std::cerr << "error: --window needs LO HI with LO < HI\n";
                return 2;
            }
            cfg.window = {window[0], window[1]};
        }
        if (tol > 0.0) cfg.tol_accept = tol;
        if (points > 0) cfg.sample_points = points;

        susym::effective_stages(sc, stage_override); // fail fast on bad names
    } catch (const susym::ScenarioError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        susym::RunResult rr = susym::run_scenario(sc, cfg, stage_override);

        fs::create_directories(out_dir);
        {
            std::ofstream rep(fs::path(out_dir) / "report.json");
            rep << rr.report.dump(2) << "\n";
        }
        {
            std::ofstream sum(fs::path(out_dir) / "summary.txt");
            sum << rr.summary;
        }
        {
            json meta{{"scenario_path", path},
                      {"written_at", static_cast<long long>(std::time(nullptr))}};
            std::ofstream mf(fs::path(out_dir) / "run_meta.json");
            mf << meta.dump(2) << "\n";
        }
        std::cout << rr.summary;
        return rr.pass ? 0 : 1;
    } catch (const susym::Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}

int gen_scenario(const std::string& kind, int n, int N, std::uint64_t seed, double lambda1,
                 double lambda2, const std::string& out) {
    json doc;
    if (kind == "random") {
        doc = susym::gen::random_scenario(n, N, seed);
    } else if (kind == "theorem2") {
        doc = susym::gen::theorem2_scenario(n, N, seed);
    } else if (kind == "remark9") {
        doc = susym::gen::remark9_scenario(lambda1, lambda2);
    } else if (kind == "irreducible") {
        doc = susym::gen::irreducible_scenario(n, N, seed);
    } else {
        std::cerr << "error: unsupported kind \"" << kind
                  << "\" (expected irreducible, remark9, theorem2, random)\n";
        return 2;
    }
    if (out.empty() || out == "-") {
        std::cout << doc.dump(2) << "\n";
    } else {
        std::ofstream f(out);
        if (!f) {
            std::cerr << "error: cannot write " << out << "\n";
            return 2;
        }
        f << doc.dump(2) << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"construct, factorize, minimize and verify matrix intertwining operators"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run the verification pipeline on a scenario file");
    std::string scenario_path;
    std::string stages_csv;
    double tol = -1.0;
    int points = -1;
    std::uint64_t seed_flag = 0;
    std::vector<double> window;
    std::string out_dir = ".";
    run->add_option("scenario", scenario_path, "scenario JSON file")->required();
    run->add_option("--stages", stages_csv,
                    "comma-separated subset of build,factorize,theorem2,minimize,conjugate,uniqueness");
    run->add_option("--tol", tol, "acceptance tolerance for residual checks");
    run->add_option("--points", points, "sample points per residual check");
    auto* seed_opt = run->add_option("--seed", seed_flag, "seed for all sample-point draws");
    run->add_option("--window", window, "sampling interval LO HI")->expected(2);
    run->add_option("--out-dir", out_dir, "directory for report.json / summary.txt");

    auto* gen = app.add_subcommand("gen", "emit a scenario file");
    std::string kind;
    int gn = 2, gN = 2;
    std::uint64_t gseed = 1;
    double lambda1 = 0.0, lambda2 = 1.0;
    std::string out;
    gen->add_option("kind", kind, "one of irreducible, remark9, theorem2, random")->required();
    gen->add_option("--n", gn, "matrix dimension")->check(CLI::Range(1, 6));
    gen->add_option("-N,--order", gN, "operator order")->check(CLI::Range(1, 8));
    gen->add_option("--seed", gseed, "generator seed");
    gen->add_option("--lambda1", lambda1, "first shift (remark9)");
    gen->add_option("--lambda2", lambda2, "second shift (remark9)");
    gen->add_option("--out", out, "output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (run->parsed())
        return run_scenario_file(scenario_path, stages_csv, tol, points, seed_opt->count() > 0,
                                 seed_flag, window, out_dir);
    return gen_scenario(kind, gn, gN, gseed, lambda1, lambda2, out);
}
