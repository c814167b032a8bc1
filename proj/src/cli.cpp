#include "bipcover/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "bipcover/asymptotics.hpp"
#include "bipcover/bounds.hpp"
#include "bipcover/checks.hpp"
#include "bipcover/coalescent.hpp"
#include "bipcover/errors.hpp"
#include "bipcover/mscsim.hpp"
#include "bipcover/newick.hpp"
#include "bipcover/parallel.hpp"
#include "bipcover/treegen.hpp"

namespace bipcover {
namespace {

using json = nlohmann::ordered_json;

constexpr const char* kSchemaLine = "# schema=1\n";

// Shortest round-trip representation.
std::string num(double x) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return ec == std::errc{} ? std::string(buf, p) : std::string("nan");
}

std::string csv_field(std::string s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + '"';
}

unsigned resolve_threads(int requested) {
    if (requested > 0) return static_cast<unsigned>(requested);
    if (const char* env = std::getenv("BIPCOVER_THREADS")) {
        int n = 0;
        auto [p, ec] = std::from_chars(env, env + std::char_traits<char>::length(env), n);
        if (ec == std::errc{} && *p == '\0' && n > 0) return static_cast<unsigned>(n);
        throw DomainError("BIPCOVER_THREADS must be a positive integer");
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, sep);)
        if (!item.empty()) out.push_back(item);
    return out;
}

int parse_int(const std::string& s) {
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) throw DomainError("not an integer: '" + s + "'");
    return v;
}

double parse_double(const std::string& s) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) throw DomainError("not a number: '" + s + "'");
    return v;
}

// "4,6,8" or "4:20" (inclusive) or a mix.
std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    for (const auto& item : split(s, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) {
            out.push_back(parse_int(item));
            continue;
        }
        const int lo = parse_int(item.substr(0, colon)), hi = parse_int(item.substr(colon + 1));
        if (hi < lo) throw DomainError("empty range '" + item + "'");
        for (int v = lo; v <= hi; ++v) out.push_back(v);
    }
    if (out.empty()) throw DomainError("empty list");
    return out;
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    for (const auto& item : split(s, ',')) out.push_back(parse_double(item));
    if (out.empty()) throw DomainError("empty list");
    return out;
}

// Writes to `path` or, when empty or "-", to `out`.
void emit(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DomainError("cannot open '" + path + "' for writing");
    f << text;
    if (!f) throw DomainError("failed writing '" + path + "'");
}

struct BoundsArgs {
    int k = 0;
    double t = 0.0;
    double q = 0.9;
};

int cmd_bounds(const BoundsArgs& a, std::ostream& out) {
    const BoundSpec spec{a.k, a.t, a.q};
    const BoundReport r = compute_bounds(spec);
    json j;
    j["k"] = spec.k;
    j["t_min"] = spec.t_min;
    j["q"] = spec.q;
    j["m_o"] = r.m_o;
    j["m_c"] = r.m_c;
    j["m_s"] = r.m_s;
    j["m_b"] = r.m_b;
    j["m_o_real"] = r.m_o_real;
    j["ratio_c"] = static_cast<double>(r.m_o) / static_cast<double>(r.m_c);
    j["ratio_s"] = static_cast<double>(r.m_o) / static_cast<double>(r.m_s);
    j["ratio_b"] = static_cast<double>(r.m_o) / static_cast<double>(r.m_b);
    j["balanced_envelope"] = balanced_envelope(spec);
    out << j.dump(2) << '\n';
    return 0;
}

struct SweepArgs {
    std::string ks = "4:20";
    std::string ts = "0.05,0.1,0.2,0.5,1,2";
    std::string qs = "0.9";
    std::string output;
    int threads = 0;
};

int cmd_sweep(const SweepArgs& a, std::ostream& out, std::ostream& err) {
    const auto ks = parse_int_list(a.ks);
    const auto ts = parse_double_list(a.ts);
    const auto qs = parse_double_list(a.qs);
    struct Cell {
        BoundSpec spec;
        std::string row;
        bool failed = false;
    };
    std::vector<Cell> cells;
    for (int k : ks)
        for (double t : ts)
            for (double q : qs) cells.push_back({BoundSpec{k, t, q}, {}, false});

    parallel_for(cells.size(), resolve_threads(a.threads), [&](std::size_t i) {
        Cell& c = cells[i];
        const std::string head = std::to_string(c.spec.k) + ',' + num(c.spec.t_min) + ',' + num(c.spec.q) + ',';
        try {
            const BoundReport r = compute_bounds(c.spec);
            auto ratio = [&](std::uint64_t m) { return num(static_cast<double>(r.m_o) / static_cast<double>(m)); };
            c.row = head + std::to_string(r.m_o) + ',' + std::to_string(r.m_c) + ',' + std::to_string(r.m_s) + ',' +
                    std::to_string(r.m_b) + ',' + ratio(r.m_c) + ',' + ratio(r.m_s) + ',' + ratio(r.m_b) + ",\n";
        } catch (const Error& e) {
            c.failed = true;
            c.row = head + ",,,,,,," + csv_field(e.what()) + '\n';
        }
    });

    std::string text = kSchemaLine;
    text += "k,t_min,q,m_o,m_c,m_s,m_b,ratio_c,ratio_s,ratio_b,error\n";
    std::size_t failed = 0;
    for (const Cell& c : cells) {
        text += c.row;
        failed += c.failed;
    }
    emit(a.output, text, out);
    if (failed == cells.size()) {
        err << "error: every sweep cell failed\n";
        return 2;
    }
    if (failed > 0) err << "warning: " << failed << " of " << cells.size() << " cells failed; see the error column\n";
    return 0;
}

struct SimulateArgs {
    std::string tree = "caterpillar";
    std::string newick_file;
    int k = 8;
    double t = 1.0;
    double q = 0.9;
    int trials = 10000;
    std::uint64_t seed = 1;
    int replicates = 1;
    std::uint64_t max_genes = kDefaultGeneCap;
    std::string output;
    int threads = 0;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
    if (a.replicates < 1) throw DomainError("--replicates must be at least 1");
    if (a.replicates > 1 && a.tree != "yule") throw DomainError("--replicates only applies to yule trees");
    const unsigned threads = resolve_threads(a.threads);

    std::optional<SpeciesTree> fixed;
    if (a.tree == "caterpillar") {
        fixed = caterpillar(a.k, a.t);
    } else if (a.tree == "balanced") {
        fixed = balanced(a.k, a.t);
    } else if (a.tree == "newick") {
        if (a.newick_file.empty()) throw DomainError("--tree newick needs --newick-file");
        std::ifstream f(a.newick_file);
        if (!f) throw DomainError("cannot read '" + a.newick_file + "'");
        std::stringstream ss;
        ss << f.rdbuf();
        fixed = parse_newick(ss.str());
    } else if (a.tree != "yule") {
        throw DomainError("unknown tree kind '" + a.tree + "' (caterpillar, balanced, yule, newick)");
    }

    std::string text = kSchemaLine;
    text += "tree_kind,k,t_min,q,trials,seed,n_e,m_o,m_b,ratio_o,ratio_b,capped,error\n";
    int failed = 0;
    for (int r = 0; r < a.replicates; ++r) {
        const std::uint64_t seed = a.tree == "yule" && a.replicates > 1 ? derive_seed(a.seed, static_cast<std::uint64_t>(r)) : a.seed;
        const SpeciesTree tree = fixed ? *fixed : yule(a.k, a.t, seed);
        const int k = tree.leaf_count();
        const double t_min = tree.internal_min_branch();
        const std::string head = a.tree + ',' + std::to_string(k) + ',' + num(t_min) + ',' + num(a.q) + ',' +
                                 std::to_string(a.trials) + ',' + std::to_string(seed) + ',';
        try {
            const auto res = overestimation_experiment(tree, BoundSpec{k, t_min, a.q}, a.trials, seed, a.max_genes, threads);
            text += head + std::to_string(res.n_e) + ',' + std::to_string(res.m_o) + ',' + std::to_string(res.m_b) + ',' +
                    num(res.ratio_o) + ',' + num(res.ratio_b) + ',' + std::to_string(res.capped) + ",\n";
        } catch (const CapExceeded& e) {
            ++failed;
            text += head + ",,,,," + std::to_string(a.trials - static_cast<int>(e.covered())) + ',' + csv_field(e.what()) + '\n';
        } catch (const Overflow& e) {
            ++failed;
            text += head + ",,,,,," + csv_field(e.what()) + '\n';
        }
    }
    emit(a.output, text, out);
    if (failed == a.replicates) {
        err << "error: no replicate produced a result\n";
        return 2;
    }
    if (failed > 0) err << "warning: " << failed << " replicates failed; see the error column\n";
    return 0;
}

struct CheckArgs {
    std::string suite;
    std::uint64_t seed = 1;
    int mc_samples = 1'000'000;
    double perturb_g = 0.0;
    int threads = 0;
};

int cmd_check(const CheckArgs& a, std::ostream& out) {
    CheckOptions opts;
    opts.seed = a.seed;
    opts.mc_samples = a.mc_samples;
    opts.threads = resolve_threads(a.threads);
    if (a.perturb_g != 0.0) {
        const double eps = a.perturb_g;
        opts.g = [eps](int i, int j, double T) { return g(i, j, T) + eps; };
    }
    const auto results = run_checks(a.suite, opts);
    int passed = 0;
    for (const auto& r : results) {
        out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
        passed += r.passed;
    }
    out << passed << '/' << results.size() << " checks passed\n";
    return passed == static_cast<int>(results.size()) ? 0 : 1;
}

struct AsymptoticsArgs {
    int k = 6;
    double t = 1.0;
    double q = 0.9;
    std::string regime = "large-T";
};

int cmd_asymptotics(const AsymptoticsArgs& a, std::ostream& out) {
    const AsymptoticReport r = m_o_asymptotics(a.k, a.t, a.q, parse_regime(a.regime));
    json j;
    j["regime"] = std::string(regime_name(r.regime));
    j["k"] = a.k;
    j["t_min"] = a.t;
    j["q"] = a.q;
    j["kappa"] = kappa(a.q, a.k);
    j["approx"] = r.approx;
    j["exact"] = r.exact;
    j["ratio"] = r.ratio;
    out << j.dump(2) << '\n';
    return 0;
}

int cmd_beta(double T, std::ostream& out) {
    const BetaReport b = beta_T(T);
    json j;
    j["T"] = T;
    j["u"] = u_of_T(T);
    j["index"] = b.index;
    j["s"] = s_infinity(T);
    j["beta"] = b.value;
    j["asymptote"] = b.asymptote;
    j["ratio"] = b.value / b.asymptote;
    out << j.dump(2) << '\n';
    return 0;
}

struct TreeArgs {
    std::string kind = "caterpillar";
    int k = 8;
    double t = 1.0;
    std::uint64_t seed = 1;
};

int cmd_tree(const TreeArgs& a, std::ostream& out) {
    SpeciesTree tree = a.kind == "caterpillar" ? caterpillar(a.k, a.t)
                       : a.kind == "balanced"  ? balanced(a.k, a.t)
                       : a.kind == "yule"      ? yule(a.k, a.t, a.seed)
                                               : throw DomainError("unknown tree kind '" + a.kind + "'");
    out << to_newick(tree) << '\n';
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Bipartition cover sample-size bounds under the multispecies coalescent", "bipcover"};
    app.require_subcommand(1);

    BoundsArgs bounds;
    auto* sub_bounds = app.add_subcommand("bounds", "Print M_o, M_c, M_s, M_b as JSON");
    sub_bounds->add_option("-k,--species", bounds.k, "Number of species (>= 4)")->required();
    sub_bounds->add_option("-t,--t-min", bounds.t, "Minimum internal branch length")->required();
    sub_bounds->add_option("-q,--quantile", bounds.q, "Target cover probability")->capture_default_str();

    SweepArgs sweep;
    auto* sub_sweep = app.add_subcommand("sweep", "Bounds over a k x t_min x q grid as CSV");
    sub_sweep->add_option("-k,--species", sweep.ks, "k values, e.g. 4:20 or 4,8,16")->capture_default_str();
    sub_sweep->add_option("-t,--t-min", sweep.ts, "Comma-separated t_min values")->capture_default_str();
    sub_sweep->add_option("-q,--quantile", sweep.qs, "Comma-separated q values")->capture_default_str();
    sub_sweep->add_option("-o,--output", sweep.output, "Output file (default stdout)");
    sub_sweep->add_option("--threads", sweep.threads, "Worker threads (default BIPCOVER_THREADS or all cores)");

    SimulateArgs sim;
    auto* sub_sim = app.add_subcommand("simulate", "Empirical cover quantiles and overestimation ratios as CSV");
    sub_sim->add_option("--tree", sim.tree, "caterpillar, balanced, yule or newick")->capture_default_str();
    sub_sim->add_option("--newick-file", sim.newick_file, "Species tree for --tree newick");
    sub_sim->add_option("-k,--species", sim.k, "Number of species")->capture_default_str();
    sub_sim->add_option("-t,--t-min", sim.t, "Branch length (minimum internal length for yule)")->capture_default_str();
    sub_sim->add_option("-q,--quantile", sim.q, "Quantile")->capture_default_str();
    sub_sim->add_option("-n,--trials", sim.trials, "Independent trials per tree")->capture_default_str();
    sub_sim->add_option("-s,--seed", sim.seed, "Master seed")->capture_default_str();
    sub_sim->add_option("-r,--replicates", sim.replicates, "Yule trees to draw")->capture_default_str();
    sub_sim->add_option("--max-genes", sim.max_genes, "Gene cap per trial")->capture_default_str();
    sub_sim->add_option("-o,--output", sim.output, "Output file (default stdout)");
    sub_sim->add_option("--threads", sim.threads, "Worker threads (default BIPCOVER_THREADS or all cores)");

    CheckArgs check;
    auto* sub_check = app.add_subcommand("check", "Run oracle, dominance or asymptotic checks");
    sub_check->add_option("suite", check.suite, "oracles, dominance, asymptotics or all")->required();
    sub_check->add_option("-s,--seed", check.seed, "Monte-Carlo seed")->capture_default_str();
    sub_check->add_option("--mc-samples", check.mc_samples, "Monte-Carlo sample size")->capture_default_str();
    sub_check->add_option("--perturb-g", check.perturb_g, "Add this constant to g (mutation testing)");
    sub_check->add_option("--threads", check.threads, "Worker threads");

    AsymptoticsArgs asym;
    auto* sub_asym = app.add_subcommand("asymptotics", "Compare M_o with its asymptotic form");
    sub_asym->add_option("-k,--species", asym.k)->capture_default_str();
    sub_asym->add_option("-t,--t-min", asym.t)->capture_default_str();
    sub_asym->add_option("-q,--quantile", asym.q)->capture_default_str();
    sub_asym->add_option("--regime", asym.regime, "large-T, small-T or large-k")->capture_default_str();

    double beta_t = 0.0;
    auto* sub_beta = app.add_subcommand("beta", "Improvement factor of the balanced over the original bound");
    sub_beta->add_option("-t,--t-min", beta_t)->required();

    int gi = 0, gj = 0;
    double gt = 0.0;
    auto* sub_g = app.add_subcommand("g", "Transition probability g_ij(T)");
    sub_g->add_option("-i", gi)->required();
    sub_g->add_option("-j", gj)->required();
    sub_g->add_option("-t,--time", gt)->required();

    TreeArgs tree;
    auto* sub_tree = app.add_subcommand("tree", "Print a generated species tree in Newick");
    sub_tree->add_option("kind", tree.kind, "caterpillar, balanced or yule")->required();
    sub_tree->add_option("-k,--species", tree.k)->capture_default_str();
    sub_tree->add_option("-t,--t-min", tree.t)->capture_default_str();
    sub_tree->add_option("-s,--seed", tree.seed)->capture_default_str();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 2;
    }

    try {
        if (*sub_bounds) return cmd_bounds(bounds, out);
        if (*sub_sweep) return cmd_sweep(sweep, out, err);
        if (*sub_sim) return cmd_simulate(sim, out, err);
        if (*sub_check) return cmd_check(check, out);
        if (*sub_asym) return cmd_asymptotics(asym, out);
        if (*sub_beta) return cmd_beta(beta_t, out);
        if (*sub_g) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", g(gi, gj, gt));
            out << buf << '\n';
            return 0;
        }
        if (*sub_tree) return cmd_tree(tree, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}

}  // namespace bipcover
