#include "silt/cli_runner.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <unistd.h>

#include "silt/errors.hpp"
#include "silt/exact_moments.hpp"
#include "silt/gf_contour.hpp"
#include "silt/increment_laws.hpp"
#include "silt/parallel.hpp"
#include "silt/path_engine.hpp"
#include "silt/quadratures.hpp"
#include "silt/rwrs_sim.hpp"
#include "silt/variance_mc.hpp"

#ifndef SILT_VERSION
#define SILT_VERSION "0.0.0"
#endif

namespace silt::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CheckFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string num(double v) { return fmt::format("{:.17g}", v); }

struct Settings {
    unsigned workers = 1;
    std::string out;
    std::string format = "csv";
    std::string config;

    std::string law = "zipf1d";
    std::int64_t n = 1000;
    std::vector<std::int64_t> n_list;
    int n_max = 8;
    int cap = 64;
    std::int64_t reps = 1000;
    std::uint64_t seed = 1;
    bool assert_mode = false;
    int grid = 256;

    double tol = 1e-8;
    std::string method = "adaptive";
    std::string check = "all";

    std::string series = "inv1mz3";
    int points = 0;
    int points_per_n = 8;
    double alpha = 0.5;
    std::vector<std::string> terms;

    std::string renewal_law = "geometric:0.5";
    double delta = 0.5;
    std::string lform = "1";
    int fit_max = 100;
    std::string mode = "moments";

    std::int64_t sceneries = 4000;
    std::string scenery = "rademacher";
    std::uint64_t walk_seed = 1;
    std::uint64_t scenery_seed = 2;
    std::string samples_out;

    std::string manifest;
    unsigned replay_workers = 0;
};

struct Output {
    std::string primary;
    std::vector<std::pair<std::string, std::string>> extra;  // (path, content)
};

// ---------- subcommand bodies ----------

std::string csv_header(std::initializer_list<std::string_view> cols) {
    std::string h;
    for (auto c : cols) {
        if (!h.empty()) h += ',';
        h += c;
    }
    return h + '\n';
}

Output laws_inspect(const Settings& s) {
    const IncrementLaw law = IncrementLaw::parse(s.law);
    json j;
    j["descriptor"] = law.to_json();
    j["name"] = law.name();
    j["dimension"] = law.dimension();
    j["finite_support"] = law.has_finite_support();
    j["support_size"] = law.has_finite_support() ? static_cast<std::int64_t>(law.support().size()) : -1;
    j["symmetric"] = law.is_symmetric();
    j["gamma"] = law.gamma() ? json(*law.gamma()) : json(nullptr);
    if (const auto c = law.covariance()) j["covariance"] = {{"xx", c->xx}, {"xy", c->xy}, {"yy", c->yy}, {"det", c->determinant()}};
    else j["covariance"] = nullptr;
    j["aperiodicity_witness"] = aperiodicity_witness(law, s.grid);
    if (law.dimension() == 1) {
        std::vector<double> ts;
        for (int k = 4; k <= 20; ++k) ts.push_back(std::ldexp(1.0, -k));
        const GammaEstimate g = gamma_from_charfn(law, ts);
        j["gamma_estimate"] = {{"estimate", g.estimate}, {"converged", g.converged}};
    }
    return {j.dump(2) + "\n", {}};
}

Output walk_simulate(const Settings& s) {
    const IncrementLaw law = IncrementLaw::parse(s.law);
    if (s.n < 0) throw ConfigError("--n must be non-negative");
    if (s.reps < 1) throw ConfigError("--reps must be positive");
    std::vector<StreamedWalk> rows(static_cast<std::size_t>(s.reps));
    parallel_for(rows.size(), s.workers, [&](std::size_t r) {
        rows[r] = simulate_streamed(law, static_cast<std::size_t>(s.n), derive_seed(s.seed, r));
    });
    std::string text = csv_header({"rep", "n", "Vn", "max_local_time"});
    for (std::size_t r = 0; r < rows.size(); ++r)
        text += fmt::format("{},{},{},{}\n", r, s.n, rows[r].self_intersections, rows[r].max_local_time);
    return {text, {}};
}

Output variance_exact_cmd(const Settings& s) {
    const IncrementLaw law = IncrementLaw::parse(s.law);
    ExactOptions opt;
    opt.n_cap = s.cap;
    opt.workers = s.workers;
    if (s.n_max < 0) throw ConfigError("--n-max must be non-negative");
    if (s.n_max > s.cap) throw ConfigError(fmt::format("--n-max {} exceeds --cap {}", s.n_max, s.cap));
    const auto profile = variance_profile(law, s.n_max, opt);
    std::string text = csv_header({"n", "a2", "a3", "b2", "b3", "var", "var_over_n2"});
    for (const auto& v : profile) {
        const double n2 = v.n == 0 ? 1.0 : static_cast<double>(v.n * v.n);
        text += fmt::format("{},{},{},{},{},{},{}\n", v.n, num(v.a2), num(v.a3), num(v.b2), num(v.b3), num(v.var()),
                            num(v.var() / n2));
    }
    if (s.assert_mode) {
        if (!law.has_finite_support()) throw ConfigError("--assert needs a finite-support law for path enumeration");
        for (int n = 1; n <= std::min(s.n_max, 8); ++n) {
            const EnumerationResult e = variance_enumeration(law, n);
            const double exact = profile[n].var();
            const double rel = std::abs(exact - e.var()) / std::max(1.0, std::abs(e.var()));
            if (rel > 1e-10 || std::abs(e.set_sum(IndexSet::A1)) > 1e-12 || std::abs(e.set_sum(IndexSet::B1)) > 1e-12)
                throw CheckFailure(fmt::format("n = {}: decomposition {} vs enumeration {} (rel {:.3e}), A1 {:.3e}, B1 {:.3e}",
                                               n, exact, e.var(), rel, e.set_sum(IndexSet::A1), e.set_sum(IndexSet::B1)));
        }
    }
    return {text, {}};
}

Output variance_mc_cmd(const Settings& s) {
    const IncrementLaw law = IncrementLaw::parse(s.law);
    if (s.n_list.empty()) throw ConfigError("--n needs at least one value");
    const auto rows = variance_trend(law, s.n_list, s.reps, s.seed, s.workers);
    std::string text = csv_header({"n", "reps", "mean", "var", "var_over_n2", "ci"});
    for (const auto& r : rows)
        text += fmt::format("{},{},{},{},{},{}\n", r.summary.n, r.summary.reps, num(r.summary.mean_Vn),
                            num(r.summary.var_Vn), num(r.ratio), num(r.ratio_ci));
    return {text, {}};
}

Output expectation_cmd(const Settings& s) {
    const IncrementLaw law = IncrementLaw::parse(s.law);
    if (s.n_list.empty()) throw ConfigError("--n needs at least one value");
    std::string text = csv_header({"n", "EVn", "ratio", "target"});
    for (const auto& r : expectation_trend(law, s.n_list))
        text += fmt::format("{},{},{},{}\n", r.n, num(r.expected_Vn), num(r.ratio), num(r.target));
    return {text, {}};
}

Output contour_cmd(const Settings& s) {
    const SeriesSpec series = builtin_series(s.series);
    if (s.n < 1 || s.n > 1'000'000) throw ConfigError("--n must lie in [1, 1e6]");
    const int n = static_cast<int>(s.n);
    const int points = s.points > 0 ? s.points : 8 * n;
    const Complex c = cauchy_coefficient_complex(series, n, points, s.workers);
    const Complex c2 = cauchy_coefficient_complex(series, n, 2 * points, s.workers);
    json j{{"series", series.name}, {"n", n},         {"points", points},         {"radius", contour_radius(n)},
           {"coefficient", c.real()}, {"imag", c.imag()}, {"aliasing", std::abs(c - c2)}};
    return {j.dump(2) + "\n", {}};
}

std::vector<DarbouxTerm> parse_terms(const std::vector<std::string>& terms) {
    std::vector<DarbouxTerm> out;
    for (const std::string& t : terms) {
        const auto colon = t.find(':');
        DarbouxTerm term;
        term.A = 1.0;
        try {
            term.gamma = std::stod(t.substr(0, colon));
        } catch (const std::exception&) {
            throw ConfigError(fmt::format("bad term '{}'; expected gamma[:l]", t));
        }
        if (colon != std::string::npos) term.l = parse_slowly_varying(t.substr(colon + 1));
        out.push_back(term);
    }
    return out;
}

Output darboux_cmd(const Settings& s) {
    const SeriesSpec series = builtin_series(s.series);
    if (s.n_max < 1) throw ConfigError("--n-max must be positive");
    FitOptions fo;
    fo.alpha = s.alpha;
    const DarbouxHypothesis hyp = fit_hypothesis(series, parse_terms(s.terms), fo);
    std::vector<int> ns(static_cast<std::size_t>(s.n_max));
    std::iota(ns.begin(), ns.end(), 1);
    const DarbouxReport rep = verify_darboux(series, hyp, ns, s.points_per_n, s.workers);
    std::string text;
    if (s.format == "json") {
        json j;
        j["hypothesis"] = {{"K", hyp.K}, {"alpha", hyp.alpha}, {"terms", json::array()}};
        for (const auto& t : hyp.terms)
            j["hypothesis"]["terms"].push_back({{"A", t.A}, {"gamma", t.gamma}, {"l", std::string(to_string(t.l))}});
        j["rows"] = json::array();
        for (const auto& r : rep.rows)
            j["rows"].push_back({{"n", r.n}, {"coefficient", r.coefficient}, {"bound", r.bound}, {"aliasing", r.aliasing},
                                 {"holds", r.holds}});
        j["all_hold"] = rep.all_hold();
        text = j.dump(2) + "\n";
    } else {
        text = csv_header({"n", "coefficient", "bound", "aliasing", "margin", "holds"});
        for (const auto& r : rep.rows)
            text += fmt::format("{},{},{},{},{},{}\n", r.n, num(r.coefficient), num(r.bound), num(r.aliasing),
                                num(r.margin()), r.holds ? 1 : 0);
    }
    if (s.assert_mode && !rep.all_hold()) throw CheckFailure("Darboux bound violated beyond the aliasing tolerance");
    return {text, {}};
}

Output renewal_cmd(const Settings& s) {
    const RenewalLaw law = RenewalLaw::parse(s.renewal_law);
    if (s.mode == "lln") {
        if (s.n_list.empty()) throw ConfigError("--n-list is required in lln mode");
        std::string text = csv_header({"n", "max_deviation", "mean_deviation"});
        for (const auto& r : renewal_lln_check(law, s.n_list, static_cast<int>(s.reps), s.seed, s.workers))
            text += fmt::format("{},{},{}\n", r.n, num(r.max_deviation), num(r.mean_deviation));
        return {text, {}};
    }
    if (s.mode != "moments") throw ConfigError(fmt::format("unknown renewal mode '{}'", s.mode));
    if (s.n < 1 || s.n > 100'000) throw ConfigError("--n must lie in [1, 1e5]");
    const RenewalMoments m = renewal_moments_exact(law, static_cast<int>(s.n));
    const RenewalBoundFit fit = fit_renewal_bound(m, law.mu(), std::min<int>(s.fit_max, static_cast<int>(s.n)), s.delta,
                                                  parse_slowly_varying(s.lform));
    std::string text = csv_header({"n", "EN", "EN2", "bound"});
    for (std::int64_t k = 0; k <= s.n; ++k)
        text += fmt::format("{},{},{},{}\n", k, num(m.first[k]), num(m.second[k]),
                            k == 0 ? num(0.0) : num(fit.bound(static_cast<int>(k))));
    return {text, {}};
}

Output kappa_cmd(const Settings& s) {
    QuadratureResult r;
    if (s.method == "adaptive") r = kappa(s.tol);
    else if (s.method == "qmc") r = kappa_qmc();
    else if (s.method == "reduced") r = kappa_reduced(std::max(s.tol, 1e-14));
    else throw ConfigError(fmt::format("unknown kappa method '{}'", s.method));
    json j{{"value", r.value}, {"error_estimate", r.error_estimate}, {"evaluations", r.evaluations}, {"method", s.method}};
    return {j.dump(2) + "\n", {}};
}

Output identities_cmd(const Settings& s) {
    const std::vector<std::pair<double, double>> points = {{0.6, 0.5}, {0.75, 1.0}, {0.9, 2.0}};
    const bool all = s.check == "all";
    if (!all && s.check != "a3" && s.check != "a2" && s.check != "2d")
        throw ConfigError(fmt::format("unknown identity '{}'", s.check));
    std::string text = csv_header({"identity", "lambda", "gamma", "quadrature", "closed_form", "rel_error", "pass"});
    bool ok = true;
    auto row = [&](std::string_view name, double l, double g, const IdentityCheck& c) {
        const bool pass = c.relative_error() <= 1e-6;
        ok = ok && pass;
        text += fmt::format("{},{},{},{},{},{},{}\n", name, num(l), num(g), num(c.quadrature), num(c.closed_form),
                            num(c.relative_error()), pass ? "pass" : "FAIL");
    };
    for (const auto& [l, g] : points) {
        if (all || s.check == "a3") row("a3", l, g, proof_integral_1d_a3(l, g));
        if (all || s.check == "a2") {
            const IdentityPair p = proof_integrals_1d_a2(l, g);
            row("a2_first", l, g, p.first);
            row("a2_second", l, g, p.second);
        }
        if (all || s.check == "2d") row("2d", l, 0.0, proof_integral_2d(l));
    }
    if (s.assert_mode && !ok) throw CheckFailure("an integral identity failed");
    return {text, {}};
}

Output rwrs_cmd(const Settings& s) {
    const IncrementLaw law = IncrementLaw::parse(s.law);
    const CltReport r = quenched_clt_test(law, s.n, s.sceneries, s.walk_seed, s.scenery_seed,
                                          parse_scenery_kind(s.scenery), s.workers);
    json j{{"n", r.n},
           {"reps", r.reps},
           {"scenery", s.scenery},
           {"walk_seed", r.walk_seed},
           {"scenery_seed", s.scenery_seed},
           {"s_n2", r.s_n2},
           {"ks", r.ks},
           {"ks_band", r.ks_band},
           {"exact_ks", r.exact_ks >= 0 ? json(r.exact_ks) : json(nullptr)},
           {"mean_Y", r.mean_Y},
           {"mean_Y_ci", r.mean_Y_ci},
           {"var_Y", r.var_Y},
           {"var_Y_ci", r.var_Y_ci}};
    Output o{j.dump(2) + "\n", {}};
    if (!s.samples_out.empty()) {
        std::string csv = csv_header({"rep", "studentized"});
        for (std::size_t i = 0; i < r.studentized.size(); ++i) csv += fmt::format("{},{}\n", i, num(r.studentized[i]));
        o.extra.emplace_back(s.samples_out, std::move(csv));
    }
    return o;
}

// ---------- plumbing ----------

std::string resolve_path(const std::string& path) {
    if (path.empty()) return path;
    const fs::path p(path);
    if (p.is_relative()) {
        if (const char* dir = std::getenv("SILT_OUTPUT_DIR"); dir != nullptr && *dir != '\0')
            return (fs::path(dir) / p).string();
    }
    return path;
}

// Appends `--key value` pairs from a JSON object for options not given on the command line.
std::vector<std::string> merge_config(std::vector<std::string> args) {
    std::string file;
    for (std::size_t i = 0; i + 1 < args.size(); ++i)
        if (args[i] == "--config") file = args[i + 1];
    if (file.empty()) return args;
    std::ifstream in(file);
    if (!in) throw ConfigError(fmt::format("cannot read config file '{}'", file));
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError(fmt::format("config file '{}': {}", file, e.what()));
    }
    if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
    auto given = [&](const std::string& flag) {
        for (const std::string& a : args)
            if (a == flag || a.starts_with(flag + "=")) return true;
        return false;
    };
    for (const auto& [key, value] : j.items()) {
        const std::string flag = "--" + key;
        if (key == "config" || given(flag)) continue;
        if (value.is_boolean()) {
            if (value.get<bool>()) args.push_back(flag);
        } else if (value.is_array()) {
            std::string joined;
            for (const auto& v : value) joined += (joined.empty() ? "" : ",") + (v.is_string() ? v.get<std::string>() : v.dump());
            args.push_back(flag);
            args.push_back(joined);
        } else {
            args.push_back(flag);
            args.push_back(value.is_string() ? value.get<std::string>() : value.dump());
        }
    }
    return args;
}

json config_echo(const CLI::App* sub) {
    json j = json::object();
    for (const CLI::Option* opt : sub->get_options()) {
        const std::string name = opt->get_single_name();
        if (name.empty() || name == "help" || name == "config") continue;
        if (opt->count() > 0) {
            const auto& res = opt->results();
            if (opt->get_type_size() == 0) j[name] = true;
            else if (res.size() == 1) j[name] = res.front();
            else j[name] = res;
        } else if (!opt->get_default_str().empty()) {
            j[name] = opt->get_default_str();
        }
    }
    return j;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(fmt::format("cannot read '{}'", path));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string first_difference(const std::string& a, const std::string& b) {
    std::istringstream sa(a), sb(b);
    std::string la, lb;
    for (int line = 1;; ++line) {
        const bool ga = static_cast<bool>(std::getline(sa, la));
        const bool gb = static_cast<bool>(std::getline(sb, lb));
        if (!ga && !gb) return "identical";
        if (ga != gb || la != lb)
            return fmt::format("line {}: recorded '{}' vs replay '{}'", line, ga ? la : "<eof>", gb ? lb : "<eof>");
    }
}

int reproduce(const Settings& s, std::ostream& out, std::ostream& err) {
    const json m = json::parse(read_file(s.manifest));
    std::vector<std::string> argv = m.at("argv").get<std::vector<std::string>>();
    const json outputs = m.at("outputs");
    // replay into scratch paths next to the originals
    std::vector<std::pair<std::string, std::string>> remap;
    for (const auto& o : outputs) {
        const std::string path = o.at("path").get<std::string>();
        remap.emplace_back(path, path + ".replay");
    }
    for (std::size_t i = 0; i + 1 < argv.size(); ++i) {
        if (argv[i] == "--out" || argv[i] == "--samples-out") {
            const std::string resolved = resolve_path(argv[i + 1]);
            for (const auto& [orig, scratch] : remap)
                if (orig == resolved) argv[i + 1] = scratch;
        }
        if (argv[i] == "--workers" && s.replay_workers > 0) argv[i + 1] = std::to_string(s.replay_workers);
    }
    if (s.replay_workers > 0 && std::find(argv.begin(), argv.end(), "--workers") == argv.end()) {
        argv.push_back("--workers");
        argv.push_back(std::to_string(s.replay_workers));
    }
    std::ostringstream sink_out, sink_err;
    const int code = run(argv, sink_out, sink_err);
    if (code != ok) {
        err << "replay failed with exit code " << code << ": " << sink_err.str();
        return code;
    }
    bool match = true;
    for (std::size_t k = 0; k < remap.size(); ++k) {
        const std::string replay = read_file(remap[k].second);
        const std::string digest = sha256_hex(replay);
        const std::string recorded = outputs[k].at("sha256").get<std::string>();
        if (digest != recorded) {
            match = false;
            std::string detail = "original output unavailable";
            if (fs::exists(remap[k].first)) detail = first_difference(read_file(remap[k].first), replay);
            err << fmt::format("mismatch for {}: recorded {} replay {}; {}\n", remap[k].first, recorded, digest, detail);
        } else {
            out << fmt::format("match {} {}\n", remap[k].first, digest);
        }
        std::error_code ec;
        fs::remove(remap[k].second, ec);
        fs::remove(remap[k].second + ".manifest.json", ec);
    }
    return match ? ok : check_failed;
}

}  // namespace

std::string sha256_hex(std::string_view data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
    return hex;
}

void write_atomically(const std::string& path, std::string_view content) {
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + fmt::format(".tmp.{}", ::getpid());
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw ConfigError(fmt::format("cannot write '{}'", tmp.string()));
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        f.flush();
        if (!f) throw ConfigError(fmt::format("short write to '{}'", tmp.string()));
    }
    fs::rename(tmp, target);
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    const auto started = std::chrono::steady_clock::now();
    Settings s;
    CLI::App app{"Self-intersection local times, generating functions and random scenery"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    auto common = [&](CLI::App* c, bool with_format = false) {
        c->add_option("--workers", s.workers, "worker threads")->check(CLI::Range(1U, 1024U))->capture_default_str();
        c->add_option("--out", s.out, "output file (written atomically, with a manifest)");
        c->add_option("--config", s.config, "JSON file of option defaults; flags win");
        if (with_format) c->add_option("--format", s.format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    };
    auto law_opt = [&](CLI::App* c) {
        c->add_option("--law", s.law, "zipf1d | lazy2d | zipf1d-trunc:K | custom:<file>")->capture_default_str();
    };

    CLI::App* laws = app.add_subcommand("laws", "increment laws");
    laws->require_subcommand(1);
    CLI::App* laws_inspect_cmd = laws->add_subcommand("inspect", "describe a law");
    common(laws_inspect_cmd);
    law_opt(laws_inspect_cmd);
    laws_inspect_cmd->add_option("--grid", s.grid, "aperiodicity grid size")->capture_default_str();

    CLI::App* walk = app.add_subcommand("walk", "walk simulation");
    walk->require_subcommand(1);
    CLI::App* walk_sim = walk->add_subcommand("simulate", "simulate walks and report V_n");
    common(walk_sim);
    law_opt(walk_sim);
    walk_sim->add_option("--n", s.n, "steps")->capture_default_str();
    walk_sim->add_option("--seed", s.seed, "seed base")->capture_default_str();
    walk_sim->add_option("--reps", s.reps, "replicates")->capture_default_str();

    CLI::App* variance = app.add_subcommand("variance", "variance of V_n");
    variance->require_subcommand(1);
    CLI::App* var_exact = variance->add_subcommand("exact", "exact decomposition a2, a3, b2, b3");
    common(var_exact);
    law_opt(var_exact);
    var_exact->add_option("--n-max", s.n_max, "largest n")->capture_default_str();
    var_exact->add_option("--cap", s.cap, "largest n allowed")->capture_default_str();
    var_exact->add_flag("--assert", s.assert_mode, "compare with path enumeration for n <= 8");
    CLI::App* var_mc = variance->add_subcommand("mc", "Monte Carlo moments of V_n");
    common(var_mc);
    law_opt(var_mc);
    var_mc->add_option("--n", s.n_list, "comma-separated n values")->delimiter(',')->required();
    var_mc->add_option("--reps", s.reps, "replicates")->capture_default_str();
    var_mc->add_option("--seed", s.seed, "seed base")->capture_default_str();

    CLI::App* expectation = app.add_subcommand("expectation", "exact E V_n");
    expectation->require_subcommand(1);
    CLI::App* exp_trend = expectation->add_subcommand("trend", "E V_n / (n log n) against 2/(pi gamma)");
    common(exp_trend);
    law_opt(exp_trend);
    exp_trend->add_option("--n", s.n_list, "comma-separated n values")->delimiter(',')->required();

    CLI::App* contour = app.add_subcommand("contour", "Cauchy coefficient extraction");
    contour->require_subcommand(1);
    CLI::App* contour_extract = contour->add_subcommand("extract", "extract one coefficient");
    common(contour_extract);
    contour_extract->add_option("--series", s.series, "builtin name or coefficient file")->capture_default_str();
    contour_extract->add_option("--n", s.n, "coefficient index")->capture_default_str();
    contour_extract->add_option("--points", s.points, "circle points (default 8n)")->capture_default_str();

    CLI::App* darboux = app.add_subcommand("darboux", "coefficient bounds");
    darboux->require_subcommand(1);
    CLI::App* darboux_verify = darboux->add_subcommand("verify", "check the bound for n = 1..n-max");
    common(darboux_verify, true);
    darboux_verify->add_option("--series", s.series, "builtin name or coefficient file")->capture_default_str();
    darboux_verify->add_option("--terms", s.terms, "terms gamma[:1|log|log2]")->delimiter(',');
    darboux_verify->add_option("--alpha", s.alpha, "split abscissa")->capture_default_str();
    darboux_verify->add_option("--n-max", s.n_max, "largest n")->capture_default_str();
    darboux_verify->add_option("--points-per-n", s.points_per_n, "circle points per unit n")->capture_default_str();
    darboux_verify->add_flag("--assert", s.assert_mode, "exit 4 on a violation");

    CLI::App* renewal = app.add_subcommand("renewal", "renewal moments and law of large numbers");
    common(renewal);
    renewal->add_option("--law", s.renewal_law, "geometric:p | pmf:k=p,...")->capture_default_str();
    renewal->add_option("--mode", s.mode, "moments or lln")->capture_default_str();
    renewal->add_option("--n", s.n, "largest n (moments)")->capture_default_str();
    renewal->add_option("--n-list", s.n_list, "n values (lln)")->delimiter(',');
    renewal->add_option("--reps", s.reps, "replicates (lln)")->capture_default_str();
    renewal->add_option("--seed", s.seed, "seed base (lln)")->capture_default_str();
    renewal->add_option("--delta", s.delta, "remainder exponent")->capture_default_str();
    renewal->add_option("--l", s.lform, "slowly varying factor 1|log|log2")->capture_default_str();
    renewal->add_option("--fit-max", s.fit_max, "fit the bound constant on n <= this")->capture_default_str();

    CLI::App* kappa_app = app.add_subcommand("kappa", "the constant kappa");
    common(kappa_app);
    kappa_app->add_option("--tol", s.tol, "relative tolerance")->capture_default_str();
    kappa_app->add_option("--method", s.method, "adaptive | qmc | reduced")->capture_default_str();

    CLI::App* identities = app.add_subcommand("identities", "closed-form integral identities");
    common(identities);
    identities->add_option("--check", s.check, "all | a3 | a2 | 2d")->capture_default_str();
    identities->add_flag("--assert", s.assert_mode, "exit 4 on a failure");

    CLI::App* rwrs = app.add_subcommand("rwrs", "random walk in random scenery");
    rwrs->require_subcommand(1);
    CLI::App* rwrs_clt = rwrs->add_subcommand("clt", "quenched CLT at one walk path");
    common(rwrs_clt);
    law_opt(rwrs_clt);
    rwrs_clt->add_option("--n", s.n, "steps")->capture_default_str();
    rwrs_clt->add_option("--sceneries", s.sceneries, "scenery replicates")->capture_default_str();
    rwrs_clt->add_option("--scenery", s.scenery, "rademacher | gaussian")->capture_default_str();
    rwrs_clt->add_option("--walk-seed", s.walk_seed, "walk seed")->capture_default_str();
    rwrs_clt->add_option("--scenery-seed", s.scenery_seed, "scenery seed base")->capture_default_str();
    rwrs_clt->add_option("--samples-out", s.samples_out, "optional CSV of studentized samples");

    CLI::App* repro = app.add_subcommand("reproduce", "replay a manifest and compare checksums");
    repro->add_option("--manifest", s.manifest, "manifest file")->required();
    repro->add_option("--workers", s.replay_workers, "override the worker count")->check(CLI::Range(1U, 1024U));

    std::vector<std::string> args;
    try {
        args = merge_config(raw_args);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return config_error;
    }
    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "config error: " << e.what() << '\n';
        return config_error;
    }

    // the innermost selected subcommand
    CLI::App* leaf = &app;
    while (!leaf->get_subcommands().empty()) leaf = leaf->get_subcommands().front();
    const std::string command = leaf->get_parent() == &app ? leaf->get_name()
                                                           : leaf->get_parent()->get_name() + " " + leaf->get_name();
    try {
        if (command == "reproduce") return reproduce(s, out, err);
        Output result;
        if (command == "laws inspect") result = laws_inspect(s);
        else if (command == "walk simulate") result = walk_simulate(s);
        else if (command == "variance exact") result = variance_exact_cmd(s);
        else if (command == "variance mc") result = variance_mc_cmd(s);
        else if (command == "expectation trend") result = expectation_cmd(s);
        else if (command == "contour extract") result = contour_cmd(s);
        else if (command == "darboux verify") result = darboux_cmd(s);
        else if (command == "renewal") result = renewal_cmd(s);
        else if (command == "kappa") result = kappa_cmd(s);
        else if (command == "identities") result = identities_cmd(s);
        else if (command == "rwrs clt") result = rwrs_cmd(s);
        else throw ConfigError(fmt::format("unhandled command '{}'", command));

        if (s.out.empty()) {
            out << result.primary;
            for (auto& [path, content] : result.extra) write_atomically(resolve_path(path), content);
            return ok;
        }
        std::vector<std::pair<std::string, std::string>> files{{resolve_path(s.out), result.primary}};
        for (auto& [path, content] : result.extra) files.emplace_back(resolve_path(path), content);
        json manifest;
        manifest["schema_version"] = kSchemaVersion;
        manifest["tool_version"] = SILT_VERSION;
        manifest["compiler"] = __VERSION__;
        manifest["command"] = command;
        manifest["argv"] = raw_args;
        manifest["config"] = config_echo(leaf);
        manifest["outputs"] = json::array();
        for (const auto& [path, content] : files) {
            write_atomically(path, content);
            manifest["outputs"].push_back({{"path", path}, {"bytes", content.size()}, {"sha256", sha256_hex(content)}});
        }
        manifest["wall_clock_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        write_atomically(files.front().first + ".manifest.json", manifest.dump(2) + "\n");
        return ok;
    } catch (const CheckFailure& e) {
        err << "check failed: " << e.what() << '\n';
        return check_failed;
    } catch (const BudgetError& e) {
        err << "budget exceeded: " << e.what() << '\n';
        return budget_error;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const json::exception& e) {
        err << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const std::out_of_range& e) {
        err << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const fs::filesystem_error& e) {
        err << "config error: " << e.what() << '\n';
        return config_error;
    }
}

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        return run(args, std::cout, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace silt::cli
