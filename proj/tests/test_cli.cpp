#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "silt/cli_runner.hpp"

namespace fs = std::filesystem;
using silt::cli::run;

namespace {
struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome call(std::vector<std::string> args) {
    std::ostringstream o, e;
    const int code = run(args, o, e);
    return {code, o.str(), e.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

fs::path scratch_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("silt_cli_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}
}  // namespace

TEST_SUITE("cli") {
    TEST_CASE("hashing and atomic writes") {
        CHECK(silt::cli::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
        const fs::path d = scratch_dir("atomic");
        silt::cli::write_atomically((d / "x.txt").string(), "hello");
        CHECK(slurp(d / "x.txt") == "hello");
        silt::cli::write_atomically((d / "x.txt").string(), "bye");
        CHECK(slurp(d / "x.txt") == "bye");
        CHECK(std::distance(fs::directory_iterator(d), fs::directory_iterator{}) == 1);
    }

    TEST_CASE("exit codes") {
        CHECK(call({}).code == silt::cli::config_error);
        CHECK(call({"nonsense"}).code == silt::cli::config_error);
        CHECK(call({"walk", "simulate", "--law", "nope"}).code == silt::cli::config_error);
        CHECK(call({"variance", "exact", "--law", "lazy2d", "--n-max", "8", "--assert"}).code == silt::cli::ok);
        CHECK(call({"variance", "exact", "--law", "zipf1d", "--n-max", "8", "--assert"}).code == silt::cli::config_error);
        CHECK(call({"identities", "--check", "a3", "--assert"}).code == silt::cli::ok);
    }

    TEST_CASE("malformed law file") {
        const fs::path d = scratch_dir("law");
        {
            std::ofstream f(d / "bad.json");
            f << "{\"kind\": \"finite_custom\", \"parameters\": {\"dimension\": 1, \"pmf\": [{\"site\": [0]}]}}";
        }
        const Outcome r = call({"laws", "inspect", "--law", "custom:" + (d / "bad.json").string()});
        CHECK(r.code == silt::cli::config_error);
        CHECK(r.err.find("pmf[0]") != std::string::npos);
        {
            std::ofstream f(d / "broken.json");
            f << "{\"kind\": \n \"finite_custom\",";
        }
        const Outcome b = call({"laws", "inspect", "--law", "custom:" + (d / "broken.json").string()});
        CHECK(b.code == silt::cli::config_error);
        CHECK(b.err.find("line") != std::string::npos);
    }

    TEST_CASE("kappa json") {
        const Outcome r = call({"kappa", "--tol", "1e-8"});
        REQUIRE(r.code == 0);
        const auto j = nlohmann::json::parse(r.out);
        CHECK(j.at("value").get<double>() == doctest::Approx(0.6989731718412326).epsilon(1e-7));
        CHECK(j.contains("error_estimate"));
    }

    TEST_CASE("repeated runs are byte identical across worker counts") {
        const fs::path d = scratch_dir("determinism");
        const std::vector<std::vector<std::string>> cmds = {
            {"variance", "mc", "--law", "zipf1d", "--n", "64,128", "--reps", "300", "--seed", "4"},
            {"walk", "simulate", "--law", "lazy2d", "--n", "500", "--reps", "20", "--seed", "9"},
            {"renewal", "--law", "geometric:0.5", "--mode", "lln", "--n-list", "100,1000", "--reps", "20"},
            {"rwrs", "clt", "--law", "zipf1d", "--n", "500", "--sceneries", "200"},
        };
        int k = 0;
        for (auto cmd : cmds) {
            std::vector<std::string> outs;
            for (const char* w : {"1", "3"}) {
                auto c = cmd;
                const fs::path o = d / ("out" + std::to_string(k) + "_" + w);
                c.insert(c.end(), {"--workers", w, "--out", o.string()});
                REQUIRE(call(c).code == 0);
                outs.push_back(slurp(o));
            }
            CHECK(outs[0] == outs[1]);
            CHECK(!outs[0].empty());
            ++k;
        }
    }

    TEST_CASE("reproduce matches and detects an edited seed") {
        const fs::path d = scratch_dir("reproduce");
        const fs::path o = d / "mc.csv";
        REQUIRE(call({"variance", "mc", "--law", "lazy2d", "--n", "16,32", "--reps", "200", "--seed", "11", "--workers",
                      "2", "--out", o.string()})
                    .code == 0);
        const fs::path manifest = d / "mc.csv.manifest.json";
        REQUIRE(fs::exists(manifest));
        const auto m = nlohmann::json::parse(slurp(manifest));
        CHECK(m.at("schema_version") == 1);
        CHECK(m.at("outputs").at(0).at("sha256") == silt::cli::sha256_hex(slurp(o)));
        CHECK(call({"reproduce", "--manifest", manifest.string()}).code == 0);
        CHECK(call({"reproduce", "--manifest", manifest.string(), "--workers", "1"}).code == 0);
        CHECK(!fs::exists(d / "mc.csv.replay"));

        auto edited = m;
        auto argv = edited.at("argv").get<std::vector<std::string>>();
        for (std::size_t i = 0; i + 1 < argv.size(); ++i)
            if (argv[i] == "--seed") argv[i + 1] = "12";
        edited["argv"] = argv;
        {
            std::ofstream f(d / "edited.json");
            f << edited.dump(2);
        }
        const Outcome bad = call({"reproduce", "--manifest", (d / "edited.json").string()});
        CHECK(bad.code == silt::cli::check_failed);
        CHECK(!bad.err.empty());
    }

    TEST_CASE("quadrature manifest replays") {
        const fs::path d = scratch_dir("quad");
        const fs::path o = d / "kappa.json";
        REQUIRE(call({"kappa", "--method", "qmc", "--out", o.string()}).code == 0);
        CHECK(call({"reproduce", "--manifest", (d / "kappa.json.manifest.json").string()}).code == 0);
    }

    TEST_CASE("config file supplies defaults and flags win") {
        const fs::path d = scratch_dir("config");
        {
            std::ofstream f(d / "cfg.json");
            f << R"({"law": "lazy2d", "n": "16", "reps": 100, "seed": 5})";
        }
        const fs::path a = d / "a.csv", b = d / "b.csv", c = d / "c.csv";
        REQUIRE(call({"variance", "mc", "--config", (d / "cfg.json").string(), "--out", a.string()}).code == 0);
        REQUIRE(call({"variance", "mc", "--law", "lazy2d", "--n", "16", "--reps", "100", "--seed", "5", "--out",
                      b.string()})
                    .code == 0);
        CHECK(slurp(a) == slurp(b));
        REQUIRE(call({"variance", "mc", "--config", (d / "cfg.json").string(), "--seed", "6", "--out", c.string()})
                    .code == 0);
        CHECK(slurp(a) != slurp(c));
    }

    TEST_CASE("contour extraction output") {
        const Outcome r = call({"contour", "extract", "--series", "inv1mz3", "--n", "5", "--points", "512"});
        REQUIRE(r.code == 0);
        const auto j = nlohmann::json::parse(r.out);
        CHECK(std::abs(j.at("coefficient").get<double>() - 21.0) < 1e-6);
    }
}
