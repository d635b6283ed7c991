#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "diqr/cli.hpp"

using namespace diqr::cli;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run call(const std::vector<std::string>& args) {
    std::ostringstream o, e;
    const int c = run(args, o, e);
    return {c, o.str(), e.str()};
}

Json summary(const Run& r) { return Json::parse(r.out); }

fs::path fresh_dir(const std::string& name) {
    fs::path d = fs::temp_directory_path() / ("diqr_cli_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::vector<std::string> lines(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::string> v;
    for (std::string l; std::getline(in, l);) v.push_back(l);
    return v;
}

}  // namespace

TEST_CASE("RunRecord round trip") {
    RunRecord r{"trial", "simulate", "2026-01-01T00:00:00Z", Json{{"N", 10}, {"seed", "ab"}},
                Json{{"success", true}, {"failures", 0}}};
    const Json j = r.to_json();
    CHECK(j.at("record") == "trial");
    CHECK(RunRecord::from_json(j) == r);
    CHECK(RunRecord::from_json(Json::parse(j.dump())) == r);
}

TEST_CASE("usage errors") {
    CHECK(call({}).code == kUsage);
    CHECK(call({"bogus"}).code == kUsage);
    CHECK(call({"rate", "--eta", "0.02"}).code == kUsage);  // beyond the GHZ cutoff
    CHECK(call({"simulate", "--format", "xml"}).code == kUsage);
    CHECK(call({"simulate", "--seed", "xyz"}).code == kUsage);
}

TEST_CASE("simulate is deterministic up to the timestamp") {
    const std::vector<std::string> args{"simulate", "--N", "2000", "--trials", "4", "--device", "noisy", "--noise", "0.05"};
    auto a = call(args), b = call(args);
    REQUIRE(a.code == kOk);
    Json ja = summary(a), jb = summary(b);
    ja.erase("timestamp");
    jb.erase("timestamp");
    CHECK(ja == jb);
    CHECK(ja.at("config").at("seed").get<std::string>().size() == 64);

    auto other = call({"simulate", "--N", "2000", "--trials", "4", "--device", "noisy", "--noise", "0.05", "--seed",
                       std::string(63, '0') + "7"});
    CHECK(summary(other).at("config").at("seed") != ja.at("config").at("seed"));
}

TEST_CASE("exit codes for aborts and violations") {
    auto strict = call({"simulate", "--N", "2000", "--trials", "3", "--device", "classical", "--strict"});
    CHECK(strict.code == kAbort);
    CHECK(summary(strict).at("outputs").at("aborts") == 3);
    auto lax = call({"simulate", "--N", "2000", "--trials", "3", "--device", "classical"});
    CHECK(lax.code == kOk);

    CHECK(call({"verify", "--suite", "uncertainty", "--instances", "20"}).code == kOk);
    CHECK(call({"recon", "--trials", "50"}).code == kOk);
    // Longer unique-regime words use a direct sum of 15-bit blocks; the CLI
    // reports when that falls short of the full promise radius.
    auto ds = call({"recon", "--N", "30", "--trials", "50"});
    CHECK(ds.code == kViolation);
    CHECK(summary(ds).at("outputs").at("promise_violations") == 0);
}

TEST_CASE("csv output") {
    auto r = call({"simulate", "--N", "1000", "--trials", "2", "--format", "csv"});
    REQUIRE(r.code == kOk);
    std::istringstream in(r.out);
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(header.rfind("command,", 0) == 0);
    CHECK(header.find("device.kind") != std::string::npos);
    CHECK(row.rfind("simulate,", 0) == 0);
    CHECK(std::count(header.begin(), header.end(), ',') == std::count(row.begin(), row.end(), ','));
}

TEST_CASE("record files") {
    const fs::path dir = fresh_dir("out");
    auto r = call({"recon", "--trials", "5", "--out-dir", dir.string()});
    REQUIRE(r.code == kOk);
    call({"recon", "--trials", "5", "--out-dir", dir.string()});
    auto jl = lines(dir / "recon.jsonl");
    CHECK(jl.size() == 12);
    std::size_t summaries = 0;
    for (const auto& l : jl) {
        auto rec = RunRecord::from_json(Json::parse(l));
        CHECK(rec.command == "recon");
        summaries += rec.kind == "summary";
        CHECK(rec.config.contains("seed"));
    }
    CHECK(summaries == 2);
    auto csv = lines(dir / "recon_summary.csv");
    CHECK(csv.size() == 3);  // header once, one row per run
    CHECK(csv[0].rfind("command,", 0) == 0);

    const fs::path env_dir = fresh_dir("env");
    setenv("DIQR_OUT_DIR", env_dir.string().c_str(), 1);
    call({"verify", "--suite", "schatten", "--instances", "5"});
    unsetenv("DIQR_OUT_DIR");
    CHECK(fs::exists(env_dir / "verify.jsonl"));
    CHECK(fs::exists(env_dir / "verify_summary.csv"));
    fs::remove_all(dir);
    fs::remove_all(env_dir);
}

TEST_CASE("rate command") {
    auto r = call({"rate", "--eta", "0.01", "--N", "1e6"});
    REQUIRE(r.code == kOk);
    CHECK(summary(r).at("outputs").at("bound").get<double>() > 0);
    auto fixed = call({"rate", "--eta", "0.01", "--N", "1e6", "--q", "0.01", "--kappa", "0.1", "--epsilon-exp", "0.5"});
    REQUIRE(fixed.code == kOk);
    const Json o = summary(fixed).at("outputs");
    CHECK(o.at("bound").get<double>() == doctest::Approx(1e6 * o.at("T").get<double>()));
    CHECK(call({"rate", "--eta", "0.01", "--q", "0.01"}).code == kUsage);  // q without kappa
}
