#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace diqr::cli {

using Json = nlohmann::ordered_json;

// One line of a run's JSON-lines output. kind is "trial" or "summary".
struct RunRecord {
    std::string kind;
    std::string command;
    std::string timestamp;
    Json config;   // full parameter snapshot including the master seed
    Json outputs;  // per-trial outputs or summary statistics

    Json to_json() const;
    static RunRecord from_json(const Json& j);
    friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

// Exit codes.
constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kViolation = 2;
constexpr int kAbort = 3;

// Entry point shared by the executable and the tests. Records go to
// --out-dir, else $DIQR_OUT_DIR, else nowhere; the summary goes to out.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace diqr::cli
