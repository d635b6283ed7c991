#include "diqr/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "diqr/parallel.hpp"
#include "diqr/postprocess.hpp"
#include "diqr/protocols.hpp"
#include "diqr/qkd.hpp"
#include "diqr/rates.hpp"
#include "diqr/recon.hpp"
#include "diqr/verify.hpp"
#include "diqr/xorgames.hpp"

namespace diqr::cli {

Json RunRecord::to_json() const {
    Json j;
    j["record"] = kind;
    j["command"] = command;
    j["timestamp"] = timestamp;
    j["config"] = config;
    j["outputs"] = outputs;
    return j;
}

RunRecord RunRecord::from_json(const Json& j) {
    return {j.at("record").get<std::string>(), j.at("command").get<std::string>(), j.at("timestamp").get<std::string>(),
            j.at("config"), j.at("outputs")};
}

namespace {

constexpr const char* kDefaultSeed = "000000000000000000000000000000000000000000000000000000000000d1a5";

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string seed = kDefaultSeed;
    std::optional<std::size_t> trials;
    int workers = 0;
    std::string format = "json";
    bool strict = false;
    std::string out_dir;
};

struct CommandResult {
    Json config;
    std::vector<Json> trials;
    Json summary;
    int code = kOk;
    std::string message;
};

std::string now_utc() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

void flatten(const Json& j, const std::string& prefix, Json& row) {
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it)
            flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), row);
    } else if (j.is_array()) {
        row[prefix] = j.dump();
    } else {
        row[prefix] = j;
    }
}

std::string csv_cell(const Json& v) {
    std::string s = v.is_string() ? v.get<std::string>() : v.dump();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

// Summary CSV row: config keys first, then outputs, each in insertion order.
Json csv_row(const RunRecord& r) {
    Json row = Json::object();
    row["command"] = r.command;
    flatten(r.config, "", row);
    flatten(r.outputs, "", row);
    return row;
}

std::pair<std::string, std::string> csv_lines(const Json& row) {
    std::string header, values;
    for (auto it = row.begin(); it != row.end(); ++it) {
        if (it != row.begin()) {
            header += ',';
            values += ',';
        }
        header += csv_cell(it.key());
        values += csv_cell(it.value());
    }
    return {header, values};
}

// Single appender for all record output of a run.
class Appender {
public:
    explicit Appender(std::string dir) : dir_(std::move(dir)) {}

    void write(const std::string& command, const std::vector<RunRecord>& records, const RunRecord& summary) {
        if (dir_.empty()) return;
        std::lock_guard lock(mu_);
        std::filesystem::create_directories(dir_);
        std::ofstream jl(std::filesystem::path(dir_) / (command + ".jsonl"), std::ios::app);
        for (const auto& r : records) jl << r.to_json().dump() << '\n';
        jl << summary.to_json().dump() << '\n';
        const auto csv_path = std::filesystem::path(dir_) / (command + "_summary.csv");
        const bool fresh = !std::filesystem::exists(csv_path);
        std::ofstream csv(csv_path, std::ios::app);
        auto [header, values] = csv_lines(csv_row(summary));
        if (fresh) csv << header << '\n';
        csv << values << '\n';
        if (!jl || !csv) throw std::runtime_error("failed writing records to " + dir_);
    }

private:
    std::string dir_;
    std::mutex mu_;
};

struct GameRef {
    std::string name;
    XorGame game;
    GameConstants constants;
};

GameRef resolve_game(const std::string& name, int workers) {
    if (name == "ghz") return {name, ghz_game(), ghz_constants()};
    XorGame g = name == "chsh" ? chsh_game() : load_game(name);
    return {name, g, analyze_game(g, name, workers)};
}

Seed256 trial_master(const Seed256& master, std::size_t t) {
    auto rng = substream(master, "trial-master", t);
    return {rng(), rng(), rng(), rng()};
}

struct DeviceSpec {
    std::string kind = "honest";
    double noise = 0.0;
    std::string noise_kind = "uniform";
    std::string config_path;
    double v = 1.0, h = 0.0;
    int aux = 1, env = 2;
};

Json device_json(const DeviceSpec& d) {
    Json j;
    j["kind"] = d.kind;
    if (d.kind == "noisy") {
        j["noise"] = d.noise;
        j["noise_kind"] = d.noise_kind;
    }
    if (d.kind == "partially-trusted") {
        j["v"] = d.v;
        j["h"] = d.h;
        j["aux"] = d.aux;
        j["env"] = d.env;
    }
    if (!d.config_path.empty()) j["config"] = d.config_path;
    return j;
}

void add_device_options(CLI::App* sub, DeviceSpec& d) {
    sub->add_option("--device", d.kind, "honest | noisy | classical | adversarial | partially-trusted")
        ->check(CLI::IsMember({"honest", "noisy", "classical", "adversarial", "partially-trusted"}));
    sub->add_option("--noise", d.noise, "noise probability p for --device noisy")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--noise-kind", d.noise_kind, "uniform | fixed")->check(CLI::IsMember({"uniform", "fixed"}));
    sub->add_option("--device-config", d.config_path, "JSON device spec (overrides --device)");
}

// Device file: {"kind": "noisy", "noise": 0.03, "noise_kind": "uniform"} or
// {"kind": "adversarial", "table": [[o_000, ..., o_111], ...]} (rows per round).
DeviceBehavior build_device(DeviceSpec d, const GameRef& g, const Seed256& master) {
    std::vector<std::vector<unsigned>> table;
    if (!d.config_path.empty()) {
        std::ifstream in(d.config_path);
        if (!in) throw UsageError("cannot open device config " + d.config_path);
        const Json j = Json::parse(in);
        d.kind = j.value("kind", d.kind);
        d.noise = j.value("noise", d.noise);
        d.noise_kind = j.value("noise_kind", d.noise_kind);
        d.v = j.value("v", d.v);
        d.h = j.value("h", d.h);
        d.aux = j.value("aux", d.aux);
        d.env = j.value("env", d.env);
        if (j.contains("table")) table = j.at("table").get<std::vector<std::vector<unsigned>>>();
    }
    if (d.kind == "partially-trusted") {
        auto rng = substream(master, "device-spec");
        return random_partially_trusted(rng, d.v, d.h, d.aux, d.env);
    }
    if (d.kind == "adversarial") {
        if (table.empty()) throw UsageError("adversarial device needs a table in --device-config");
        return AdversarialBehavior{g.game.n, {}, table};
    }
    if (g.name != "ghz") throw UsageError("built-in quantum devices exist for the ghz game only");
    auto honest = std::get<HonestBehavior>(ghz_honest_device());
    if (d.kind == "honest") return honest;
    if (d.kind == "classical") return NoisyHonestBehavior{honest, 1.0, NoiseKind::fixed_strategy, ghz_classical_strategy()};
    const NoiseKind kind = d.noise_kind == "fixed" ? NoiseKind::fixed_strategy : NoiseKind::uniform_output;
    return NoisyHonestBehavior{honest, d.noise, kind, kind == NoiseKind::fixed_strategy ? ghz_classical_strategy()
                                                                                         : std::vector<std::array<int, 2>>{}};
}

Json bits_string(const Bits& b) {
    std::string s;
    for (auto x : b) s.push_back(x ? '1' : '0');
    return s;
}

// ---- rate ----

struct RateArgs {
    std::string game = "ghz";
    double eta = 0;
    double N = 1e6;
    std::optional<double> q, kappa;
    double epsilon_exp = -20;
};

CommandResult cmd_rate(const RateArgs& a, const Common& c) {
    CommandResult r;
    const GameRef g = resolve_game(a.game, c.workers);
    const double v = g.constants.vG_lower;
    const double root = small_pi_root();
    const double cutoff = root * v;
    r.config = {{"game", a.game}, {"eta", a.eta}, {"N", a.N}, {"epsilon_exp", a.epsilon_exp}, {"seed", c.seed}};
    if (a.q) r.config["q"] = *a.q;
    if (a.kappa) r.config["kappa"] = *a.kappa;
    Json s;
    s["v_G"] = v;
    s["v_G_source"] = g.constants.vG_source;
    s["f_G"] = g.constants.fG;
    s["pi_root"] = root;
    s["eta_cutoff"] = cutoff;
    if (!(a.eta > 0)) throw UsageError("eta must be positive");
    if (a.q.has_value() != a.kappa.has_value()) throw UsageError("--q and --kappa go together");
    if (!(a.eta < cutoff)) {
        s["feasible"] = false;
        std::ostringstream os;
        os << "infeasible: eta = " << a.eta << " is not below the cutoff pi_root * v_G = " << cutoff
           << " (pi(eta/v_G) must be positive)";
        s["reason"] = os.str();
        r.summary = s;
        r.code = kUsage;
        r.message = os.str();
        return r;
    }
    s["pi_eta_over_v"] = small_pi(a.eta / v);
    const double eps = std::exp2(a.epsilon_exp);
    RateReport rep = a.q ? certified_bound(g.constants, a.N, *a.q, a.eta, *a.kappa, eps)
                         : optimize_certified_bound(g.constants, a.N, a.eta, eps, c.workers);
    s["feasible"] = true;
    s["q"] = rep.params.q;
    s["kappa"] = rep.params.kappa;
    s["r"] = rep.params.r;
    s["T"] = rep.T_value;
    s["E"] = rep.E_value;
    s["bound"] = rep.bound;
    s["bound_positive"] = rep.bound > 0;
    r.summary = s;
    return r;
}

// ---- simulate ----

struct SimArgs {
    std::string game = "ghz";
    std::string protocol = "r";
    DeviceSpec device;
    std::size_t N = 10000;
    double q = 0.05;
    double eta = 0.01;
    std::optional<double> eta_prime;
};

CommandResult cmd_simulate(const SimArgs& a, const Common& c, const Seed256& master) {
    CommandResult r;
    const std::size_t trials = c.trials.value_or(100);
    GameRef g = a.protocol == "r" ? resolve_game(a.game, c.workers) : GameRef{"none", {}, {}};
    DeviceSpec dspec = a.device;
    if (a.protocol == "a-prime") dspec.kind = "partially-trusted";
    r.config = {{"game", a.game},        {"protocol", a.protocol}, {"device", device_json(dspec)},
                {"N", a.N},              {"q", a.q},               {"eta", a.eta},
                {"trials", trials},      {"seed", c.seed}};
    if (a.eta_prime) r.config["eta_prime"] = *a.eta_prime;
    const DeviceBehavior dev = build_device(dspec, g, master);
    const ProtocolConfig pc = a.protocol == "r" ? ProtocolConfig::protocol_r(g.game, a.N, a.q, a.eta)
                                                : ProtocolConfig::protocol_a_prime(dspec.v, dspec.h, a.N, a.q, a.eta);
    const MonteCarloStats st = monte_carlo(pc, dev, trials, master, a.eta_prime, c.workers);
    double mean_fail = 0;
    for (const auto& t : st.records) {
        r.trials.push_back({{"trial", t.trial},
                            {"success", t.success},
                            {"failures", t.failures},
                            {"game_rounds", t.game_rounds},
                            {"seed_bits_used", t.seed_bits_used}});
        mean_fail += static_cast<double>(t.failures);
    }
    Json s;
    s["threshold"] = pc.abort_threshold();
    s["trials"] = st.trials;
    s["aborts"] = st.aborts;
    s["abort_rate"] = st.abort_rate;
    s["abort_rate_lo"] = st.interval.lo;
    s["abort_rate_hi"] = st.interval.hi;
    s["mean_failures"] = trials ? mean_fail / static_cast<double>(trials) : 0.0;
    if (st.completeness_bound) s["completeness_bound"] = *st.completeness_bound;
    s["flagged"] = st.flagged;
    r.summary = s;
    if (st.flagged) {
        r.code = kViolation;
        r.message = "abort rate exceeds the completeness bound by more than 3 sigma";
    } else if (c.strict && st.aborts > 0) {
        r.code = kAbort;
        r.message = std::to_string(st.aborts) + " protocol aborts";
    }
    return r;
}

// ---- qkd ----

struct QkdArgs {
    DeviceSpec device;
    std::size_t N = 10000;
    double q = 0.05;
    double eta = 0.001;
    double lambda = 0.26;
    double lambda_prime = 0.3;
    double delta = 0.1;
    double C = 1.0;
};

CommandResult cmd_qkd(const QkdArgs& a, const Common& c, const Seed256& master) {
    CommandResult r;
    const std::size_t trials = c.trials.value_or(1);
    const GameRef g = resolve_game("ghz", c.workers);
    r.config = {{"game", "ghz"},         {"device", device_json(a.device)}, {"N", a.N},
                {"q", a.q},              {"eta", a.eta},                    {"lambda", a.lambda},
                {"lambda_prime", a.lambda_prime}, {"delta", a.delta},       {"C", a.C},
                {"trials", trials},      {"seed", c.seed}};
    KdConfig kc = KdConfig::ghz(a.N, a.q, a.eta);
    kc.lambda = a.lambda;
    kc.lambda_prime = a.lambda_prime;
    kc.delta = a.delta;
    try {
        kc.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const DeviceBehavior dev = build_device(a.device, g, master);
    std::vector<KdOutcome> outs(trials);
    parallel_for(trials, c.workers, [&](std::size_t t) { outs[t] = run_rkd(kc, dev, master, t, t == 0); });
    KdMonteCarlo mc;
    mc.trials = trials;
    std::size_t ok = 0, equal = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        const auto& o = outs[t];
        mc.records.push_back({o.success, o.wins, o.disagreements, o.keys_equal});
        ok += o.success;
        equal += o.success && o.keys_equal;
        Json tj{{"trial", t},
                {"success", o.success},
                {"abort_reason", o.abort_reason},
                {"game_rounds", o.game_rounds},
                {"generation_rounds", o.generation_rounds},
                {"failures", o.failures},
                {"disagreements", o.disagreements},
                {"keys_equal", o.keys_equal},
                {"leaked_bits", o.leaked_bits},
                {"seed_bits_used", o.seed_bits_used}};
        if (o.eir) {
            tj["corrections"] = o.eir->corrections;
            tj["promise_violated"] = o.eir->promise_violated;
            tj["eir_randomness"] = o.eir->randomness_used;
        }
        tj["public_transcript"] = o.public_transcript;
        r.trials.push_back(std::move(tj));
    }
    Json s;
    s["trials"] = trials;
    s["successes"] = ok;
    s["keys_equal"] = equal;
    s["abort_threshold"] = kc.abort_threshold();
    s["eir_epsilon"] = kc.eir_epsilon();
    const double eb = eta_bar_sqrt(a.lambda_prime, g.constants.wG, a.C);
    s["eta_bar"] = eb;
    s["eta_bar_C_provenance"] = "configured constant, not pinned by theory";
    if (a.eta < eb) {
        const auto ag = agreement_bound_check(mc, a.N, a.q, a.lambda, a.lambda_prime, a.eta, eb);
        s["agreement_bad_frequency"] = ag.bad_frequency;
        s["agreement_bound"] = ag.bound;
        s["agreement_flagged"] = ag.flagged;
        if (ag.flagged) r.code = kViolation;
    } else {
        s["agreement_check"] = "skipped: eta >= eta_bar";
    }
    const auto& first = outs.front();
    if (first.success) {
        const auto& rep = first.report;
        s["rate_feasible"] = rep.feasible;
        s["rate"] = rep.rate;
        s["expansion_bits"] = rep.expansion_bits;
        s["finite_bound"] = rep.finite_bound;
        s["leaked_bits"] = rep.leaked_bits;
        s["certified_bits"] = rep.certified_bits;
        s["residual_fraction"] = rep.residual_fraction;
        s["residual_fraction_source"] = "desk measurement at this N";
        s["seed_bits"] = rep.seed_bits;
        s["eir_randomness"] = rep.eir_randomness;
        s["code_rate"] = first.eir ? 1.0 - static_cast<double>(first.leaked_bits) / static_cast<double>(first.generation_rounds) : 0.0;
        if (!rep.warning.empty()) s["warning"] = rep.warning;
    }
    r.summary = s;
    if (r.code == kOk && c.strict && ok < trials) {
        r.code = kAbort;
        r.message = std::to_string(trials - ok) + " protocol aborts";
    }
    return r;
}

// ---- expand ----

struct ExpandArgs {
    DeviceSpec device;
    std::optional<double> schedule_k;
    double omega = 0.4;
    double desk_cap = 1e5;
    double target_log2 = 65536;
};

Json ledger_json(const ErrorLedger& l) {
    Json entries = Json::array();
    for (const auto& e : l.entries)
        entries.push_back({{"stage", e.stage},
                           {"device", e.device},
                           {"soundness", e.soundness.to_string()},
                           {"completeness", e.completeness.to_string()}});
    return {{"entries", entries},
            {"total_soundness", l.total_soundness.to_string()},
            {"total_completeness", l.total_completeness.to_string()},
            {"total_soundness_value", l.total_soundness.to_double()},
            {"total_completeness_value", l.total_completeness.to_double()},
            {"consistent", l.consistent()}};
}

CommandResult cmd_expand(const ExpandArgs& a, const Common& c, const Seed256& master) {
    CommandResult r;
    const std::size_t trials = c.trials.value_or(1);
    const GameRef g = resolve_game("ghz", c.workers);
    const CrossFeedConfig cfg = desk_cross_feed_config();
    Json stages = Json::array();
    for (const auto& st : cfg.stages) stages.push_back({{"N", st.N}, {"q", st.q}, {"output_bits", st.output_bits}});
    r.config = {{"game", "ghz"}, {"device", device_json(a.device)}, {"eta", cfg.eta}, {"delta", cfg.delta},
                {"eps_ext", cfg.eps_ext}, {"initial_seed_bits", 16}, {"stages", stages}, {"trials", trials},
                {"seed", c.seed}};
    const DeviceBehavior dev = build_device(a.device, g, master);
    std::vector<CrossFeedResult> res(trials);
    std::vector<Bits> seeds(trials);
    parallel_for(trials, c.workers, [&](std::size_t t) {
        auto rng = substream(master, "initial-seed", t);
        seeds[t] = random_bits(rng, 16);
        res[t] = cross_feed(dev, dev, cfg, seeds[t], trial_master(master, t));
    });
    std::size_t ok = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        const auto& x = res[t];
        ok += x.success;
        Json sj = Json::array();
        for (const auto& s : x.stages)
            sj.push_back({{"stage", s.stage},
                          {"device", s.device},
                          {"N", s.N},
                          {"q", s.q},
                          {"seed_bits_available", s.seed_bits_available},
                          {"seed_bits_used", s.seed_bits_used},
                          {"failures", s.failures},
                          {"certified_bits", s.certified_bits},
                          {"output_bits", s.output_bits},
                          {"success", s.success}});
        Json tj{{"trial", t},
                {"success", x.success},
                {"initial_seed", bits_string(seeds[t])},
                {"final_bits", x.final_bits.size()},
                {"wiring_ok", wiring_ok(x.wiring)},
                {"stages", sj},
                {"ledger", ledger_json(x.ledger)}};
        if (x.aborted_stage) {
            tj["aborted_stage"] = *x.aborted_stage;
            tj["abort_reason"] = x.abort_reason;
        }
        r.trials.push_back(std::move(tj));
    }
    Json s;
    s["trials"] = trials;
    s["successes"] = ok;
    s["final_bits"] = res.front().final_bits.size();
    s["total_soundness"] = res.front().ledger.total_soundness.to_double();
    s["total_completeness"] = res.front().ledger.total_completeness.to_double();
    s["tune_rate"] = res.front().tune.rate;
    s["composition_assumption"] = "stages compose only if the two devices cannot signal each other or the adversary; cited, not simulated";
    if (a.schedule_k) {
        const auto plan = expansion_schedule(*a.schedule_k, a.omega, a.desk_cap, a.target_log2);
        Json ps = Json::array();
        for (const auto& p : plan.stages)
            ps.push_back({{"log2_seed", p.log2_seed},
                          {"log2_N", p.log2_N},
                          {"log2_q", p.log2_q},
                          {"desk_N", p.desk_N},
                          {"desk_q", p.desk_q},
                          {"capped", p.capped}});
        s["schedule"] = {{"k", *a.schedule_k}, {"omega", a.omega}, {"stages", ps}, {"stalled", plan.stalled},
                         {"reached", plan.reached}};
    }
    r.summary = s;
    if (c.strict && ok < trials) {
        r.code = kAbort;
        r.message = std::to_string(trials - ok) + " cross-feed aborts";
    }
    return r;
}

// ---- trust ----

struct TrustArgs {
    std::string game = "ghz";
    double c = 0.14;
    int grid = 64;
    int samples = 10000;
    int multistarts = 20;
};

CommandResult cmd_trust(const TrustArgs& a, const Common& c) {
    CommandResult r;
    r.config = {{"game", a.game},       {"c", a.c},           {"grid", a.grid}, {"samples", a.samples},
                {"multistarts", a.multistarts}, {"seed", c.seed}};
    TrustSampleSpec spec;
    spec.grid_per_axis = a.grid;
    spec.random_samples = a.samples;
    spec.multistarts = a.multistarts;
    spec.workers = c.workers;
    Json s;
    XorGame game;
    CMatrix N;
    double q;
    if (a.game == "ghz") {
        game = ghz_game();
        N = ghz_reference_anticommuter();
        q = 1.0;
        s["anticommuter"] = "reference";
    } else {
        game = a.game == "chsh" ? chsh_game() : load_game(a.game);
        q = optimal_score(game, c.workers).q;
        const auto search = trust_coefficient_search(game, q, spec);
        N = search.anticommuter;
        s["anticommuter"] = "searched";
        s["v_lower"] = search.v_lower;
    }
    const auto res = trust_coefficient_check(game, a.c, N, q, spec);
    s["q_G"] = q;
    s["pass"] = res.pass;
    s["max_violation"] = res.max_violation;
    s["samples"] = res.samples;
    if (res.analytic_checked) s["analytic_failures"] = res.analytic_failures;
    r.summary = s;
    if (!res.pass) {
        r.code = kViolation;
        r.message = "trust coefficient check failed";
    }
    return r;
}

// ---- recon ----

struct ReconArgs {
    double lambda = 0.3;
    std::size_t N = 15;
    double error_fraction = 0.15;
    double epsilon_exp = -10;
    int list_cap = 64;
    std::string hash = "affine";
    std::string code_path;
};

CommandResult cmd_recon(const ReconArgs& a, const Common& c, const Seed256& master) {
    CommandResult r;
    const std::size_t trials = c.trials.value_or(1000);
    if (!(a.lambda > 0 && a.lambda < 0.5)) throw UsageError("lambda must lie in (0, 1/2)");
    const Regime regime = a.lambda > 0.25 ? Regime::unique : Regime::list;
    const int radius = static_cast<int>(std::floor((0.5 - a.lambda) * static_cast<double>(a.N) + 1e-9));
    const double eps = std::exp2(a.epsilon_exp);
    r.config = {{"lambda", a.lambda},   {"N", a.N},
                {"error_fraction", a.error_fraction}, {"regime", regime == Regime::unique ? "unique" : "list"},
                {"epsilon_exp", a.epsilon_exp}, {"trials", trials}, {"seed", c.seed}};
    std::optional<LinearCode> code;
    std::optional<AlmostPairwiseHash> hash;
    try {
        if (!a.code_path.empty()) {
            code = LinearCode::load(a.code_path, regime, radius, a.list_cap);
            if (code->N() != a.N) throw UsageError("code length differs from --N");
        } else if (regime == Regime::unique) {
            if (a.N == 7 && radius <= 1) code = LinearCode(hamming_7_4(), 7, regime, radius);
            else if (a.N == 15 && radius <= 2) code = LinearCode(bch_15_7(), 15, regime, radius);
            else if (a.N == 15 && radius <= 3) code = LinearCode(bch_15_5(), 15, regime, radius);
            else code = LinearCode(bch_15_5(), a.N, regime, 3);
        } else {
            if (a.N != 20 || radius != 8) throw UsageError("built-in list code is N = 20 at radius 8; pass --code otherwise");
            code = desk_list_code(a.list_cap);
        }
        if (regime == Regime::list) {
            const int k = hash_output_bits(a.list_cap, eps);
            const int n = static_cast<int>(a.N);
            hash = a.hash == "affine" ? AlmostPairwiseHash::affine(n, k)
                                      : AlmostPairwiseHash::eps_biased(n, k, eps_biased_field_bits(n, k, a.list_cap, eps));
        }
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    r.config["code"] = a.code_path.empty() ? "built-in" : a.code_path;
    r.config["code_blocks"] = code->blocks();
    r.config["block_n"] = code->block().n;
    if (hash) {
        r.config["hash"] = a.hash;
        r.config["list_cap"] = a.list_cap;
        r.config["hash_bits"] = hash->k;
    }
    const auto errors = static_cast<std::size_t>(std::llround(a.error_fraction * static_cast<double>(a.N)));
    std::vector<EirResult> res(trials);
    parallel_for(trials, c.workers, [&](std::size_t t) {
        auto rng = substream(master, "recon", t);
        Bits X(a.N);
        for (auto& b : X) b = rng() & 1;
        Bits Y = X;
        std::vector<std::size_t> idx(a.N);
        for (std::size_t i = 0; i < a.N; ++i) idx[i] = i;
        std::shuffle(idx.begin(), idx.end(), rng);
        for (std::size_t i = 0; i < errors && i < a.N; ++i) Y[idx[i]] ^= 1;
        EngineBitSource shared(substream(master, "eir-shared", t));
        res[t] = eir_run(*code, X, Y, a.lambda, shared, hash ? &*hash : nullptr);
    });
    std::size_t correct = 0, aborts = 0, promise = 0, randomness = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        const auto& e = res[t];
        correct += e.correct;
        aborts += e.aborted;
        promise += e.promise_violated;
        randomness += e.randomness_used;
        r.trials.push_back({{"trial", t},
                            {"correct", e.correct},
                            {"aborted", e.aborted},
                            {"abort_reason", e.abort_reason},
                            {"promise_violated", e.promise_violated},
                            {"corrections", e.corrections},
                            {"leaked_bits", e.leaked_bits},
                            {"randomness_used", e.randomness_used}});
    }
    Json s;
    const double fail = trials ? static_cast<double>(trials - correct) / static_cast<double>(trials) : 0.0;
    s["trials"] = trials;
    s["correct"] = correct;
    s["aborts"] = aborts;
    s["failure_rate"] = fail;
    s["promise_violations"] = promise;
    s["leaked_bits"] = code->syndrome_len() + (hash ? static_cast<std::size_t>(hash->k) : 0);
    s["code_rate"] = code->rate();
    s["randomness_used"] = randomness;
    if (hash) {
        const double bound = a.list_cap / std::ldexp(1.0, hash->k) + hash->eps_h / 2;
        const double sigma = std::sqrt(eps * (1 - eps) / static_cast<double>(std::max<std::size_t>(trials, 1)));
        s["failure_bound"] = bound;
        s["epsilon"] = eps;
        s["flagged"] = fail > eps + 3 * sigma;
        if (fail > eps + 3 * sigma) {
            r.code = kViolation;
            r.message = "reconciliation failure rate exceeds epsilon + 3 sigma";
        }
    } else if (promise == 0 && correct < trials) {
        r.code = kViolation;
        r.message = "unique-regime reconciliation failed on a promise-satisfying instance";
    }
    r.summary = s;
    return r;
}

// ---- verify ----

struct VerifyArgs {
    std::string suite = "all";
    std::size_t instances = 1000;
};

CommandResult cmd_verify(const VerifyArgs& a, const Common& c, const Seed256& master) {
    CommandResult r;
    r.config = {{"suite", a.suite}, {"instances", a.instances}, {"seed", c.seed}};
    std::vector<std::string> suites = a.suite == "all" ? verify_suites() : std::vector<std::string>{a.suite};
    std::size_t total = 0;
    Json s;
    for (const auto& name : suites) {
        // The exact multi-shot run is far costlier per instance.
        const std::size_t n = (a.suite == "all" && name == "multi-shot") ? std::min<std::size_t>(a.instances, 100) : a.instances;
        const SuiteResult res = run_suite(name, n, master, c.workers);
        total += res.violations;
        Json sj{{"suite", res.suite},
                {"instances", res.instances},
                {"checks", res.checks},
                {"violations", res.violations},
                {"worst_margin", res.worst_margin}};
        r.trials.push_back(sj);
        s[name + "_violations"] = res.violations;
    }
    s["violations"] = total;
    r.summary = s;
    if (total > 0) {
        r.code = kViolation;
        r.message = std::to_string(total) + " inequality violations";
    }
    return r;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Device-independent randomness expansion and key distribution toolkit", "diqr"};
    app.require_subcommand(1);
    app.fallthrough();
    Common common;
    app.add_option("--seed", common.seed, "master seed, 64 hex digits");
    app.add_option("--trials", common.trials, "Monte Carlo trials");
    app.add_option("--workers", common.workers, "worker threads (0 = hardware)")->check(CLI::NonNegativeNumber);
    app.add_option("--format", common.format, "summary format on stdout")->check(CLI::IsMember({"json", "csv"}));
    app.add_flag("--strict", common.strict, "exit 3 when a protocol aborts");
    app.add_option("--out-dir", common.out_dir, "record directory (default $DIQR_OUT_DIR)");

    RateArgs rate;
    auto* s_rate = app.add_subcommand("rate", "certified entropy bound for a game");
    s_rate->add_option("--game", rate.game, "ghz | chsh | game JSON path");
    s_rate->add_option("--eta", rate.eta, "noise level")->required();
    s_rate->add_option("--N", rate.N, "rounds");
    s_rate->add_option("--q", rate.q, "game-round probability");
    s_rate->add_option("--kappa", rate.kappa, "kappa");
    s_rate->add_option("--epsilon-exp", rate.epsilon_exp, "epsilon = 2^x");

    SimArgs sim;
    auto* s_sim = app.add_subcommand("simulate", "Monte Carlo runs of protocol R or A'");
    s_sim->add_option("--game", sim.game, "ghz | chsh | game JSON path");
    s_sim->add_option("--protocol", sim.protocol, "r | a-prime")->check(CLI::IsMember({"r", "a-prime"}));
    add_device_options(s_sim, sim.device);
    s_sim->add_option("--v", sim.device.v, "trusted weight (a-prime)");
    s_sim->add_option("--coin", sim.device.h, "coin weight h (a-prime)");
    s_sim->add_option("--N", sim.N, "rounds");
    s_sim->add_option("--q", sim.q, "game-round probability");
    s_sim->add_option("--eta", sim.eta, "noise tolerance");
    s_sim->add_option("--eta-prime", sim.eta_prime, "device noise level for the completeness bound");

    QkdArgs qkd;
    auto* s_qkd = app.add_subcommand("qkd", "protocol R_kd with reconciliation and key-rate report");
    add_device_options(s_qkd, qkd.device);
    s_qkd->add_option("--N", qkd.N, "rounds");
    s_qkd->add_option("--q", qkd.q, "game-round probability");
    s_qkd->add_option("--eta", qkd.eta, "noise tolerance");
    s_qkd->add_option("--lambda", qkd.lambda, "agreement margin");
    s_qkd->add_option("--lambda-prime", qkd.lambda_prime, "agreement margin for eta_bar");
    s_qkd->add_option("--delta", qkd.delta, "rate slack");
    s_qkd->add_option("--C", qkd.C, "self-test robustness constant");

    ExpandArgs expand;
    auto* s_exp = app.add_subcommand("expand", "two-device cross-feeding expansion");
    add_device_options(s_exp, expand.device);
    s_exp->add_option("--schedule-k", expand.schedule_k, "also plan stages from a k-bit seed");
    s_exp->add_option("--omega", expand.omega, "schedule exponent");
    s_exp->add_option("--desk-cap", expand.desk_cap, "largest simulated N");
    s_exp->add_option("--target-log2", expand.target_log2, "schedule target log2 output");

    TrustArgs trust;
    auto* s_trust = app.add_subcommand("trust", "trust coefficient check");
    s_trust->add_option("--game", trust.game, "ghz | chsh | game JSON path");
    s_trust->add_option("--c", trust.c, "candidate coefficient")->check(CLI::NonNegativeNumber);
    s_trust->add_option("--grid", trust.grid, "grid points per angle");
    s_trust->add_option("--samples", trust.samples, "random samples");
    s_trust->add_option("--multistarts", trust.multistarts, "local maximization starts");

    ReconArgs recon;
    auto* s_recon = app.add_subcommand("recon", "information reconciliation trials");
    s_recon->add_option("--lambda", recon.lambda, "lambda; above 1/4 selects the unique regime");
    s_recon->add_option("--N", recon.N, "string length");
    s_recon->add_option("--error-fraction", recon.error_fraction, "planted disagreement fraction");
    s_recon->add_option("--epsilon-exp", recon.epsilon_exp, "epsilon = 2^x (list regime)");
    s_recon->add_option("--list-cap", recon.list_cap, "list cap L");
    s_recon->add_option("--hash", recon.hash, "affine | eps-biased")->check(CLI::IsMember({"affine", "eps-biased"}));
    s_recon->add_option("--code", recon.code_path, "check matrix file (rows of 0/1)");

    VerifyArgs verify;
    auto* s_verify = app.add_subcommand("verify", "randomized inequality sweeps");
    std::vector<std::string> suite_names = verify_suites();
    suite_names.push_back("all");
    s_verify->add_option("--suite", verify.suite, "suite name or all")->check(CLI::IsMember(suite_names));
    s_verify->add_option("--instances", verify.instances, "instances per suite");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    CLI::App* sub = app.get_subcommands().front();
    const std::string command = sub->get_name();
    try {
        const Seed256 master = parse_seed(common.seed);
        CommandResult res;
        if (command == "rate") res = cmd_rate(rate, common);
        else if (command == "simulate") res = cmd_simulate(sim, common, master);
        else if (command == "qkd") res = cmd_qkd(qkd, common, master);
        else if (command == "expand") res = cmd_expand(expand, common, master);
        else if (command == "trust") res = cmd_trust(trust, common);
        else if (command == "recon") res = cmd_recon(recon, common, master);
        else res = cmd_verify(verify, common, master);

        const std::string stamp = now_utc();
        std::vector<RunRecord> records;
        for (auto& t : res.trials) records.push_back({"trial", command, stamp, res.config, std::move(t)});
        const RunRecord summary{"summary", command, stamp, res.config, res.summary};
        std::string dir = common.out_dir;
        if (dir.empty())
            if (const char* env = std::getenv("DIQR_OUT_DIR")) dir = env;
        Appender(dir).write(command, records, summary);
        if (common.format == "json") {
            out << summary.to_json().dump() << '\n';
        } else {
            auto [header, values] = csv_lines(csv_row(summary));
            out << header << '\n' << values << '\n';
        }
        if (!res.message.empty()) err << command << ": " << res.message << '\n';
        return res.code;
    } catch (const UsageError& e) {
        err << command << ": " << e.what() << "\n\n" << sub->help();
        return kUsage;
    } catch (const std::invalid_argument& e) {
        err << command << ": " << e.what() << "\n\n" << sub->help();
        return kUsage;
    } catch (const std::exception& e) {
        err << command << ": " << e.what() << '\n';
        return kUsage;
    }
}

}  // namespace diqr::cli
