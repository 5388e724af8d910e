#include "mdag/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "mdag/clustering.hpp"
#include "mdag/diagnostics.hpp"
#include "mdag/dlm.hpp"
#include "mdag/errors.hpp"
#include "mdag/hyperparameters.hpp"
#include "mdag/parallel.hpp"
#include "mdag/score_table.hpp"
#include "mdag/solver.hpp"
#include "mdag/synthetic.hpp"
#include "mdag/text_format.hpp"
#include "mdag/time_series.hpp"
#include "mdag/version.hpp"

namespace mdag {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kCacheExtension = ".scores";

// Keys that name files; relative values from a config file are taken
// relative to that file's directory.
const std::vector<std::string> kPathKeys = {"manifest", "cache_dir", "hyper", "network", "out", "input"};

struct Flags {
    std::optional<std::string> config;
    std::optional<std::string> manifest;
    std::optional<std::string> cache_dir;
    std::optional<std::string> hyper;
    std::optional<std::string> mode;
    std::optional<std::string> network;
    std::optional<int> clusters;
    std::optional<std::string> grid;
    std::optional<std::string> metric;
    std::optional<double> time_limit;
    std::optional<int> threads;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> backend;
    std::optional<std::string> input;
};

bool is_path_key(const std::string& key) {
    return std::find(kPathKeys.begin(), kPathKeys.end(), key) != kPathKeys.end();
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> grid;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const std::string t = trim(item);
        if (t.empty()) continue;
        double v = 0.0;
        if (!parse_double(t, v)) throw InputError("grid: cannot parse '" + t + "'");
        grid.push_back(v);
    }
    return grid;
}

json read_config_file(const fs::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    if (!j.is_object()) throw ParseError(path.string() + ": config must be a JSON object");
    const json defaults = default_run_config();
    for (auto& [key, value] : j.items()) {
        if (!defaults.contains(key)) throw ParseError(path.string() + ": unknown config key '" + key + "'");
        if (is_path_key(key) && value.is_string()) {
            const fs::path p(value.get<std::string>());
            const bool keyword = key == "network" && (p == "empty" || p == "complete");
            if (!keyword && p.is_relative()) value = (path.parent_path() / p).lexically_normal().generic_string();
        }
    }
    return j;
}

// CLI flag > config file > default.
json resolve_config(const std::string& command, const Flags& f) {
    json cfg = default_run_config();
    if (f.config) {
        const json file = read_config_file(*f.config);
        for (const auto& [key, value] : file.items()) cfg[key] = value;
    }
    const auto set = [&cfg](const char* key, const auto& flag) {
        if (flag) cfg[key] = *flag;
    };
    set("manifest", f.manifest);
    set("cache_dir", f.cache_dir);
    set("hyper", f.hyper);
    set("mode", f.mode);
    set("network", f.network);
    set("clusters", f.clusters);
    set("metric", f.metric);
    set("time_limit", f.time_limit);
    set("seed", f.seed);
    set("out", f.out);
    set("backend", f.backend);
    set("input", f.input);
    if (f.grid) cfg["grid"] = parse_grid(*f.grid);
    cfg["command"] = command;

    // Expand the hyperparameters and DLM settings so outputs record every value used.
    Hyperparameters hp;
    try {
        if (!cfg["hyper"].is_null()) {
            hp = read_hyperparameters(cfg["hyper"].get<std::string>());
        } else if (!cfg["hyperparameters"].is_null()) {
            hp = hyperparameters_from_json(cfg["hyperparameters"]);
        }
        cfg["hyperparameters"] = to_json(hp);
        cfg["dlm"] = to_json(dlm_config_from_json(cfg["dlm"]));
        if (!cfg["grid"].is_array()) throw InputError("grid must be a list of numbers");
        for (const auto& v : cfg["grid"]) {
            if (!v.is_number()) throw InputError("grid must be a list of numbers");
        }
        (void)parse_mode_kind(cfg["mode"].get<std::string>());
        (void)parse_distance_metric(cfg["metric"].get<std::string>());
        (void)parse_backend(cfg["backend"].get<std::string>());
    } catch (const json::exception& e) {
        throw InputError(std::string("config: ") + e.what());
    }
    return cfg;
}

std::string str(const json& cfg, const char* key) {
    if (cfg[key].is_null()) throw InputError(std::string("missing required setting '") + key + "'");
    return cfg[key].get<std::string>();
}

json provenance(const json& cfg) {
    return {{"tool", kToolName}, {"version", kVersion}, {"config", cfg}};
}

std::string comment_header(const json& cfg, const std::string& prefix) {
    return prefix + " " + kToolName + " " + kVersion + "\n" + prefix + " config: " + cfg.dump() + "\n";
}

SolveLimits limits_of(const json& cfg) {
    SolveLimits limits;
    if (!cfg["time_limit"].is_null()) {
        limits.time_limit_seconds = cfg["time_limit"].get<double>();
        if (!(limits.time_limit_seconds > 0.0)) throw InputError("time limit must be positive");
    }
    limits.backend = parse_backend(cfg["backend"].get<std::string>());
    return limits;
}

// Files are staged in memory and written only once every one of them is ready.
struct Outputs {
    std::vector<std::pair<fs::path, std::string>> files;

    void add(fs::path p, std::string contents) { files.emplace_back(std::move(p), std::move(contents)); }
    void commit() const {
        for (const auto& [p, contents] : files) {
            if (p.has_parent_path()) fs::create_directories(p.parent_path());
        }
        for (const auto& [p, contents] : files) write_file_atomically(p, contents);
    }
};

std::vector<ScoreTable> load_tables(const json& cfg) {
    const fs::path dir = str(cfg, "cache_dir");
    std::vector<std::string> subjects;
    if (!cfg["manifest"].is_null()) {
        for (const auto& e : read_manifest(str(cfg, "manifest"))) subjects.push_back(e.subject);
    } else {
        if (!fs::is_directory(dir)) throw InputError("cache directory '" + dir.string() + "' does not exist");
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (entry.path().extension() == kCacheExtension) subjects.push_back(entry.path().stem().string());
        }
        std::sort(subjects.begin(), subjects.end());
    }
    if (subjects.empty()) throw InputError("no subjects to fit");
    std::vector<ScoreTable> tables;
    for (const auto& s : subjects) {
        const fs::path path = dir / (s + kCacheExtension);
        if (!fs::exists(path)) throw InputError("missing score cache '" + path.string() + "' (run the score command)");
        tables.push_back(read_score_cache(path));
        if (tables.back().subject() != s) {
            throw InputError(path.string() + ": cache is for subject '" + tables.back().subject() + "'");
        }
        if (tables.back().p() != tables.front().p()) throw InputError("score caches disagree on the number of variables");
    }
    return tables;
}

SubjectNetwork load_network(const json& cfg, int k) {
    const std::string spec = str(cfg, "network");
    if (spec == "empty") return SubjectNetwork(k);
    if (spec == "complete") return SubjectNetwork::complete(k);
    SubjectNetwork a;
    try {
        a = network_from_json(json::parse(read_file(spec)));
    } catch (const json::exception& e) {
        throw ParseError(spec + ": " + e.what());
    }
    if (a.k_total() != k) {
        throw InputError(spec + ": network has " + std::to_string(a.k_total()) + " subjects, expected " + std::to_string(k));
    }
    return a;
}

std::vector<std::string> labels_of(const ScoreTable& t) { return t.variables; }

json estimate_json(const MapEstimate& est, const std::vector<ScoreTable>& tables) {
    json j;
    j["objective"] = est.objective;
    j["certificate"] = to_json(est.certificate);
    j["stats"] = {{"nodes", est.stats.nodes}, {"cuts", est.stats.cuts}, {"lp_iterations", est.stats.lp_iterations}};
    j["subjects"] = json::array();
    for (std::size_t k = 0; k < tables.size(); ++k) {
        j["subjects"].push_back({{"subject", tables[k].subject()}, {"dag", to_json(est.dags[k])}});
    }
    return j;
}

int cmd_score(const json& cfg, int threads, std::ostream& out) {
    const auto entries = read_manifest(str(cfg, "manifest"));
    const DlmConfig dlm = dlm_config_from_json(cfg["dlm"]);
    const Hyperparameters hp = hyperparameters_from_json(cfg["hyperparameters"]);
    const fs::path dir = str(cfg, "cache_dir");
    Outputs files;
    for (const auto& e : entries) {
        const TimeSeries series = read_time_series_csv(e.path, e.subject);
        const int d_max = std::min(hp.d_max, series.p() - 1);
        ScoreTable table = build_score_table(series, d_max, dlm, threads);
        table.metadata = provenance(cfg);
        table.metadata["dlm"] = to_json(dlm);
        table.metadata["d_max"] = d_max;
        table.metadata["source"] = e.path.generic_string();
        files.add(dir / (e.subject + kCacheExtension), score_cache_string(table));
    }
    files.commit();
    out << "scored " << entries.size() << " subject(s) into " << dir.generic_string() << "\n";
    return kExitOk;
}

int status_code(bool proven) { return proven ? kExitOk : kExitGapLimited; }

int cmd_fit(const json& cfg, std::ostream& out) {
    const auto tables = load_tables(cfg);
    const Hyperparameters hp = hyperparameters_from_json(cfg["hyperparameters"]);
    const auto kind = parse_mode_kind(cfg["mode"].get<std::string>());
    const SolveLimits limits = limits_of(cfg);
    const int k = static_cast<int>(tables.size());
    const fs::path dir = str(cfg, "out");

    SolveMode mode;
    if (kind == SolveMode::Kind::fixed_network) mode = SolveMode::fixed(load_network(cfg, k));
    else if (kind == SolveMode::Kind::joint_network) mode = SolveMode::joint();
    else mode = SolveMode::clustering(cfg["clusters"].get<int>());

    const MapEstimate est = solve(tables, hp, mode, limits);
    json solution = provenance(cfg);
    solution.update(estimate_json(est, tables));
    solution["network"] = to_json(est.network);
    solution["partition"] = partition_string(est.network.components());
    Outputs files;
    const std::string header = comment_header(cfg, "//");
    for (int s = 0; s < k; ++s) {
        const auto& t = tables[static_cast<std::size_t>(s)];
        files.add(dir / (t.subject() + ".dot"), header + to_dot(est.dags[static_cast<std::size_t>(s)], labels_of(t), t.subject()));
    }
    if (kind == SolveMode::Kind::clustering) {
        const ClusterResult cr = cluster_result(est, k, mode.clusters);
        json clusters = to_json(cr);
        clusters.erase("subjects");
        clusters.erase("objective");
        clusters.erase("certificate");
        solution["clusters"] = clusters;
        for (std::size_t c = 0; c < cr.prototypes.size(); ++c) {
            const std::string name = "prototype-" + std::to_string(c + 1);
            files.add(dir / (name + ".dot"), header + to_dot(cr.prototypes[c], labels_of(tables.front()), name));
        }
    }
    files.add(dir / "solution.json", solution.dump(2) + "\n");
    files.commit();
    const bool proven = est.certificate.status == Certificate::Status::proven_optimal;
    out << "objective " << format_shortest(est.objective) << (proven ? " (proven optimal)" : " (gap-limited)") << "\n";
    return status_code(proven);
}

int cmd_sweep(const json& cfg, int threads, std::ostream& out) {
    const auto tables = load_tables(cfg);
    const Hyperparameters hp = hyperparameters_from_json(cfg["hyperparameters"]);
    const auto kind = parse_mode_kind(cfg["mode"].get<std::string>());
    const auto metric = parse_distance_metric(cfg["metric"].get<std::string>());
    const auto grid = cfg["grid"].get<std::vector<double>>();
    if (grid.empty()) throw InputError("sweep grid is empty");
    SweepOptions options;
    options.limits = limits_of(cfg);
    options.threads = threads;
    SweepResult sweep;
    if (kind == SolveMode::Kind::fixed_network) {
        sweep = lambda_sweep(tables, hp, load_network(cfg, static_cast<int>(tables.size())), grid, options);
    } else if (kind == SolveMode::Kind::joint_network) {
        sweep = eta_sweep(tables, hp, grid, options);
    } else {
        throw InputError("sweep supports the fixed (lambda) and joint (eta) modes");
    }
    const fs::path dir = str(cfg, "out");
    json result = provenance(cfg);
    result["sweep"] = to_json(sweep);
    Outputs files;
    files.add(dir / "sweep.csv", sweep_csv_string(sweep));
    files.add(dir / "sweep.gp", comment_header(cfg, "#") + gnuplot_script(sweep, metric, "sweep.csv", "sweep.png"));
    files.add(dir / "sweep.json", result.dump(2) + "\n");
    files.commit();
    bool proven = true;
    for (const auto& r : sweep.records) {
        proven = proven && r.certificate.status == Certificate::Status::proven_optimal;
        out << sweep.parameter << ' ' << format_shortest(r.value) << ' ' << to_string(metric) << ' ' << r.distance(metric)
            << "\n";
    }
    return status_code(proven);
}

int cmd_simulate(const json& cfg, std::ostream& out) {
    SyntheticSpec spec = synthetic_spec_from_json(cfg["simulation"]);
    spec.seed = cfg["seed"].get<std::uint64_t>();
    spec.validate();
    const SyntheticData data = generate(spec);
    const fs::path dir = str(cfg, "out");
    Outputs files;
    std::vector<ManifestEntry> entries;
    for (const auto& s : data.series) {
        std::ostringstream csv;
        write_time_series_csv(csv, s);
        files.add(dir / (s.subject + ".csv"), csv.str());
        entries.push_back({s.subject, s.subject + ".csv"});
    }
    std::ostringstream manifest;
    write_manifest(manifest, entries);
    files.add(dir / "manifest.csv", manifest.str());
    json truth = provenance(cfg);
    truth.update(ground_truth_json(spec, data));
    files.add(dir / "truth.json", truth.dump(2) + "\n");
    files.commit();
    out << "simulated " << data.series.size() << " subject(s) into " << dir.generic_string() << "\n";
    return kExitOk;
}

std::string network_dot(const SubjectNetwork& a, const std::vector<std::string>& names) {
    std::ostringstream s;
    s << "graph \"A\" {\n";
    for (int k = 1; k <= a.k_total(); ++k) {
        const std::string label = k <= static_cast<int>(names.size()) ? names[static_cast<std::size_t>(k - 1)] : std::to_string(k);
        s << "  " << k << " [label=\"" << label << "\"];\n";
    }
    for (const auto& e : a.edges()) s << "  " << e.first << " -- " << e.second << ";\n";
    s << "}\n";
    return s.str();
}

// Renders a solution file written by fit as DOT graphs.
int cmd_export(const json& cfg, std::ostream& out) {
    const fs::path input = str(cfg, "input");
    json solution;
    try {
        solution = json::parse(read_file(input));
    } catch (const json::parse_error& e) {
        throw ParseError(input.string() + ": " + e.what());
    }
    const fs::path dir = str(cfg, "out");
    const std::string header = comment_header(cfg, "//");
    Outputs files;
    try {
        std::vector<std::string> names;
        for (const auto& s : solution.at("subjects")) {
            const auto name = s.at("subject").get<std::string>();
            names.push_back(name);
            files.add(dir / (name + ".dot"), header + to_dot(dag_from_json(s.at("dag")), {}, name));
        }
        if (solution.contains("clusters")) {
            int c = 0;
            for (const auto& g : solution["clusters"].at("prototypes")) {
                const std::string name = "prototype-" + std::to_string(++c);
                names.push_back(name);
                files.add(dir / (name + ".dot"), header + to_dot(dag_from_json(g), {}, name));
            }
        }
        files.add(dir / "network.dot", header + network_dot(network_from_json(solution.at("network")), names));
    } catch (const json::exception& e) {
        throw ParseError(input.string() + ": " + e.what());
    }
    files.commit();
    out << "exported " << files.files.size() << " graph(s) into " << dir.generic_string() << "\n";
    return kExitOk;
}

}  // namespace

json default_run_config() {
    json cfg;
    cfg["command"] = nullptr;
    cfg["manifest"] = nullptr;
    cfg["cache_dir"] = "cache";
    cfg["hyper"] = nullptr;
    cfg["hyperparameters"] = nullptr;
    cfg["mode"] = "fixed";
    cfg["network"] = nullptr;
    cfg["clusters"] = 2;
    cfg["grid"] = json::array();
    cfg["metric"] = "shd";
    cfg["time_limit"] = nullptr;
    cfg["seed"] = 1;
    cfg["out"] = "out";
    cfg["backend"] = "auto";
    cfg["dlm"] = json::object();
    cfg["simulation"] = json::object();
    cfg["input"] = nullptr;
    return cfg;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Exact joint estimation of multiple related DAGs from multivariate time series", kToolName};
    app.set_version_flag("--version", std::string(kToolName) + " " + kVersion);
    app.require_subcommand(1);
    Flags f;
    std::string command;
    const auto add_common = [&f](CLI::App* sub) {
        sub->add_option("--config", f.config, "JSON config file (flags override it)");
        sub->add_option("--manifest", f.manifest, "CSV listing subject,path");
        sub->add_option("--cache-dir", f.cache_dir, "directory of score caches");
        sub->add_option("--hyper", f.hyper, "hyperparameter JSON file");
        sub->add_option("--mode", f.mode, "fixed | joint | cluster");
        sub->add_option("--network", f.network, "network JSON file, or 'empty' / 'complete'");
        sub->add_option("--clusters", f.clusters, "number of prototypes L in cluster mode");
        sub->add_option("--grid", f.grid, "comma-separated sweep values");
        sub->add_option("--metric", f.metric, "shd | xor");
        sub->add_option("--time-limit", f.time_limit, "seconds per solve");
        sub->add_option("--threads", f.threads, "worker threads (results do not depend on it)");
        sub->add_option("--seed", f.seed, "random seed");
        sub->add_option("--out", f.out, "output directory");
        sub->add_option("--backend", f.backend, "auto | cutting_plane | column_generation");
    };
    for (const auto& [name, help] : std::vector<std::pair<std::string, std::string>>{
             {"score", "build score caches from the manifest"},
             {"fit", "solve for the MAP DAGs (and network)"},
             {"sweep", "lambda (fixed mode) or eta (joint mode) sweep"},
             {"simulate", "generate synthetic subjects"},
             {"export", "render a solution file as DOT graphs"}}) {
        auto* sub = app.add_subcommand(name, help);
        add_common(sub);
        if (name == "export") sub->add_option("input", f.input, "solution JSON written by fit");
        sub->callback([&command, name = name] { command = name; });
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << kToolName << ' ' << kVersion << "\n";
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInputError;
    }
    if (command.empty()) {
        for (auto* sub : app.get_subcommands()) command = sub->get_name();
    }

    try {
        const json cfg = resolve_config(command, f);
        const int threads = f.threads ? std::max(1, *f.threads) : default_thread_count();
        if (command == "score") return cmd_score(cfg, threads, out);
        if (command == "fit") return cmd_fit(cfg, out);
        if (command == "sweep") return cmd_sweep(cfg, threads, out);
        if (command == "simulate") return cmd_simulate(cfg, out);
        if (command == "export") return cmd_export(cfg, out);
        err << "error: unknown command '" << command << "'\n";
        return kExitInputError;
    } catch (const InputError& e) {
        err << "input error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const json::exception& e) {
        err << "input error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const fs::filesystem_error& e) {
        err << "input error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << "\n";
        return kExitNumericalError;
    } catch (const CapacityError& e) {
        err << "capacity error: " << e.what() << "\n";
        return kExitCapacityError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}

}  // namespace mdag
