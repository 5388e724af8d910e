#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include <json.hpp>

#include "mdag/cli.hpp"
#include "mdag/score_table.hpp"
#include "mdag/text_format.hpp"

using namespace mdag;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kFixtures = MDAG_FIXTURE_DIR;

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("mdag_cli_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) files[fs::relative(e.path(), dir).generic_string()] = read_file(e.path());
    return files;
}

void write_series(const fs::path& path, int n, int seed) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
    std::normal_distribution<double> z;
    std::ostringstream s;
    s << "A,B,C\n";
    for (int t = 0; t < n; ++t) {
        const double a = z(rng), b = 0.8 * a + z(rng), c = z(rng) - 0.5 * b;
        s << format_shortest(a) << ',' << format_shortest(b) << ',' << format_shortest(c) << '\n';
    }
    write_file_atomically(path, s.str());
}

json read_json(const fs::path& p) { return json::parse(read_file(p)); }

}  // namespace

TEST_CASE("score builds one cache per subject") {
    TempDir tmp("score");
    write_series(tmp.path / "x.csv", 40, 1);
    write_series(tmp.path / "y.csv", 40, 2);
    write_file_atomically(tmp.path / "manifest.csv", "subject,path\nx,x.csv\ny,y.csv\n");
    const std::string manifest = (tmp.path / "manifest.csv").string();
    const std::string cache = (tmp.path / "cache").string();
    const auto r = cli({"score", "--manifest", manifest, "--cache-dir", cache, "--threads", "1"});
    REQUIRE(r.code == 0);
    const auto x = read_score_cache(tmp.path / "cache" / "x.scores");
    CHECK(x.p() == 3);
    CHECK(x.d_max() == 2);
    std::size_t records = 0;
    for (int i = 1; i <= 3; ++i) records += x.entries(i).size();
    CHECK(records == 12);
    CHECK(x.metadata.at("d_max") == 2);

    const auto first = snapshot(tmp.path / "cache");
    fs::remove_all(tmp.path / "cache");
    REQUIRE(cli({"score", "--manifest", manifest, "--cache-dir", cache, "--threads", "3"}).code == 0);
    CHECK(snapshot(tmp.path / "cache") == first);
}

TEST_CASE("score fails cleanly on a missing series") {
    TempDir tmp("missing");
    write_series(tmp.path / "x.csv", 20, 1);
    write_file_atomically(tmp.path / "manifest.csv", "subject,path\nx,x.csv\ny,nowhere.csv\n");
    const auto r = cli({"score", "--manifest", (tmp.path / "manifest.csv").string(), "--cache-dir", (tmp.path / "cache").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("nowhere.csv") != std::string::npos);
    CHECK_FALSE(fs::exists(tmp.path / "cache" / "x.scores"));
}

TEST_CASE("fit on the two-subject fixture") {
    TempDir tmp("fit");
    const std::string config = (kFixtures / "two_subject" / "config.json").string();
    for (const auto& [hyper, objective, forward1] : {std::tuple{"hyper_lambda_0.5.json", 4.0, true},
                                                     std::tuple{"hyper_lambda_1.5.json", 2.5, false},
                                                     std::tuple{"hyper_lambda_3.json", 2.0, true}}) {
        CAPTURE(hyper);
        const auto out = tmp.path / hyper;
        const auto r = cli({"fit", "--config", config, "--hyper", (kFixtures / "two_subject" / hyper).string(), "--out", out.string()});
        REQUIRE(r.code == 0);
        const auto sol = read_json(out / "solution.json");
        CHECK(sol.at("objective").get<double>() == doctest::Approx(objective).epsilon(1e-12));
        CHECK(sol.at("certificate").at("status") == "proven_optimal");
        const bool has = sol.at("subjects")[0].at("dag").at("parents")[1] == json::array({1});
        CHECK(has == forward1);
        CHECK(fs::exists(out / "s1.dot"));
        CHECK(read_file(out / "s2.dot").rfind("// mdag", 0) == 0);
    }
}

TEST_CASE("zero reward in joint mode reproduces independent fits") {
    TempDir tmp("joint");
    write_file_atomically(tmp.path / "h.json", R"({"lambda": 2, "eta": 0, "d_max": 1})");
    const auto r = cli({"fit", "--config", (kFixtures / "two_subject" / "config.json").string(), "--mode", "joint", "--hyper",
                        (tmp.path / "h.json").string(), "--out", (tmp.path / "o").string()});
    REQUIRE(r.code == 0);
    const auto sol = read_json(tmp.path / "o" / "solution.json");
    CHECK(sol.at("network").at("edges").empty());
    CHECK(sol.at("subjects")[0].at("dag").at("parents") == json::parse("[[],[1]]"));
    CHECK(sol.at("subjects")[1].at("dag").at("parents") == json::parse("[[2],[]]"));
    CHECK(sol.at("objective").get<double>() == doctest::Approx(5.0));
}

TEST_CASE("cluster mode with one cluster per subject") {
    TempDir tmp("cluster");
    const auto dir = kFixtures / "four_subject";
    write_file_atomically(tmp.path / "h.json", R"({"lambda": 1, "eta": 0, "d_max": 1})");
    const auto r = cli({"fit", "--config", (dir / "config.json").string(), "--mode", "cluster", "--clusters", "3", "--hyper",
                        (tmp.path / "h.json").string(), "--out", (tmp.path / "o").string()});
    REQUIRE(r.code == 0);
    const auto sol = read_json(tmp.path / "o" / "solution.json");
    CHECK(sol.at("clusters").at("assignment") == json::array({1, 1, 2, 2}));
    CHECK(fs::exists(tmp.path / "o" / "prototype-3.dot"));
    const auto e = cli({"export", (tmp.path / "o" / "solution.json").string(), "--out", (tmp.path / "e").string()});
    REQUIRE(e.code == 0);
    const auto net = read_file(tmp.path / "e" / "network.dot");
    CHECK(net.find("1 -- 5;") != std::string::npos);
    CHECK(net.find("label=\"prototype-1\"") != std::string::npos);
    CHECK(fs::exists(tmp.path / "e" / "s4.dot"));
}

TEST_CASE("flags override the config, which overrides defaults") {
    TempDir tmp("precedence");
    const auto config = kFixtures / "two_subject" / "config.json";
    REQUIRE(cli({"fit", "--config", config.string(), "--out", (tmp.path / "a").string()}).code == 0);
    const auto a = read_json(tmp.path / "a" / "solution.json").at("config");
    CHECK(a.at("metric") == "xor");            // from the config
    CHECK(a.at("backend") == "auto");          // default
    CHECK(a.at("hyperparameters").at("lambda") == 3.0);
    REQUIRE(cli({"fit", "--config", config.string(), "--metric", "shd", "--hyper",
                 (kFixtures / "two_subject" / "hyper_lambda_0.5.json").string(), "--out", (tmp.path / "b").string()})
                .code == 0);
    const auto b = read_json(tmp.path / "b" / "solution.json").at("config");
    CHECK(b.at("metric") == "shd");
    CHECK(b.at("hyperparameters").at("lambda") == 0.5);
    CHECK(cli({"fit", "--config", config.string(), "--mode", "sideways"}).code == 2);
}

TEST_CASE("sweep writes csv, plot script and json") {
    TempDir tmp("sweep");
    const auto r = cli({"sweep", "--config", (kFixtures / "two_subject" / "config.json").string(), "--out", tmp.path.string()});
    REQUIRE(r.code == 0);
    CHECK(read_file(tmp.path / "sweep.csv") ==
          "value,total_shd,total_xor,objective,partition\n0.5,1,2,4,\"{{1,2}}\"\n1.5,1,1,2.5,\"{{1,2}}\"\n3,0,0,2,\"{{1,2}}\"\n");
    CHECK(read_file(tmp.path / "sweep.gp").find("using 1:3") != std::string::npos);
    CHECK(read_json(tmp.path / "sweep.json").at("sweep").at("records").size() == 3);
    CHECK(r.out.find("lambda 1.5 xor 1") != std::string::npos);
    CHECK(cli({"sweep", "--config", (kFixtures / "two_subject" / "config.json").string(), "--grid", "", "--out",
               (tmp.path / "x").string()})
              .code == 2);
    CHECK_FALSE(fs::exists(tmp.path / "x"));
}

TEST_CASE("simulate and rerun byte for byte") {
    TempDir tmp("simulate");
    write_file_atomically(tmp.path / "c.json", R"({"simulation": {"p": 3, "k_subjects": 2, "n_steps": 30, "d_max": 2}})");
    const auto run = [&](const std::string& name, const std::string& threads) {
        return cli({"simulate", "--config", (tmp.path / "c.json").string(), "--seed", "7", "--threads", threads, "--out",
                    (tmp.path / name).string()});
    };
    REQUIRE(run("a", "1").code == 0);
    REQUIRE(run("b", "4").code == 0);
    const auto a = snapshot(tmp.path / "a");
    CHECK(a.count("manifest.csv") == 1);
    CHECK(a.size() == 4);
    CHECK(a.count("S2.csv") == 1);
    auto b = snapshot(tmp.path / "b");
    // Only the output directory differs in the recorded configuration.
    for (auto& [name, contents] : b) {
        const std::string from = (tmp.path / "b").generic_string(), to = (tmp.path / "a").generic_string();
        for (std::size_t at = contents.find(from); at != std::string::npos; at = contents.find(from, at)) contents.replace(at, from.size(), to);
    }
    CHECK(a == b);
    CHECK(read_json(tmp.path / "a" / "truth.json").at("subjects").size() == 2);
}

TEST_CASE("usage errors") {
    CHECK(cli({}).code == 2);
    CHECK(cli({"fit", "--bogus"}).code == 2);
    CHECK(cli({"--version"}).code == 0);
    CHECK(cli({"fit", "--config", "/nonexistent/config.json"}).code == 2);
    CHECK(cli({"export", "/nonexistent/solution.json"}).code == 2);
}
