#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pairwalk/cli.hpp"
#include "pairwalk/oracle.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace pairwalk;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

// last data row of a CSV table (skips header and # metadata lines)
std::vector<double> last_row(const std::string& text) {
    std::istringstream is(text);
    std::string line, data;
    bool first = true;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (first) {
            first = false;
            continue;
        }
        data = line;
    }
    std::vector<double> out;
    std::istringstream row(data);
    std::string tok;
    while (std::getline(row, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

int run_to(const std::string& path, std::vector<std::string> args) {
    args.push_back("--output");
    args.push_back(path);
    return cli::run(args);
}

} // namespace

TEST_CASE("transform subcommand evaluates the kernel") {
    const std::string path = "cli_transform.csv";
    REQUIRE(run_to(path, {"transform", "--w", "0", "--wp", "0", "--kappa", "0", "--lambda", "1",
                          "--theta", "0"}) == 0);
    const auto row = last_row(slurp(path));
    REQUIRE(row.size() == 6);
    CHECK(row[4] == doctest::Approx(0.4472136).epsilon(1e-6));
    CHECK(row[5] == doctest::Approx(0.0));
    std::remove(path.c_str());
}

TEST_CASE("sticky subcommand emits the occupation value") {
    const std::string path = "cli_sticky.csv";
    REQUIRE(run_to(path, {"sticky", "--z", "0", "--gamma", "1", "--lambda", "2", "--p0"}) == 0);
    const auto row = last_row(slurp(path));
    REQUIRE(row.size() == 7);
    CHECK(row[5] == doctest::Approx(0.25));
    std::remove(path.c_str());
}

TEST_CASE("invert subcommand matches the uniformization oracle") {
    const std::string path = "cli_invert.csv";
    REQUIRE(run_to(path, {"invert", "--w", "0", "--wp", "0", "--v", "0", "--t", "1", "--theta",
                          "1", "--p", "0.5"}) == 0);
    const auto row = last_row(slurp(path));
    REQUIRE(row.size() == 5);

    TruncatedGeneratorSpec spec;
    spec.params = ModelParams::validated(1.0, 0.5, 1.0);
    spec.w_max = 30;
    spec.u_max = 70;
    const TruncatedGenerator oracle(spec);
    const auto orc = oracle.transition_row({0, 0}, 1.0);
    const double expect = orc.prob[static_cast<std::size_t>(oracle.index_of({0, 0}))];
    CHECK(row[4] == doctest::Approx(expect).epsilon(5e-5)); // Gaver-Stehfest limited
    std::remove(path.c_str());
}

TEST_CASE("identical argv and seed give byte-identical output") {
    const std::string a = "cli_rep_a.csv", b = "cli_rep_b.csv";
    const std::vector<std::string> args = {"simulate", "--what", "pair", "--w0", "1",
                                           "--t-end", "2", "--paths", "3", "--seed", "99",
                                           "--theta", "1"};
    REQUIRE(run_to(a, args) == 0);
    REQUIRE(run_to(b, args) == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(!slurp(a).empty());
    std::remove(a.c_str());
    std::remove(b.c_str());
}

TEST_CASE("validate subcommand passes on a small grid") {
    const std::string path = "cli_validate.csv";
    REQUIRE(run_to(path, {"validate", "--theta", "0", "1", "--p", "0.5", "--w-max", "2",
                          "--kappa", "0", "0.3", "--lambda", "1", "--jobs", "2"}) == 0);
    const std::string text = slurp(path);
    CHECK(text.find("# result=pass") != std::string::npos);
    std::remove(path.c_str());
}

TEST_CASE("json format mirrors the schema") {
    const std::string path = "cli_json.json";
    REQUIRE(run_to(path, {"transform", "--w", "1", "--wp", "1", "--lambda", "1", "--theta",
                          "0.5", "--format", "json"}) == 0);
    const std::string text = slurp(path);
    CHECK(text.find("\"columns\"") != std::string::npos);
    CHECK(text.find("\"rows\"") != std::string::npos);
    CHECK(text.find("\"metadata\"") != std::string::npos);
    std::remove(path.c_str());
}

TEST_CASE("seed is always recorded and the environment overrides the default") {
    const std::string path = "cli_seed.csv";
    setenv("PAIRWALK_SEED", "777", 1);
    REQUIRE(run_to(path, {"transform", "--w", "0", "--wp", "0", "--lambda", "1"}) == 0);
    unsetenv("PAIRWALK_SEED");
    CHECK(slurp(path).find("# seed=777") != std::string::npos);

    REQUIRE(run_to(path, {"transform", "--w", "0", "--wp", "0", "--lambda", "1", "--seed",
                          "123"}) == 0);
    CHECK(slurp(path).find("# seed=123") != std::string::npos);
    std::remove(path.c_str());
}

TEST_CASE("usage errors exit with 1") {
    CHECK(cli::run({"no-such-command"}) == 1);
    CHECK(cli::run({"transform", "--bogus-flag", "3"}) == 1);
    CHECK(cli::run({}) == 1);
}

TEST_CASE("validation failure exits with 2") {
    const std::string path = "cli_validate_fail.csv";
    CHECK(run_to(path, {"validate", "--theta", "1", "--p", "0.5", "--w-max", "1", "--kappa",
                        "0", "--lambda", "1", "--tol", "1e-18"}) == 2);
    CHECK(slurp(path).find("# result=fail") != std::string::npos);
    std::remove(path.c_str());
}

TEST_CASE("worker pool size does not change output bytes") {
    const std::vector<std::string> args = {"transform", "--theta", "1.5", "--p", "0.6",
                                           "--w", "0", "1", "2", "3", "--wp", "0", "1", "2",
                                           "--kappa", "0", "0.4", "--lambda", "0.7", "1.3"};
    const std::string a = "cli_jobs_a.csv", b = "cli_jobs_b.csv";
    auto with_jobs = [&](const std::string& out, const char* jobs) {
        std::vector<std::string> v = args;
        v.push_back("--jobs");
        v.push_back(jobs);
        return run_to(out, v);
    };
    REQUIRE(with_jobs(a, "1") == 0);
    REQUIRE(with_jobs(b, "4") == 0);
    CHECK(slurp(a) == slurp(b));
    std::remove(a.c_str());
    std::remove(b.c_str());
}

TEST_CASE("covariance and densityfield emit ratio columns") {
    const std::string path = "cli_cov.csv";
    REQUIRE(run_to(path, {"covariance", "--a", "2", "--eps", "0.05", "--x", "0", "--y", "1"}) ==
            0);
    auto row = last_row(slurp(path));
    REQUIRE(row.size() == 7);
    CHECK(row[6] == doctest::Approx(row[5] / row[4]));
    std::remove(path.c_str());

    const std::string path2 = "cli_df.csv";
    REQUIRE(run_to(path2, {"densityfield", "--eps", "0.05", "--lambda", "1", "--points", "513",
                           "--half-width", "9"}) == 0);
    row = last_row(slurp(path2));
    REQUIRE(row.size() == 6);
    CHECK(row[5] == doctest::Approx(row[3] / row[4]));
    std::remove(path2.c_str());
}
