#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "mbholder/cli.hpp"

using namespace mbh;
namespace fs = std::filesystem;

namespace {

std::string write_temp(const std::string& name, const std::string& text) {
    const auto path = fs::temp_directory_path() / name;
    std::ofstream out(path);
    out << text;
    return path.string();
}

}  // namespace

TEST_CASE("key-value parsing with comments and lists") {
    const auto kv = KeyValueConfig::parse_text(
        "# experiment\n"
        "model.n = 12\n"
        "estimation.t0 = 0.3 0.5 0.7  # three points\n"
        "model.unit_variance = true\n");
    CHECK(kv.get_int("model.n", 0) == 12);
    CHECK(kv.get_bool("model.unit_variance", false));
    CHECK(kv.get_doubles("estimation.t0") == std::vector<double>{0.3, 0.5, 0.7});
    CHECK(kv.get_int("missing", 7) == 7);
    CHECK_THROWS_AS(KeyValueConfig::parse_text("no equals sign"), ConfigError);
    CHECK_THROWS_AS(kv.get_int("estimation.t0", 0), ConfigError);
}

TEST_CASE("experiment config resolves models and honors override bounds") {
    const auto kv = KeyValueConfig::parse_text(
        "model.hurst.kind = h2\n"
        "model.theta.kind = constant\n"
        "model.theta.value = 2\n"
        "model.phi = exp\n"
        "model.n = 10\n"
        "estimation.tau1 = 0.1\n"
        "estimation.gamma = 0.3\n");
    const auto cfg = ExperimentConfig::from_kv(kv);
    CHECK(cfg.hurst.tau1() == doctest::Approx(0.1).epsilon(1e-6));
    CHECK(cfg.theta(0.5) == 2.0);
    CHECK(cfg.phi.kind() == LinkFunction::Kind::Exp);
    // gamma = 0.3 violates the (1/2,1) band and must be rejected on use
    CHECK_THROWS_AS(cfg.estimation(0.5), ConfigError);
}

TEST_CASE("series ingestion: dyadic check, NaN reporting, resampling") {
    {
        std::string text = "t,y\n";
        char buf[64];
        for (int u = 0; u <= 1024; ++u) {
            std::snprintf(buf, sizeof buf, "%.8f,%.8f\n", u / 1024.0, std::sin(u / 100.0));
            text += buf;
        }
        const auto path = write_temp("series_ok.csv", text);
        const auto p = ingest_series(path, "y", false);
        CHECK(p.n == 10);
        CHECK(p.y_values.size() == 1025);
        // numeric column index addressing
        const auto q = ingest_series(path, "1", false);
        CHECK(q.y_values == p.y_values);
        fs::remove(path);
    }
    {
        std::string text = "y\n";
        for (int u = 0; u < 1000; ++u) text += "1.0\n";
        const auto path = write_temp("series_bad_len.csv", text);
        CHECK_THROWS_AS(ingest_series(path, "y", false), ConfigError);
        const auto p = ingest_series(path, "y", true);  // resampled to 2^9+1
        CHECK(p.n == 9);
        CHECK(p.y_values.size() == 513);
        fs::remove(path);
    }
    {
        std::string text = "y\n";
        for (int u = 0; u <= 1024; ++u) text += (u == 600 ? std::string("nan\n") : std::string("1.5\n"));
        const auto path = write_temp("series_nan.csv", text);
        try {
            ingest_series(path, "y", false);
            FAIL("expected IoError");
        } catch (const IoError& ex) {
            CHECK(std::string(ex.what()).find("602") != std::string::npos);  // header + 1-based
        }
        fs::remove(path);
    }
}

TEST_CASE("table sweep is reproducible and thread-count independent") {
    ExperimentConfig cfg;
    cfg.n = 9;
    cfg.reps = 6;
    cfg.root_seed = 5150;
    cfg.tau1 = 0.1;
    cfg.t0_list = {0.5};
    cfg.table_phis = {"phi1"};
    cfg.table_hursts = {"h1"};
    cfg.wavelet = "haar";

    cfg.threads = 1;
    const auto a = run_table1(cfg);
    cfg.threads = 2;
    const auto b = run_table1(cfg);
    REQUIRE(a.rows.size() == 1);
    REQUIRE(b.rows.size() == 1);
    CHECK(a.rows[0].mean == b.rows[0].mean);
    CHECK(a.rows[0].std == b.rows[0].std);
    CHECK(a.rows[0].reps == 6);
    CHECK(a.rows[0].true_h == doctest::Approx(0.5));

    // single-repetition degenerate std
    cfg.reps = 1;
    cfg.threads = 1;
    const auto c = run_table1(cfg);
    CHECK(c.rows[0].std == 0.0);
    CHECK(c.rows[0].reps == 1);
    CHECK(c.rows[0].degenerate);
    CHECK_FALSE(a.rows[0].degenerate);
}

TEST_CASE("qq output is deterministic and has one row per repetition") {
    ExperimentConfig cfg;
    cfg.n = 9;
    cfg.reps = 100;
    cfg.root_seed = 8091;
    cfg.tau1 = 0.1;
    cfg.t0_list = {0.5};
    cfg.wavelet = "haar";
    cfg.threads = 2;

    const auto q1 = run_qq(cfg);
    const auto q2 = run_qq(cfg);
    CHECK(q1.standardized.size() == 100);
    CHECK(q1.standardized == q2.standardized);
    CHECK(q1.ks == q2.ks);

    double mean = 0.0;
    for (double v : q1.standardized) mean += v;
    mean /= static_cast<double>(q1.standardized.size());
    CHECK(std::abs(mean) <= 0.35);  // ~3/sqrt(reps) around the centered law

    const auto path = fs::temp_directory_path() / "qq_test.csv";
    write_qq_csv(q1, path.string());
    std::ifstream in(path);
    int lines = 0;
    std::string line;
    while (std::getline(in, line)) ++lines;
    CHECK(lines == 101);  // header + reps
    fs::remove(path);
}

TEST_CASE("constants command rejects the inadmissible wavelet order") {
    ExperimentConfig cfg;
    cfg.n = 10;
    cfg.tau1 = 0.1;
    cfg.wavelet = "haar";  // Q=1 with sup H = 0.9
    CHECK_THROWS_AS(run_constants(cfg, 0.5), ConfigError);
    cfg.wavelet = "legendre2";
    const auto b = run_constants(cfg, 0.5);
    CHECK(b.ctilde > 0.0);
}

TEST_CASE("convergence sweep emits one row per resolution") {
    ExperimentConfig cfg;
    cfg.n = 10;
    cfg.reps = 5;
    cfg.tau1 = 0.5;
    cfg.t0_list = {0.5};
    cfg.wavelet = "haar";
    cfg.table_hursts = {"h1"};
    cfg.hurst = HurstProfile::constant(0.5);
    cfg.n_list = {9, 10};
    const auto rows = run_convergence(cfg);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].n == 9);
    CHECK(rows[1].n == 10);
}
