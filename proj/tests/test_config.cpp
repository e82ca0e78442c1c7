#include "tsepdm/config.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace tsepdm;
using namespace tsepdm::config;

TEST_CASE("bundled config holds the default plant", "[config]") {
    const auto p = load_plant_params(std::filesystem::path(TSEPDM_CONFIG_DIR) / "table1.cfg");
    CHECK(p.L1 == 31.7e-6);
    CHECK(p.L2 == 29.7e-6);
    CHECK(p.C1 == 8.88e-9);
    CHECK(p.C2 == 9.47e-9);
    CHECK(p.R1 == 0.1);
    CHECK(p.R2 == 0.1);
    CHECK(p.k == 0.15);
    CHECK(p.Vg == 50.0);
    CHECK(p.Vo == 50.0);
    CHECK(p.fs == 300e3);
}

TEST_CASE("parser keeps defaults and skips comments", "[config]") {
    std::istringstream in("# comment\n\nk = 0.13   # trailing\n  Vg=15\n");
    const auto p = parse_plant_params(in);
    CHECK(p.k == 0.13);
    CHECK(p.Vg == 15.0);
    CHECK(p.L1 == plant::PlantParams{}.L1);
}

TEST_CASE("parser rejects malformed input", "[config]") {
    for (const char* text : {"Lx = 1\n", "k = abc\n", "k 0.1\n", "k = 1.5\n", "L1 = -3\n", "k = 0.1 0.2\n"}) {
        std::istringstream in(text);
        INFO(text);
        CHECK_THROWS_AS(parse_plant_params(in), ConfigError);
    }
    CHECK_THROWS_AS(load_plant_params("/nonexistent/file.cfg"), ConfigError);
}

TEST_CASE("written params parse back exactly", "[config]") {
    plant::PlantParams p;
    p.k = 0.1234567890123;
    p.C2 = 9.4712345e-9;
    std::ostringstream out;
    write_plant_params(out, p);
    std::istringstream in(out.str());
    const auto q = parse_plant_params(in);
    CHECK(q.k == p.k);
    CHECK(q.C2 == p.C2);
    CHECK(q.fs == p.fs);
}

TEST_CASE("overrides", "[config]") {
    const auto p = apply_overrides({}, {"k=0.17", "Vo = 15"});
    CHECK(p.k == 0.17);
    CHECK(p.Vo == 15.0);
    CHECK_THROWS_AS(apply_overrides({}, {"q=1"}), ConfigError);
    CHECK_THROWS_AS(apply_overrides({}, {"k"}), ConfigError);
    CHECK_THROWS_AS(apply_overrides({}, {"k=2"}), ConfigError);
}

TEST_CASE("table writer", "[config]") {
    std::ostringstream out;
    TableWriter t(out, {"a", "b", "c"});
    t.cell(0.1).cell(3).cell(std::string("x")).end_row();
    CHECK(out.str() == "a,b,c\n0.10000000000000001,3,x\n");
    TableWriter short_row(out, {"a", "b"});
    short_row.cell(1);
    CHECK_THROWS_AS(short_row.end_row(), std::logic_error);
}

TEST_CASE("manifest", "[config]") {
    const auto dir = std::filesystem::temp_directory_path() / "tsepdm_manifest_test";
    std::filesystem::create_directories(dir);
    write_manifest(dir / "manifest.txt", {{"command", "x"}, {"d", format_double(0.963)}});
    std::ifstream in(dir / "manifest.txt");
    std::stringstream buf;
    buf << in.rdbuf();
    CHECK(buf.str() == "command = x\nd = 0.96299999999999997\n");
    std::filesystem::remove_all(dir);
}
