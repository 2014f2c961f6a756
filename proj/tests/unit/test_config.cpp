#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "hwforest/config.hpp"
#include "hwforest/errors.hpp"
#include "support/generators.hpp"
#include "support/properties.hpp"

using hwforest::ConfigMap;
using hwforest::Errc;
using testsupport::code_of;

TEST_CASE("config text parses keys, comments, and interior spaces") {
    const ConfigMap cfg = ConfigMap::from_string(
        "# leading comment\n"
        "\n"
        "trees = 50\n"
        "  data.train =  runs/my data.csv  \n"
        "ratio=0.25\n"
        "flag = on\n"
        "# trailing comment\n");

    CHECK(cfg.has("trees"));
    CHECK(!cfg.has("absent"));
    CHECK(cfg.get_u64("trees", 0) == 50);
    CHECK(cfg.get_string("data.train", "") == "runs/my data.csv");
    CHECK(cfg.get_double("ratio", 0.0) == 0.25);
    CHECK(cfg.get_bool("flag", false));
    CHECK(cfg.entries().size() == 4);

    // Fallbacks apply only to missing keys.
    CHECK(cfg.get_u64("absent", 7) == 7);
    CHECK(cfg.get_string("absent", "d") == "d");
    CHECK(cfg.get_double("absent", 1.5) == 1.5);
    CHECK(!cfg.get_bool("absent", false));
}

TEST_CASE("config parse rejects malformed lines") {
    CHECK(code_of([] { ConfigMap::from_string("just words\n"); }) == Errc::BadConfig);
    CHECK(code_of([] { ConfigMap::from_string("= value\n"); }) == Errc::BadConfig);
    CHECK(code_of([] { ConfigMap::from_string("a = 1\na = 2\n"); }) == Errc::BadConfig);

    try {
        ConfigMap::from_string("ok = 1\nbroken line\n");
        FAIL("expected a parse error");
    } catch (const hwforest::Error& e) {
        CHECK(e.code() == Errc::BadConfig);
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("typed getters validate their values") {
    const ConfigMap cfg = ConfigMap::from_string(
        "count = twelve\n"
        "rate = fast\n"
        "flag = maybe\n");
    CHECK(code_of([&] { cfg.get_u64("count", 0); }) == Errc::BadConfig);
    CHECK(code_of([&] { cfg.get_double("rate", 0.0); }) == Errc::BadConfig);
    CHECK(code_of([&] { cfg.get_bool("flag", false); }) == Errc::BadConfig);

    const ConfigMap bools = ConfigMap::from_string(
        "a = true\nb = 1\nc = off\nd = false\ne = 0\n");
    CHECK(bools.get_bool("a", false));
    CHECK(bools.get_bool("b", false));
    CHECK(!bools.get_bool("c", true));
    CHECK(!bools.get_bool("d", true));
    CHECK(!bools.get_bool("e", true));
}

TEST_CASE("integer lists accept bracketed and bare forms") {
    const ConfigMap cfg = ConfigMap::from_string(
        "bracketed = [4, 6, 8]\n"
        "bare = 4,6,8\n"
        "single = 12\n"
        "unclosed = [4,6\n"
        "alpha = 4,six,8\n");
    const std::vector<std::uint64_t> expect{4, 6, 8};
    CHECK(cfg.get_u64_list("bracketed", {}) == expect);
    CHECK(cfg.get_u64_list("bare", {}) == expect);
    CHECK(cfg.get_u64_list("single", {}) == std::vector<std::uint64_t>{12});
    CHECK(cfg.get_u64_list("absent", {1, 2}) == std::vector<std::uint64_t>{1, 2});
    CHECK(code_of([&] { cfg.get_u64_list("unclosed", {}); }) == Errc::BadConfig);
    CHECK(code_of([&] { cfg.get_u64_list("alpha", {}); }) == Errc::BadConfig);
}

TEST_CASE("prefix groups collect and consume matching keys") {
    const ConfigMap cfg = ConfigMap::from_string(
        "encode.color = onehot\n"
        "encode.size = ordinal\n"
        "trees = 5\n");
    const auto group = cfg.with_prefix("encode.");
    REQUIRE(group.size() == 2);
    CHECK(group.at("color") == "onehot");
    CHECK(group.at("size") == "ordinal");

    // The prefix members count as consumed; the leftover key does not.
    CHECK(code_of([&] { cfg.reject_unconsumed(); }) == Errc::BadConfig);
    cfg.get_u64("trees", 0);
    CHECK(code_of([&] { cfg.reject_unconsumed(); }) == std::nullopt);
}

TEST_CASE("unconsumed keys are named in the rejection") {
    const ConfigMap cfg = ConfigMap::from_string("treez = 5\n");
    try {
        cfg.reject_unconsumed();
        FAIL("expected an unknown-key error");
    } catch (const hwforest::Error& e) {
        CHECK(e.code() == Errc::BadConfig);
        CHECK(std::string(e.what()).find("treez") != std::string::npos);
    }
}

TEST_CASE("config files load exactly like config text") {
    const auto dir = testsupport::fresh_tmp_dir("config");
    const auto path = (dir / "run.conf").string();
    {
        std::ofstream out(path);
        out << "trees = 9\nseed = 41\n";
    }
    const ConfigMap cfg = ConfigMap::from_file(path);
    CHECK(cfg.get_u64("trees", 0) == 9);
    CHECK(cfg.get_u64("seed", 0) == 41);

    CHECK(code_of([&] { ConfigMap::from_file((dir / "absent.conf").string()); }) == Errc::Io);
    std::filesystem::remove_all(dir);
}
