#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "netform/config.hpp"
#include "netform/io.hpp"
#include "support.hpp"

using namespace netform;
using namespace testsupport;

TEST_CASE("config parsing: sections, comments, arrays") {
    const ConfigFile cfg = ConfigFile::parse(
        "# a comment\n"
        "[model]\n"
        "kind = motifs\n"
        "sigma = 0.5   # trailing comment\n"
        "nodes = 3\n"
        "motifs = nodes=2; edges=1->2 | nodes=2; edges=1->2,2->1\n"
        "values = -1, 3\n"
        "\n"
        "[execution]\n"
        "seed = 42\n");
    REQUIRE(cfg.get_string("model", "kind") == "motifs");
    REQUIRE(cfg.get_double("model", "sigma") == 0.5);
    REQUIRE(cfg.get_int("execution", "seed") == 42);
    REQUIRE(cfg.get_int("execution", "events", 123) == 123);
    REQUIRE(cfg.get_doubles("model", "values") == std::vector<double>{-1.0, 3.0});
    const auto motifs = cfg.get_strings("model", "motifs");
    REQUIRE(motifs.size() == 2);
    REQUIRE(motifs[0] == "nodes=2; edges=1->2");
    REQUIRE_THROWS_AS(cfg.get_string("model", "missing"), ConfigError);
    REQUIRE_THROWS_AS(ConfigFile::parse("[broken\nkey = 1\n"), ConfigError);
    REQUIRE_THROWS_AS(ConfigFile::parse("keyvalue\n"), ConfigError);

    const ExecutionSpec exec = execution_from_config(cfg);
    REQUIRE(exec.seed == 42);
    REQUIRE(exec.replicas == 1);
}

TEST_CASE("config hash is content addressed") {
    const ConfigFile a = ConfigFile::parse("[model]\nkind = trade\n");
    const ConfigFile b = ConfigFile::parse("[model]\nkind = trade\n");
    const ConfigFile c = ConfigFile::parse("[model]\nkind = motifs\n");
    REQUIRE(a.hash() == b.hash());
    REQUIRE(a.hash() != c.hash());
}

TEST_CASE("model building from config") {
    const ConfigFile motifsium = ConfigFile::parse(
        "[model]\nkind = motifs\nsigma = 0.5\nnodes = 3\n"
        "motifs = nodes=2; edges=1->2 | nodes=2; edges=1->2,2->1\nvalues = -1, 3\n");
    const ModelSpec spec = model_from_config(motifsium);
    const auto* m = std::get_if<MotifsModelSpec>(&spec);
    REQUIRE(m != nullptr);
    REQUIRE(m->nodes == 3);
    REQUIRE(m->model.motifs().size() == 2);
    REQUIRE(m->model.values() == std::vector<double>{-1.0, 3.0});

    const ConfigFile trade = ConfigFile::parse(
        "[model]\nkind = trade\nlocations = 8\ngamma = 10\nv = 3\nsigma = 0.25\n");
    const ModelSpec trade_spec = model_from_config(trade);
    const auto* t = std::get_if<TradeModelSpec>(&trade_spec);
    REQUIRE(t != nullptr);
    REQUIRE(t->model.locations == 8);

    const ConfigFile typed = ConfigFile::parse(
        "[model]\nkind = typed\ntypes = 2\nsigma = 0.5\nnodes = 4\n"
        "motifs = nodes=2; edges=1->2,2->1\nvalues = 2\n"
        "linear_costs = 0, -1, -1, 0\ntype_assignment = 0,0,1,1\n");
    const ModelSpec typed_spec = model_from_config(typed);
    const auto* ty = std::get_if<TypedModelSpec>(&typed_spec);
    REQUIRE(ty != nullptr);
    REQUIRE(ty->model.n_types() == 2);
    REQUIRE(ty->type_assignment == std::vector<int>{0, 0, 1, 1});

    REQUIRE_THROWS_AS(model_from_config(ConfigFile::parse("[model]\nkind = nope\n")), ConfigError);
}

TEST_CASE("utility CSV round trip") {
    const UtilityTable u = reciprocity_utilities(2, 3.0, 1.0);
    std::string csv = "agent,network_hex,value\n";
    for (int i = 0; i < 2; ++i)
        for (std::uint64_t g = 0; g < 4; ++g)
            csv += std::to_string(i + 1) + "," + DirectedNetwork::from_code(2, g).to_hex() + "," +
                   format_double(u.at(i, g)) + "\n";
    const UtilityTable back = read_utility_csv(csv, 2);
    REQUIRE(back == u);

    REQUIRE_THROWS_AS(read_utility_csv("agent,network_hex,value\n1,0,1.0\n", 2), ConfigError);
    REQUIRE_THROWS_AS(read_utility_csv("agent,network_hex,value\n9,0,1.0\n", 2), ConfigError);
}

TEST_CASE("double formatting survives a round trip") {
    Rng rng(81);
    for (int k = 0; k < 200; ++k) {
        const double x = (rng.next_unit() - 0.5) * std::exp(20.0 * (rng.next_unit() - 0.5));
        REQUIRE(std::stod(format_double(x)) == x);
    }
    REQUIRE(format_double(0.5) == "0.5");
}

TEST_CASE("csv starts with the version-and-hash comment") {
    Csv csv("deadbeefdeadbeef");
    csv.header("a,b");
    csv.field(1.0).field(std::string_view("x"));
    csv.end_row();
    const std::string text = csv.str();
    REQUIRE(text.rfind("# netform ", 0) == 0);
    REQUIRE(text.find("config=deadbeefdeadbeef") != std::string::npos);
    REQUIRE(text.find("a,b\n1,x\n") != std::string::npos);
}

TEST_CASE("atomic write leaves no temp files") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "netform_io_test";
    fs::remove_all(dir);
    const fs::path target = dir / "out.csv";
    write_file_atomic(target, "payload\n");
    REQUIRE(read_file(target) == "payload\n");
    write_file_atomic(target, "replaced\n");
    REQUIRE(read_file(target) == "replaced\n");
    std::size_t entries = 0;
    for (const auto& entry : fs::directory_iterator(dir)) {
        ++entries;
        REQUIRE(entry.path().filename() == "out.csv");
    }
    REQUIRE(entries == 1);
    fs::remove_all(dir);
}
