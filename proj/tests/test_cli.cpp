#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "support.hpp"

namespace {

namespace fs = std::filesystem;

struct CliResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr
};

CliResult run_cli(const std::string& args) {
    const std::string cmd = std::string(EMPCQ_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CliResult res;
    std::array<char, 4096> buf;
    std::size_t got;
    while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) res.output.append(buf.data(), got);
    const int status = pclose(pipe);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

std::string fixture(const std::string& name) {
    return (fs::path(EMPCQ_FIXTURE_DIR) / name).string();
}

struct TempDir {
    fs::path dir;
    TempDir() : dir(fs::temp_directory_path() / "empcq_cli_test") {
        fs::create_directories(dir);
    }
    ~TempDir() { std::error_code ec; fs::remove_all(dir, ec); }
    std::string file(const std::string& name) const { return (dir / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("validate: exit codes and summary") {
    const CliResult ok = run_cli("validate " + fixture("sat1d.json"));
    CHECK(ok.exit_code == 0);
    CHECK(ok.output.find("2 facet pairs") != std::string::npos);

    TempDir tmp;
    {
        std::ofstream out(tmp.file("broken.json"));
        out << R"({
            "n": 1, "m": 1,
            "state_box": {"lo": [-5], "hi": [5]},
            "regions": [
                {"H": [[-1], [1]], "K": [5, -1], "F": [[0]], "G": [-1]},
                {"H": [[-1], [1]], "K": [1, 1], "F": [[1]], "G": [0]},
                {"H": [[-1], [1]], "K": [-1, 5], "F": [[0]], "G": [2]}
            ]
        })";
    }
    const CliResult broken = run_cli("validate " + tmp.file("broken.json"));
    CHECK(broken.exit_code == 1);
    CHECK(broken.output.find("discontinuous") != std::string::npos);

    const CliResult missing = run_cli("validate /no/such/file.json");
    CHECK(missing.exit_code == 2);

    {
        std::ofstream out(tmp.file("garbage.json"));
        out << "{ nope";
    }
    CHECK(run_cli("validate " + tmp.file("garbage.json")).exit_code == 2);
}

TEST_CASE("bounds: single-state report and error paths") {
    const CliResult rep =
        run_cli("bounds " + fixture("sat1d.json") + " --state 0.999 --a 12 --b 5");
    CHECK(rep.exit_code == 0);
    CHECK(rep.output.find("actual error:") != std::string::npos);
    CHECK(rep.output.find("0.001") != std::string::npos);

    const CliResult outside =
        run_cli("bounds " + fixture("sat1d.json") + " --state 7 --a 12 --b 5");
    CHECK(outside.exit_code == 1);
    CHECK(outside.output.find("outside") != std::string::npos);

    // sixty fraction bits on integral data: every delta zero, nothing moves
    const CliResult exact =
        run_cli("bounds " + fixture("box2.json") + " --state 0.5,0.5 --a 63 --b 60");
    CHECK(exact.exit_code == 0);
    CHECK(exact.output.find("actual error:        0\n") != std::string::npos);
    CHECK(exact.output.find("same_region=1") != std::string::npos);
}

TEST_CASE("sweep: deterministic csv, threads do not change bytes") {
    TempDir tmp;
    const std::string base = "sweep " + fixture("gain2.json") +
                             " --n 4000 --seed 7 --mode near --band 0.1 --a 12 --b 5 --out ";
    CHECK(run_cli(base + tmp.file("a.csv")).exit_code == 0);
    CHECK(run_cli(base + tmp.file("b.csv")).exit_code == 0);
    CHECK(run_cli(base + tmp.file("c.csv") + " --threads 3").exit_code == 0);

    const std::string a = slurp(tmp.file("a.csv"));
    CHECK(a == slurp(tmp.file("b.csv")));
    CHECK(a == slurp(tmp.file("c.csv")));
    CHECK(a.rfind("x1,region_true", 0) == 0);

    // other export formats work and differ in syntax only
    CHECK(run_cli(base + tmp.file("r.json") + " --format json").exit_code == 0);
    CHECK(run_cli(base + tmp.file("r.svg") + " --format svg").exit_code == 0);
    CHECK(slurp(tmp.file("r.svg")).find("<svg") != std::string::npos);
}

TEST_CASE("facets: table-style csv") {
    TempDir tmp;
    const CliResult res = run_cli("facets " + fixture("hetero2d.json") + " --n 4000 --band 0.1" +
                                  " --a 16 --b 9 --out " + tmp.file("f.csv"));
    CHECK(res.exit_code == 0);
    const std::string csv = slurp(tmp.file("f.csv"));
    CHECK(csv.rfind("region_i,region_j,", 0) == 0);
    CHECK(csv.find("2,3,0,0,") != std::string::npos);  // equal-law pair is trivial
}

TEST_CASE("quantize and rescale: documents usable downstream") {
    TempDir tmp;
    CHECK(run_cli("quantize " + fixture("gain2.json") + " --b 2 --a 12 --out " +
                  tmp.file("q.json"))
              .exit_code == 0);
    const std::string qdoc = slurp(tmp.file("q.json"));
    CHECK(qdoc.find("\"formats\"") != std::string::npos);

    CHECK(run_cli("rescale " + fixture("hetero2d.json") + " --out " + tmp.file("scaled.json"))
              .exit_code == 0);
    CHECK(run_cli("validate " + tmp.file("scaled.json")).exit_code == 0);
}

TEST_CASE("usage errors exit with the parse-failure code") {
    CHECK(run_cli("sweep").exit_code == 2);             // missing required flags
    CHECK(run_cli("no-such-command").exit_code == 2);
    CHECK(run_cli("--help").exit_code == 0);
}
