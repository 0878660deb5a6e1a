#include <doctest.h>

#include "targeted/observed.hpp"

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;
using namespace targeted;

namespace {

struct Run {
    int status = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

fs::path scratch() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / ("targeted_cli_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

Run run(const std::string& args) {
    const char* exe = std::getenv("TARGETED_CLI");
    REQUIRE_MESSAGE(exe != nullptr, "TARGETED_CLI is not set");
    const auto out = scratch() / "stdout.txt";
    const auto err = scratch() / "stderr.txt";
    const std::string cmd = std::string(exe) + " " + args + " > " + out.string() + " 2> " + err.string();
    const int raw = std::system(cmd.c_str());
    Run r;
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

std::string path(const std::string& name) { return (scratch() / name).string(); }

void make_instance() {
    static bool done = false;
    if (done) return;
    const auto r = run("--seed 7 synth --n 80 --m 70 --rank 4 --plant 12:12:1:3.0 --density 0.8 --out-prefix " +
                       path("inst"));
    REQUIRE(r.status == 0);
    done = true;
}

}  // namespace

TEST_CASE("synth writes the truth, the mask and the plant descriptors") {
    make_instance();
    CHECK(fs::exists(path("inst.csv")));
    CHECK(fs::exists(path("inst.plant0.desc")));
    const auto m = load_triplets(path("inst.triplet"));
    CHECK(m.rows() == 80);
    CHECK(m.cols() == 70);
    CHECK(m.size() == 4480);
    CHECK(load_descriptors(path("inst.plant0.desc")).at(0).rows.size() == 12);
}

TEST_CASE("targeted on a valid file writes the estimate and the report") {
    make_instance();
    const auto r = run("targeted --in " + path("inst.triplet") + " --out " + path("t.csv") + " --report " +
                       path("t.json"));
    CHECK(r.status == 0);
    CHECK(r.out.find("targeted:") == 0);
    const auto est = load_csv(path("t.csv"));
    CHECK(est.rows() == 80);
    const auto report = nlohmann::json::parse(slurp(path("t.json")));
    CHECK(report.contains("descriptors"));
    CHECK(report.contains("remainder"));
    CHECK(report["separation"] == "zero-fill");
    CHECK(!report.contains("times"));
    CHECK(report["components"].size() == report["descriptors"].size());
}

TEST_CASE("complete writes metadata") {
    make_instance();
    const auto r = run("complete --in " + path("inst.triplet") + " --out " + path("c.csv") + " --rank 6 --meta " +
                       path("c.json"));
    CHECK(r.status == 0);
    const auto meta = nlohmann::json::parse(slurp(path("c.json")));
    CHECK(meta["used_rank"] == 6);
    CHECK(meta.contains("final_residual"));
}

TEST_CASE("missing input is a usage error naming the path") {
    const std::string missing = path("does_not_exist.triplet");
    const auto r = run("complete --in " + missing + " --out " + path("x.csv"));
    CHECK(r.status == 1);
    CHECK(r.err.find(missing) != std::string::npos);
    CHECK(run("targeted --in").status == 1);
    CHECK(run("").status == 1);
    CHECK(run("sweep --var noise --grid 1 --out " + path("s.csv")).status == 1);
}

TEST_CASE("computation errors exit 2 with the message on stderr") {
    {
        std::ofstream f(path("tiny.triplet"));
        f << "3,3\n0,0,1\n1,1,2\n";
    }
    const auto r = run("complete --in " + path("tiny.triplet") + " --out " + path("tiny.csv") + " --rank 9");
    CHECK(r.status == 2);
    CHECK(r.err.find("error:") == 0);
}

TEST_CASE("discover on an all-equal matrix finds nothing") {
    {
        std::ofstream f(path("ones.triplet"));
        f << "6,5\n";
        for (int i = 0; i < 6; ++i) {
            for (int j = 0; j < 5; ++j) f << i << ',' << j << ",1\n";
        }
    }
    const auto r = run("discover --in " + path("ones.triplet") + " --out " + path("ones.desc"));
    CHECK(r.status == 0);
    CHECK(r.out.find("no submatrix found") != std::string::npos);
    CHECK(load_descriptors(path("ones.desc")).empty());
}

TEST_CASE("help lists every flag with its default") {
    const auto top = run("--help");
    CHECK(top.status == 0);
    for (const char* sub : {"synth", "discover", "complete", "targeted", "sweep"}) CHECK(top.out.find(sub) != std::string::npos);
    const auto h = run("targeted --help");
    CHECK(h.status == 0);
    for (const char* flag : {"--n-vectors", "--delta-threshold", "--max-submatrices", "--estimator", "--separation",
                             "--rank", "--max-rank", "--tol", "--max-iter", "--record-times"}) {
        CHECK_MESSAGE(h.out.find(flag) != std::string::npos, flag);
    }
    CHECK(h.out.find("0.2") != std::string::npos);
    CHECK(h.out.find("zero-fill") != std::string::npos);
    const auto s = run("sweep --help");
    CHECK(s.out.find("--per-axis") != std::string::npos);
    CHECK(s.out.find("--completion-rank") != std::string::npos);
}

TEST_CASE("repeated runs give identical files") {
    make_instance();
    const std::string common = "--seed 3 discover --in " + path("inst.triplet") + " --estimator incremental --out ";
    REQUIRE(run(common + path("d1.desc") + " --report " + path("d1.csv")).status == 0);
    REQUIRE(run(common + path("d2.desc") + " --report " + path("d2.csv")).status == 0);
    CHECK(slurp(path("d1.desc")) == slurp(path("d2.desc")));
    CHECK(slurp(path("d1.csv")) == slurp(path("d2.csv")));

    const std::string sweep = "sweep --n 40 --m 40 --rank 3 --plant 8:8:1:2.0 --var density --grid 0.5,0.9 "
                              "--seeds 2 --methods both --out ";
    REQUIRE(run(sweep + path("s1.csv")).status == 0);
    REQUIRE(run(sweep + path("s2.csv")).status == 0);
    CHECK(slurp(path("s1.csv")) == slurp(path("s2.csv")));
    CHECK(slurp(path("s1.csv")).find("time_discover_s") != std::string::npos);
}
