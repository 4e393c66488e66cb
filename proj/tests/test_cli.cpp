#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"

#include "tsr/io.hpp"
#include "tsr/synth.hpp"

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class Sandbox {
public:
    Sandbox() : dir_(fs::temp_directory_path() / ("tsr_cli_" + std::to_string(::getpid()))) {
        fs::create_directories(dir_);
    }
    ~Sandbox() { fs::remove_all(dir_); }
    [[nodiscard]] fs::path operator/(const std::string& name) const { return dir_ / name; }

    Run run(const std::string& args) const {
        const fs::path out = dir_ / "stdout.txt";
        const fs::path err = dir_ / "stderr.txt";
        const std::string cmd = std::string(TSR_BIN) + " " + args + " > " + out.string() + " 2> " + err.string();
        const int status = std::system(cmd.c_str());
        return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
    }

private:
    fs::path dir_;
};

} // namespace

TEST_CASE("gen writes the requested tables deterministically") {
    Sandbox box;
    const auto a = box / "a.jsonl";
    const auto b = box / "b.jsonl";
    REQUIRE(box.run("gen --tables 10 --seed 7 --output " + a.string()).code == 0);
    REQUIRE(box.run("--seed 7 gen --tables 10 -o " + b.string()).code == 0);
    const std::string text = slurp(a);
    CHECK(std::count(text.begin(), text.end(), '\n') == 10);
    CHECK(text == slurp(b));
    const auto run = box.run("gen --tables 3 --seed 1");
    CHECK(run.err.find("tables 3") != std::string::npos);
    CHECK(box.run("--quiet gen --tables 3 --seed 1").err.empty());
}

TEST_CASE("gen rejects bad settings with exit 2") {
    Sandbox box;
    const auto r = box.run("gen --span-prob 1.5");
    CHECK(r.code == 2);
    CHECK(r.err.find("--span-prob") != std::string::npos);
    CHECK(box.run("gen --bogus-flag").code == 2);
    CHECK(box.run("gen --rows-min 5 --rows-max 2").code == 2);
    CHECK(box.run("").code == 2);
}

TEST_CASE("gen reads a JSON config") {
    Sandbox box;
    const auto cfg = box / "cfg.json";
    std::ofstream(cfg) << R"({"n_tables": 4, "rows_max": 3, "cols_max": 3, "seed": 5})";
    const auto out = box / "t.jsonl";
    REQUIRE(box.run("gen --config " + cfg.string() + " -o " + out.string()).code == 0);
    const auto grids = tsr::io::read_jsonl_file(out.string());
    CHECK(grids.size() == 4);
    for (const auto& g : grids) CHECK(tsr::dimensions(g).rows <= 3);
}

TEST_CASE("convert: markup, adjacency and errors") {
    Sandbox box;
    const auto one = box / "one.jsonl";
    std::ofstream(one) << R"({"cells":[{"id":0,"logical":[0,0,0,0]}]})" << '\n';
    auto r = box.run("convert " + one.string() + " --to html");
    CHECK(r.code == 0);
    CHECK(r.out == "<table><tr><td></td></tr></table>\n");

    const auto data = box / "d.jsonl";
    REQUIRE(box.run("gen --tables 20 --seed 3 -o " + data.string()).code == 0);
    r = box.run("convert " + data.string() + " --to html --content");
    REQUIRE(r.code == 0);
    const auto grids = tsr::io::read_jsonl_file(data.string());
    std::istringstream lines(r.out);
    std::string line;
    std::size_t k = 0;
    while (std::getline(lines, line)) {
        REQUIRE(k < grids.size());
        CHECK(oracle::same_up_to_ids(tsr::from_markup(tsr::parse_markup(line)), grids[k]));
        ++k;
    }
    CHECK(k == grids.size());

    r = box.run("convert " + one.string() + " --to adjacency");
    CHECK(r.code == 0);
    CHECK(nlohmann::json::parse(r.out)["pairs"].empty());

    const auto bad = box / "bad.jsonl";
    std::ofstream(bad) << R"({"cells":[{"id":0,"logical":[0,0,0,0]}]})" << '\n'
                       << R"({"cells":[{"id":4,"logical":[0,0,0,0]},{"id":9,"logical":[0,0,0,1]}]})" << '\n';
    r = box.run("convert " + bad.string());
    CHECK(r.code == 1);
    CHECK(r.err.find("line 2") != std::string::npos);
    CHECK(r.err.find('4') != std::string::npos);
    CHECK(r.err.find('9') != std::string::npos);
}

TEST_CASE("eval: self comparison, shifted variant and mismatches") {
    Sandbox box;
    const auto data = box / "d.jsonl";
    REQUIRE(box.run("gen --tables 5 --seed 3 -o " + data.string()).code == 0);
    const auto csv = box / "s.csv";
    auto r = box.run("eval --pred " + data.string() + " --gt " + data.string() + " --csv " + csv.string());
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["detection"]["f1"] == 1.0);
    CHECK(j["logical"]["acc_all"] == 1.0);
    CHECK(j["adjacency"]["f1"] == 1.0);
    CHECK(j["teds"] == 1.0);
    CHECK(j["bleu"] == 1.0);
    const std::string rows = slurp(csv);
    CHECK(std::count(rows.begin(), rows.end(), '\n') == 6);

    const auto gt = box / "gt.jsonl";
    const auto pred = box / "pred.jsonl";
    const auto grid = tsr::synth::regular_grid(10, 5);
    tsr::io::write_jsonl_file(gt.string(), {grid});
    tsr::io::write_jsonl_file(pred.string(), {tsr::synth::make_shifted_variant(grid, 5)});
    r = box.run("eval --pred " + pred.string() + " --gt " + gt.string());
    REQUIRE(r.code == 0);
    const auto s = nlohmann::json::parse(r.out);
    CHECK(s["adjacency"]["f1"].get<double>() >= 0.8);
    CHECK(s["logical"]["acc_all"].get<double>() <= 0.5);

    CHECK(box.run("eval --pred " + data.string() + " --gt " + gt.string()).code == 1);
}

TEST_CASE("train, infer and gradcheck") {
    Sandbox box;
    const auto data = box / "d.jsonl";
    REQUIRE(box.run("gen --tables 4 --rows-max 4 --cols-max 4 --seed 3 -o " + data.string()).code == 0);
    const std::string common = "train --data " + data.string() + " --heldout " + data.string() +
                               " --d 16 --heads 2 --layers-base 1 --layers-stack 1 --epochs 2 --seed 4";
    const auto ck = box / "m.tsrp";
    const auto h1 = box / "h1.csv";
    const auto h2 = box / "h2.csv";
    REQUIRE(box.run(common + " -o " + ck.string() + " --history " + h1.string()).code == 0);
    REQUIRE(box.run(common + " -o " + (box / "m2.tsrp").string() + " --history " + h2.string()).code == 0);
    CHECK(slurp(h1) == slurp(h2));
    CHECK(slurp(ck) == slurp(box / "m2.tsrp"));

    const auto pred = box / "p.jsonl";
    REQUIRE(box.run("infer --data " + data.string() + " --checkpoint " + ck.string() + " -o " + pred.string()).code == 0);
    const auto in = tsr::io::read_jsonl_file(data.string());
    const auto out = tsr::io::read_jsonl_file(pred.string());
    REQUIRE(out.size() == in.size());
    for (std::size_t i = 0; i < in.size(); ++i) {
        REQUIRE(out[i].cells.size() == in[i].cells.size());
        CHECK(out[i].cells[0].quad == in[i].cells[0].quad);
    }

    CHECK(box.run(common).code == 2);  // no checkpoint path
    CHECK(box.run("train --data " + data.string() + " --heads 3 -o " + ck.string()).code == 2);

    const auto r = box.run("gradcheck --seed 1");
    CHECK(r.code == 0);
    CHECK(nlohmann::json::parse(r.out)["max_rel_error"].get<double>() < 1e-4);
}

TEST_CASE("inputs are not modified") {
    Sandbox box;
    const auto data = box / "d.jsonl";
    REQUIRE(box.run("gen --tables 3 --seed 2 -o " + data.string()).code == 0);
    const std::string before = slurp(data);
    (void)box.run("convert " + data.string());
    (void)box.run("eval --pred " + data.string() + " --gt " + data.string());
    CHECK(slurp(data) == before);
}
