// Acceptance suite: one PASS/FAIL line per criterion. Criteria can be picked
// by number on the command line (`acceptance 1 2 9`); with no arguments all
// ten run. Exit status is non-zero when any selected criterion fails.

#include "oracles.hpp"

#include "tsr/io.hpp"
#include "tsr/kernels.hpp"
#include "tsr/metrics.hpp"
#include "tsr/regressor.hpp"
#include "tsr/synth.hpp"
#include "tsr/transform.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

namespace {

using Clock = std::chrono::steady_clock;
namespace reg = tsr::regressor;

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int number;
    const char* title;
    double budget_s;
    std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// ---------------------------------------------------------------------------

Outcome round_trip() {
    const auto grids = oracle::criterion_grids(1000, 1);
    int ok = 0;
    for (const auto& g : grids) {
        if (!tsr::validate(g).holes.empty()) continue;
        ok += oracle::same_up_to_ids(tsr::from_markup(tsr::to_markup(g, tsr::ContentMode::WithContent)), g) ? 1 : 0;
    }
    return {ok == 1000, fmt("%d/1000 grids reproduced", ok)};
}

Outcome adjacency_oracle() {
    const auto grids = oracle::criterion_grids(1000, 1);
    int ok = 0;
    for (const auto& g : grids) {
        const auto sets = tsr::adjacency_pairs(g);
        std::set<std::tuple<int, int, tsr::Direction>> got;
        for (const auto& p : sets.horizontal) got.emplace(p.i, p.j, p.direction);
        for (const auto& p : sets.vertical) got.emplace(p.i, p.j, p.direction);
        ok += got == oracle::brute_adjacency(g) ? 1 : 0;
    }
    return {ok == 1000, fmt("%d/1000 grids match the brute-force predicate", ok)};
}

Outcome teds_oracle() {
    tsr::Rng rng(2026, 3);
    int ted_ok = 0;
    for (int t = 0; t < 200; ++t) {
        const auto a = oracle::random_tree(rng, rng.uniform_int(1, 6));
        const auto b = oracle::random_tree(rng, rng.uniform_int(1, 6));
        ted_ok += tsr::metrics::tree_edit_distance(a, b, oracle::label_cost) == oracle::brute_ted(a, b, oracle::label_cost);
    }
    int self_ok = 0;
    for (const auto& g : oracle::criterion_grids(100, 3)) {
        const auto m = tsr::to_markup(g, tsr::ContentMode::WithContent);
        self_ok += tsr::metrics::teds(m, m, tsr::ContentMode::WithContent) == 1.0;
    }
    return {ted_ok == 200 && self_ok == 100,
            fmt("TED exact on %d/200 tree pairs, TEDS(x,x)=1 on %d/100 markups", ted_ok, self_ok)};
}

Outcome loss_zero() {
    tsr::synth::SynthConfig c;
    c.n_tables = 1000;
    c.rows_min = 1;
    c.rows_max = 10;
    c.cols_min = 1;
    c.cols_max = 10;
    c.span_probability = 0.3;
    c.hole_probability = 0.05;
    c.seed = 4;
    int ok = 0;
    for (const auto& g : tsr::synth::generate(c)) {
        tsr::Matrix t(g.cells.size(), 4);
        std::vector<tsr::LogicalLocation> truth;
        for (std::size_t i = 0; i < g.cells.size(); ++i) {
            const auto& l = g.cells[i].logical;
            truth.push_back(l);
            t(i, 0) = l.r_s;
            t(i, 1) = l.r_e;
            t(i, 2) = l.c_s;
            t(i, 3) = l.c_e;
        }
        const auto sets = tsr::adjacency_pairs(g);
        std::vector<reg::IndexPair> h;
        std::vector<reg::IndexPair> v;
        for (const auto& p : sets.horizontal) h.push_back({*g.index_of(p.i), *g.index_of(p.j)});
        for (const auto& p : sets.vertical) v.push_back({*g.index_of(p.i), *g.index_of(p.j)});
        ok += reg::loss_inter(t, h, v) == 0.0 && reg::loss_intra(t, truth) == 0.0;
    }
    return {ok == 1000, fmt("%d/1000 grids give loss_inter = loss_intra = 0", ok)};
}

Outcome gradient_check() {
    tsr::synth::SynthConfig sc;
    sc.seed = 5;
    double worst = 0.0;
    std::size_t checked = 0;
    std::size_t excluded = 0;
    bool each = true;
    for (std::uint64_t k = 0; k < 5; ++k) {
        reg::RegressorConfig rc;
        rc.seed = k;
        reg::Model m(rc);
        const auto s = reg::make_sample(tsr::synth::generate_one(sc, k), rc.d);
        const auto r = reg::grad_check(m, s, 1e-5, 240, k);
        worst = std::max(worst, r.max_rel_error);
        checked += r.checked;
        excluded += r.excluded;
        each = each && r.checked >= 200;
    }
    return {worst < 1e-4 && each,
            fmt("max relative error %.3g over %zu parameters (%zu kink-excluded), 5 instances", worst, checked, excluded)};
}

struct TrainSetup {
    double jitter = 0.05;
    bool cascade = true;
    bool i2c = true;
    std::uint64_t seed = 0;
};

double train_once(const TrainSetup& s, double* seconds = nullptr) {
    tsr::synth::SynthConfig sc;
    sc.n_tables = 500;
    sc.rows_max = 8;
    sc.cols_max = 8;
    sc.span_probability = 0.2;
    sc.jitter = s.jitter;
    sc.seed = 1000 + s.seed;
    const auto train = tsr::synth::generate(sc);
    sc.n_tables = 100;
    sc.seed = 2000 + s.seed;
    const auto held = tsr::synth::generate(sc);

    reg::RegressorConfig rc;
    rc.d = 64;
    rc.layers_base = 3;
    rc.layers_stack = 3;
    rc.epochs = 100;
    rc.cascade = s.cascade;
    rc.loss_flags = {s.i2c, s.i2c};
    rc.seed = s.seed;
    const auto t0 = Clock::now();
    // Held-out accuracy is only needed at the end.
    const auto result = reg::train(train, {}, rc);
    std::vector<reg::Sample> samples;
    for (const auto& g : held) samples.push_back(reg::make_sample(g, rc.d));
    const double acc = reg::heldout_accuracy(result.model, samples);
    if (seconds) *seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    std::printf("    run jitter=%.2f cascade=%d i2c=%d seed=%llu: held-out acc_all %.4f\n", s.jitter, s.cascade, s.i2c,
                static_cast<unsigned long long>(s.seed), acc);
    std::fflush(stdout);
    return acc;
}

std::map<std::uint64_t, double> cascade_cache;

Outcome toy_training() {
    double secs = 0.0;
    const double acc = train_once({}, &secs);
    cascade_cache[0] = acc;
    return {acc >= 0.90 && secs < 600.0, fmt("held-out acc_all %.4f (target 0.90), %.0f s training", acc, secs)};
}

Outcome i2c_ablation() {
    double with = 0.0;
    double without = 0.0;
    for (std::uint64_t s = 0; s < 3; ++s) {
        with += train_once({0.15, true, true, s}) / 3.0;
        without += train_once({0.15, true, false, s}) / 3.0;
    }
    return {with - without >= 0.0, fmt("mean acc_all with I2C %.4f, without %.4f, margin %+.4f", with, without, with - without)};
}

Outcome cascade_direction() {
    double cascade = 0.0;
    double single = 0.0;
    for (std::uint64_t s = 0; s < 3; ++s) {
        const auto it = cascade_cache.find(s);
        cascade += (it != cascade_cache.end() ? it->second : train_once({0.05, true, true, s})) / 3.0;
        single += train_once({0.05, false, true, s}) / 3.0;
    }
    reg::RegressorConfig c;
    const std::size_t pc = reg::Model(c).params().size();
    c.cascade = false;
    const std::size_t ps = reg::Model(c).params().size();
    return {cascade - single >= 0.0, fmt("mean acc_all cascade 3+3 %.4f (%zu params), single 6-layer %.4f (%zu params), "
                                         "margin %+.4f",
                                         cascade, pc, single, ps, cascade - single)};
}

Outcome metric_gap() {
    const auto dir = std::filesystem::temp_directory_path() / ("tsr_acceptance_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    const auto grid = tsr::synth::regular_grid(10, 5);
    tsr::io::write_jsonl_file((dir / "gt.jsonl").string(), {grid});
    tsr::io::write_jsonl_file((dir / "pred.jsonl").string(), {tsr::synth::make_shifted_variant(grid, 5)});
    const auto report = dir / "report.json";
    const std::string cmd = std::string(TSR_BIN) + " --quiet eval --pred " + (dir / "pred.jsonl").string() + " --gt " +
                            (dir / "gt.jsonl").string() + " -o " + report.string();
    const int status = std::system(cmd.c_str());
    Outcome out;
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        out.detail = "tsr eval failed";
    } else {
        std::ifstream in(report);
        const auto j = nlohmann::json::parse(in);
        const double f1 = j["adjacency"]["f1"];
        const double acc = j["logical"]["acc_all"];
        out = {f1 >= 0.8 && acc <= 0.5, fmt("adjacency F1 %.4f (>= 0.8), acc_all %.4f (<= 0.5)", f1, acc)};
    }
    std::filesystem::remove_all(dir);
    return out;
}

// Nltk corpus_bleu over oracle::bleu_pairs(); see test_metrics.cpp.
constexpr double kNltkPairBleu[20] = {
    1.0, 0.8843865924896842, 0.6147429505933764, 0.4797543511401896, 0.9519977281644266,
    1.0, 0.8613781400859002, 0.7705099948633536, 0.7605753377539738, 0.898332989456802,
    1.0, 0.848160619893335, 0.7678977683610906, 5.913141352605895e-78, 0.6552193210905056,
    1.0, 0.7107438499788243, 0.8788047146866663, 0.862955031298648, 0.859161642556407,
};

Outcome bleu_reference() {
    const auto pairs = oracle::bleu_pairs();
    double worst = 0.0;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const double got = tsr::metrics::corpus_bleu({pairs[k].first}, {pairs[k].second});
        worst = std::max(worst, std::abs(got - kNltkPairBleu[k]));
        worst = std::max(worst, std::abs(got - oracle::reference_bleu({pairs[k].first}, {pairs[k].second})));
    }
    return {worst <= 1e-9, fmt("max deviation %.3g over %zu pairs", worst, pairs.size())};
}

} // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all = {
        {1, "round-trip identity", 5, round_trip},
        {2, "adjacency oracle equivalence", 5, adjacency_oracle},
        {3, "TEDS oracle", 30, teds_oracle},
        {4, "loss zero at truth", 5, loss_zero},
        {5, "gradient check", 60, gradient_check},
        {6, "toy training target", 600, toy_training},
        {7, "I2C ablation direction", 3600, i2c_ablation},
        {8, "cascade direction", 3600, cascade_direction},
        {9, "metric-gap reproduction", 1, metric_gap},
        {10, "BLEU correctness", 5, bleu_reference},
    };
    std::set<int> pick;
    for (int i = 1; i < argc; ++i) pick.insert(std::atoi(argv[i]));

    std::printf("kernels: %s\n", tsr::kernels::active().name);
    int failed = 0;
    for (const auto& c : all) {
        if (!pick.empty() && !pick.contains(c.number)) continue;
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        const bool pass = o.pass && secs < c.budget_s;
        failed += pass ? 0 : 1;
        std::printf("criterion %2d %s  %s: %s [%.1f s, budget %.0f s]\n", c.number, pass ? "PASS" : "FAIL", c.title,
                    o.detail.c_str(), secs, c.budget_s);
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
