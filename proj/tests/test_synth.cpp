#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"

#include "tsr/error.hpp"
#include "tsr/io.hpp"
#include "tsr/metrics.hpp"
#include "tsr/synth.hpp"

#include <sstream>

using tsr::synth::SynthConfig;

TEST_CASE("degenerate config gives regular unit grids") {
    SynthConfig c;
    c.n_tables = 20;
    c.span_probability = 0.0;
    c.jitter = 0.0;
    c.line_jitter = 0.0;
    c.seed = 9;
    for (const auto& g : tsr::synth::generate(c)) {
        const auto dims = tsr::dimensions(g);
        CHECK(static_cast<int>(g.cells.size()) == dims.rows * dims.cols);
        for (const auto& cell : g.cells) {
            CHECK_FALSE(cell.logical.spanning());
            const auto& q = *cell.quad;
            // axis-aligned rectangle
            CHECK(q[0].y == doctest::Approx(q[1].y));
            CHECK(q[1].x == doctest::Approx(q[2].x));
            CHECK(q[2].y == doctest::Approx(q[3].y));
            CHECK(q[3].x == doctest::Approx(q[0].x));
        }
        // equal widths within a table
        const double w0 = g.cells[0].quad->bounding_box().x1 - g.cells[0].quad->bounding_box().x0;
        for (const auto& cell : g.cells) {
            const auto b = cell.quad->bounding_box();
            CHECK(b.x1 - b.x0 == doctest::Approx(w0));
        }
    }
}

TEST_CASE("same seed gives byte-identical output") {
    SynthConfig c;
    c.n_tables = 30;
    c.rotation = 10.0;
    c.seed = 123;
    std::ostringstream a;
    std::ostringstream b;
    tsr::io::write_jsonl(a, tsr::synth::generate(c));
    tsr::io::write_jsonl(b, tsr::synth::generate(c));
    CHECK(a.str() == b.str());
    c.seed = 124;
    std::ostringstream d;
    tsr::io::write_jsonl(d, tsr::synth::generate(c));
    CHECK(a.str() != d.str());
    CHECK(tsr::synth::generate_one(c, 5) == tsr::synth::generate(c)[5]);
}

TEST_CASE("1000 tables at span 0.3 are valid with a bounded spanning fraction") {
    SynthConfig c;
    c.n_tables = 1000;
    c.span_probability = 0.3;
    c.seed = 2024;
    const auto grids = tsr::synth::generate(c);
    for (const auto& g : grids) {
        const auto r = tsr::validate(g);
        REQUIRE(r.valid);
        CHECK(r.holes.empty());
    }
    const double f = tsr::synth::spanning_fraction(grids);
    CHECK(f >= 0.1);
    CHECK(f <= 0.5);
}

TEST_CASE("quads keep their orientation under rotation and jitter") {
    SynthConfig c;
    c.n_tables = 200;
    c.rotation = 45.0;
    c.jitter = 0.2;
    c.seed = 77;
    for (const auto& g : tsr::synth::generate(c)) {
        for (const auto& cell : g.cells) {
            REQUIRE(cell.quad.has_value());
            CHECK(cell.quad->signed_area() > 0.0);
            for (const auto& p : cell.quad->corners()) {
                CHECK(p.x >= 0.0);
                CHECK(p.y >= 0.0);
                CHECK(p.x <= g.image_size->width);
                CHECK(p.y <= g.image_size->height);
            }
        }
    }
}

TEST_CASE("holes only when requested") {
    SynthConfig c;
    c.n_tables = 100;
    c.hole_probability = 0.3;
    c.seed = 5;
    std::size_t holes = 0;
    for (const auto& g : tsr::synth::generate(c)) {
        const auto r = tsr::validate(g);
        CHECK(r.valid);
        holes += r.holes.size();
    }
    CHECK(holes > 0);
}

TEST_CASE("config validation names the field") {
    auto expect = [](SynthConfig c, const std::string& field) {
        try {
            c.validate();
            FAIL("expected ConfigError for " << field);
        } catch (const tsr::ConfigError& e) {
            CHECK(std::string(e.what()).find(field) != std::string::npos);
        }
    };
    SynthConfig c;
    c.span_probability = 1.5;
    expect(c, "span_probability");
    c = {};
    c.rows_min = 5;
    c.rows_max = 3;
    expect(c, "rows");
    c = {};
    c.jitter = -0.1;
    expect(c, "jitter");
    c = {};
    c.hole_probability = 2.0;
    expect(c, "hole_probability");
    c = {};
    c.n_tables = -1;
    expect(c, "n_tables");
}

TEST_CASE("make_shifted_variant: worked examples") {
    using namespace tsr::metrics;
    const auto g10 = tsr::synth::regular_grid(10, 4);
    const auto all = tsr::synth::make_shifted_variant(g10, 0);
    CHECK(logical_accuracy(all, g10, CellMatching::identity(all, g10)).acc_all == 0.0);

    const auto last = tsr::synth::make_shifted_variant(g10, 9);
    CHECK(logical_accuracy(last, g10, CellMatching::identity(last, g10)).acc_all == doctest::Approx(0.9));
    CHECK(last.cells.front().quad == g10.cells.front().quad);

    const auto g = tsr::synth::regular_grid(10, 5);
    const auto mid = tsr::synth::make_shifted_variant(g, 5);
    const auto m = match_cells(mid, g);
    CHECK(m.pairs.size() == 50);
    const double f1 = adjacency_f1(mid, g, m).f1;
    const double acc = logical_accuracy(mid, g, m).acc_all;
    CHECK(f1 >= 0.8);
    CHECK(acc <= 0.5);
    // 80 of 85 relations survive; half the cells keep their location
    CHECK(f1 == doctest::Approx(2.0 * 80.0 / (80.0 + 85.0)));
    CHECK(acc == doctest::Approx(0.5));

    CHECK_THROWS_AS((void)tsr::synth::make_shifted_variant(g, 10), tsr::IndexError);
    CHECK_THROWS_AS((void)tsr::synth::make_shifted_variant(g, -1), tsr::IndexError);
}
