// tsr: command-line front end for the table-structure toolkit.
//
//   tsr gen --tables 10 --seed 7 --output tables.jsonl
//   tsr convert tables.jsonl --to html
//   tsr eval --pred pred.jsonl --gt gt.jsonl --csv per_sample.csv
//   tsr train --data train.jsonl --heldout val.jsonl --output model.tsrp --history history.csv
//   tsr infer --data tables.jsonl --checkpoint model.tsrp --output pred.jsonl
//   tsr gradcheck
//
// Exit codes: 0 success, 1 runtime or data error, 2 usage or configuration error.

#include "tsr/core.hpp"
#include "tsr/error.hpp"
#include "tsr/io.hpp"
#include "tsr/metrics.hpp"
#include "tsr/regressor.hpp"
#include "tsr/synth.hpp"
#include "tsr/transform.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>

namespace {

using nlohmann::json;

struct Global {
    std::uint64_t seed = 0;
    bool quiet = false;
    std::string output = "-";
};

class Output {
public:
    explicit Output(const std::string& path) {
        if (path == "-") return;
        file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
        if (!*file_) throw tsr::Error("cannot open " + path + " for writing");
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

void info(const Global& g, const std::string& msg) {
    if (!g.quiet) std::cerr << msg << '\n';
}

// ---------------------------------------------------------------------------
// gen

struct GenArgs {
    tsr::synth::SynthConfig config;
    std::string config_file;
};

void load_synth_json(const std::string& path, tsr::synth::SynthConfig& c) {
    std::ifstream in(path);
    if (!in) throw tsr::ConfigError("--config: cannot open " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw tsr::ConfigError("--config: " + std::string(e.what()));
    }
    auto get = [&](const char* key, auto& field) {
        if (!j.contains(key)) return;
        try {
            j.at(key).get_to(field);
        } catch (const json::exception&) {
            throw tsr::ConfigError(std::string("--config: ") + key + " has the wrong type");
        }
    };
    get("n_tables", c.n_tables);
    get("rows_min", c.rows_min);
    get("rows_max", c.rows_max);
    get("cols_min", c.cols_min);
    get("cols_max", c.cols_max);
    get("span_probability", c.span_probability);
    get("max_span", c.max_span);
    get("jitter", c.jitter);
    get("rotation", c.rotation);
    get("hole_probability", c.hole_probability);
    get("line_jitter", c.line_jitter);
    get("with_content", c.with_content);
    get("seed", c.seed);
    if (j.contains("image_size")) {
        std::vector<double> wh;
        get("image_size", wh);
        if (wh.size() != 2) throw tsr::ConfigError("--config: image_size must be [w,h]");
        c.image_size = {wh[0], wh[1]};
    }
}

void add_gen(CLI::App& app, GenArgs& a) {
    auto* cmd = app.add_subcommand("gen", "Generate a synthetic JSONL dataset");
    auto& c = a.config;
    cmd->add_option("--config", a.config_file, "JSON file with generator settings (flags override it)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--tables", c.n_tables, "Number of tables")->check(CLI::PositiveNumber);
    cmd->add_option("--rows-min", c.rows_min)->check(CLI::PositiveNumber);
    cmd->add_option("--rows-max", c.rows_max)->check(CLI::PositiveNumber);
    cmd->add_option("--cols-min", c.cols_min)->check(CLI::PositiveNumber);
    cmd->add_option("--cols-max", c.cols_max)->check(CLI::PositiveNumber);
    cmd->add_option("--span-prob", c.span_probability, "Merge probability per free slot")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--max-span", c.max_span)->check(CLI::PositiveNumber);
    cmd->add_option("--jitter", c.jitter, "Corner noise as a fraction of cell size")->check(CLI::Range(0.0, 0.49));
    cmd->add_option("--rotation", c.rotation, "Maximum rotation in degrees")->check(CLI::Range(0.0, 45.0));
    cmd->add_option("--hole-prob", c.hole_probability)->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--line-jitter", c.line_jitter)->check(CLI::Range(0.0, 0.49));
    cmd->add_flag("!--no-content", c.with_content, "Omit cell text");
}

int run_gen(const Global& g, GenArgs a, const CLI::App& cmd) {
    tsr::synth::SynthConfig c = a.config;
    if (!a.config_file.empty()) {
        // The file provides defaults; explicitly given flags win.
        tsr::synth::SynthConfig from_file;
        load_synth_json(a.config_file, from_file);
        auto pick = [&](const char* flag, auto& dst, const auto& src) {
            if (cmd.count(flag) == 0) dst = src;
        };
        pick("--tables", c.n_tables, from_file.n_tables);
        pick("--rows-min", c.rows_min, from_file.rows_min);
        pick("--rows-max", c.rows_max, from_file.rows_max);
        pick("--cols-min", c.cols_min, from_file.cols_min);
        pick("--cols-max", c.cols_max, from_file.cols_max);
        pick("--span-prob", c.span_probability, from_file.span_probability);
        pick("--max-span", c.max_span, from_file.max_span);
        pick("--jitter", c.jitter, from_file.jitter);
        pick("--rotation", c.rotation, from_file.rotation);
        pick("--hole-prob", c.hole_probability, from_file.hole_probability);
        pick("--line-jitter", c.line_jitter, from_file.line_jitter);
        pick("--no-content", c.with_content, from_file.with_content);
        c.image_size = from_file.image_size;
        c.seed = from_file.seed;
    }
    if (g.seed != 0 || a.config_file.empty()) c.seed = g.seed;
    const auto grids = tsr::synth::generate(c);
    Output out(g.output);
    tsr::io::write_jsonl(out.stream(), grids);
    std::size_t cells = 0;
    for (const auto& t : grids) cells += t.cells.size();
    info(g, "tables " + std::to_string(grids.size()) + ", cells " + std::to_string(cells) + ", spanning fraction " +
                std::to_string(tsr::synth::spanning_fraction(grids)));
    return 0;
}

// ---------------------------------------------------------------------------
// convert

struct ConvertArgs {
    std::string input;
    std::string target = "html";
    bool content = false;
};

void add_convert(CLI::App& app, ConvertArgs& a) {
    auto* cmd = app.add_subcommand("convert", "Convert grids to markup or adjacency relations");
    cmd->add_option("input", a.input, "JSONL grid file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--to", a.target, "html or adjacency")->check(CLI::IsMember({"html", "adjacency"}));
    cmd->add_flag("--content", a.content, "Include cell text in the markup");
}

int run_convert(const Global& g, const ConvertArgs& a) {
    const auto grids = tsr::io::read_jsonl_file(a.input);
    Output out(g.output);
    for (std::size_t i = 0; i < grids.size(); ++i) {
        const tsr::TableGrid& grid = grids[i];
        const auto report = tsr::validate(grid);
        if (!report.valid) {
            throw tsr::InvalidGrid(a.input + " line " + std::to_string(i + 1) + ": " + tsr::describe(report));
        }
        if (a.target == "html") {
            const auto mode = a.content ? tsr::ContentMode::WithContent : tsr::ContentMode::StructureOnly;
            out.stream() << tsr::to_markup(grid, mode).str() << '\n';
        } else {
            const tsr::AdjacencySets sets = tsr::adjacency_pairs(grid);
            json triples = json::array();
            for (const auto* group : {&sets.horizontal, &sets.vertical}) {
                for (const tsr::AdjacencyPair& p : *group) triples.push_back({p.i, p.j, tsr::to_string(p.direction)});
            }
            out.stream() << json{{"pairs", triples}}.dump() << '\n';
        }
    }
    info(g, "converted " + std::to_string(grids.size()) + " tables");
    return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
    std::string pred;
    std::string gt;
    std::string csv;
    double iou = 0.5;
    std::string teds_mode = "structure";
    bool no_spatial = false;
};

void add_eval(CLI::App& app, EvalArgs& a) {
    auto* cmd = app.add_subcommand("eval", "Score predicted grids against ground truth (aligned by line)");
    cmd->add_option("--pred", a.pred)->required()->check(CLI::ExistingFile);
    cmd->add_option("--gt", a.gt)->required()->check(CLI::ExistingFile);
    cmd->add_option("--csv", a.csv, "Per-sample CSV output");
    cmd->add_option("--iou", a.iou, "IoU threshold for cell matching")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--teds-mode", a.teds_mode)->check(CLI::IsMember({"structure", "content"}));
    cmd->add_flag("--no-spatial", a.no_spatial, "Skip detection, logical and adjacency metrics");
}

json prf_json(const tsr::metrics::PRF& p) { return {{"precision", p.precision}, {"recall", p.recall}, {"f1", p.f1}}; }

json logical_json(const tsr::metrics::LogicalAccuracy& l) {
    json j = {{"acc_all", l.acc_all}, {"acc_row", l.acc_row}, {"acc_col", l.acc_col}};
    j["acc_span"] = l.acc_span ? json(*l.acc_span) : json(nullptr);
    return j;
}

int run_eval(const Global& g, const EvalArgs& a) {
    const auto pred = tsr::io::read_jsonl_file(a.pred);
    const auto gt = tsr::io::read_jsonl_file(a.gt);
    tsr::metrics::EvalOptions opt;
    opt.iou_threshold = a.iou;
    opt.spatial = !a.no_spatial;
    opt.teds_mode = a.teds_mode == "content" ? tsr::ContentMode::WithContent : tsr::ContentMode::StructureOnly;
    const tsr::metrics::MetricReport r = tsr::metrics::evaluate(pred, gt, opt);

    json j = {{"samples", r.samples.size()}, {"teds", r.teds}, {"bleu", r.bleu}};
    if (r.detection) j["detection"] = prf_json(*r.detection);
    if (r.logical) j["logical"] = logical_json(*r.logical);
    if (r.adjacency) j["adjacency"] = prf_json(*r.adjacency);
    Output out(g.output);
    out.stream() << j.dump(2) << '\n';

    if (!a.csv.empty()) {
        std::ofstream csv(a.csv);
        if (!csv) throw tsr::Error("cannot open " + a.csv + " for writing");
        csv.precision(17);
        csv << "line,det_precision,det_recall,det_f1,acc_all,acc_row,acc_col,acc_span,adj_precision,adj_recall,adj_f1,"
               "teds,bleu\n";
        auto opt_num = [&](bool has, double v) {
            if (has) csv << v;
            csv << ',';
        };
        for (std::size_t i = 0; i < r.samples.size(); ++i) {
            const tsr::metrics::SampleMetrics& s = r.samples[i];
            csv << i + 1 << ',';
            const tsr::metrics::PRF det = s.detection.value_or(tsr::metrics::PRF{});
            opt_num(s.detection.has_value(), det.precision);
            opt_num(s.detection.has_value(), det.recall);
            opt_num(s.detection.has_value(), det.f1);
            const tsr::metrics::LogicalAccuracy lg = s.logical.value_or(tsr::metrics::LogicalAccuracy{});
            opt_num(s.logical.has_value(), lg.acc_all);
            opt_num(s.logical.has_value(), lg.acc_row);
            opt_num(s.logical.has_value(), lg.acc_col);
            opt_num(lg.acc_span.has_value(), lg.acc_span.value_or(0.0));
            const tsr::metrics::PRF adj = s.adjacency.value_or(tsr::metrics::PRF{});
            opt_num(s.adjacency.has_value(), adj.precision);
            opt_num(s.adjacency.has_value(), adj.recall);
            opt_num(s.adjacency.has_value(), adj.f1);
            csv << s.teds << ',' << s.bleu << '\n';
        }
    }
    return 0;
}

// ---------------------------------------------------------------------------
// train / infer / gradcheck

struct ModelArgs {
    tsr::regressor::RegressorConfig config;
    bool no_inter = false;
    bool no_intra = false;
    bool no_cascade = false;
};

void add_model_options(CLI::App* cmd, ModelArgs& a) {
    auto& c = a.config;
    cmd->add_option("--d", c.d, "Hidden size")->check(CLI::PositiveNumber);
    cmd->add_option("--heads", c.heads)->check(CLI::PositiveNumber);
    cmd->add_option("--layers-base", c.layers_base)->check(CLI::PositiveNumber);
    cmd->add_option("--layers-stack", c.layers_stack)->check(CLI::PositiveNumber);
    cmd->add_option("--ffn", c.ffn, "Feed-forward width (0 = 2d)")->check(CLI::NonNegativeNumber);
    cmd->add_option("--epochs", c.epochs)->check(CLI::NonNegativeNumber);
    cmd->add_option("--lr", c.lr, "Initial learning rate")->check(CLI::PositiveNumber);
    cmd->add_option("--decay-at", c.decay_at, "Epoch fractions where the rate decays")->delimiter(',');
    cmd->add_option("--decay-factor", c.decay_factor)->check(CLI::PositiveNumber);
    cmd->add_option("--grad-clip", c.grad_clip)->check(CLI::NonNegativeNumber);
    cmd->add_flag("--no-inter", a.no_inter, "Disable the inter-cell loss");
    cmd->add_flag("--no-intra", a.no_intra, "Disable the intra-cell loss");
    cmd->add_flag("--no-cascade", a.no_cascade, "Single regressor of layers-base + layers-stack layers");
}

tsr::regressor::RegressorConfig finish(const Global& g, const ModelArgs& a) {
    tsr::regressor::RegressorConfig c = a.config;
    c.loss_flags.inter = !a.no_inter;
    c.loss_flags.intra = !a.no_intra;
    c.cascade = !a.no_cascade;
    c.seed = g.seed;
    c.validate();
    return c;
}

struct TrainArgs {
    ModelArgs model;
    std::string data;
    std::string heldout;
    std::string history;
};

void add_train(CLI::App& app, TrainArgs& a) {
    auto* cmd = app.add_subcommand("train", "Train the logical-location regressor; --output receives the checkpoint");
    cmd->add_option("--data", a.data)->required()->check(CLI::ExistingFile);
    cmd->add_option("--heldout", a.heldout)->check(CLI::ExistingFile);
    cmd->add_option("--history", a.history, "Per-epoch CSV");
    add_model_options(cmd, a.model);
}

int run_train(const Global& g, const TrainArgs& a) {
    if (g.output == "-") throw tsr::ConfigError("--output: train needs a checkpoint path");
    const auto config = finish(g, a.model);
    const auto data = tsr::io::read_jsonl_file(a.data);
    const auto held = a.heldout.empty() ? std::vector<tsr::TableGrid>{} : tsr::io::read_jsonl_file(a.heldout);
    auto result = tsr::regressor::train(data, held, config, [&](const tsr::regressor::EpochRecord& r) {
        std::string line = "epoch " + std::to_string(r.epoch) + " loss_log " + std::to_string(r.loss_log) +
                           " loss_inter " + std::to_string(r.loss_inter) + " loss_intra " +
                           std::to_string(r.loss_intra);
        if (r.heldout_acc_all) line += " heldout_acc_all " + std::to_string(*r.heldout_acc_all);
        info(g, line);
    });
    tsr::regressor::save_checkpoint_file(result.model, g.output);
    if (!a.history.empty()) {
        std::ofstream h(a.history);
        if (!h) throw tsr::Error("cannot open " + a.history + " for writing");
        tsr::regressor::write_history_csv(h, result.history, config);
    }
    return 0;
}

struct InferArgs {
    std::string data;
    std::string checkpoint;
};

void add_infer(CLI::App& app, InferArgs& a) {
    auto* cmd = app.add_subcommand("infer", "Predict logical locations for every cell");
    cmd->add_option("--data", a.data)->required()->check(CLI::ExistingFile);
    cmd->add_option("--checkpoint", a.checkpoint)->required()->check(CLI::ExistingFile);
}

int run_infer(const Global& g, const InferArgs& a) {
    const auto model = tsr::regressor::load_checkpoint_file(a.checkpoint);
    const auto data = tsr::io::read_jsonl_file(a.data);
    std::vector<tsr::TableGrid> out;
    out.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        try {
            out.push_back(tsr::regressor::infer_grid(model, data[i]));
        } catch (const tsr::Error& e) {
            throw tsr::Error(a.data + " line " + std::to_string(i + 1) + ": " + e.what());
        }
    }
    Output o(g.output);
    tsr::io::write_jsonl(o.stream(), out);
    info(g, "predicted " + std::to_string(out.size()) + " tables");
    return 0;
}

struct GradArgs {
    ModelArgs model;
    double epsilon = 1e-5;
    std::size_t params = 200;
    double threshold = 1e-4;
};

void add_gradcheck(CLI::App& app, GradArgs& a) {
    auto* cmd = app.add_subcommand("gradcheck", "Compare analytic and finite-difference gradients");
    cmd->add_option("--epsilon", a.epsilon)->check(CLI::PositiveNumber);
    cmd->add_option("--params", a.params, "Parameters to probe")->check(CLI::PositiveNumber);
    cmd->add_option("--threshold", a.threshold)->check(CLI::PositiveNumber);
    add_model_options(cmd, a.model);
}

int run_gradcheck(const Global& g, const GradArgs& a) {
    const auto config = finish(g, a.model);
    tsr::synth::SynthConfig sc;
    sc.n_tables = 1;
    sc.rows_max = 5;
    sc.cols_max = 5;
    sc.seed = g.seed;
    const auto grid = tsr::synth::generate_one(sc, 0);
    tsr::regressor::Model model(config);
    const auto sample = tsr::regressor::make_sample(grid, config.d);
    const auto r = tsr::regressor::grad_check(model, sample, a.epsilon, a.params, g.seed);
    Output out(g.output);
    out.stream() << json{{"max_rel_error", r.max_rel_error}, {"checked", r.checked}, {"excluded", r.excluded}}.dump()
                 << '\n';
    return r.max_rel_error < a.threshold ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Table structure toolkit: logical grids, conversions, metrics and the logical-location regressor"};
    app.require_subcommand(1);
    app.fallthrough();
    Global g;
    app.add_option("--seed", g.seed, "Seed for every random choice");
    app.add_flag("--quiet", g.quiet, "Suppress progress messages");
    app.add_option("--output,-o", g.output, "Output path ('-' for stdout)");

    GenArgs gen;
    ConvertArgs convert;
    EvalArgs eval;
    TrainArgs train;
    InferArgs infer;
    GradArgs grad;
    add_gen(app, gen);
    add_convert(app, convert);
    add_eval(app, eval);
    add_train(app, train);
    add_infer(app, infer);
    add_gradcheck(app, grad);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        const CLI::App* cmd = app.get_subcommands().front();
        const std::string name = cmd->get_name();
        if (name == "gen") return run_gen(g, gen, *cmd);
        if (name == "convert") return run_convert(g, convert);
        if (name == "eval") return run_eval(g, eval);
        if (name == "train") return run_train(g, train);
        if (name == "infer") return run_infer(g, infer);
        if (name == "gradcheck") return run_gradcheck(g, grad);
    } catch (const tsr::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
