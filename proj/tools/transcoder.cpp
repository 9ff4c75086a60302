// Command-line front end: codeinfo, simulate, train, eval, histogram, flops.

#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "transcoder/checkpoint.hpp"
#include "transcoder/flops.hpp"
#include "transcoder/histogram.hpp"
#include "transcoder/montecarlo.hpp"
#include "transcoder/registry.hpp"
#include "transcoder/training.hpp"

namespace {

using namespace transcoder;

std::size_t default_threads() {
    if (const char* env = std::getenv("TRANSCODER_THREADS")) {
        const long v = std::atol(env);
        if (v > 0) return static_cast<std::size_t>(v);
    }
    return 1;
}

DecoderKind parse_decoder(const std::string& s) {
    if (s == "bp") return DecoderKind::Bp;
    if (s == "minsum") return DecoderKind::MinSum;
    if (s == "sc") return DecoderKind::Sc;
    if (s == "scl") return DecoderKind::Scl;
    throw CLI::ValidationError("--decoder", "unknown decoder '" + s + "'");
}

ModuleSet parse_modules(const std::string& s) {
    if (s == "none") return ModuleSet::None;
    if (s == "et") return ModuleSet::Et;
    if (s == "dt") return ModuleSet::Dt;
    if (s == "et+dt") return ModuleSet::EtDt;
    if (s == "dt+rf") return ModuleSet::DtRf;
    if (s == "full") return ModuleSet::Full;
    throw CLI::ValidationError("--modules", "unknown module set '" + s + "'");
}

LossKind parse_loss(const std::string& s) {
    if (s == "tc") return LossKind::Tc;
    if (s == "cd") return LossKind::Cd;
    if (s == "bp") return LossKind::Bp;
    throw CLI::ValidationError("--loss", "unknown loss '" + s + "'");
}

nlohmann::json degree_histogram(const BitMatrix& h, bool rows) {
    std::map<std::size_t, std::size_t> hist;
    const std::size_t count = rows ? h.rows() : h.cols();
    for (std::size_t i = 0; i < count; ++i) ++hist[rows ? h.row_weight(i) : h.col_weight(i)];
    nlohmann::json j = nlohmann::json::object();
    for (auto [deg, cnt] : hist) j[std::to_string(deg)] = cnt;
    return j;
}

int cmd_codeinfo(const std::string& code_name, const std::string& data_dir) {
    const CodeHandle handle = load_code(code_name, data_dir);
    const auto linear = handle.is_polar() ? polar_linear_view(handle) : handle.linear;
    const BitMatrix& h = linear->h().bits;
    nlohmann::json j;
    j["name"] = handle.name;
    j["n"] = handle.n();
    j["k"] = handle.k();
    j["rate"] = static_cast<double>(handle.k()) / static_cast<double>(handle.n());
    j["edges"] = h.popcount();
    j["row_degree_hist"] = degree_histogram(h, true);
    j["col_degree_hist"] = degree_histogram(h, false);
    if (handle.is_polar()) j["frozen"] = handle.polar->frozen;
    std::cout << j.dump(2) << "\n";
    return 0;
}

struct SimArgs {
    std::string code, decoder = "bp", out;
    std::string modules = "none";
    std::string checkpoint;
    std::vector<double> ebn0;
    std::size_t iters = 20, list_size = 8, runs = 1;
    std::size_t min_errors = 100, min_frames = 10'000, max_frames = 10'000'000;
    std::size_t calib = 10'000;
    std::uint64_t seed = 0;
    std::size_t threads = default_threads();
    bool early_stop = false;
    bool zero_noise = false;
    std::string data_dir = "data";
};

int run_pipeline_eval(const SimArgs& a) {
    const CodeHandle handle = load_code(a.code, a.data_dir);
    Pipeline<float> pl;
    pl.code = handle.linear.get();
    pl.polar = handle.polar.get();
    pl.code_name = handle.name;
    pl.modules = parse_modules(a.modules);
    pl.sched.kind = parse_decoder(a.decoder);
    pl.sched.iters = a.iters;
    pl.sched.list_size = a.list_size;
    pl.sched.runs = a.runs;
    pl.sched.early_stop = a.early_stop;

    TransCoderModel<float> model;
    if (pl.modules != ModuleSet::None) {
        if (a.checkpoint.empty())
            throw std::runtime_error("eval: neural modules need --checkpoint");
        const ModelConfig cfg = peek_checkpoint_config(a.checkpoint);
        if (cfg.n != handle.n())
            throw std::runtime_error("eval: checkpoint was trained for n=" + std::to_string(cfg.n));
        model = TransCoderModel<float>::init(cfg, 0);
        load_checkpoint(model, a.checkpoint);
        pl.model = &model;
    }

    MonteCarloOptions opt;
    opt.stop = {a.min_errors, a.min_frames, a.max_frames};
    opt.workers = a.threads;
    opt.seed = a.seed;
    opt.zero_noise = a.zero_noise;
    opt.calibration_frames = a.calib;

    auto records = monte_carlo(pl, a.ebn0, opt);
    std::cout << kResultColumns << "\n";
    std::cout.precision(10);
    for (const auto& r : records)
        std::cout << r.pipeline_id << "," << r.code_name << "," << r.ebn0_db << "," << r.frames
                  << "," << r.bit_errors << "," << r.block_errors << "," << r.ber << "," << r.bler
                  << "," << r.minus_ln_bler << "," << r.seed << "," << r.wall_time_s << "\n";
    if (!a.out.empty()) {
        nlohmann::json cfg;
        cfg["command"] = "simulate";
        cfg["code"] = handle.name;
        cfg["decoder"] = a.decoder;
        cfg["modules"] = a.modules;
        cfg["iters"] = a.iters;
        cfg["runs"] = a.runs;
        cfg["list_size"] = a.list_size;
        cfg["seed"] = a.seed;
        cfg["threads"] = a.threads;
        cfg["stop"] = {{"min_errors", a.min_errors},
                       {"min_frames", a.min_frames},
                       {"max_frames", a.max_frames}};
        write_results(records, a.out, cfg);
    }
    return 0;
}

struct TrainArgs {
    std::string code, out, trace;
    std::string decoder = "bp", loss = "bp", modules = "dt+rf", precision = "f32";
    std::size_t runs = 2, iters_per_run = 10;
    std::uint64_t epochs = 10'000, batches = 1;
    std::size_t batch = 1000;
    double lr = 1e-3, snr_lo = 2.0, snr_hi = 8.0;
    std::size_t m = 3, d_model = 16, d_khead = 16, enc_layers = 2, dec_layers = 3, n_heads = 1;
    std::uint64_t seed = 0;
    std::string data_dir = "data";
};

template <typename T>
int run_train(const TrainArgs& a) {
    const CodeHandle handle = load_code(a.code, a.data_dir);
    const ModuleSet modules = parse_modules(a.modules);

    ModelConfig mc;
    mc.n = handle.n();
    mc.m = a.m;
    mc.d_model = a.d_model;
    mc.d_khead = a.d_khead;
    mc.n_heads = a.n_heads;
    mc.enc_layers = a.enc_layers;
    mc.dec_layers = a.dec_layers;
    mc.refine_iters = a.runs;
    mc.use_encoder = module_set_has_encoder(modules);
    mc.use_decoder = module_set_has_decoder(modules);
    mc.use_refine = module_set_has_refine(modules);
    auto model = TransCoderModel<T>::init(mc, a.seed);

    TrainConfig cfg;
    cfg.epochs = a.epochs;
    cfg.batches_per_epoch = a.batches;
    cfg.batch_size = a.batch;
    cfg.lr = a.lr;
    cfg.snr_lo_db = a.snr_lo;
    cfg.snr_hi_db = a.snr_hi;
    cfg.decoder_runs = a.runs;
    cfg.decoder_iters = a.iters_per_run;
    cfg.decoder = parse_decoder(a.decoder);
    cfg.loss = parse_loss(a.loss);
    cfg.seed = a.seed;

    TrainTarget target{handle.linear.get(), handle.polar.get()};
    auto result = train(model, target, cfg);
    if (!a.out.empty()) save_checkpoint(model, a.out);
    if (!a.trace.empty()) write_loss_trace(result, a.trace);
    if (!result.trace.empty()) {
        const auto& last = result.trace.back();
        std::cout << "trained " << a.epochs << " epochs; first mean loss "
                  << result.trace.front().mean_loss << ", last mean loss " << last.mean_loss
                  << "\n";
    }
    return 0;
}

struct HistArgs {
    std::string code, mapper = "bpsk", out, checkpoint;
    std::uint64_t pairs = 100'000;
    std::size_t bins = 50;
    double ebn0 = 4.0;
    std::size_t calib = 10'000;
    std::uint64_t seed = 0;
    std::string data_dir = "data";
};

int cmd_histogram(const HistArgs& a) {
    const CodeHandle handle = load_code(a.code, a.data_dir);
    const auto linear = handle.is_polar() ? polar_linear_view(handle) : handle.linear;

    SymbolMapper mapper;
    TransCoderModel<float> model;
    Pipeline<float> pl;
    if (a.mapper == "bpsk") {
        mapper = bpsk_mapper();
    } else if (a.mapper == "transcoder") {
        if (a.checkpoint.empty()) throw std::runtime_error("histogram: --checkpoint required");
        const ModelConfig cfg = peek_checkpoint_config(a.checkpoint);
        if (!cfg.use_encoder) throw std::runtime_error("histogram: checkpoint has no encoder module");
        model = TransCoderModel<float>::init(cfg, 0);
        load_checkpoint(model, a.checkpoint);
        pl.code = linear.get();
        pl.polar = handle.polar.get();
        pl.modules = ModuleSet::Et;
        pl.model = &model;
        const double sigma = sigma_from_ebn0(a.ebn0, static_cast<double>(handle.k()) / handle.n());
        pl.power_stats = calibrate_power(model, pl, sigma, a.calib, a.seed);
        mapper = [&pl, sigma](const BitVector& c) {
            return neural_encode_frame(pl, c.to_bits(), sigma);
        };
    } else {
        throw CLI::ValidationError("--mapper", "unknown mapper '" + a.mapper + "'");
    }

    const auto h = distance_histogram(*linear, mapper, a.pairs, a.bins, a.seed);
    std::cout << "pairs," << h.pairs << (h.exhaustive ? " (exhaustive)" : " (sampled)") << "\n";
    std::cout << "bin_low,bin_high,count\n";
    const double width = (h.hi - h.lo) / static_cast<double>(h.bins);
    for (std::size_t b = 0; b < h.bins; ++b)
        std::cout << h.lo + width * b << "," << h.lo + width * (b + 1) << "," << h.counts[b]
                  << "\n";
    if (!a.out.empty()) {
        std::ofstream out(a.out);
        if (!out) throw std::runtime_error("histogram: cannot write " + a.out);
        out << "bin_low,bin_high,count\n";
        for (std::size_t b = 0; b < h.bins; ++b)
            out << h.lo + width * b << "," << h.lo + width * (b + 1) << "," << h.counts[b] << "\n";
    }
    return 0;
}

struct FlopArgs {
    std::string target = "bp", code;
    std::size_t iters = 50;
    std::size_t m = 3, d_model = 16, d_cm = 128, heads = 8;
    std::size_t n_pc_override = 0, edges_override = 0, n_override = 0;
    std::string data_dir = "data";
};

int cmd_flops(const FlopArgs& a) {
    FlopParams p;
    p.m = a.m;
    p.d_model = a.d_model;
    p.d_cm = a.d_cm;
    p.h = a.heads;
    if (!a.code.empty()) {
        const CodeHandle handle = load_code(a.code, a.data_dir);
        const auto linear = handle.is_polar() ? polar_linear_view(handle) : handle.linear;
        p.n = linear->n();
        p.n_pc = linear->h().rows();
        p.edges = linear->h().bits.popcount();
    }
    if (a.n_override) p.n = a.n_override;
    if (a.n_pc_override) p.n_pc = a.n_pc_override;
    if (a.edges_override) p.edges = a.edges_override;

    std::uint64_t count = 0;
    if (a.target == "bp")
        count = flops::bp_total(p, a.iters);
    else if (a.target == "bp-iter")
        count = flops::bp_iteration(p);
    else if (a.target == "et")
        count = flops::transcoder_encoder(p);
    else if (a.target == "dt" || a.target == "rf")
        count = flops::transcoder_decoder(p);
    else if (a.target == "ecct")
        count = flops::ecct_decoder(p);
    else if (a.target == "crossmpt")
        count = flops::crossmpt_decoder(p);
    else
        throw CLI::ValidationError("--target", "unknown target '" + a.target + "'");
    std::cout << count << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"TransCoder channel-coding laboratory"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string data_dir = "data";
    app.add_option("--data-dir", data_dir, "directory holding codes/ files")->envname("TRANSCODER_DATA");

    // codeinfo
    auto* ci = app.add_subcommand("codeinfo", "print code parameters as JSON");
    std::string ci_code;
    ci->add_option("--code", ci_code, "code name or .alist path")->required();

    // simulate / eval share the argument set; eval additionally loads a model
    SimArgs sim;
    auto add_sim_options = [&](CLI::App* cmd, bool neural) {
        cmd->add_option("--code", sim.code)->required();
        cmd->add_option("--decoder", sim.decoder, "bp|minsum|sc|scl");
        cmd->add_option("--iters", sim.iters, "BP iterations per run");
        cmd->add_option("--list-size", sim.list_size);
        cmd->add_option("--runs", sim.runs, "channel-decoder runs r");
        cmd->add_option("--ebn0", sim.ebn0, "Eb/N0 points in dB")->required()->expected(-1);
        cmd->add_option("--min-errors", sim.min_errors);
        cmd->add_option("--min-frames", sim.min_frames);
        cmd->add_option("--max-frames", sim.max_frames);
        cmd->add_option("--seed", sim.seed);
        cmd->add_option("--threads", sim.threads);
        cmd->add_option("--out", sim.out, "CSV output path (JSON sidecar alongside)");
        cmd->add_flag("--early-stop", sim.early_stop, "stop BP on zero syndrome");
        cmd->add_flag("--zero-noise", sim.zero_noise, "transmit without noise (harness checks)");
        if (neural) {
            cmd->add_option("--modules", sim.modules, "none|et|dt|et+dt|dt+rf|full");
            cmd->add_option("--checkpoint", sim.checkpoint)->required();
            cmd->add_option("--calib", sim.calib, "calibration frames per noise level");
        }
    };
    auto* sc_sim = app.add_subcommand("simulate", "Monte Carlo error rates, classical chain");
    add_sim_options(sc_sim, false);
    auto* sc_eval = app.add_subcommand("eval", "Monte Carlo error rates with neural modules");
    add_sim_options(sc_eval, true);

    // train
    TrainArgs tr;
    auto* sc_train = app.add_subcommand("train", "train TransCoder modules");
    sc_train->add_option("--code", tr.code)->required();
    sc_train->add_option("--decoder", tr.decoder, "bp|sc");
    sc_train->add_option("--loss", tr.loss, "tc|cd|bp");
    sc_train->add_option("--modules", tr.modules, "et|dt|et+dt|dt+rf|full");
    sc_train->add_option("--runs", tr.runs, "channel-decoder runs r");
    sc_train->add_option("--iters-per-run", tr.iters_per_run);
    sc_train->add_option("--epochs", tr.epochs);
    sc_train->add_option("--batches-per-epoch", tr.batches);
    sc_train->add_option("--batch", tr.batch);
    sc_train->add_option("--lr", tr.lr);
    sc_train->add_option("--snr-lo", tr.snr_lo);
    sc_train->add_option("--snr-hi", tr.snr_hi);
    sc_train->add_option("--m", tr.m, "block size");
    sc_train->add_option("--d-model", tr.d_model);
    sc_train->add_option("--seed", tr.seed);
    sc_train->add_option("--out", tr.out, "checkpoint path");
    sc_train->add_option("--trace", tr.trace, "loss trace CSV path");
    sc_train->add_option("--precision", tr.precision, "f32|f64");

    // histogram
    HistArgs hi;
    auto* sc_hist = app.add_subcommand("histogram", "pairwise distance histogram");
    sc_hist->add_option("--code", hi.code)->required();
    sc_hist->add_option("--mapper", hi.mapper, "bpsk|transcoder");
    sc_hist->add_option("--pairs", hi.pairs);
    sc_hist->add_option("--bins", hi.bins);
    sc_hist->add_option("--checkpoint", hi.checkpoint);
    sc_hist->add_option("--ebn0", hi.ebn0, "noise level for the neural mapper");
    sc_hist->add_option("--calib", hi.calib);
    sc_hist->add_option("--seed", hi.seed);
    sc_hist->add_option("--out", hi.out, "histogram CSV path");

    // flops
    FlopArgs fl;
    auto* sc_flops = app.add_subcommand("flops", "analytic operation counts");
    sc_flops->add_option("--target", fl.target, "bp|bp-iter|et|dt|rf|ecct|crossmpt");
    sc_flops->add_option("--code", fl.code);
    sc_flops->add_option("--iters", fl.iters);
    sc_flops->add_option("--m", fl.m);
    sc_flops->add_option("--d-model", fl.d_model);
    sc_flops->add_option("--d-cm", fl.d_cm);
    sc_flops->add_option("--heads", fl.heads);
    sc_flops->add_option("--n", fl.n_override);
    sc_flops->add_option("--n-pc", fl.n_pc_override);
    sc_flops->add_option("--edges", fl.edges_override);

    if (argc <= 1) {
        std::cout << app.help() << std::flush;
        return 2;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help() << std::flush;
        return 2;
    }

    try {
        tr.data_dir = sim.data_dir = hi.data_dir = fl.data_dir = data_dir;
        if (ci->parsed()) return cmd_codeinfo(ci_code, data_dir);
        if (sc_sim->parsed()) return run_pipeline_eval(sim);
        if (sc_eval->parsed()) return run_pipeline_eval(sim);
        if (sc_train->parsed())
            return tr.precision == "f64" ? run_train<double>(tr) : run_train<float>(tr);
        if (sc_hist->parsed()) return cmd_histogram(hi);
        if (sc_flops->parsed()) return cmd_flops(fl);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
