#pragma once

// Monte Carlo BER/BLER measurement. Frames are processed in fixed-size
// chunks; the stop rule is evaluated only at chunk boundaries on exact
// totals, and every frame's randomness is keyed by its absolute index, so
// counts are bit-identical for any worker count.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "transcoder/pipeline.hpp"

namespace transcoder {

struct StopRule {
    std::size_t min_errors = 100;
    std::size_t min_frames = 10'000;
    std::size_t max_frames = 10'000'000;
};

struct MonteCarloOptions {
    StopRule stop;
    std::size_t workers = 1;
    std::uint64_t seed = 0;
    std::size_t chunk = 8192;
    bool zero_noise = false;
    std::size_t calibration_frames = 10'000;  // neural-encoder pipelines
};

struct EvalRecord {
    std::string pipeline_id;
    std::string code_name;
    double ebn0_db = 0.0;
    std::uint64_t frames = 0;
    std::uint64_t bit_errors = 0;
    std::uint64_t block_errors = 0;
    double ber = 0.0;
    double bler = 0.0;
    double minus_ln_bler = 0.0;
    std::uint64_t seed = 0;
    double wall_time_s = 0.0;

    double bler_std_error() const {
        if (frames == 0) return 0.0;
        return std::sqrt(bler * (1.0 - bler) / static_cast<double>(frames));
    }
};

template <typename T>
std::vector<EvalRecord> monte_carlo(Pipeline<T>& pipeline, const std::vector<double>& ebn0_db_list,
                                    const MonteCarloOptions& opt) {
    if (ebn0_db_list.empty()) throw std::invalid_argument("monte_carlo: empty Eb/N0 list");
    pipeline.validate();
    const std::size_t workers = std::max<std::size_t>(1, opt.workers);

    std::vector<EvalRecord> records;
    for (double ebn0 : ebn0_db_list) {
        const double sigma = sigma_from_ebn0(ebn0, pipeline.rate());
        if (module_set_has_encoder(pipeline.modules)) {
            pipeline.power_stats = calibrate_power(*pipeline.model, pipeline, sigma,
                                                   opt.calibration_frames, opt.seed);
        }
        pipeline.require_calibrated();

        const auto t0 = std::chrono::steady_clock::now();
        std::uint64_t frames = 0, bit_errors = 0, block_errors = 0;
        while (frames < opt.stop.max_frames) {
            const std::uint64_t chunk =
                std::min<std::uint64_t>(opt.chunk, opt.stop.max_frames - frames);
            std::vector<std::uint64_t> wbits(workers, 0), wblocks(workers, 0);
            auto work = [&](std::size_t w) {
                std::uint64_t bits = 0, blocks = 0;
                for (std::uint64_t f = frames + w; f < frames + chunk; f += workers) {
                    const FrameOutcome o = run_frame(pipeline, opt.seed, f, sigma, opt.zero_noise);
                    bits += o.bit_errors;
                    blocks += o.block_error ? 1 : 0;
                }
                wbits[w] = bits;
                wblocks[w] = blocks;
            };
            if (workers == 1) {
                work(0);
            } else {
                std::vector<std::thread> pool;
                pool.reserve(workers);
                for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
                for (auto& t : pool) t.join();
            }
            for (std::size_t w = 0; w < workers; ++w) {
                bit_errors += wbits[w];
                block_errors += wblocks[w];
            }
            frames += chunk;
            if (block_errors >= opt.stop.min_errors && frames >= opt.stop.min_frames) break;
        }
        const auto t1 = std::chrono::steady_clock::now();

        EvalRecord r;
        r.pipeline_id = pipeline.id();
        r.code_name = pipeline.code_name;
        r.ebn0_db = ebn0;
        r.frames = frames;
        r.bit_errors = bit_errors;
        r.block_errors = block_errors;
        r.ber = static_cast<double>(bit_errors) / (static_cast<double>(frames) * pipeline.k());
        r.bler = static_cast<double>(block_errors) / static_cast<double>(frames);
        r.minus_ln_bler = block_errors == 0 ? std::numeric_limits<double>::infinity()
                                            : -std::log(r.bler);
        r.seed = opt.seed;
        r.wall_time_s = std::chrono::duration<double>(t1 - t0).count();
        records.push_back(std::move(r));
    }
    return records;
}

// ------------------------------------------------------------- results IO --

inline const char* kResultColumns =
    "pipeline,code,ebn0_db,frames,bit_errors,block_errors,ber,bler,minus_ln_bler,seed,wall_time_s";

inline void write_results(const std::vector<EvalRecord>& records, const std::string& path,
                          const nlohmann::json& config_sidecar = {}) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("results: cannot write " + path);
    out << kResultColumns << "\n";
    out.precision(17);
    for (const auto& r : records) {
        out << r.pipeline_id << "," << r.code_name << "," << r.ebn0_db << "," << r.frames << ","
            << r.bit_errors << "," << r.block_errors << "," << r.ber << "," << r.bler << ","
            << r.minus_ln_bler << "," << r.seed << "," << r.wall_time_s << "\n";
    }
    if (!out) throw std::runtime_error("results: write failed for " + path);

    nlohmann::json side = config_sidecar;
    side["rng"] = kRngName;
    side["columns"] = kResultColumns;
    nlohmann::json recs = nlohmann::json::array();
    for (const auto& r : records)
        recs.push_back({{"pipeline", r.pipeline_id},
                        {"code", r.code_name},
                        {"ebn0_db", r.ebn0_db},
                        {"frames", r.frames},
                        {"bit_errors", r.bit_errors},
                        {"block_errors", r.block_errors},
                        {"bler_std_error", r.bler_std_error()}});
    side["records"] = std::move(recs);
    std::ofstream jout(path + ".json");
    if (!jout) throw std::runtime_error("results: cannot write " + path + ".json");
    jout << side.dump(2) << "\n";
}

inline std::vector<EvalRecord> read_results(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("results: cannot open " + path);
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("results: empty file " + path);
    if (header != kResultColumns)
        throw std::runtime_error("results: unexpected columns in " + path + ": " + header);
    std::vector<EvalRecord> records;
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 11)
            throw std::runtime_error("results: " + path + ":" + std::to_string(lineno) +
                                     ": expected 11 columns, got " + std::to_string(fields.size()));
        EvalRecord r;
        r.pipeline_id = fields[0];
        r.code_name = fields[1];
        r.ebn0_db = std::stod(fields[2]);
        r.frames = std::stoull(fields[3]);
        r.bit_errors = std::stoull(fields[4]);
        r.block_errors = std::stoull(fields[5]);
        r.ber = std::stod(fields[6]);
        r.bler = std::stod(fields[7]);
        r.minus_ln_bler = std::stod(fields[8]);
        r.seed = std::stoull(fields[9]);
        r.wall_time_s = std::stod(fields[10]);
        records.push_back(std::move(r));
    }
    return records;
}

}  // namespace transcoder
