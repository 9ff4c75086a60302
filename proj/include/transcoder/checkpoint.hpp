#pragma once

// Checkpoint container: 8-byte magic, a little-endian u64 manifest length,
// a JSON manifest (name / shape / dtype / byte offset per tensor, plus the
// model configuration), then one raw little-endian block of 32-bit floats.
// Loading validates the manifest against the in-memory model definition and
// rejects any shape or configuration mismatch.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "transcoder/nn.hpp"

namespace transcoder {

struct CheckpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace ckpt_detail {

inline constexpr char kMagic[8] = {'T', 'C', 'C', 'K', 'P', 'T', '0', '1'};

inline void write_u64_le(std::ostream& out, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.write(b, 8);
}

inline std::uint64_t read_u64_le(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

inline void write_f32_le(std::ostream& out, float f) {
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((u >> (8 * i)) & 0xFF);
    out.write(b, 4);
}

inline float read_f32_le(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t u = 0;
    for (int i = 0; i < 4; ++i) u |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    float f;
    std::memcpy(&f, &u, 4);
    return f;
}

inline nlohmann::json config_json(const ModelConfig& c) {
    return {{"n", c.n},
            {"m", c.m},
            {"d_model", c.d_model},
            {"n_heads", c.n_heads},
            {"d_khead", c.d_khead},
            {"enc_layers", c.enc_layers},
            {"dec_layers", c.dec_layers},
            {"refine_iters", c.refine_iters},
            {"use_encoder", c.use_encoder},
            {"use_decoder", c.use_decoder},
            {"use_refine", c.use_refine}};
}

inline ModelConfig config_from_json(const nlohmann::json& j) {
    ModelConfig c;
    c.n = j.at("n").get<std::size_t>();
    c.m = j.at("m").get<std::size_t>();
    c.d_model = j.at("d_model").get<std::size_t>();
    c.n_heads = j.at("n_heads").get<std::size_t>();
    c.d_khead = j.at("d_khead").get<std::size_t>();
    c.enc_layers = j.at("enc_layers").get<std::size_t>();
    c.dec_layers = j.at("dec_layers").get<std::size_t>();
    c.refine_iters = j.at("refine_iters").get<std::size_t>();
    c.use_encoder = j.at("use_encoder").get<bool>();
    c.use_decoder = j.at("use_decoder").get<bool>();
    c.use_refine = j.at("use_refine").get<bool>();
    return c;
}

}  // namespace ckpt_detail

template <typename T>
void save_checkpoint(const TransCoderModel<T>& model, const std::string& path) {
    using nlohmann::json;
    json manifest;
    manifest["format"] = "transcoder-checkpoint";
    manifest["model"] = ckpt_detail::config_json(model.cfg);
    json tensors = json::array();
    std::uint64_t offset = 0;
    auto describe = [&](const ParamSet<T>& set, bool buffer) {
        for (const auto& p : set) {
            json t;
            t["name"] = p.name;
            t["shape"] = p.shape;
            t["dtype"] = "f32";
            t["byte_offset"] = offset;
            t["buffer"] = buffer;
            tensors.push_back(std::move(t));
            offset += 4 * p.size();
        }
    };
    describe(model.params, false);
    describe(model.buffers, true);
    manifest["tensors"] = std::move(tensors);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw CheckpointError("checkpoint: cannot write " + path);
    const std::string mstr = manifest.dump();
    out.write(ckpt_detail::kMagic, 8);
    ckpt_detail::write_u64_le(out, mstr.size());
    out.write(mstr.data(), static_cast<std::streamsize>(mstr.size()));
    auto dump_values = [&](const ParamSet<T>& set) {
        for (const auto& p : set)
            for (auto v : p.data) ckpt_detail::write_f32_le(out, static_cast<float>(v));
    };
    dump_values(model.params);
    dump_values(model.buffers);
    if (!out) throw CheckpointError("checkpoint: write failed for " + path);
}

// Model configuration stored in a checkpoint, without loading tensors.
inline ModelConfig peek_checkpoint_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("checkpoint: cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, ckpt_detail::kMagic, 8) != 0)
        throw CheckpointError("checkpoint: bad magic in " + path);
    const std::uint64_t mlen = ckpt_detail::read_u64_le(in);
    std::string mstr(mlen, '\0');
    in.read(mstr.data(), static_cast<std::streamsize>(mlen));
    if (!in) throw CheckpointError("checkpoint: truncated manifest in " + path);
    return ckpt_detail::config_from_json(nlohmann::json::parse(mstr).at("model"));
}

template <typename T>
void load_checkpoint(TransCoderModel<T>& model, const std::string& path) {
    using nlohmann::json;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("checkpoint: cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, ckpt_detail::kMagic, 8) != 0)
        throw CheckpointError("checkpoint: bad magic in " + path);
    const std::uint64_t mlen = ckpt_detail::read_u64_le(in);
    std::string mstr(mlen, '\0');
    in.read(mstr.data(), static_cast<std::streamsize>(mlen));
    if (!in) throw CheckpointError("checkpoint: truncated manifest in " + path);
    json manifest = json::parse(mstr);

    const ModelConfig stored = ckpt_detail::config_from_json(manifest.at("model"));
    const auto here = ckpt_detail::config_json(model.cfg);
    if (ckpt_detail::config_json(stored) != here)
        throw CheckpointError("checkpoint: model configuration mismatch (" +
                              ckpt_detail::config_json(stored).dump() + " vs " + here.dump() + ")");

    const std::streampos data_start = in.tellg();
    for (const auto& t : manifest.at("tensors")) {
        const std::string name = t.at("name").get<std::string>();
        const bool buffer = t.at("buffer").get<bool>();
        Param<T>* p = buffer ? model.buffers.find(name) : model.params.find(name);
        if (!p) throw CheckpointError("checkpoint: unknown tensor " + name);
        const auto shape = t.at("shape").get<std::vector<std::size_t>>();
        if (shape != p->shape)
            throw CheckpointError("checkpoint: shape mismatch for " + name + " (" +
                                  ad::shape_str(shape) + " vs " + ad::shape_str(p->shape) + ")");
        if (t.at("dtype").get<std::string>() != "f32")
            throw CheckpointError("checkpoint: unsupported dtype for " + name);
        in.seekg(data_start + static_cast<std::streamoff>(t.at("byte_offset").get<std::uint64_t>()));
        for (auto& v : p->data) v = static_cast<T>(ckpt_detail::read_f32_le(in));
        if (!in) throw CheckpointError("checkpoint: truncated data for " + name);
    }
}

}  // namespace transcoder
