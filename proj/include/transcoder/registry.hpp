#pragma once

// Resolves code names to loaded objects. "ldpc_49_24" style names map to
// <data-dir>/codes/<name>.alist; "polar_N_k" names use a frozen-set file
// next to it when present and the Bhattacharyya construction otherwise.
// A bare path to an .alist file also works.

#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>

#include "transcoder/alist.hpp"
#include "transcoder/linear_code.hpp"
#include "transcoder/polar.hpp"

namespace transcoder {

struct CodeHandle {
    std::string name;
    std::shared_ptr<LinearCode> linear;    // set for parity-check codes (and derived for polar)
    std::shared_ptr<PolarCodeSpec> polar;  // set for polar codes

    bool is_polar() const { return polar != nullptr; }
    std::size_t n() const { return linear ? linear->n() : polar->n(); }
    std::size_t k() const { return linear ? linear->k() : polar->k(); }
};

inline constexpr double kDefaultPolarDesignEbn0Db = 2.0;

inline CodeHandle load_code(const std::string& name_or_path, const std::string& data_dir,
                            double polar_design_ebn0_db = kDefaultPolarDesignEbn0Db) {
    namespace fs = std::filesystem;
    CodeHandle handle;

    auto load_linear = [&](const std::string& path, const std::string& name) {
        handle.name = name;
        handle.linear = std::make_shared<LinearCode>(
            name, ParityCheckMatrix::from_matrix(load_alist(path)));
    };

    if (name_or_path.size() > 6 && name_or_path.substr(name_or_path.size() - 6) == ".alist") {
        load_linear(name_or_path, fs::path(name_or_path).stem().string());
        return handle;
    }

    const fs::path codes = fs::path(data_dir) / "codes";
    const fs::path alist = codes / (name_or_path + ".alist");
    if (fs::exists(alist)) {
        load_linear(alist.string(), name_or_path);
        return handle;
    }

    if (name_or_path.rfind("polar_", 0) == 0) {
        const std::string dims = name_or_path.substr(6);
        const auto sep = dims.find('_');
        if (sep == std::string::npos)
            throw std::runtime_error("code: expected polar_<N>_<k>, got " + name_or_path);
        const std::size_t n = std::stoul(dims.substr(0, sep));
        const std::size_t k = std::stoul(dims.substr(sep + 1));
        const fs::path frozen = codes / (name_or_path + ".frozen");
        handle.name = name_or_path;
        handle.polar = std::make_shared<PolarCodeSpec>(
            fs::exists(frozen) ? polar_load_frozen(n, frozen.string())
                               : polar_construct(n, k, polar_design_ebn0_db));
        if (handle.polar->k() != k)
            throw std::runtime_error("code: frozen set of " + name_or_path + " yields k=" +
                                     std::to_string(handle.polar->k()));
        return handle;
    }

    throw std::runtime_error("code: cannot resolve '" + name_or_path + "' (no " + alist.string() +
                             ")");
}

// Parity-check view of a polar code (nullspace of its generator), for
// codeinfo / histogram tooling.
inline std::shared_ptr<LinearCode> polar_linear_view(const CodeHandle& handle) {
    if (!handle.is_polar()) throw std::runtime_error("polar_linear_view: not a polar code");
    return std::make_shared<LinearCode>(handle.name,
                                        ParityCheckMatrix::from_matrix(polar_parity(*handle.polar)));
}

}  // namespace transcoder
