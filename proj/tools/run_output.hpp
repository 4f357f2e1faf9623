#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "proptree/error.hpp"

namespace proptree::cli {

inline std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (const unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// Collects a run's artifacts under one directory, refuses to overwrite
// without --force, and records a manifest (config, seed, checksums) so every
// run is reproducible from its inputs.
class RunOutputs {
  public:
    RunOutputs(std::string command, std::filesystem::path dir, bool force)
        : command_(std::move(command)), dir_(std::move(dir)), force_(force) {
        std::filesystem::create_directories(dir_);
    }

    void set_config(nlohmann::json config) { config_ = std::move(config); }

    std::filesystem::path write_text(const std::string& name, const std::string& content) {
        const std::filesystem::path path = dir_ / name;
        if (!force_ && std::filesystem::exists(path))
            throw Error("refusing to overwrite '" + path.string() +
                        "' (pass --force to allow)");
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error("cannot write '" + path.string() + "'");
        out << content;
        if (!out) throw Error("failed writing '" + path.string() + "'");
        char hex[24];
        std::snprintf(hex, sizeof(hex), "%016llx",
                      static_cast<unsigned long long>(fnv1a64(content)));
        artifacts_.emplace_back(name, hex);
        return path;
    }

    void finish() {
        nlohmann::json doc;
        doc["command"] = command_;
        doc["config"] = config_;
        doc["outputs"] = nlohmann::json::array();
        for (const auto& [name, checksum] : artifacts_)
            doc["outputs"].push_back({{"path", name}, {"fnv1a64", checksum}});
        const std::filesystem::path path = dir_ / "manifest.json";
        if (!force_ && std::filesystem::exists(path))
            throw Error("refusing to overwrite '" + path.string() +
                        "' (pass --force to allow)");
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error("cannot write '" + path.string() + "'");
        out << doc.dump(2) << '\n';
    }

  private:
    std::string command_;
    std::filesystem::path dir_;
    bool force_;
    nlohmann::json config_;
    std::vector<std::pair<std::string, std::string>> artifacts_;
};

}  // namespace proptree::cli
