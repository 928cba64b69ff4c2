#pragma once

// Run manifests: resolved config, input digests, seed and artifact paths,
// written before any long computation so a run can be reproduced exactly.

#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "nash/common.hpp"
#include "nash/config.hpp"

namespace nash {

inline constexpr const char* kToolVersion = "nash 0.1.0";

struct RunManifest {
    std::string command;
    std::uint64_t seed = 0;
    TrainConfig config;
    std::vector<std::pair<std::string, std::string>> inputs;     // (path, digest)
    std::vector<std::pair<std::string, std::string>> artifacts;  // (name, path)

    void add_input(const std::string& path) {
        inputs.emplace_back(path, "fnv1a:" + hex64(fnv1a_file(path)));
    }

    void add_artifact(const std::string& name, const std::string& path) {
        artifacts.emplace_back(name, path);
    }

    std::string serialize() const {
        std::string out;
        out += std::string("tool=") + kToolVersion + "\n";
        out += "command=" + command + "\n";
        out += "seed=" + std::to_string(seed) + "\n";
        for (const auto& line : split(config.serialize(), '\n'))
            if (!line.empty()) out += "config." + line + "\n";
        for (const auto& [path, digest] : inputs) out += "input." + path + "=" + digest + "\n";
        for (const auto& [name, path] : artifacts) out += "artifact." + name + "=" + path + "\n";
        return out;
    }

    void write(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw IoError("cannot write manifest: " + path);
        out << serialize();
    }
};

}  // namespace nash
