#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace hcr {

/// Hex-encoded SHA-256 of a file's bytes. Throws if the file is unreadable.
std::string sha256_file_hex(const std::string& path);

/// Collects everything needed to reproduce a run: the command, the full
/// configuration, digests of every input file, and the output names.
/// Contains no timestamps, so identical runs write identical manifests.
class ManifestBuilder {
  public:
    explicit ManifestBuilder(std::string command);

    void set_config(nlohmann::json config);
    void add_input(const std::string& path);   // ignored when path is empty
    void add_output(const std::string& name);

    nlohmann::json build() const;
    /// Writes `<out_dir>/manifest.json` (trailing newline, 2-space indent).
    void write(const std::string& out_dir) const;

  private:
    std::string command_;
    nlohmann::json config_;
    std::vector<std::pair<std::string, std::string>> inputs_;  // path, digest
    std::vector<std::string> outputs_;
};

}  // namespace hcr
