#include "hcr/manifest.hpp"

#include <fstream>
#include <stdexcept>

#include <openssl/evp.h>

#include "hcr/version.hpp"

namespace hcr {

std::string sha256_file_hex(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file for digest: " + path);

    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
        EVP_MD_CTX_free(ctx);
        throw std::runtime_error("sha256 init failed");
    }
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof(buf));
        std::streamsize got = in.gcount();
        if (got > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(got));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);

    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

ManifestBuilder::ManifestBuilder(std::string command)
    : command_(std::move(command)), config_(nlohmann::json::object()) {}

void ManifestBuilder::set_config(nlohmann::json config) {
    config_ = std::move(config);
}

void ManifestBuilder::add_input(const std::string& path) {
    if (path.empty()) return;
    inputs_.emplace_back(path, sha256_file_hex(path));
}

void ManifestBuilder::add_output(const std::string& name) {
    outputs_.push_back(name);
}

nlohmann::json ManifestBuilder::build() const {
    nlohmann::json inputs = nlohmann::json::object();
    for (const auto& [path, digest] : inputs_) inputs[path] = "sha256:" + digest;
    // nlohmann::json objects are key-ordered, so dumps are deterministic.
    return nlohmann::json{{"artifact", "hcrank"},
                          {"version", kVersion},
                          {"command", command_},
                          {"config", config_},
                          {"inputs", inputs},
                          {"outputs", outputs_}};
}

void ManifestBuilder::write(const std::string& out_dir) const {
    std::string path = out_dir + "/manifest.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << build().dump(2) << '\n';
}

}  // namespace hcr
