#include "neurodream_cli/manifest.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <ctime>
#include <memory>
#include <stdexcept>

#include "neurodream_cli/config_file.hpp"

namespace neurodream::cli {

std::string git_blob_sha1(std::string_view content) {
  std::string header = "blob " + std::to_string(content.size());
  header.push_back('\0');
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha1(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), header.data(), header.size()) != 1 ||
      EVP_DigestUpdate(ctx.get(), content.data(), content.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw std::runtime_error("sha1: digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string render_manifest(const Manifest& m) {
  std::string out = "# neurodream-manifest v1\n";
  out += "config_sha1 = " + git_blob_sha1(m.config_text) + "\n";
  out += "seed = " + std::to_string(m.seed) + "\n";
  out += "started = " + m.started + "\n";
  out += "finished = " + m.finished + "\n";
  out += "runs = " + std::to_string(m.runs.size()) + "\n";
  for (const auto& r : m.runs) {
    const std::string p = "run." + std::to_string(r.run_id) + ".";
    out += p + "dir = " + r.dir + "\n";
    out += p + "started = " + r.started + "\n";
    out += p + "finished = " + r.finished + "\n";
    out += p + "status = " + r.status + "\n";
  }
  for (const auto& [key, value] : parse_config_text(m.config_text)) {
    out += "config." + key + " = " + value + "\n";
  }
  return out;
}

}  // namespace neurodream::cli
