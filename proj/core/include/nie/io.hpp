#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace nie {

/// Writes to a sibling temp file, then renames over `path`. A failed write
/// leaves no partial file behind.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

/// Incremental 64-bit FNV-1a, used for content fingerprints.
class Fnv1a {
 public:
  void update(std::span<const std::byte> bytes) noexcept;
  template <typename T>
  void update_value(const T& value) noexcept {
    update(std::as_bytes(std::span<const T, 1>(&value, 1)));
  }
  std::uint64_t digest() const noexcept { return hash_; }
  std::string hex() const;

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

}  // namespace nie
