#ifndef DEEPHATE_HASHING_H_
#define DEEPHATE_HASHING_H_

#include <filesystem>
#include <span>
#include <string>

#include "deephate/tensor.h"

namespace deephate {

std::string sha256_hex(std::span<const unsigned char> bytes);
std::string sha256_file(const std::filesystem::path& path);

template <typename T>
std::string sha256_tensor(const Tensor<T>& t) {
  auto d = t.data();
  return sha256_hex({reinterpret_cast<const unsigned char*>(d.data()), d.size_bytes()});
}

}  // namespace deephate

#endif  // DEEPHATE_HASHING_H_
