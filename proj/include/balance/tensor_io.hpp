#pragma once

// "BLNC v1" binary tensor files and their JSON mirror.
//
// Binary layout (all integers little-endian):
//   bytes 0..3   magic "BLNC"
//   u32          version, must be 1
//   u8           dtype: 0 = float32, 1 = float64
//   u64 x 3      dims S, N, C
//   S*N*C values row-major, little-endian IEEE-754
//
// JSON mirror: {"dims": [S, N, C], "data": [...]}.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "balance/error.hpp"
#include "balance/tensor.hpp"

namespace balance::io {

enum class DType : std::uint8_t { float32 = 0, float64 = 1 };

inline constexpr std::array<char, 4> kMagic = {'B', 'L', 'N', 'C'};
inline constexpr std::uint32_t kVersion = 1;

namespace detail {

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                               std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>>;
  const U bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

template <typename T>
T get_le(const std::vector<std::uint8_t>& in, std::size_t& pos) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                               std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>>;
  if (pos > in.size() || in.size() - pos < sizeof(T)) throw FormatError("BLNC: truncated file");
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<U>(in[pos + i]) << (8 * i);
  pos += sizeof(T);
  return std::bit_cast<T>(bits);
}

inline std::vector<std::uint8_t> read_all(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw FormatError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(file), std::istreambuf_iterator<char>()};
}

}  // namespace detail

inline std::vector<std::uint8_t> encode_blnc(const PredictionTensor& tensor,
                                             DType dtype = DType::float64) {
  std::vector<std::uint8_t> out(kMagic.begin(), kMagic.end());
  detail::put_le<std::uint32_t>(out, kVersion);
  out.push_back(static_cast<std::uint8_t>(dtype));
  detail::put_le<std::uint64_t>(out, tensor.num_hypotheses());
  detail::put_le<std::uint64_t>(out, tensor.num_points());
  detail::put_le<std::uint64_t>(out, tensor.num_classes());
  for (double v : tensor.data()) {
    if (dtype == DType::float32) {
      detail::put_le<float>(out, static_cast<float>(v));
    } else {
      detail::put_le<double>(out, v);
    }
  }
  return out;
}

inline PredictionTensor decode_blnc(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kMagic.size() || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw FormatError("BLNC: bad magic");
  }
  std::size_t pos = kMagic.size();
  const auto version = detail::get_le<std::uint32_t>(bytes, pos);
  if (version != kVersion) throw FormatError("BLNC: unsupported version " + std::to_string(version));
  const auto dtype = detail::get_le<std::uint8_t>(bytes, pos);
  if (dtype > 1) throw FormatError("BLNC: unknown dtype flag " + std::to_string(dtype));
  const auto s = detail::get_le<std::uint64_t>(bytes, pos);
  const auto n = detail::get_le<std::uint64_t>(bytes, pos);
  const auto c = detail::get_le<std::uint64_t>(bytes, pos);
  const std::size_t width = dtype == 0 ? 4 : 8;
  const std::uint64_t max_count = (bytes.size() - pos) / width;
  if (s == 0 || n == 0 || c == 0 || s > max_count || n > max_count / s || c > max_count / (s * n)) {
    throw FormatError("BLNC: dims inconsistent with payload size");
  }
  const std::size_t count = s * n * c;
  if (bytes.size() - pos != count * width) throw FormatError("BLNC: payload size mismatch");
  std::vector<double> values;
  values.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    values.push_back(dtype == 0 ? static_cast<double>(detail::get_le<float>(bytes, pos))
                                : detail::get_le<double>(bytes, pos));
  }
  return {s, n, c, std::move(values)};
}

inline nlohmann::json tensor_to_json(const PredictionTensor& tensor) {
  return {{"dims", {tensor.num_hypotheses(), tensor.num_points(), tensor.num_classes()}},
          {"data", std::vector<double>(tensor.data().begin(), tensor.data().end())}};
}

inline PredictionTensor tensor_from_json(const nlohmann::json& j) {
  try {
    const auto dims = j.at("dims").get<std::vector<std::size_t>>();
    if (dims.size() != 3) throw FormatError("tensor JSON: dims must have three entries");
    return {dims[0], dims[1], dims[2], j.at("data").get<std::vector<double>>()};
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("tensor JSON: ") + e.what());
  }
}

inline void write_blnc(const std::string& path, const PredictionTensor& tensor,
                       DType dtype = DType::float64) {
  const auto bytes = encode_blnc(tensor, dtype);
  std::ofstream file(path, std::ios::binary);
  if (!file) throw FormatError("cannot write '" + path + "'");
  file.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

/// Reads either format; the BLNC magic decides.
inline PredictionTensor read_tensor(const std::string& path) {
  const auto bytes = detail::read_all(path);
  if (bytes.size() >= kMagic.size() && std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    return decode_blnc(bytes);
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("'" + path + "' is neither BLNC nor JSON: " + e.what());
  }
  return tensor_from_json(j);
}

}  // namespace balance::io
