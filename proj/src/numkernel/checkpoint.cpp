// Copyright 2026 The latres Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "numkernel/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace latres::nk {

namespace {

constexpr char kMagic[5] = {'L', 'R', 'E', 'S', '1'};

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian hosts are not supported");

template <typename U>
void put_le(std::vector<std::uint8_t>& out, U value) {
  for (std::size_t i = 0; i < sizeof(U); ++i)
    out.push_back(static_cast<std::uint8_t>((value >> (8 * i)) & 0xFF));
}

template <typename U>
U get_le(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  if (pos + sizeof(U) > bytes.size())
    throw DataError("checkpoint: truncated at byte " + std::to_string(pos));
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i)
    v |= static_cast<U>(bytes[pos + i]) << (8 * i);
  pos += sizeof(U);
  return v;
}

// Element bytes in little-endian order.
template <typename F>
std::vector<std::uint8_t> to_le_bytes(std::span<const F> values) {
  using Bits = std::conditional_t<sizeof(F) == 4, std::uint32_t, std::uint64_t>;
  std::vector<std::uint8_t> out;
  out.reserve(values.size() * sizeof(F));
  for (F v : values) put_le(out, std::bit_cast<Bits>(v));
  return out;
}

template <typename F>
std::vector<F> from_le_bytes(std::span<const std::uint8_t> bytes) {
  using Bits = std::conditional_t<sizeof(F) == 4, std::uint32_t, std::uint64_t>;
  std::vector<F> out(bytes.size() / sizeof(F));
  std::size_t pos = 0;
  for (F& v : out) v = std::bit_cast<F>(get_le<Bits>(bytes, pos));
  return out;
}

template <typename F>
Record tensor_record(std::string name, const Tensor<F>& t) {
  const Shape& s = t.shape();
  return Record{std::move(name), sizeof(F) == 4 ? DType::f32 : DType::f64,
                {s.n, s.c, s.h, s.w}, to_le_bytes<F>(t.data())};
}

template <typename F>
Record vector_record(std::string name, std::span<const F> values) {
  return Record{std::move(name), sizeof(F) == 4 ? DType::f32 : DType::f64,
                {values.size()}, to_le_bytes<F>(values)};
}

}  // namespace

std::size_t dtype_size(DType dtype) {
  switch (dtype) {
    case DType::f32: return 4;
    case DType::f64: return 8;
    case DType::u8: return 1;
  }
  throw DataError("checkpoint: unknown dtype tag " +
                  std::to_string(static_cast<int>(dtype)));
}

std::size_t Record::element_count() const {
  std::size_t n = 1;
  for (auto d : shape) n *= static_cast<std::size_t>(d);
  return n;
}

Record make_record(std::string name, const Tensor<float>& t) {
  return tensor_record(std::move(name), t);
}
Record make_record(std::string name, const Tensor<double>& t) {
  return tensor_record(std::move(name), t);
}
Record make_record(std::string name, std::span<const float> values) {
  return vector_record(std::move(name), values);
}
Record make_record(std::string name, std::span<const double> values) {
  return vector_record(std::move(name), values);
}

Record make_text_record(std::string name, const std::string& text) {
  return Record{std::move(name), DType::u8, {text.size()},
                std::vector<std::uint8_t>(text.begin(), text.end())};
}

template <typename T>
std::vector<T> record_values(const Record& r) {
  std::vector<T> out;
  if (r.dtype == DType::f32) {
    for (float v : from_le_bytes<float>(r.payload)) out.push_back(static_cast<T>(v));
  } else if (r.dtype == DType::f64) {
    for (double v : from_le_bytes<double>(r.payload)) out.push_back(static_cast<T>(v));
  } else {
    throw DataError("checkpoint: record '" + r.name + "' is not floating point");
  }
  return out;
}

template std::vector<float> record_values(const Record&);
template std::vector<double> record_values(const Record&);

std::string record_text(const Record& r) {
  if (r.dtype != DType::u8)
    throw DataError("checkpoint: record '" + r.name + "' is not a byte string");
  return std::string(r.payload.begin(), r.payload.end());
}

std::vector<std::uint8_t> encode_checkpoint(std::span<const Record> records) {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(records.size()));
  for (const Record& r : records) {
    if (r.payload.size() != r.element_count() * dtype_size(r.dtype))
      throw DimensionError("checkpoint: record '" + r.name + "' payload of " +
                           std::to_string(r.payload.size()) +
                           " bytes does not match its shape");
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(r.name.size()));
    out.insert(out.end(), r.name.begin(), r.name.end());
    out.push_back(static_cast<std::uint8_t>(r.dtype));
    out.push_back(static_cast<std::uint8_t>(r.shape.size()));
    for (auto d : r.shape) put_le<std::uint64_t>(out, d);
    out.insert(out.end(), r.payload.begin(), r.payload.end());
  }
  return out;
}

std::vector<Record> decode_checkpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < sizeof(kMagic) ||
      std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
    throw DataError("checkpoint: missing LRES1 magic");
  std::size_t pos = sizeof(kMagic);
  const auto count = get_le<std::uint32_t>(bytes, pos);
  std::vector<Record> records;
  records.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    Record r;
    const auto name_len = get_le<std::uint32_t>(bytes, pos);
    if (pos + name_len > bytes.size()) throw DataError("checkpoint: truncated name");
    r.name.assign(bytes.begin() + pos, bytes.begin() + pos + name_len);
    pos += name_len;
    r.dtype = static_cast<DType>(get_le<std::uint8_t>(bytes, pos));
    const auto rank = get_le<std::uint8_t>(bytes, pos);
    for (std::uint8_t d = 0; d < rank; ++d) r.shape.push_back(get_le<std::uint64_t>(bytes, pos));
    const std::size_t len = r.element_count() * dtype_size(r.dtype);
    if (pos + len > bytes.size())
      throw DataError("checkpoint: truncated payload for '" + r.name + "'");
    r.payload.assign(bytes.begin() + pos, bytes.begin() + pos + len);
    pos += len;
    records.push_back(std::move(r));
  }
  if (pos != bytes.size()) throw DataError("checkpoint: trailing bytes after last record");
  return records;
}

void write_checkpoint(const std::filesystem::path& path,
                      std::span<const Record> records) {
  const auto bytes = encode_checkpoint(records);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing " + path.string());
}

std::vector<Record> read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace latres::nk
