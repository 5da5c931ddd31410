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

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "numkernel/tensor.hpp"

namespace latres::nk {

// Container layout (all integers little-endian):
//   "LRES1" | u32 record_count |
//   per record: u32 name_len | name bytes | u8 dtype | u8 rank |
//               rank × u64 dims | payload (product(dims) × sizeof(dtype))
enum class DType : std::uint8_t { f32 = 0, f64 = 1, u8 = 2 };

std::size_t dtype_size(DType dtype);

struct Record {
  std::string name;
  DType dtype = DType::f32;
  std::vector<std::uint64_t> shape;
  std::vector<std::uint8_t> payload;  // little-endian element bytes

  std::size_t element_count() const;
  bool operator==(const Record&) const = default;
};

Record make_record(std::string name, const Tensor<float>& t);
Record make_record(std::string name, const Tensor<double>& t);
Record make_record(std::string name, std::span<const float> values);
Record make_record(std::string name, std::span<const double> values);
Record make_text_record(std::string name, const std::string& text);

// Converts the payload to T regardless of the stored float dtype.
template <typename T>
std::vector<T> record_values(const Record& r);
std::string record_text(const Record& r);

std::vector<std::uint8_t> encode_checkpoint(std::span<const Record> records);
std::vector<Record> decode_checkpoint(std::span<const std::uint8_t> bytes);

void write_checkpoint(const std::filesystem::path& path,
                      std::span<const Record> records);
std::vector<Record> read_checkpoint(const std::filesystem::path& path);

}  // namespace latres::nk
