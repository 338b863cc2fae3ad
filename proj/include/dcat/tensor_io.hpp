#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "dcat/tensor.hpp"

// DTEN1: "DTEN", u8 version (1), u8 rank, rank x u32 dims, then product(dims)
// float32 values. Everything little-endian.
//
// Containers are a flat sequence of records, each a u8 key length, the ASCII
// key, and one DTEN1 tensor. Keys are unique within a file.

namespace dcat {

struct TensorRecord {
  std::string key;
  Tensor tensor;
};

void write_dten(std::ostream& out, const Tensor& tensor);
Tensor read_dten(std::istream& in);

std::string encode_dten(const Tensor& tensor);
Tensor decode_dten(std::string_view bytes);

void save_tensor(const std::filesystem::path& path, const Tensor& tensor);
Tensor load_tensor(const std::filesystem::path& path);

std::string encode_container(const std::vector<TensorRecord>& records);
std::vector<TensorRecord> decode_container(std::string_view bytes);

void save_container(const std::filesystem::path& path, const std::vector<TensorRecord>& records);
std::vector<TensorRecord> load_container(const std::filesystem::path& path);

/// Text blobs ride inside containers as rank-1 tensors of byte values.
Tensor text_to_tensor(std::string_view text);
std::string tensor_to_text(const Tensor& tensor);

/// Writes via a sibling temp file and rename so readers never see partial output.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace dcat
