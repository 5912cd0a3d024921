#pragma once

// File formats.
//
// Dense binary ("DTNS"): magic, u32 version = 1, u32 order, order x u32 dims,
// then product(dims) x f64 row-major. All integers and floats little-endian.
//
// Sparse text (UTF-8, LF): "d dim_1 ... dim_d nnz" on the first line, then
// one "i_1 ... i_d value" line per entry, indices 0-based, lexicographically
// sorted, values in shortest round-trip decimal form.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "tsparse/tensor.hpp"

namespace tsparse {

inline constexpr std::uint32_t kDenseFormatVersion = 1;

std::vector<unsigned char> encode_dense(const Tensor& t);
Tensor decode_dense(std::span<const unsigned char> bytes);

std::string encode_sparse(const Sparse& s);
Sparse decode_sparse(std::string_view text);

void store_dense(const Tensor& t, const std::filesystem::path& path);
Tensor load_dense(const std::filesystem::path& path);

void store_sparse(const Sparse& s, const std::filesystem::path& path);
Sparse load_sparse(const std::filesystem::path& path);

// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

void write_file(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace tsparse
