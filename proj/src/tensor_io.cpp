#include "tsparse/tensor_io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace tsparse {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::length_mismatch: return "length_mismatch";
    case ErrorCode::repeated_mode: return "repeated_mode";
    case ErrorCode::non_cubic: return "non_cubic";
    case ErrorCode::out_of_regime: return "out_of_regime";
    case ErrorCode::budget_exceeded: return "budget_exceeded";
    case ErrorCode::io_failure: return "io_failure";
    case ErrorCode::bad_magic: return "bad_magic";
    case ErrorCode::unsupported_version: return "unsupported_version";
    case ErrorCode::bad_header: return "bad_header";
    case ErrorCode::truncated: return "truncated";
    case ErrorCode::payload_mismatch: return "payload_mismatch";
    case ErrorCode::unsorted_index: return "unsorted_index";
    case ErrorCode::duplicate_index: return "duplicate_index";
    case ErrorCode::index_out_of_range: return "index_out_of_range";
    case ErrorCode::non_numeric: return "non_numeric";
    case ErrorCode::zero_value: return "zero_value";
  }
  return "unknown";
}

namespace {

constexpr char kMagic[4] = {'D', 'T', 'N', 'S'};

template <typename U>
void put_le(std::vector<unsigned char>& out, U v) {
  for (std::size_t b = 0; b < sizeof(U); ++b)
    out.push_back(static_cast<unsigned char>((v >> (8 * b)) & 0xffU));
}

template <typename U>
U get_le(const unsigned char* p) {
  U v = 0;
  for (std::size_t b = 0; b < sizeof(U); ++b) v |= static_cast<U>(p[b]) << (8 * b);
  return v;
}

class Reader {
 public:
  explicit Reader(std::span<const unsigned char> bytes) : bytes_(bytes) {}

  const unsigned char* take(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n)
      fail(ErrorCode::truncated, std::string("dense file truncated while reading ") + what);
    const unsigned char* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const unsigned char> bytes_;
  std::size_t pos_ = 0;
};

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::size_t parse_count(std::string_view field, const std::string& where) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size())
    fail(ErrorCode::non_numeric, where + ": expected non-negative integer, got '" +
                                     std::string(field) + "'");
  return v;
}

double parse_value(std::string_view field, const std::string& where) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(v))
    fail(ErrorCode::non_numeric, where + ": expected finite real, got '" +
                                     std::string(field) + "'");
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::vector<unsigned char> encode_dense(const Tensor& t) {
  std::vector<unsigned char> out;
  out.reserve(12 + 4 * t.order() + 8 * t.size());
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_le<std::uint32_t>(out, kDenseFormatVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.order()));
  for (std::size_t n : t.dims()) put_le<std::uint32_t>(out, static_cast<std::uint32_t>(n));
  for (double v : t.values()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

Tensor decode_dense(std::span<const unsigned char> bytes) {
  Reader in(bytes);
  const unsigned char* magic = in.take(4, "magic");
  if (std::memcmp(magic, kMagic, 4) != 0)
    fail(ErrorCode::bad_magic, "dense file does not start with \"DTNS\"");
  const auto version = get_le<std::uint32_t>(in.take(4, "version"));
  if (version != kDenseFormatVersion)
    fail(ErrorCode::unsupported_version,
         "dense file version " + std::to_string(version) + " is not supported");
  const auto order = get_le<std::uint32_t>(in.take(4, "order"));
  if (order == 0) fail(ErrorCode::bad_header, "dense file declares order 0");
  Dims dims(order);
  for (auto& n : dims) {
    n = get_le<std::uint32_t>(in.take(4, "dims"));
    if (n == 0) fail(ErrorCode::bad_header, "dense file declares a zero dim");
  }
  const std::size_t count = element_count(dims);
  if (in.remaining() < count * 8)
    fail(ErrorCode::truncated, "dense payload holds " + std::to_string(in.remaining()) +
                                   " bytes, dims " + dims_string(dims) + " need " +
                                   std::to_string(count * 8));
  if (in.remaining() > count * 8)
    fail(ErrorCode::payload_mismatch, "dense payload holds " + std::to_string(in.remaining()) +
                                          " bytes, dims " + dims_string(dims) + " need " +
                                          std::to_string(count * 8));
  VectorXd values(static_cast<Eigen::Index>(count));
  const unsigned char* p = in.take(count * 8, "payload");
  for (std::size_t i = 0; i < count; ++i)
    values[static_cast<Eigen::Index>(i)] = std::bit_cast<double>(get_le<std::uint64_t>(p + 8 * i));
  return Tensor(std::move(dims), std::move(values));
}

std::string encode_sparse(const Sparse& s) {
  std::string out = std::to_string(s.order());
  for (std::size_t n : s.dims()) out += ' ' + std::to_string(n);
  out += ' ' + std::to_string(s.nnz()) + '\n';
  for (std::size_t k = 0; k < s.nnz(); ++k) {
    for (std::size_t i : s.index(k)) {
      out += std::to_string(i);
      out += ' ';
    }
    out += format_double(s.value(k));
    out += '\n';
  }
  return out;
}

Sparse decode_sparse(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  if (lines.empty()) fail(ErrorCode::truncated, "sparse file is empty");

  const auto header = split_fields(lines[0]);
  if (header.size() < 3) fail(ErrorCode::bad_header, "sparse header needs 'd dims... nnz'");
  const std::size_t order = parse_count(header[0], "header order");
  if (order == 0 || header.size() != order + 2)
    fail(ErrorCode::bad_header, "sparse header field count does not match order");
  Dims dims(order);
  for (std::size_t k = 0; k < order; ++k) dims[k] = parse_count(header[k + 1], "header dim");
  const std::size_t nnz = parse_count(header[order + 1], "header nnz");
  if (lines.size() - 1 < nnz)
    fail(ErrorCode::truncated, "sparse file declares " + std::to_string(nnz) +
                                   " entries but has " + std::to_string(lines.size() - 1));
  for (std::size_t l = nnz + 1; l < lines.size(); ++l)
    if (!lines[l].empty())
      fail(ErrorCode::payload_mismatch, "sparse file has more entry lines than declared");

  std::vector<std::size_t> indices;
  std::vector<double> values;
  indices.reserve(nnz * order);
  values.reserve(nnz);
  for (std::size_t e = 0; e < nnz; ++e) {
    const std::string where = "line " + std::to_string(e + 2);
    const auto fields = split_fields(lines[e + 1]);
    if (fields.size() != order + 1)
      fail(ErrorCode::bad_header, where + ": expected " + std::to_string(order + 1) + " fields");
    for (std::size_t k = 0; k < order; ++k) indices.push_back(parse_count(fields[k], where));
    values.push_back(parse_value(fields[order], where));
  }
  return Sparse(std::move(dims), std::move(indices), std::move(values));
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io_failure, "cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::io_failure, "write to '" + path.string() + "' failed");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io_failure, "cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

void store_dense(const Tensor& t, const std::filesystem::path& path) {
  const auto bytes = encode_dense(t);
  write_file(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

Tensor load_dense(const std::filesystem::path& path) {
  const std::string raw = read_file(path);
  return decode_dense(std::span(reinterpret_cast<const unsigned char*>(raw.data()), raw.size()));
}

void store_sparse(const Sparse& s, const std::filesystem::path& path) {
  write_file(path, encode_sparse(s));
}

Sparse load_sparse(const std::filesystem::path& path) { return decode_sparse(read_file(path)); }

}  // namespace tsparse
