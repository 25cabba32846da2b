#include "qobs/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "qobs/errors.hpp"

namespace qobs {

namespace {

constexpr char kMagic[4] = {'Q', 'O', 'B', 'S'};
constexpr std::size_t kHeaderSize = 20;

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<unsigned char>(v >> (8 * b)));
}

void put_u64(std::vector<unsigned char>& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<unsigned char>(v >> (8 * b)));
}

void put_f64(std::vector<unsigned char>& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<unsigned char>(bits >> (8 * b)));
}

std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(p[b]) << (8 * b);
  return v;
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(p[b]) << (8 * b);
  return v;
}

double get_f64(const unsigned char* p) {
  const std::uint64_t bits = get_u64(p);
  double v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

void check_header(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < kHeaderSize || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw ValidationError("checkpoint: missing QOBS header");
  const std::uint32_t version = get_u32(bytes.data() + 4);
  if (version != kCheckpointVersion)
    throw ValidationError("checkpoint: unsupported version " + std::to_string(version));
}

}  // namespace

std::vector<unsigned char> encode_checkpoint(const QField& field, std::uint64_t config_hash) {
  const int n = field.n();
  std::vector<unsigned char> out;
  out.reserve(kHeaderSize + field.grid().interior_count() * 5 * 8);
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(n));
  put_u64(out, config_hash);
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j)
      for (int k = 1; k <= n; ++k)
        for (int c = 0; c < 5; ++c) put_f64(out, field(i, j, k)[c]);
  return out;
}

int checkpoint_grid_size(const std::vector<unsigned char>& bytes) {
  check_header(bytes);
  return static_cast<int>(get_u32(bytes.data() + 8));
}

std::uint64_t checkpoint_config_hash(const std::vector<unsigned char>& bytes) {
  check_header(bytes);
  return get_u64(bytes.data() + 12);
}

QField decode_checkpoint(const std::vector<unsigned char>& bytes, const QField& boundary_source) {
  const int n = checkpoint_grid_size(bytes);
  if (n != boundary_source.n())
    throw ValidationError("checkpoint: grid size " + std::to_string(n) + " does not match " +
                          std::to_string(boundary_source.n()));
  const std::size_t expected = kHeaderSize + boundary_source.grid().interior_count() * 5 * 8;
  if (bytes.size() != expected) throw ValidationError("checkpoint: truncated or oversized payload");
  QField f = boundary_source;
  const unsigned char* p = bytes.data() + kHeaderSize;
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j)
      for (int k = 1; k <= n; ++k)
        for (int c = 0; c < 5; ++c, p += 8) f(i, j, k)[c] = get_f64(p);
  return f;
}

void write_checkpoint(const std::string& path, const QField& field, std::uint64_t config_hash) {
  const auto bytes = encode_checkpoint(field, config_hash);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot open " + path + " for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw Error("failed writing " + path);
}

std::vector<unsigned char> read_bytes(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path);
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
}

QField read_checkpoint(const std::string& path, const QField& boundary_source) {
  return decode_checkpoint(read_bytes(path), boundary_source);
}

std::string trace_csv(const std::vector<TraceRow>& trace, const std::vector<std::string>& comments) {
  std::ostringstream os;
  os.precision(17);
  for (const auto& c : comments) os << "# " << c << '\n';
  os << "iter,total,elastic,bulk,grad_norm\n";
  for (const auto& r : trace)
    os << r.iter << ',' << r.total << ',' << r.elastic << ',' << r.bulk << ',' << r.grad_norm << '\n';
  return os.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot open " + path + " for writing");
  os << text;
  if (!os) throw Error("failed writing " + path);
}

std::string read_text(const std::string& path) {
  const auto bytes = read_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

void write_json(const std::string& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

}  // namespace qobs
