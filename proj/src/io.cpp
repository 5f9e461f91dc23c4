#include "hcdir/io.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>

namespace hcdir {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return out;
}

}  // namespace

TsvFile read_tsv(const std::filesystem::path& path, size_t expected_min_cols) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path.string());
  TsvFile f;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_tabs(line);
    if (lineno == 1) {
      f.header = std::move(cells);
      if (f.header.size() < expected_min_cols)
        throw SchemaError(path.string() + ": header has " + std::to_string(f.header.size()) +
                          " columns, expected at least " + std::to_string(expected_min_cols));
      continue;
    }
    if (cells.size() < expected_min_cols)
      throw SchemaError(path.string() + ":" + std::to_string(lineno) + ": expected at least " +
                        std::to_string(expected_min_cols) + " columns, got " +
                        std::to_string(cells.size()));
    f.rows.push_back(std::move(cells));
  }
  if (f.header.empty()) throw SchemaError(path.string() + ": missing header row");
  return f;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SchemaError("cannot write " + path.string());
  out << content;
}

// ---------------------------------------------------------------------------
// SHA-256 (FIPS 180-4), compact single-block-at-a-time implementation.

namespace {

struct Sha256 {
  uint32_t h[8] = {0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
                   0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};
  uint64_t total = 0;
  uint8_t buf[64];
  size_t buffered = 0;

  static uint32_t rotr(uint32_t x, int n) { return (x >> n) | (x << (32 - n)); }

  void block(const uint8_t* p) {
    static const uint32_t K[64] = {
        0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4,
        0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe,
        0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f,
        0x4a7484aa, 0x5cb0a9dc, 0x76f988da, 0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7,
        0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc,
        0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
        0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070, 0x19a4c116,
        0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
        0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7,
        0xc67178f2};
    uint32_t w[64];
    for (int i = 0; i < 16; ++i)
      w[i] = (uint32_t(p[4 * i]) << 24) | (uint32_t(p[4 * i + 1]) << 16) |
             (uint32_t(p[4 * i + 2]) << 8) | uint32_t(p[4 * i + 3]);
    for (int i = 16; i < 64; ++i) {
      uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
      uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
      w[i] = w[i - 16] + s0 + w[i - 7] + s1;
    }
    uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4], f = h[5], g = h[6], hh = h[7];
    for (int i = 0; i < 64; ++i) {
      uint32_t S1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
      uint32_t ch = (e & f) ^ (~e & g);
      uint32_t t1 = hh + S1 + ch + K[i] + w[i];
      uint32_t S0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
      uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
      uint32_t t2 = S0 + maj;
      hh = g; g = f; f = e; e = d + t1; d = c; c = b; b = a; a = t1 + t2;
    }
    h[0] += a; h[1] += b; h[2] += c; h[3] += d;
    h[4] += e; h[5] += f; h[6] += g; h[7] += hh;
  }

  void update(const void* data, size_t len) {
    const uint8_t* p = static_cast<const uint8_t*>(data);
    total += len;
    while (len > 0) {
      size_t take = std::min(len, sizeof(buf) - buffered);
      std::memcpy(buf + buffered, p, take);
      buffered += take;
      p += take;
      len -= take;
      if (buffered == 64) {
        block(buf);
        buffered = 0;
      }
    }
  }

  std::string finish() {
    uint64_t bits = total * 8;
    uint8_t pad = 0x80;
    update(&pad, 1);
    uint8_t zero = 0;
    while (buffered != 56) update(&zero, 1);
    uint8_t lenbuf[8];
    for (int i = 0; i < 8; ++i) lenbuf[i] = uint8_t(bits >> (56 - 8 * i));
    update(lenbuf, 8);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(64);
    for (uint32_t v : h)
      for (int i = 28; i >= 0; i -= 4) out.push_back(hex[(v >> i) & 0xf]);
    return out;
  }
};

}  // namespace

std::string sha256_hex(const void* data, size_t len) {
  Sha256 s;
  s.update(data, len);
  return s.finish();
}

std::string sha256_hex(const std::string& s) { return sha256_hex(s.data(), s.size()); }

std::string hash_directory(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir))
    if (entry.is_regular_file()) files.push_back(entry.path());
  std::sort(files.begin(), files.end(), [&](const auto& a, const auto& b) {
    return a.lexically_relative(dir).string() < b.lexically_relative(dir).string();
  });
  Sha256 s;
  for (const auto& f : files) {
    std::string rel = f.lexically_relative(dir).string();
    s.update(rel.data(), rel.size());
    s.update("\0", 1);
    std::string content = read_text_file(f);
    s.update(content.data(), content.size());
  }
  return s.finish();
}

// ---------------------------------------------------------------------------
// TensorArchive

namespace {

constexpr char kMagic[8] = {'H', 'C', 'D', 'T', 'N', 'S', 'R', '1'};

void put_u64(std::ofstream& out, uint64_t v) {
  uint8_t b[8];
  for (int i = 0; i < 8; ++i) b[i] = uint8_t(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

uint64_t get_u64(std::ifstream& in) {
  uint8_t b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw IntegrityError("truncated tensor archive");
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= uint64_t(b[i]) << (8 * i);
  return v;
}

}  // namespace

void TensorArchive::put(const std::string& name, const Eigen::MatrixXd& t) {
  tensors_[name] = t;
}

const Eigen::MatrixXd& TensorArchive::get(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw IntegrityError("tensor '" + name + "' missing from archive");
  return it->second;
}

std::vector<std::string> TensorArchive::names() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : tensors_) out.push_back(k);
  return out;
}

void TensorArchive::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SchemaError("cannot write " + path.string());
  out.write(kMagic, sizeof(kMagic));
  put_u64(out, manifest_json_.size());
  out.write(manifest_json_.data(), static_cast<std::streamsize>(manifest_json_.size()));
  put_u64(out, tensors_.size());
  for (const auto& [name, t] : tensors_) {
    put_u64(out, name.size());
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u64(out, static_cast<uint64_t>(t.rows()));
    put_u64(out, static_cast<uint64_t>(t.cols()));
    // column-major doubles; x86 is little-endian which is the on-disk order
    for (Eigen::Index c = 0; c < t.cols(); ++c)
      for (Eigen::Index r = 0; r < t.rows(); ++r) {
        double v = t(r, c);
        uint64_t bits;
        std::memcpy(&bits, &v, 8);
        put_u64(out, bits);
      }
  }
}

TensorArchive TensorArchive::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IntegrityError("cannot open " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0)
    throw IntegrityError(path.string() + " is not a tensor archive");
  TensorArchive a;
  uint64_t mlen = get_u64(in);
  a.manifest_json_.resize(mlen);
  in.read(a.manifest_json_.data(), static_cast<std::streamsize>(mlen));
  uint64_t n = get_u64(in);
  for (uint64_t i = 0; i < n; ++i) {
    uint64_t nlen = get_u64(in);
    std::string name(nlen, '\0');
    in.read(name.data(), static_cast<std::streamsize>(nlen));
    uint64_t rows = get_u64(in), cols = get_u64(in);
    Eigen::MatrixXd t(rows, cols);
    for (Eigen::Index c = 0; c < t.cols(); ++c)
      for (Eigen::Index r = 0; r < t.rows(); ++r) {
        uint64_t bits = get_u64(in);
        double v;
        std::memcpy(&v, &bits, 8);
        t(r, c) = v;
      }
    a.tensors_[name] = std::move(t);
  }
  if (!in) throw IntegrityError("truncated tensor archive " + path.string());
  return a;
}

}  // namespace hcdir
