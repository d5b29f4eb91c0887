#include "caslearn/params.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>

#include "caslearn/error.hpp"

namespace caslearn {

namespace {

constexpr char kMagic[4] = {'C', 'S', 'L', 'N'};
constexpr uint32_t kVersion = 1;

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double d) {
  uint64_t bits;
  std::memcpy(&bits, &d, 8);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

uint32_t get_u32(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

double get_f64(const unsigned char* p) {
  uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = (bits << 8) | p[i];
  double d;
  std::memcpy(&d, &bits, 8);
  return d;
}

}  // namespace

void save_params(const std::string& path, const ParamSet& params) {
  std::string out;
  out.append(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<uint32_t>(params.size()));
  for (const ParamTensor& p : params) {
    put_u32(out, static_cast<uint32_t>(p.name.size()));
    out += p.name;
    put_u32(out, static_cast<uint32_t>(p.rows));
    put_u32(out, static_cast<uint32_t>(p.cols));
    for (double d : p.value) put_f64(out, d);
  }
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) raise(Errc::io_error, "save_params: cannot open '" + path + "' for writing");
  bool ok = std::fwrite(out.data(), 1, out.size(), f) == out.size();
  ok = std::fclose(f) == 0 && ok;
  if (!ok) raise(Errc::io_error, "save_params: write failed for '" + path + "'");
}

ParamSet load_params(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) raise(Errc::io_error, "load_params: cannot open '" + path + "'");
  std::string data;
  char buf[1 << 16];
  size_t got;
  while ((got = std::fread(buf, 1, sizeof(buf), f)) > 0) data.append(buf, got);
  std::fclose(f);

  const auto* p = reinterpret_cast<const unsigned char*>(data.data());
  const auto* end = p + data.size();
  auto need = [&](std::size_t n) {
    if (static_cast<std::size_t>(end - p) < n)
      raise(Errc::io_error, "load_params: truncated checkpoint '" + path + "'");
  };
  need(12);
  if (std::memcmp(p, kMagic, 4) != 0) raise(Errc::io_error, "load_params: bad magic in '" + path + "'");
  p += 4;
  uint32_t version = get_u32(p);
  p += 4;
  if (version != kVersion)
    raise(Errc::io_error, "load_params: unsupported checkpoint version " + std::to_string(version));
  uint32_t count = get_u32(p);
  p += 4;

  ParamSet params;
  params.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    need(4);
    uint32_t name_len = get_u32(p);
    p += 4;
    need(name_len + 8);
    ParamTensor t;
    t.name.assign(reinterpret_cast<const char*>(p), name_len);
    p += name_len;
    t.rows = static_cast<int>(get_u32(p));
    p += 4;
    t.cols = static_cast<int>(get_u32(p));
    p += 4;
    std::size_t n = static_cast<std::size_t>(t.rows) * static_cast<std::size_t>(t.cols);
    need(8 * n);
    t.value.resize(n);
    for (std::size_t j = 0; j < n; ++j, p += 8) t.value[j] = get_f64(p);
    params.push_back(std::move(t));
  }
  return params;
}

}  // namespace caslearn
