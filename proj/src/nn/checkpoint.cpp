// Copyright 2026 The UniMatte Authors.
// Licensed under the Apache License, Version 2.0.

#include "unimatte/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "unimatte/error.hpp"

namespace unimatte {
namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

namespace {

constexpr char kMagic[8] = {'U', 'I', 'M', 'C', 'K', 'P', 'T', '\0'};

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

class Writer {
 public:
  template <typename T>
  void pod(const T& v) {
    buf_.append(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void str(const std::string& s) {
    pod(static_cast<std::uint32_t>(s.size()));
    buf_ += s;
  }
  void raw(const void* p, std::size_t n) { buf_.append(static_cast<const char*>(p), n); }
  std::string& bytes() { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(const std::string& b, std::size_t end) : b_(b), end_(end) {}
  template <typename T>
  T pod() {
    T v;
    raw(&v, sizeof(T));
    return v;
  }
  std::string str() {
    const auto n = pod<std::uint32_t>();
    need(n);
    std::string s = b_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  void raw(void* p, std::size_t n) {
    need(n);
    std::memcpy(p, b_.data() + pos_, n);
    pos_ += n;
  }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > end_) throw FormatError("checkpoint: truncated");
  }
  const std::string& b_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const fs::path& path, const Model& model, const CheckpointMeta& meta,
                     const std::string& prefix) {
  Writer w;
  w.raw(kMagic, sizeof kMagic);
  w.pod(kCheckpointVersion);
  w.pod(meta.step);
  w.str(meta.stage);
  w.str(model.config().to_json());
  w.str(meta.train_json);
  std::uint32_t count = 0;
  for (const auto& p : model.params().all()) count += p.name.starts_with(prefix);
  w.pod(count);
  for (const auto& p : model.params().all()) {
    if (!p.name.starts_with(prefix)) continue;
    w.str(p.name);
    const std::int32_t shape[4] = {p.shape.n, p.shape.c, p.shape.h, p.shape.w};
    w.raw(shape, sizeof shape);
    w.pod(static_cast<std::uint64_t>(p.value.size()));
    w.raw(p.value.data(), p.value.size() * sizeof(double));
  }
  w.pod(fnv1a(w.bytes()));

  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + tmp.string());
    out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
    if (!out) throw FormatError("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

LoadedCheckpoint read_checkpoint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open checkpoint " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < sizeof kMagic + 8 || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
    throw FormatError("checkpoint: bad magic");
  const std::size_t body = bytes.size() - 8;
  std::uint64_t stored;
  std::memcpy(&stored, bytes.data() + body, 8);
  if (stored != fnv1a(bytes.substr(0, body))) throw FormatError("checkpoint: checksum mismatch");

  Reader r(bytes, body);
  char magic[8];
  r.raw(magic, 8);
  const auto version = r.pod<std::uint32_t>();
  if (version != kCheckpointVersion)
    throw FormatError("checkpoint: unsupported version " + std::to_string(version));
  LoadedCheckpoint ck;
  ck.meta.step = r.pod<std::uint64_t>();
  ck.meta.stage = r.str();
  ck.config = ModelConfig::from_json(r.str());
  ck.meta.train_json = r.str();
  const auto count = r.pod<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    nn::Parameter p;
    p.name = r.str();
    std::int32_t shape[4];
    r.raw(shape, sizeof shape);
    p.shape = {shape[0], shape[1], shape[2], shape[3]};
    const auto n = r.pod<std::uint64_t>();
    if (n != p.shape.size()) throw FormatError("checkpoint: parameter size mismatch for " + p.name);
    p.value.resize(n);
    r.raw(p.value.data(), n * sizeof(double));
    ck.params.emplace(p.name, std::move(p));
  }
  if (r.pos() != body) throw FormatError("checkpoint: trailing bytes");
  return ck;
}

std::size_t apply_checkpoint(Model& model, const LoadedCheckpoint& ckpt, bool require_all) {
  std::size_t copied = 0;
  for (auto& p : model.params().all()) {
    const auto it = ckpt.params.find(p.name);
    if (it == ckpt.params.end()) {
      if (require_all) throw InvalidInput("checkpoint: missing parameter " + p.name);
      continue;
    }
    if (!(it->second.shape == p.shape))
      throw ShapeError("checkpoint: shape mismatch for " + p.name + ": " +
                        nn::to_string(it->second.shape) + " vs " + nn::to_string(p.shape));
    p.value = it->second.value;
    ++copied;
  }
  return copied;
}

Model load_model(const fs::path& path) {
  const LoadedCheckpoint ck = read_checkpoint(path);
  Model m(ck.config);
  apply_checkpoint(m, ck, true);
  m.params().zero_grad();
  return m;
}

}  // namespace unimatte
