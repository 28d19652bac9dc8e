// Copyright 2026 The UniMatte Authors.
// Licensed under the Apache License, Version 2.0.

#include "unimatte/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"
#include "unimatte/error.hpp"
#include "unimatte/imaging.hpp"
#include "unimatte/png_io.hpp"
#include "unimatte/rng.hpp"

namespace unimatte {
namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string_view to_string(Split s) { return s == Split::train ? "train" : "test"; }

std::array<std::size_t, 4> Manifest::category_counts() const {
  std::array<std::size_t, 4> n{};
  for (const auto& r : records) ++n[static_cast<int>(r.category)];
  return n;
}

std::string record_to_json_line(const SampleRecord& r) {
  ojson j;
  j["sample_id"] = r.sample_id;
  j["fg_ids"] = r.fg_ids;
  j["bg_id"] = r.bg_id;
  j["fg_path"] = r.fg_path;
  j["alpha_path"] = r.alpha_path;
  j["bg_path"] = r.bg_path;
  j["composite_path"] = r.composite_path;
  j["category"] = std::string(to_string(r.category));
  j["object_count"] = r.object_count;
  j["split"] = std::string(to_string(r.split));
  return j.dump();
}

SampleRecord record_from_json_line(std::string_view line) {
  SampleRecord r;
  try {
    const ojson j = ojson::parse(line);
    r.sample_id = j.at("sample_id").get<std::string>();
    r.fg_ids = j.at("fg_ids").get<std::vector<std::string>>();
    r.bg_id = j.at("bg_id").get<std::string>();
    r.fg_path = j.at("fg_path").get<std::string>();
    r.alpha_path = j.at("alpha_path").get<std::string>();
    r.bg_path = j.at("bg_path").get<std::string>();
    r.composite_path = j.at("composite_path").get<std::string>();
    const auto cat = parse_category(j.at("category").get<std::string>());
    if (!cat) throw FormatError("unknown category");
    r.category = *cat;
    r.object_count = j.at("object_count").get<int>();
    const auto split = j.at("split").get<std::string>();
    if (split != "train" && split != "test") throw FormatError("unknown split");
    r.split = split == "train" ? Split::train : Split::test;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("manifest record: ") + e.what());
  }
  if (r.object_count < 1 || r.fg_ids.size() != static_cast<std::size_t>(r.object_count))
    throw FormatError("manifest record " + r.sample_id + ": object_count must equal fg_ids size");
  return r;
}

void write_manifest(const fs::path& path, const Manifest& m) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  for (const auto& r : m.records) out << record_to_json_line(r) << '\n';
}

Manifest read_manifest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open manifest " + path.string());
  Manifest m;
  std::set<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    SampleRecord r = record_from_json_line(line);
    if (!ids.insert(r.sample_id).second) throw InvalidInput("duplicate sample id " + r.sample_id);
    if (m.records.empty())
      m.split = r.split;
    else if (r.split != m.split)
      throw FormatError("manifest mixes train and test records");
    m.records.push_back(std::move(r));
  }
  return m;
}

// ---------------------------------------------------------------------------

namespace {

std::string padded(std::size_t v, int width) {
  std::string s = std::to_string(v);
  if (static_cast<int>(s.size()) < width) s.insert(0, width - s.size(), '0');
  return s;
}

void quantize(std::span<double> v) {
  for (double& x : v) x = png::to_byte(x) / 255.0;
}

Image fit_background(const Image& bg, int h, int w) {
  if (bg.height() == h && bg.width() == w) return bg;
  return resize_bilinear(bg, h, w);
}

// Integer translation with zero fill.
void translate(const Image& fg, const Alpha& a, int dr, int dc, Image& fg_out, Alpha& a_out) {
  const int h = a.height(), w = a.width();
  fg_out = Image(h, w);
  a_out = Alpha(h, w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      const int sr = r - dr, sc = c - dc;
      if (!a.contains(sr, sc)) continue;
      a_out(r, c) = a(sr, sc);
      for (int ch = 0; ch < 3; ++ch) fg_out(ch, r, c) = fg(ch, sr, sc);
    }
}

Pixel centroid(const Alpha& a) {
  double sr = 0, sc = 0, s = 0;
  for (int r = 0; r < a.height(); ++r)
    for (int c = 0; c < a.width(); ++c) {
      sr += a(r, c) * r;
      sc += a(r, c) * c;
      s += a(r, c);
    }
  if (s <= 0) return {a.height() / 2, a.width() / 2};
  return {static_cast<int>(std::lround(sr / s)), static_cast<int>(std::lround(sc / s))};
}

}  // namespace

std::vector<CompositePlanEntry> plan_composites(std::size_t num_fg, std::size_t num_bg,
                                                int per_fg, std::uint64_t seed) {
  if (per_fg < 1) throw InvalidInput("per_fg must be >= 1");
  if (static_cast<std::size_t>(per_fg) > num_bg)
    throw InvalidInput("insufficient backgrounds: per_fg " + std::to_string(per_fg) + " > " +
                       std::to_string(num_bg) + " available");
  std::vector<CompositePlanEntry> plan;
  plan.reserve(num_fg * per_fg);
  std::vector<std::size_t> order(num_bg);
  for (std::size_t i = 0; i < num_fg; ++i) {
    for (std::size_t k = 0; k < num_bg; ++k) order[k] = k;
    Rng rng(derive_seed(seed, i));
    // Partial Fisher-Yates: the first per_fg entries are a sample without replacement.
    for (int k = 0; k < per_fg; ++k) {
      const auto j = static_cast<std::size_t>(rng.uniform_int(k, static_cast<std::int64_t>(num_bg) - 1));
      std::swap(order[k], order[j]);
      plan.push_back({i, order[k], "s" + padded(i, 4) + "_" + padded(k, 3)});
    }
  }
  return plan;
}

Manifest build_composites(std::span<const ForegroundSource> fgs,
                          std::span<const BackgroundSource> bgs, int per_fg, std::uint64_t seed,
                          const fs::path& root, Split split) {
  const auto plan = plan_composites(fgs.size(), bgs.size(), per_fg, seed);
  Manifest m;
  m.split = split;

  std::vector<ForegroundSource> qfg(fgs.begin(), fgs.end());
  for (auto& f : qfg) {
    require_same_shape(f.fg, f.alpha, "foreground");
    quantize(f.fg.values());
    quantize(f.alpha.values());
    png::write_rgb(root / "fg" / (f.id + ".png"), f.fg);
    png::write_alpha(root / "alpha" / (f.id + ".png"), f.alpha);
  }
  std::vector<BackgroundSource> qbg(bgs.begin(), bgs.end());
  for (auto& b : qbg) {
    quantize(b.image.values());
    png::write_rgb(root / "bg" / (b.id + ".png"), b.image);
  }

  for (const auto& e : plan) {
    const auto& f = qfg[e.fg_index];
    const auto& b = qbg[e.bg_index];
    const Image comp = composite(f.fg, fit_background(b.image, f.fg.height(), f.fg.width()), f.alpha);
    SampleRecord r;
    r.sample_id = e.sample_id;
    r.fg_ids = {f.id};
    r.bg_id = b.id;
    r.fg_path = "fg/" + f.id + ".png";
    r.alpha_path = "alpha/" + f.id + ".png";
    r.bg_path = "bg/" + b.id + ".png";
    r.composite_path = "composite/" + e.sample_id + ".png";
    r.object_count = 1;
    r.category = classify_sample(f.alpha, 1);
    r.split = split;
    png::write_rgb(root / r.composite_path, comp);
    m.records.push_back(std::move(r));
  }
  write_manifest(root / "manifest.jsonl", m);
  return m;
}

// ---------------------------------------------------------------------------

UnifiedCounts parse_ratio(std::string_view text) {
  std::vector<int> v;
  std::size_t pos = 0;
  while (true) {
    const std::size_t end = std::min(text.find(':', pos), text.size());
    const auto part = text.substr(pos, end - pos);
    int x = 0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), x);
    if (part.empty() || ec != std::errc{} || ptr != part.data() + part.size() || x < 0)
      throw InvalidInput("ratio must look like a:b:c:d with non-negative integers");
    v.push_back(x);
    if (end == text.size()) break;
    pos = end + 1;
  }
  if (v.size() != 4) throw InvalidInput("ratio must have exactly four components");
  return {v[0], v[1], v[2], v[3]};
}

void check_unified_ratio(const UnifiedCounts& c, const UnifiedCounts& ratio) {
  const std::int64_t a[4] = {c.so, c.st, c.nso, c.nst};
  const std::int64_t b[4] = {ratio.so, ratio.st, ratio.nso, ratio.nst};
  if (c.total() <= 0 || ratio.total() <= 0) throw InvalidInput("unified counts must be positive");
  for (int i = 0; i < 4; ++i)
    if (a[i] < 0 || a[i] * ratio.total() != b[i] * c.total())
      throw InvalidInput("unified counts are not proportional to the required ratio");
}

UnifiedCounts scale_ratio(const UnifiedCounts& ratio, double scale) {
  const double v[4] = {ratio.so * scale, ratio.st * scale, ratio.nso * scale, ratio.nst * scale};
  int out[4];
  for (int i = 0; i < 4; ++i) {
    out[i] = static_cast<int>(std::lround(v[i]));
    if (std::abs(v[i] - out[i]) > 1e-9) throw InvalidInput("scaled ratio is not integral");
  }
  return {out[0], out[1], out[2], out[3]};
}

Manifest build_unified_testset(const UnifiedSources& src, const UnifiedCounts& counts,
                               std::uint64_t seed, const fs::path& root) {
  check_unified_ratio(counts);
  if (src.backgrounds.empty()) throw InvalidInput("unified test set needs backgrounds");
  Manifest m;
  m.split = Split::test;

  struct Job {
    Category cat;
    int index;
  };
  std::vector<Job> jobs;
  const int n[4] = {counts.so, counts.st, counts.nso, counts.nst};
  for (Category c : kAllCategories)
    for (int i = 0; i < n[static_cast<int>(c)]; ++i) jobs.push_back({c, i});

  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const Category cat = jobs[j].cat;
    const bool transparent = is_transparent(cat);
    const auto& targets = transparent ? src.st_fgs : src.so_fgs;
    const auto& distractors = transparent ? src.st_bgs : src.so_bgs;
    if (targets.empty()) throw InvalidInput("no target foregrounds for " + std::string(to_string(cat)));
    if (!is_salient(cat) && distractors.empty())
      throw InvalidInput("no distractor foregrounds for " + std::string(to_string(cat)));

    std::string lower(to_string(cat));
    for (char& ch : lower) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    const std::string sid = "u_" + lower + "_" + padded(jobs[j].index, 4);

    bool done = false;
    for (int attempt = 0; attempt < 32 && !done; ++attempt) {
      Rng rng(derive_seed(seed, j * 64 + attempt));
      const auto& tgt = targets[rng.uniform_int(0, static_cast<std::int64_t>(targets.size()) - 1)];
      const auto& bgs = src.backgrounds[rng.uniform_int(0, static_cast<std::int64_t>(src.backgrounds.size()) - 1)];
      const int h = tgt.alpha.height(), w = tgt.alpha.width();
      Image scene = fit_background(bgs.image, h, w);
      quantize(scene.values());

      Image tfg = tgt.fg;
      Alpha ta = tgt.alpha;
      SampleRecord r;
      r.sample_id = sid;
      r.fg_ids = {tgt.id};
      r.bg_id = bgs.id;

      if (!is_salient(cat)) {
        const int k = 1 + static_cast<int>(rng.uniform_int(0, 1));
        const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double rad = 0.24 * std::min(h, w);
        const Pixel tc = centroid(ta);
        translate(tgt.fg, tgt.alpha, static_cast<int>(std::lround(h / 2.0 + rad * std::sin(phi))) - tc.row,
                  static_cast<int>(std::lround(w / 2.0 + rad * std::cos(phi))) - tc.col, tfg, ta);
        for (int d = 0; d < k; ++d) {
          const auto& dis =
              distractors[rng.uniform_int(0, static_cast<std::int64_t>(distractors.size()) - 1)];
          const double ang = phi + std::numbers::pi * (k == 1 ? 1.0 : (2.0 / 3.0) * (d + 1));
          Image dfg_fit = dis.fg.height() == h && dis.fg.width() == w ? dis.fg : resize_bilinear(dis.fg, h, w);
          Alpha da_fit = dis.alpha.height() == h && dis.alpha.width() == w
                             ? dis.alpha
                             : resize_bilinear(dis.alpha, h, w);
          const Pixel dc = centroid(da_fit);
          Image dfg;
          Alpha da;
          translate(dfg_fit, da_fit, static_cast<int>(std::lround(h / 2.0 + rad * std::sin(ang))) - dc.row,
                    static_cast<int>(std::lround(w / 2.0 + rad * std::cos(ang))) - dc.col, dfg, da);
          scene = composite(dfg, scene, da);
          r.fg_ids.push_back(dis.id);
        }
        quantize(scene.values());
      }
      quantize(tfg.values());
      quantize(ta.values());
      r.object_count = static_cast<int>(r.fg_ids.size());
      if (count_ones(binarize_alpha(ta)) == 0) continue;
      r.category = classify_sample(ta, r.object_count);
      if (r.category != cat) continue;

      r.fg_path = "fg/" + sid + ".png";
      r.alpha_path = "alpha/" + sid + ".png";
      r.bg_path = "bg/" + sid + ".png";
      r.composite_path = "composite/" + sid + ".png";
      r.split = Split::test;
      png::write_rgb(root / r.fg_path, tfg);
      png::write_alpha(root / r.alpha_path, ta);
      png::write_rgb(root / r.bg_path, scene);
      png::write_rgb(root / r.composite_path, composite(tfg, scene, ta));
      m.records.push_back(std::move(r));
      done = true;
    }
    if (!done)
      throw InvalidInput("could not build a " + std::string(to_string(cat)) +
                         " sample whose alpha classifies as " + std::string(to_string(cat)));
  }
  write_manifest(root / "manifest.jsonl", m);
  return m;
}

// ---------------------------------------------------------------------------

LoadedSample load_sample(const fs::path& root, const SampleRecord& r) {
  LoadedSample s;
  s.fg = png::read_rgb(root / r.fg_path);
  s.alpha = png::read_alpha(root / r.alpha_path);
  require_same_shape(s.fg, s.alpha, r.sample_id.c_str());
  s.bg = fit_background(png::read_rgb(root / r.bg_path), s.fg.height(), s.fg.width());
  s.composite = png::read_rgb(root / r.composite_path);
  require_same_shape(s.fg, s.composite, r.sample_id.c_str());
  return s;
}

BatchPlan fc_group_batches(const Manifest& m, int group_size, int batch_groups,
                           std::uint64_t seed) {
  if (group_size < 2) throw InvalidInput("group_size must be >= 2");
  if (batch_groups < 1) throw InvalidInput("batch_groups must be >= 1");
  std::map<std::string, std::vector<std::size_t>> by_fg;
  for (std::size_t i = 0; i < m.records.size(); ++i) {
    if (m.records[i].fg_ids.empty()) throw InvalidInput("record without foreground id");
    by_fg[m.records[i].fg_ids.front()].push_back(i);
  }
  if (by_fg.empty()) throw InvalidInput("empty manifest");
  Rng rng(seed);
  std::vector<std::vector<std::size_t>> groups;
  for (auto& [id, idx] : by_fg) {
    if (idx.size() < static_cast<std::size_t>(group_size))
      throw InvalidInput("foreground " + id + " has fewer than " + std::to_string(group_size) +
                         " composites");
    rng.shuffle(idx.begin(), idx.end());
    for (std::size_t k = 0; k + group_size <= idx.size(); k += group_size)
      groups.emplace_back(idx.begin() + k, idx.begin() + k + group_size);
  }
  rng.shuffle(groups.begin(), groups.end());
  BatchPlan plan;
  for (std::size_t k = 0; k + batch_groups <= groups.size(); k += batch_groups)
    plan.emplace_back(groups.begin() + k, groups.begin() + k + batch_groups);
  if (plan.empty()) throw InvalidInput("not enough foreground groups to fill one batch");
  return plan;
}

}  // namespace unimatte
