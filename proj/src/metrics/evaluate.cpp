// Copyright 2026 The UniMatte Authors.
// Licensed under the Apache License, Version 2.0.

#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "unimatte/error.hpp"
#include "unimatte/imaging.hpp"
#include "unimatte/metrics.hpp"
#include "unimatte/rng.hpp"

namespace unimatte {

namespace {

void accumulate(MetricValues& acc, const MetricValues& v) {
  acc.mse += v.mse;
  acc.sad += v.sad;
  acc.grad += v.grad;
  acc.conn += v.conn;
}

void finish(CategoryRow& row) {
  if (row.count == 0) return;
  const double n = static_cast<double>(row.count);
  row.mean.mse /= n;
  row.mean.sad /= n;
  row.mean.grad /= n;
  row.mean.conn /= n;
}

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(8) << v;
  return os.str();
}

}  // namespace

MetricsReport evaluate_with(const Predictor& predict, const std::filesystem::path& root,
                            const Manifest& manifest, InteractionKind kind, const RegionSpec& region,
                            std::uint64_t seed, const SimulationOptions& sim) {
  if (manifest.split != Split::test) throw InvalidInput("evaluate: manifest split must be test");
  MetricsReport rep;
  rep.kind = kind;
  rep.region = region;
  rep.seed = seed;
  std::array<CategoryRow, 4> rows{};
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    const SampleRecord& r = manifest.records[i];
    const LoadedSample s = load_sample(root, r);
    const Interaction it = simulate(kind, s.alpha, derive_seed(seed, i), sim);
    const GuidanceMap gm = encode_guidance(it, s.alpha.height(), s.alpha.width(), sim.point_sigma);
    const Alpha pred = predict(s.composite, it, gm);
    require_same_shape(pred, s.alpha, "evaluate prediction");
    bool empty = false;
    const MetricValues v = sample_metrics(pred, s.alpha, metric_region(s.alpha, region), &empty);
    rep.empty_region_samples += empty;
    CategoryRow& row = rows[static_cast<int>(r.category)];
    ++row.count;
    accumulate(row.mean, v);
    ++rep.overall.count;
    accumulate(rep.overall.mean, v);
  }
  for (Category c : kAllCategories) {
    CategoryRow& row = rows[static_cast<int>(c)];
    if (row.count == 0) {
      rep.notes.push_back("category " + std::string(to_string(c)) + " absent from manifest");
      continue;
    }
    finish(row);
    rep.categories[static_cast<int>(c)] = row;
  }
  finish(rep.overall);
  if (rep.empty_region_samples > 0)
    rep.notes.push_back(std::to_string(rep.empty_region_samples) +
                        " samples had an empty metric region and contributed zeros");
  return rep;
}

MetricsReport evaluate(Model& model, const std::filesystem::path& root, const Manifest& manifest,
                       InteractionKind kind, const RegionSpec& region, std::uint64_t seed,
                       const SimulationOptions& sim) {
  if (model.config().guidance_kind != kind)
    throw InvalidInput("evaluate: model was built for " +
                       std::string(to_string(model.config().guidance_kind)) + ", not " +
                       std::string(to_string(kind)));
  return evaluate_with(
      [&](const Image& image, const Interaction&, const GuidanceMap& gm) {
        return model.predict(image, gm).alpha;
      },
      root, manifest, kind, region, seed, sim);
}

std::string report_to_csv(const MetricsReport& r) {
  std::ostringstream os;
  os << "# interaction=" << to_string(r.kind) << " region=" << to_string(r.region.mode)
     << " unknown_band=" << r.region.unknown_band << " seed=" << r.seed << '\n';
  for (const auto& n : r.notes) os << "# note: " << n << '\n';
  os << "category,MSE,SAD,Grad,Conn,count\n";
  const auto row = [&](std::string_view name, const CategoryRow& c) {
    os << name << ',' << num(c.mean.mse) << ',' << num(c.mean.sad) << ',' << num(c.mean.grad)
       << ',' << num(c.mean.conn) << ',' << c.count << '\n';
  };
  for (Category c : kAllCategories)
    if (r.categories[static_cast<int>(c)]) row(to_string(c), *r.categories[static_cast<int>(c)]);
  row("Overall", r.overall);
  return os.str();
}

std::string report_to_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["interaction"] = std::string(to_string(r.kind));
  j["region"] = std::string(to_string(r.region.mode));
  j["unknown_band"] = r.region.unknown_band;
  j["seed"] = r.seed;
  const auto row = [](const CategoryRow& c) {
    nlohmann::ordered_json x;
    x["MSE"] = c.mean.mse;
    x["SAD"] = c.mean.sad;
    x["Grad"] = c.mean.grad;
    x["Conn"] = c.mean.conn;
    x["count"] = c.count;
    return x;
  };
  nlohmann::ordered_json cats = nlohmann::ordered_json::object();
  for (Category c : kAllCategories)
    if (r.categories[static_cast<int>(c)])
      cats[std::string(to_string(c))] = row(*r.categories[static_cast<int>(c)]);
  j["categories"] = cats;
  j["overall"] = row(r.overall);
  j["notes"] = r.notes;
  return j.dump(2);
}

std::string sweep_to_csv(const std::vector<MetricsReport>& reports) {
  std::ostringstream os;
  if (!reports.empty())
    os << "# region=" << to_string(reports.front().region.mode)
       << " unknown_band=" << reports.front().region.unknown_band
       << " seed=" << reports.front().seed << '\n';
  os << "interaction";
  static constexpr const char* kCols[] = {"SO", "ST", "NSO", "NST", "Overall"};
  static constexpr const char* kMetrics[] = {"MSE", "SAD", "Grad", "Conn"};
  for (const char* c : kCols)
    for (const char* m : kMetrics) os << ',' << c << '_' << m;
  os << '\n';
  for (const auto& r : reports) {
    os << to_string(r.kind);
    for (int c = 0; c < 5; ++c) {
      const std::optional<CategoryRow> row =
          c < 4 ? r.categories[c] : std::optional<CategoryRow>(r.overall);
      for (int m = 0; m < 4; ++m) {
        os << ',';
        if (!row) continue;  // absent category: empty cell
        const MetricValues& v = row->mean;
        os << num(m == 0 ? v.mse : m == 1 ? v.sad : m == 2 ? v.grad : v.conn);
      }
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace unimatte
