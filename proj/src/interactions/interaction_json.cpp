// Copyright 2026 The UniMatte Authors.
// Licensed under the Apache License, Version 2.0.

#include "unimatte/interaction_json.hpp"

#include <algorithm>

#include "json.hpp"
#include "unimatte/base64.hpp"
#include "unimatte/error.hpp"
#include "unimatte/png_io.hpp"

namespace unimatte {

using ojson = nlohmann::ordered_json;

namespace {

constexpr std::string_view kDataUriPrefix = "data:image/png;base64,";

[[noreturn]] void fail(const std::string& field, const std::string& msg) {
  throw InvalidInput(field + ": " + msg);
}

int as_int(const ojson& v, const std::string& field) {
  if (!v.is_number_integer()) fail(field, "expected an integer");
  return v.get<int>();
}

}  // namespace

std::vector<std::array<int, 3>> encode_runs(std::vector<Pixel> pixels) {
  std::sort(pixels.begin(), pixels.end(), [](Pixel a, Pixel b) {
    return std::pair(a.row, a.col) < std::pair(b.row, b.col);
  });
  pixels.erase(std::unique(pixels.begin(), pixels.end()), pixels.end());
  std::vector<std::array<int, 3>> runs;
  for (const Pixel& p : pixels) {
    if (!runs.empty() && runs.back()[0] == p.row && runs.back()[1] + runs.back()[2] == p.col)
      ++runs.back()[2];
    else
      runs.push_back({p.row, p.col, 1});
  }
  return runs;
}

std::vector<Pixel> decode_runs(const std::vector<std::array<int, 3>>& runs) {
  std::vector<Pixel> px;
  for (const auto& r : runs)
    for (int i = 0; i < r[2]; ++i) px.push_back({r[0], r[1] + i});
  std::sort(px.begin(), px.end(), [](Pixel a, Pixel b) {
    return std::pair(a.row, a.col) < std::pair(b.row, b.col);
  });
  px.erase(std::unique(px.begin(), px.end()), px.end());
  return px;
}

Trimap resolve_trimap_reference(std::string_view ref) {
  if (ref.starts_with(kDataUriPrefix)) {
    const auto bytes = base64::decode(ref.substr(kDataUriPrefix.size()));
    Trimap t = field_cast<Trimap>(png::decode_gray(bytes));
    for (double& v : t.values()) v = png::trimap_level(v);
    return t;
  }
  return png::read_trimap(std::string(ref));
}

std::string interaction_to_json(const Interaction& it) {
  ojson j;
  j["kind"] = std::string(to_string(it.kind));
  switch (it.kind) {
    case InteractionKind::fg_point:
    case InteractionKind::fg_bg_points:
    case InteractionKind::extreme_points: {
      ojson pts = ojson::array();
      for (const GuidePoint& p : it.points)
        pts.push_back({p.row, p.col, static_cast<int>(p.role)});
      j["points"] = std::move(pts);
      break;
    }
    case InteractionKind::bbox: {
      const Box b = it.box.value_or(Box{});
      j["box"] = {b.r0, b.c0, b.r1, b.c1};
      break;
    }
    case InteractionKind::scribble: {
      ojson runs = ojson::array();
      for (const auto& r : encode_runs(it.stroke)) runs.push_back({r[0], r[1], r[2]});
      j["stroke"] = std::move(runs);
      break;
    }
    case InteractionKind::trimap:
      if (!it.trimap_ref.empty()) {
        j["trimap"] = it.trimap_ref;
      } else {
        j["trimap"] = std::string(kDataUriPrefix) + base64::encode(png::encode_gray(it.trimap));
      }
      break;
  }
  return j.dump();
}

Interaction interaction_from_json(std::string_view text, const TrimapResolver& resolver) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const ojson::parse_error& e) {
    fail("json", e.what());
  }
  if (!j.is_object()) fail("json", "expected an object");
  if (!j.contains("kind") || !j["kind"].is_string()) fail("kind", "missing or not a string");
  const auto kind = parse_interaction_kind(j["kind"].get<std::string>());
  if (!kind) fail("kind", "unknown kind '" + j["kind"].get<std::string>() +
                              "' (valid: " + interaction_kind_list() + ")");

  Interaction it;
  it.kind = *kind;
  switch (it.kind) {
    case InteractionKind::fg_point:
    case InteractionKind::fg_bg_points:
    case InteractionKind::extreme_points: {
      if (!j.contains("points") || !j["points"].is_array()) fail("points", "missing or not an array");
      const auto& pts = j["points"];
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const std::string f = "points[" + std::to_string(i) + "]";
        if (!pts[i].is_array() || pts[i].size() != 3) fail(f, "expected [row, col, role]");
        const int role = as_int(pts[i][2], f + ".role");
        if (role != 0 && role != 1) fail(f + ".role", "must be 0 (background) or 1 (foreground)");
        it.points.push_back(
            {as_int(pts[i][0], f + ".row"), as_int(pts[i][1], f + ".col"), PointRole{role}});
      }
      break;
    }
    case InteractionKind::bbox: {
      if (!j.contains("box") || !j["box"].is_array() || j["box"].size() != 4)
        fail("box", "expected [r0, c0, r1, c1]");
      const auto& b = j["box"];
      it.box = Box{as_int(b[0], "box[0]"), as_int(b[1], "box[1]"), as_int(b[2], "box[2]"),
                   as_int(b[3], "box[3]")};
      if (it.box->r0 > it.box->r1 || it.box->c0 > it.box->c1)
        fail("box", "top-left must not exceed bottom-right");
      break;
    }
    case InteractionKind::scribble: {
      if (!j.contains("stroke") || !j["stroke"].is_array()) fail("stroke", "missing or not an array");
      std::vector<std::array<int, 3>> runs;
      const auto& s = j["stroke"];
      for (std::size_t i = 0; i < s.size(); ++i) {
        const std::string f = "stroke[" + std::to_string(i) + "]";
        if (!s[i].is_array() || s[i].size() != 3) fail(f, "expected [row, col_start, length]");
        const int len = as_int(s[i][2], f + ".length");
        if (len < 1) fail(f + ".length", "must be >= 1");
        runs.push_back({as_int(s[i][0], f + ".row"), as_int(s[i][1], f + ".col_start"), len});
      }
      it.stroke = decode_runs(runs);
      if (it.stroke.empty()) fail("stroke", "empty stroke");
      break;
    }
    case InteractionKind::trimap: {
      if (!j.contains("trimap") || !j["trimap"].is_string())
        fail("trimap", "missing or not a string reference");
      it.trimap_ref = j["trimap"].get<std::string>();
      try {
        it.trimap = resolver(it.trimap_ref);
      } catch (const std::exception& e) {
        fail("trimap", std::string("cannot load reference: ") + e.what());
      }
      break;
    }
  }
  return it;
}

}  // namespace unimatte
