// Copyright 2026 The UniMatte Authors.
// Licensed under the Apache License, Version 2.0.

#pragma once

// HTTP service for interactive prediction.
//
//   POST /api/session              multipart field "image" (PNG) or raw image/png body
//                                  -> {session_id, width, height}
//   POST /api/predict              {session_id, interaction} -> {mask, alpha, latency_ms, model_id}
//   GET  /api/session/{id}/history -> {session_id, history: [{index, interaction, output}]}
//   GET  /api/health               -> {status, model_id}
//
// Errors are JSON {"error": "..."}: 400 malformed input, 404 unknown session,
// 413 image above max_pixels. Inference runs on a single worker thread.

#include <chrono>
#include <cstddef>
#include <functional>
#include <memory>
#include <string>

#include "unimatte/model.hpp"

namespace unimatte {

struct ServiceOptions {
  std::size_t max_pixels = 1024 * 1024;
  std::chrono::seconds idle_timeout{30 * 60};
  std::string model_id = "unimatte";
  double point_sigma = 10.0;
};

class MattingService {
 public:
  using Clock = std::chrono::steady_clock;

  MattingService(Model model, ServiceOptions options);
  ~MattingService();
  MattingService(const MattingService&) = delete;
  MattingService& operator=(const MattingService&) = delete;

  /// Binds the listening socket; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves on the calling thread until stop().
  void run();
  /// Serves on a background thread.
  void start();
  void stop();

  /// Drops sessions idle for longer than the timeout; returns how many were removed.
  std::size_t evict_idle();
  std::size_t session_count() const;
  /// Test hook for idle eviction.
  void set_clock(std::function<Clock::time_point()> now);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace unimatte
