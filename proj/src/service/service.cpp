// Copyright 2026 The UniMatte Authors.
// Licensed under the Apache License, Version 2.0.

#include "unimatte/service.hpp"

#include <condition_variable>
#include <cstring>
#include <deque>
#include <future>
#include <map>
#include <mutex>
#include <random>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "unimatte/base64.hpp"
#include "unimatte/error.hpp"
#include "unimatte/interaction_json.hpp"
#include "unimatte/png_io.hpp"

namespace unimatte {

namespace {

using ojson = nlohmann::ordered_json;

constexpr std::string_view kDataUriPrefix = "data:image/png;base64,";

struct HttpError {
  int status;
  std::string message;
};

void send_json(httplib::Response& res, int status, const ojson& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, ojson{{"error", message}});
}

// Reads width and height from the IHDR chunk without decoding pixels.
std::pair<std::uint32_t, std::uint32_t> png_dimensions(std::string_view bytes) {
  static constexpr unsigned char kSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() < 24 || std::memcmp(bytes.data(), kSig, 8) != 0 ||
      bytes.substr(12, 4) != "IHDR")
    throw HttpError{400, "image: not a PNG"};
  const auto be32 = [&](std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | static_cast<unsigned char>(bytes[off + i]);
    return v;
  };
  return {be32(16), be32(20)};
}

// Trimaps arrive inline; the service never reads server-side paths.
Trimap resolve_inline_trimap(std::string_view ref) {
  if (!ref.starts_with(kDataUriPrefix))
    throw InvalidInput("interaction.trimap: expected a data:image/png;base64 URI");
  return resolve_trimap_reference(ref);
}

std::string data_uri(const png::Bytes& bytes) {
  return std::string(kDataUriPrefix) + base64::encode(bytes);
}

std::string random_session_id() {
  static std::mutex mu;
  static std::mt19937_64 gen{std::random_device{}()};
  std::lock_guard lock(mu);
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(gen()),
                static_cast<unsigned long long>(gen()));
  return buf;
}

}  // namespace

struct MattingService::Impl {
  struct Session {
    std::shared_ptr<const Image> image;
    std::vector<ojson> history;
    Clock::time_point last_used;
  };

  Impl(Model m, ServiceOptions o) : model(std::move(m)), options(std::move(o)) {
    worker = std::thread([this] { work(); });
    install_routes();
  }

  ~Impl() {
    {
      std::lock_guard lock(queue_mu);
      quit = true;
    }
    queue_cv.notify_all();
    worker.join();
  }

  Model model;
  ServiceOptions options;
  httplib::Server server;
  std::thread listener;
  std::function<Clock::time_point()> now = [] { return Clock::now(); };

  mutable std::mutex sessions_mu;
  std::map<std::string, Session> sessions;

  std::mutex queue_mu;
  std::condition_variable queue_cv;
  std::deque<std::packaged_task<ojson()>> queue;
  bool quit = false;
  std::thread worker;

  void work() {
    for (;;) {
      std::packaged_task<ojson()> task;
      {
        std::unique_lock lock(queue_mu);
        queue_cv.wait(lock, [&] { return quit || !queue.empty(); });
        if (queue.empty()) return;
        task = std::move(queue.front());
        queue.pop_front();
      }
      task();
    }
  }

  std::future<ojson> submit(std::function<ojson()> fn) {
    std::packaged_task<ojson()> task(std::move(fn));
    auto fut = task.get_future();
    {
      std::lock_guard lock(queue_mu);
      queue.push_back(std::move(task));
    }
    queue_cv.notify_one();
    return fut;
  }

  std::size_t evict_locked(Clock::time_point t) {
    std::size_t removed = 0;
    for (auto it = sessions.begin(); it != sessions.end();) {
      if (t - it->second.last_used > options.idle_timeout) {
        it = sessions.erase(it);
        ++removed;
      } else {
        ++it;
      }
    }
    return removed;
  }

  void install_routes() {
    server.Get("/api/health", [this](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, ojson{{"status", "ok"}, {"model_id", options.model_id}});
    });
    server.Post("/api/session", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { create_session(req, res); });
    });
    server.Post("/api/predict", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { predict(req, res); });
    });
    server.Get(R"(/api/session/([^/]+)/history)",
               [this](const httplib::Request& req, httplib::Response& res) {
                 guarded(res, [&] { history(req.matches[1].str(), res); });
               });
  }

  template <typename F>
  static void guarded(httplib::Response& res, F&& f) {
    try {
      f();
    } catch (const HttpError& e) {
      send_error(res, e.status, e.message);
    } catch (const InvalidInput& e) {
      send_error(res, 400, e.what());
    } catch (const ShapeError& e) {
      send_error(res, 400, e.what());
    } catch (const FormatError& e) {
      send_error(res, 400, e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    }
  }

  void create_session(const httplib::Request& req, httplib::Response& res) {
    const std::string* body = nullptr;
    std::string file_content;
    if (req.has_file("image")) {
      file_content = req.get_file_value("image").content;
      body = &file_content;
    } else if (req.get_header_value("Content-Type").starts_with("image/png")) {
      body = &req.body;
    } else {
      throw HttpError{400, "image: expected multipart field 'image' or an image/png body"};
    }
    const auto [w, h] = png_dimensions(*body);
    if (static_cast<std::uint64_t>(w) * h > options.max_pixels)
      throw HttpError{413, "image: " + std::to_string(w) + "x" + std::to_string(h) +
                               " exceeds max_pixels " + std::to_string(options.max_pixels)};
    auto image = std::make_shared<const Image>(png::decode_rgb(
        {reinterpret_cast<const std::uint8_t*>(body->data()), body->size()}));
    const std::string id = random_session_id();
    {
      std::lock_guard lock(sessions_mu);
      const auto t = now();
      evict_locked(t);
      sessions[id] = Session{image, {}, t};
    }
    send_json(res, 200,
              ojson{{"session_id", id}, {"width", image->width()}, {"height", image->height()}});
  }

  void predict(const httplib::Request& req, httplib::Response& res) {
    ojson j;
    try {
      j = ojson::parse(req.body);
    } catch (const ojson::parse_error& e) {
      throw HttpError{400, std::string("body: malformed JSON: ") + e.what()};
    }
    if (!j.is_object()) throw HttpError{400, "body: expected a JSON object"};
    if (!j.contains("session_id") || !j["session_id"].is_string())
      throw HttpError{400, "session_id: expected a string"};
    if (!j.contains("interaction") || !j["interaction"].is_object())
      throw HttpError{400, "interaction: expected an object"};
    const std::string id = j["session_id"].get<std::string>();
    const Interaction it = interaction_from_json(j["interaction"].dump(), resolve_inline_trimap);

    std::shared_ptr<const Image> image;
    {
      std::lock_guard lock(sessions_mu);
      evict_locked(now());
      const auto s = sessions.find(id);
      if (s == sessions.end()) throw HttpError{404, "session_id: unknown session " + id};
      image = s->second.image;
      s->second.last_used = now();
    }
    validate(it, image->height(), image->width());
    if (it.kind != model.config().guidance_kind)
      throw HttpError{400, "interaction.kind: model expects " +
                               std::string(to_string(model.config().guidance_kind))};

    const double sigma = options.point_sigma;
    auto fut = submit([this, image, it, sigma] {
      const auto t0 = std::chrono::steady_clock::now();
      const GuidanceMap gm = encode_guidance(it, image->height(), image->width(), sigma);
      const ModelOutput out = model.predict(*image, gm);
      const double ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      std::vector<double> mask(out.mask_prob.size());
      for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = out.mask_prob.values()[i] > 0.5;
      ojson r;
      r["mask"] = data_uri(png::encode_gray(mask, image->height(), image->width()));
      r["alpha"] = data_uri(png::encode_gray(out.alpha));
      r["latency_ms"] = ms;
      return r;
    });
    ojson result = fut.get();
    result["model_id"] = options.model_id;

    {
      std::lock_guard lock(sessions_mu);
      const auto s = sessions.find(id);
      if (s != sessions.end()) {
        ojson entry;
        entry["index"] = s->second.history.size();
        entry["interaction"] = ojson::parse(interaction_to_json(it));
        entry["latency_ms"] = result["latency_ms"];
        s->second.history.push_back(std::move(entry));
        s->second.last_used = now();
      }
    }
    send_json(res, 200, result);
  }

  void history(const std::string& id, httplib::Response& res) {
    std::lock_guard lock(sessions_mu);
    evict_locked(now());
    const auto s = sessions.find(id);
    if (s == sessions.end()) throw HttpError{404, "session_id: unknown session " + id};
    s->second.last_used = now();
    send_json(res, 200, ojson{{"session_id", id}, {"history", s->second.history}});
  }
};

MattingService::MattingService(Model model, ServiceOptions options)
    : impl_(std::make_unique<Impl>(std::move(model), std::move(options))) {}

MattingService::~MattingService() { stop(); }

int MattingService::bind(const std::string& host, int port) {
  if (port == 0) {
    const int p = impl_->server.bind_to_any_port(host);
    if (p < 0) throw InvalidInput("service: cannot bind " + host);
    return p;
  }
  if (!impl_->server.bind_to_port(host, port))
    throw InvalidInput("service: cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void MattingService::run() { impl_->server.listen_after_bind(); }

void MattingService::start() {
  impl_->listener = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void MattingService::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->listener.joinable()) impl_->listener.join();
}

std::size_t MattingService::evict_idle() {
  std::lock_guard lock(impl_->sessions_mu);
  return impl_->evict_locked(impl_->now());
}

std::size_t MattingService::session_count() const {
  std::lock_guard lock(impl_->sessions_mu);
  return impl_->sessions.size();
}

void MattingService::set_clock(std::function<Clock::time_point()> now) {
  std::lock_guard lock(impl_->sessions_mu);
  impl_->now = std::move(now);
}

}  // namespace unimatte
