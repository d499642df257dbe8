#pragma once

// HTTP front end: POST /predict and GET /health over a loaded bundle.

#include <atomic>
#include <memory>
#include <string>
#include <thread>
#include <utility>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "errors.hpp"
#include "forecast.hpp"

namespace postimpact {

struct ServiceOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 binds an ephemeral port
  std::size_t worker_threads = 8;
  /// Requests in flight beyond this are answered 503 with Retry-After.
  std::size_t max_in_flight = 64;
  /// Accepted connections waiting for a worker; further ones are dropped.
  std::size_t max_queued = 256;
  std::size_t max_body_bytes = 1 << 20;
};

struct Reply {
  int status = 200;
  std::string body;
};

inline Reply handle_predict(const Bundle& bundle, std::string_view body) {
  auto error = [](int status, std::string_view message) {
    return Reply{status, nlohmann::json{{"error", message}}.dump()};
  };
  nlohmann::json request;
  try {
    request = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception&) {
    return error(400, "request body is not valid JSON");
  }
  try {
    const DraftPost draft = parse_draft(request);
    return {200, to_json(forecast(draft, bundle)).dump()};
  } catch (const EmptyDraft& e) {
    return error(422, e.what());
  } catch (const Error& e) {
    return error(400, e.what());
  }
}

inline Reply handle_health(const Bundle& bundle) {
  nlohmann::ordered_json j;
  j["status"] = "ok";
  j["model_versions"] = nlohmann::ordered_json::object();
  for (const auto& m : bundle.models()) j["model_versions"][std::string(to_string(m.problem))] = m.version;
  return {200, j.dump()};
}

class Service {
 public:
  Service(std::shared_ptr<const Bundle> bundle, ServiceOptions options)
      : bundle_(std::move(bundle)), options_(std::move(options)) {
    server_.new_task_queue = [this] { return new httplib::ThreadPool(options_.worker_threads, options_.max_queued); };
    server_.set_payload_max_length(options_.max_body_bytes);
    // SO_REUSEADDR only: the library default adds SO_REUSEPORT, which would let
    // a second instance share the port silently instead of failing to bind.
    server_.set_socket_options([](socket_t sock) {
      int yes = 1;
      ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
    });

    server_.Post("/predict", [this](const httplib::Request& req, httplib::Response& res) {
      InFlight guard(in_flight_);
      if (guard.count > options_.max_in_flight) {
        res.status = 503;
        res.set_header("Retry-After", "1");
        res.set_content(R"({"error":"too many concurrent requests"})", "application/json");
        return;
      }
      const Reply r = handle_predict(*bundle_, req.body);
      res.status = r.status;
      res.set_content(r.body, "application/json; charset=utf-8");
    });
    server_.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
      const Reply r = handle_health(*bundle_);
      res.status = r.status;
      res.set_content(r.body, "application/json; charset=utf-8");
    });
  }

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;
  ~Service() { stop(); }

  /// Binds the listening socket; returns the bound port.
  int bind() {
    if (options_.port == 0) {
      port_ = server_.bind_to_any_port(options_.host);
      if (port_ < 0) throw BindFailure("cannot bind " + options_.host + ":<any>");
    } else {
      if (!server_.bind_to_port(options_.host, options_.port))
        throw BindFailure("cannot bind " + options_.host + ":" + std::to_string(options_.port));
      port_ = options_.port;
    }
    return port_;
  }

  /// Blocks until stop() is called.
  void listen() { server_.listen_after_bind(); }

  /// Binds and serves on a background thread; returns the bound port.
  int start() {
    const int port = bind();
    thread_ = std::thread([this] { listen(); });
    server_.wait_until_ready();
    return port;
  }

  void stop() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  int port() const { return port_; }
  const Bundle& bundle() const { return *bundle_; }

 private:
  struct InFlight {
    explicit InFlight(std::atomic<std::size_t>& c) : counter(c), count(++c) {}
    ~InFlight() { --counter; }
    std::atomic<std::size_t>& counter;
    std::size_t count;
  };

  std::shared_ptr<const Bundle> bundle_;
  ServiceOptions options_;
  httplib::Server server_;
  std::atomic<std::size_t> in_flight_{0};
  std::thread thread_;
  int port_ = -1;
};

}  // namespace postimpact
