#pragma once

// Loopback HTTP server speaking the /predict wire protocol, with canned
// failure modes for exercising the remote predictor client.

#include <atomic>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace verseforge::testing {

class StubPredictorServer {
 public:
  enum class Mode { valid, unsorted, server_error, malformed, too_many };

  explicit StubPredictorServer(Mode mode) : mode_(mode) {
    server_.Post("/predict", [this](const httplib::Request& req, httplib::Response& res) {
      ++requests_;
      last_request_ = req.body;
      switch (mode_.load()) {
        case Mode::valid:
          res.set_content(R"({"candidates":[{"token":"food","score":0.9},{"token":"fruit","score":0.5},)"
                          R"({"token":"rules","score":0.1}]})",
                          "application/json");
          break;
        case Mode::unsorted:
          res.set_content(R"({"candidates":[{"token":"food","score":0.1},{"token":"fruit","score":0.9}]})",
                          "application/json");
          break;
        case Mode::server_error:
          res.status = 500;
          res.set_content("internal error", "text/plain");
          break;
        case Mode::malformed:
          res.set_content("<html>not json</html>", "text/html");
          break;
        case Mode::too_many: {
          nlohmann::json body;
          const auto k = nlohmann::json::parse(req.body).at("k").get<int>();
          for (int i = 0; i <= k; ++i) body["candidates"].push_back({{"token", "w"}, {"score", 1.0 - i * 0.01}});
          res.set_content(body.dump(), "application/json");
          break;
        }
      }
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~StubPredictorServer() {
    server_.stop();
    thread_.join();
  }

  StubPredictorServer(const StubPredictorServer&) = delete;
  StubPredictorServer& operator=(const StubPredictorServer&) = delete;

  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }
  int requests() const { return requests_.load(); }
  std::string last_request() const { return last_request_; }
  void set_mode(Mode m) { mode_ = m; }

 private:
  httplib::Server server_;
  std::atomic<Mode> mode_;
  std::atomic<int> requests_{0};
  std::string last_request_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace verseforge::testing
