#include <doctest.h>

#include <chrono>
#include <cmath>
#include <future>
#include <numbers>
#include <thread>

#include <httplib.h>

#include "chainforge/service.hpp"

using namespace chainforge;
using io::json;
using service::Service;

namespace {

json body_of(const service::Response& r) { return json::parse(r.body); }

json post(Service& svc, const std::string& path, const json& body, int expect = 200) {
  const auto r = svc.handle("POST", path, body.dump());
  CHECK(r.status == expect);
  return body_of(r);
}

json linear_chain() {
  return io::to_json(solve(generate_linear(31, 7)));
}

// Service bound to an ephemeral port and served from a background thread.
struct Running {
  Service svc;
  int port = -1;
  std::thread thread;

  explicit Running(service::ServiceOptions options = {}) : svc([&] {
    options.port = 0;
    return options;
  }()) {
    port = svc.bind();
    REQUIRE(port > 0);
    thread = std::thread([this] { svc.listen(); });
  }
  ~Running() {
    svc.stop();
    thread.join();
  }
  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port);
    c.set_read_timeout(60, 0);
    return c;
  }
};

}  // namespace

TEST_SUITE("service") {

TEST_CASE("health and presets") {
  Service svc;
  CHECK(body_of(svc.handle("GET", "/api/health", ""))["status"] == "ok");
  const json presets = body_of(svc.handle("GET", "/api/presets", ""));
  REQUIRE(presets.size() == 4);
  CHECK(presets[0]["spectrum"]["params"]["A"] == 7);
  CHECK(presets[0]["tau"].get<double>() == doctest::Approx(std::numbers::pi / 7));
  CHECK(presets[1]["spectrum"]["params"]["C"] == 6.0);
  CHECK(presets[3]["spectrum"]["params"]["C"] == 28.0);
  for (const json& p : presets) {
    CHECK(p["spectrum"]["values"].size() == 31);
    CHECK(p["chain"]["b"].size() == 30);
  }
}

TEST_CASE("spectrum endpoint") {
  Service svc;
  const json shifted = post(svc, "/api/spectrum", {{"family", "linear"}, {"n", 31}, {"a", 7}, {"shift", 6}});
  CHECK(shifted["values"].size() == 31);
  CHECK(shifted["values"][14] == -1.0);
  CHECK(shifted["values"][16] == 1.0);

  const json echoed = post(svc, "/api/spectrum", {{"values", {-1, 0, 1}}});
  CHECK(echoed["values"] == json({-1.0, 0.0, 1.0}));

  const json dup = post(svc, "/api/spectrum", {{"values", {1, 1, 2}}}, 422);
  CHECK(dup["code"] == "invalid_spectrum");
  CHECK(dup.contains("message"));
  CHECK(dup["detail"]["index"] == 1);

  CHECK(post(svc, "/api/spectrum", {{"family", "linear"}, {"n", 5}, {"a", 2}}, 422)["code"] == "invalid_spectrum");
  CHECK(post(svc, "/api/spectrum", {{"family", "linear"}}, 422)["code"] == "bad_request");
}

TEST_CASE("solve endpoint transports the core results") {
  Service svc;
  const json two = post(svc, "/api/solve", {{"values", {-1, 1}}});
  CHECK(two["chain"]["b"][0].get<double>() == doctest::Approx(1.0));

  const json three = post(svc, "/api/solve", {{"spectrum", {{"values", {-2, 0, 2}}}}});
  CHECK(three["chain"]["b"][0].get<double>() == doctest::Approx(std::sqrt(2.0)));

  const json five = post(svc, "/api/solve", {{"values", {-2, -1, 0, 1, 2}}});
  CHECK(five["chain"]["b"][1].get<double>() == doctest::Approx(std::sqrt(6.0) / 2));
  CHECK(five["pst"]["is_pst"] == true);
  CHECK(five["pst"]["tau"].get<double>() == std::numbers::pi);
  CHECK(five["eigensystem"]["eigenvalues"].size() == 5);
  CHECK(five["eigensystem"]["eigenvectors"].size() == 5);

  // Same numbers as a direct core call.
  const Spectrum s = shift_spectrum(generate_linear(31, 7), 6);
  const json wire = post(svc, "/api/solve", {{"spectrum", io::to_json(s)}, {"central_count", 2}});
  CHECK(wire["chain"] == io::to_json(solve(s)));
  CHECK(wire["boundary_metric"].get<double>() == boundary_metric(s, 2));
  CHECK(wire["weighted_variance"].get<double>() == weighted_variance(s));

  const json overflow = post(svc, "/api/solve", io::to_json(generate_linear(2001, 1)), 422);
  CHECK(overflow["code"] == "solver_overflow");
}

TEST_CASE("eigensystem endpoint for direct coupling entry") {
  Service svc;
  const json uniform = post(svc, "/api/eigensystem", {{"a", {0, 0, 0}}, {"b", {1, 1}}});
  const auto ev = uniform["eigensystem"]["eigenvalues"];
  CHECK(ev[0].get<double>() == doctest::Approx(-std::sqrt(2.0)));
  CHECK(ev[2].get<double>() == doctest::Approx(std::sqrt(2.0)));
  CHECK(uniform["persymmetric"] == true);
  CHECK(post(svc, "/api/eigensystem", {{"a", {0, 0}}, {"b", {-1}}}, 422)["code"] == "bad_request");
}

TEST_CASE("evolve endpoint") {
  Service svc;
  const json chain = linear_chain();
  const json trace = post(svc, "/api/evolve", {{"chain", chain}, {"t_grid", {0.0, std::numbers::pi / 7}}});
  CHECK(trace["f"][0] == 0.0);
  CHECK(trace["f"][1].get<double>() >= 1 - 1e-8);
  CHECK(trace["tau"].get<double>() == std::numbers::pi);

  const json grid = post(svc, "/api/evolve", {{"chain", chain}, {"t_max", 1.0}, {"points", 11}, {"tau", 0.5}});
  CHECK(grid["t"].size() == 11);
  CHECK(grid["t"][10] == 1.0);
  const double f = grid["f_tau"];
  CHECK(grid["fidelity_tau"].get<double>() == doctest::Approx(0.5 + f / 3 + f * f / 6));

  const json uniform = post(svc, "/api/evolve", {{"a", {0, 0, 0, 0}}, {"b", {1, 1, 1}}, {"t_max", 1.0}});
  CHECK(uniform["tau"].is_null());
  CHECK(post(svc, "/api/evolve", {{"chain", chain}, {"t_grid", "soon"}}, 422)["code"] == "bad_request");
}

TEST_CASE("synchronous disorder equals the direct call") {
  Service svc;
  const ChainCouplings c = solve(generate_linear(31, 7));
  const DisorderConfig cfg{0.05, 300, 5, std::numbers::pi / 7, 50, 0};
  const json wire = post(svc, "/api/disorder", {{"chain", io::to_json(c)},
                                                {"config", {{"r", 0.05}, {"samples", 300}, {"seed", 5},
                                                            {"tau", std::numbers::pi / 7}}}});
  CHECK(wire == io::to_json(run_experiment(c, cfg), cfg));
}

TEST_CASE("errors and routing") {
  Service svc;
  const auto malformed = svc.handle("POST", "/api/solve", "{\"values\": [1,");
  CHECK(malformed.status == 400);
  CHECK(body_of(malformed)["code"] == "bad_request");
  CHECK(svc.handle("GET", "/api/nothing", "").status == 404);
  CHECK(svc.handle("POST", "/api/nothing", "{}").status == 404);
  CHECK(svc.handle("GET", "/api/jobs/job-999", "").status == 404);
  CHECK(post(svc, "/api/disorder", {{"a", {0, 0, 0}}, {"b", {1, 1}}, {"r", 0.1}, {"samples", 5}}, 422)["code"] ==
        "bad_request");
}

TEST_CASE("asynchronous disorder job over http") {
  Running server;
  auto client = server.client();
  const json request = {{"chain", linear_chain()}, {"r", 0.05}, {"samples", 4000}, {"seed", 9}};
  auto res = client.Post("/api/disorder", request.dump(), "application/json");
  REQUIRE(res);
  CHECK(res->status == 202);
  const std::string id = json::parse(res->body)["job_id"];

  std::string events;
  auto stream = client.Get("/api/jobs/" + id + "/events", [&](const char* data, std::size_t n) {
    events.append(data, n);
    return true;
  });
  REQUIRE(stream);
  CHECK(stream->get_header_value("Content-Type") == "text/event-stream");
  CHECK(events.find("event: progress") != std::string::npos);
  CHECK(events.find("event: done") != std::string::npos);

  const json status = json::parse(client.Get("/api/jobs/" + id)->body);
  CHECK(status["status"] == "done");
  CHECK(status["completed"] == 4000);
  const ChainCouplings c = solve(generate_linear(31, 7));
  const DisorderConfig cfg{0.05, 4000, 9, std::numbers::pi, 50, 0};
  CHECK(status["result"]["mean"] == json(run_experiment(c, cfg).mean));
}

TEST_CASE("cancelling a job") {
  Running server;
  auto client = server.client();
  const json request = {{"chain", io::to_json(solve(generate_linear(201, 1)))}, {"r", 0.05}, {"samples", 200000},
                        {"seed", 1}, {"tau", std::numbers::pi}};
  const std::string id = json::parse(client.Post("/api/disorder", request.dump(), "application/json")->body)["job_id"];
  auto del = client.Delete("/api/jobs/" + id);
  REQUIRE(del);
  CHECK(del->status == 202);
  json status;
  for (int i = 0; i < 200; ++i) {
    status = json::parse(client.Get("/api/jobs/" + id)->body);
    if (status["status"] != "running") break;
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  CHECK(status["status"] == "cancelled");
  CHECK(status["completed"].get<std::size_t>() < 200000);
}

TEST_CASE("sixteen concurrent disorder runs match their serial results") {
  Running server;
  const ChainCouplings c = solve(shift_spectrum(generate_inverted_quadratic(31), 28));
  std::vector<std::future<std::string>> replies;
  for (int seed = 0; seed < 16; ++seed) {
    replies.push_back(std::async(std::launch::async, [&, seed] {
      auto client = server.client();
      const json request = {{"chain", io::to_json(c)}, {"r", 0.05}, {"samples", 500}, {"seed", seed}};
      auto res = client.Post("/api/disorder", request.dump(), "application/json");
      if (!res) return "transport error " + httplib::to_string(res.error());
      return std::to_string(res->status) + " " + res->body;
    }));
  }
  for (int seed = 0; seed < 16; ++seed) {
    const std::string body = replies[seed].get();
    INFO(body.substr(0, 200));
    REQUIRE(body.rfind("200 ", 0) == 0);
    const DisorderConfig cfg{0.05, 500, static_cast<std::uint64_t>(seed), std::numbers::pi, 50, 1};
    CHECK(json::parse(body.substr(4)) == io::to_json(run_experiment(c, cfg), cfg));
  }
}

TEST_CASE("cors for local origins only") {
  Running server;
  auto client = server.client();
  auto local = client.Get("/api/health", {{"Origin", "http://localhost:5173"}});
  REQUIRE(local);
  CHECK(local->get_header_value("Access-Control-Allow-Origin") == "http://localhost:5173");
  auto remote = client.Get("/api/health", {{"Origin", "https://example.com"}});
  REQUIRE(remote);
  CHECK_FALSE(remote->has_header("Access-Control-Allow-Origin"));
  auto preflight = client.Options("/api/solve", {{"Origin", "http://127.0.0.1:3000"}});
  REQUIRE(preflight);
  CHECK(preflight->status == 204);
  CHECK(preflight->get_header_value("Access-Control-Allow-Methods").find("POST") != std::string::npos);
}

}  // TEST_SUITE
