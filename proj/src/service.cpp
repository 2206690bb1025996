#include "chainforge/service.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <map>
#include <mutex>
#include <numbers>
#include <regex>
#include <thread>

#define CPPHTTPLIB_LISTEN_BACKLOG 128
#include <httplib.h>

#include "chainforge/error.hpp"

namespace chainforge::service {

using io::json;

namespace {

Response json_response(int status, const json& body) { return {status, "application/json", body.dump()}; }

Response error_response(int status, ErrorCode code, const std::string& message,
                        std::optional<std::size_t> index = std::nullopt) {
  json detail = nullptr;
  if (index) detail = {{"index", *index}};
  return json_response(status, {{"code", std::string(to_string(code))}, {"message", message}, {"detail", detail}});
}

std::size_t get_count(const json& j, const char* key, std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer() || j.at(key).get<long long>() < 0) {
    throw Error(ErrorCode::bad_request, std::string("field '") + key + "' must be a nonnegative integer");
  }
  return j.at(key).get<std::size_t>();
}

double get_number(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw Error(ErrorCode::bad_request, std::string("field '") + key + "' must be a number");
  }
  return j.at(key).get<double>();
}

int get_int(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number_integer()) {
    throw Error(ErrorCode::bad_request, std::string("field '") + key + "' must be an integer");
  }
  return j.at(key).get<int>();
}

json handle_spectrum(const json& body) {
  if (!body.is_object()) throw Error(ErrorCode::bad_request, "request body must be an object");
  Spectrum s = [&] {
    if (body.contains("values")) return io::spectrum_from_json(body);
    const Family family = family_from_string(body.value("family", std::string("")));
    const int n = get_int(body, "n");
    switch (family) {
      case Family::linear: return generate_linear(n, body.contains("a") ? get_int(body, "a") : 1);
      case Family::inverted_quadratic: return generate_inverted_quadratic(n);
      case Family::cosine: return generate_cosine(n);
      case Family::custom: break;
    }
    throw Error(ErrorCode::bad_request, "custom spectra need explicit values");
  }();
  if (body.contains("shift")) s = shift_spectrum(s, get_number(body, "shift"));
  return io::to_json(s);
}

json handle_solve(const json& body) {
  if (!body.is_object()) throw Error(ErrorCode::bad_request, "request body must be an object");
  const json& spec = body.contains("spectrum") ? body.at("spectrum") : body;
  const Spectrum s = io::spectrum_from_json(spec);
  const double tau = body.contains("tau") ? get_number(body, "tau") : std::numbers::pi;
  const std::size_t central = get_count(body, "central_count", 0);

  const ChainCouplings c = solve(s);
  const EigenSystem es = eigendecompose(c);
  json out = {{"spectrum", io::to_json(s)},
              {"chain", io::to_json(c)},
              {"pst", io::to_json(verify_pst(s, tau))},
              {"weighted_variance", weighted_variance(s)},
              {"central_count", central},
              {"eigensystem", io::to_json(es)}};
  try {
    out["boundary_metric"] = boundary_metric(s, central);
  } catch (const Error&) {
    out["boundary_metric"] = nullptr;
  }
  return out;
}

json handle_eigensystem(const json& body) {
  const ChainCouplings c = io::chain_from_json(body);
  const EigenSystem es = eigendecompose(c);
  json out = {{"chain", io::to_json(c)},
              {"eigensystem", io::to_json(es)},
              {"persymmetric", c.is_persymmetric()}};
  out["pst"] = nullptr;
  if (c.is_persymmetric()) {
    try {
      const std::vector<double> values(es.eigenvalues().begin(), es.eigenvalues().end());
      out["pst"] = io::to_json(verify_pst(Spectrum(values), std::numbers::pi));
    } catch (const Error&) {
      // near-degenerate levels: no phase verdict
    }
  }
  return out;
}

json handle_evolve(const json& body) {
  const ChainCouplings c = io::chain_from_json(body);
  const EigenSystem es = eigendecompose(c);
  std::vector<double> grid;
  if (body.contains("t_grid")) {
    if (!body.at("t_grid").is_array()) throw Error(ErrorCode::bad_request, "t_grid must be an array");
    for (const json& t : body.at("t_grid")) {
      if (!t.is_number()) throw Error(ErrorCode::bad_request, "t_grid must hold numbers only");
      grid.push_back(t.get<double>());
    }
  } else {
    const double t_min = body.contains("t_min") ? get_number(body, "t_min") : 0.0;
    grid = linear_grid(t_min, get_number(body, "t_max"), get_count(body, "points", 1000));
  }
  const std::vector<double> f = overlap_trace(es, grid);
  json out = {{"t", grid}, {"f", f}};
  std::optional<double> tau;
  if (body.contains("tau")) {
    tau = get_number(body, "tau");
  } else {
    tau = default_transfer_time(c);
  }
  if (tau) {
    const double f_tau = transfer_overlap(es, *tau);
    out["tau"] = *tau;
    out["f_tau"] = f_tau;
    out["fidelity_tau"] = average_fidelity(f_tau);
  } else {
    out["tau"] = nullptr;
  }
  return out;
}

DisorderConfig disorder_config(const json& body, const ChainCouplings& c, std::size_t threads) {
  json cfg_json = body.contains("config") ? body.at("config") : body;
  if (!cfg_json.contains("tau")) {
    const auto tau = default_transfer_time(c);
    if (!tau) throw Error(ErrorCode::bad_request, "tau is required for chains without perfect transfer at pi");
    cfg_json["tau"] = *tau;
  }
  if (!cfg_json.contains("seed")) cfg_json["seed"] = 0;
  DisorderConfig cfg = io::disorder_config_from_json(cfg_json);
  if (cfg.threads == 0) cfg.threads = threads;
  return cfg;
}

enum class JobStatus { running, done, failed, cancelled };

std::string_view to_string(JobStatus s) {
  switch (s) {
    case JobStatus::running: return "running";
    case JobStatus::done: return "done";
    case JobStatus::failed: return "failed";
    case JobStatus::cancelled: return "cancelled";
  }
  return "failed";
}

struct Job {
  std::size_t samples = 0;
  std::atomic<std::size_t> completed{0};
  std::mutex mutex;
  std::condition_variable changed;
  JobStatus status = JobStatus::running;
  json result;
  json error;
  std::jthread worker;

  json snapshot() {
    std::lock_guard lock(mutex);
    json out = {{"status", std::string(to_string(status))}, {"completed", completed.load()}, {"samples", samples}};
    if (status == JobStatus::done) out["result"] = result;
    if (status == JobStatus::failed) out["error"] = error;
    return out;
  }
};

bool is_local_origin(const std::string& origin) {
  static const std::regex local(R"(^https?://(localhost|127\.0\.0\.1|\[::1\])(:\d+)?$)");
  return std::regex_match(origin, local);
}

}  // namespace

json presets() {
  struct Entry {
    const char* name;
    const char* label;
    Spectrum spectrum;
    double tau;
  };
  const Spectrum linear = generate_linear(31, 7);
  const Spectrum quadratic = generate_inverted_quadratic(31);
  const Entry entries[] = {
      {"linear", "(1) linear, N=31, A=7", linear, std::numbers::pi / 7.0},
      {"linear_shifted", "(2) linear, N=31, A=7, C=6", shift_spectrum(linear, 6.0), std::numbers::pi},
      {"inverted_quadratic", "(3) inverted quadratic, N=31", quadratic, std::numbers::pi},
      {"inverted_quadratic_shifted", "(4) inverted quadratic, N=31, C=28", shift_spectrum(quadratic, 28.0),
       std::numbers::pi},
  };
  json out = json::array();
  for (const Entry& e : entries) {
    out.push_back({{"name", e.name},
                   {"label", e.label},
                   {"spectrum", io::to_json(e.spectrum)},
                   {"chain", io::to_json(solve(e.spectrum))},
                   {"tau", e.tau}});
  }
  return out;
}

struct Service::Impl {
  ServiceOptions options;
  httplib::Server server;
  std::mutex jobs_mutex;
  std::map<std::string, std::shared_ptr<Job>> jobs;
  std::atomic<std::uint64_t> next_job{1};

  explicit Impl(ServiceOptions o) : options(std::move(o)) {}

  ~Impl() {
    std::lock_guard lock(jobs_mutex);
    for (auto& [id, job] : jobs) job->worker.request_stop();
  }

  std::shared_ptr<Job> find_job(const std::string& id) {
    std::lock_guard lock(jobs_mutex);
    auto it = jobs.find(id);
    return it == jobs.end() ? nullptr : it->second;
  }

  Response disorder(const json& body) {
    const ChainCouplings c = io::chain_from_json(body);
    const DisorderConfig cfg = disorder_config(body, c, options.worker_threads);
    bool async = cfg.samples > options.async_threshold;
    if (body.contains("async") && body.at("async").is_boolean()) async = body.at("async").get<bool>();

    if (!async) {
      const DisorderReport report = run_experiment(c, cfg);
      return json_response(200, io::to_json(report, cfg));
    }

    auto job = std::make_shared<Job>();
    job->samples = cfg.samples;
    const std::string id = "job-" + std::to_string(next_job.fetch_add(1));
    job->worker = std::jthread([job, c, cfg](std::stop_token stop) {
      auto finish = [&](JobStatus status, json result, json error) {
        {
          std::lock_guard lock(job->mutex);
          job->status = status;
          job->result = std::move(result);
          job->error = std::move(error);
        }
        job->changed.notify_all();
      };
      try {
        const DisorderReport report = run_experiment(
            c, cfg,
            [&](std::size_t done) {
              // workers report out of order
              std::size_t seen = job->completed.load();
              while (seen < done && !job->completed.compare_exchange_weak(seen, done)) {
              }
              job->changed.notify_all();
            },
            stop);
        finish(JobStatus::done, io::to_json(report, cfg), nullptr);
      } catch (const Cancelled&) {
        finish(JobStatus::cancelled, nullptr, nullptr);
      } catch (const Error& e) {
        finish(JobStatus::failed, nullptr,
               {{"code", std::string(chainforge::to_string(e.code()))}, {"message", e.what()}});
      } catch (const std::exception& e) {
        finish(JobStatus::failed, nullptr, {{"code", "bad_request"}, {"message", e.what()}});
      }
    });
    {
      std::lock_guard lock(jobs_mutex);
      jobs.emplace(id, job);
    }
    return json_response(202, {{"job_id", id},
                               {"status", "running"},
                               {"samples", cfg.samples},
                               {"poll", "/api/jobs/" + id},
                               {"events", "/api/jobs/" + id + "/events"}});
  }

  Response route(std::string_view method, std::string_view path, const std::string& body) {
    try {
      if (method == "GET" && path == "/api/health") return json_response(200, {{"status", "ok"}});
      if (method == "GET" && path == "/api/presets") return json_response(200, presets());

      static constexpr std::string_view jobs_prefix = "/api/jobs/";
      if (path.starts_with(jobs_prefix)) {
        const std::string id(path.substr(jobs_prefix.size()));
        auto job = find_job(id);
        if (!job) return error_response(404, ErrorCode::bad_request, "unknown job '" + id + "'");
        if (method == "GET") return json_response(200, job->snapshot());
        if (method == "DELETE") {
          job->worker.request_stop();
          return json_response(202, {{"job_id", id}, {"status", "cancelling"}});
        }
        return error_response(405, ErrorCode::bad_request, "method not allowed");
      }

      if (method != "POST") return error_response(404, ErrorCode::bad_request, "no such endpoint");
      const json request = io::parse(body.empty() ? "{}" : body);
      if (path == "/api/spectrum") return json_response(200, handle_spectrum(request));
      if (path == "/api/solve") return json_response(200, handle_solve(request));
      if (path == "/api/eigensystem") return json_response(200, handle_eigensystem(request));
      if (path == "/api/evolve") return json_response(200, handle_evolve(request));
      if (path == "/api/disorder") return disorder(request);
      return error_response(404, ErrorCode::bad_request, "no such endpoint");
    } catch (const Error& e) {
      const bool malformed = std::string_view(e.what()).starts_with("malformed JSON");
      return error_response(malformed ? 400 : 422, e.code(), e.what(), e.index());
    } catch (const std::exception& e) {
      return error_response(422, ErrorCode::bad_request, e.what());
    }
  }

  void install_routes() {
    server.new_task_queue = [] { return new httplib::ThreadPool(32); };

    server.set_post_routing_handler([](const httplib::Request& req, httplib::Response& res) {
      const std::string origin = req.get_header_value("Origin");
      if (!origin.empty() && is_local_origin(origin)) {
        res.set_header("Access-Control-Allow-Origin", origin);
        res.set_header("Vary", "Origin");
        res.set_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
      }
    });
    server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    server.Get(R"(/api/jobs/([^/]+)/events)", [this](const httplib::Request& req, httplib::Response& res) {
      auto job = find_job(req.matches[1]);
      if (!job) {
        const Response r = error_response(404, ErrorCode::bad_request, "unknown job");
        res.status = r.status;
        res.set_content(r.body, r.content_type);
        return;
      }
      auto last_sent = std::make_shared<std::optional<std::size_t>>();
      res.set_header("Cache-Control", "no-cache");
      res.set_chunked_content_provider("text/event-stream", [job, last_sent](std::size_t, httplib::DataSink& sink) {
        std::unique_lock lock(job->mutex);
        job->changed.wait_for(lock, std::chrono::milliseconds(200), [&] {
          return job->status != JobStatus::running || *last_sent != job->completed.load();
        });
        const std::size_t done = job->completed.load();
        if (!last_sent->has_value() || **last_sent != done) {
          *last_sent = done;
          const std::string event = "event: progress\ndata: " +
                                    json({{"completed", done}, {"samples", job->samples}}).dump() + "\n\n";
          if (!sink.write(event.data(), event.size())) return false;
        }
        if (job->status != JobStatus::running) {
          json payload = {{"status", std::string(to_string(job->status))}};
          if (job->status == JobStatus::done) payload["result"] = job->result;
          if (job->status == JobStatus::failed) payload["error"] = job->error;
          const std::string event = "event: done\ndata: " + payload.dump() + "\n\n";
          sink.write(event.data(), event.size());
          sink.done();
        }
        return true;
      });
    });

    auto forward = [this](const httplib::Request& req, httplib::Response& res) {
      const Response r = route(req.method, req.path, req.body);
      res.status = r.status;
      res.set_content(r.body, r.content_type);
    };
    server.Get(R"(/api/.*)", forward);
    server.Post(R"(/api/.*)", forward);
    server.Delete(R"(/api/.*)", forward);

    if (!options.static_dir.empty()) server.set_mount_point("/", options.static_dir);
  }
};

Service::Service(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {
  impl_->install_routes();
}

Service::~Service() { stop(); }

Response Service::handle(std::string_view method, std::string_view path, const std::string& body) {
  return impl_->route(method, path, body);
}

int Service::bind() {
  if (impl_->options.port == 0) return impl_->server.bind_to_any_port(impl_->options.host);
  return impl_->server.bind_to_port(impl_->options.host, impl_->options.port) ? impl_->options.port : -1;
}

bool Service::listen() { return impl_->server.listen_after_bind(); }

void Service::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace chainforge::service
