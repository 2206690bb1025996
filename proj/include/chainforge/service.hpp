#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>

#include "chainforge/io.hpp"

namespace chainforge::service {

struct ServiceOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string static_dir;               // served at "/" when non-empty
  std::size_t async_threshold = 1000;   // disorder runs above this go to the job table
  std::size_t worker_threads = 0;       // per disorder run; 0 = default_worker_count()
};

struct Response {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

// Local HTTP facade over the core.
//
//   GET    /api/health
//   GET    /api/presets
//   POST   /api/spectrum
//   POST   /api/solve
//   POST   /api/eigensystem     couplings in, eigenvalues and eigenvectors out
//   POST   /api/evolve
//   POST   /api/disorder        200 with a report, or 202 with a job id
//   GET    /api/jobs/{id}       job status, result once done
//   GET    /api/jobs/{id}/events  server-sent progress events
//   DELETE /api/jobs/{id}       cancel
//
// Failures carry {"code", "message", "detail"} with code one of
// invalid_spectrum, solver_overflow, eigensolver_failure, bad_request.
class Service {
 public:
  explicit Service(ServiceOptions options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Routes a request without going through a socket. Event streams are not
  // available here.
  Response handle(std::string_view method, std::string_view path, const std::string& body);

  // Binds to options.port (0 picks a free port) and returns the bound port,
  // or -1 on failure.
  int bind();
  // Serves until stop(); call bind() first.
  bool listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// The four reference chains (N = 31): linear A = 7, linear shifted by C = 6,
// inverted quadratic, inverted quadratic shifted by C = 28.
io::json presets();

}  // namespace chainforge::service
