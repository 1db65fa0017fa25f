#include "mlmrt/service.hpp"

#include <algorithm>
#include <sstream>
#include <thread>

#include "mlmrt/report.hpp"

// After the Eigen headers: resolv.h, pulled in by httplib, defines `_res`.
#include <httplib.h>

namespace mlmrt {

namespace {

void send(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

int http_status(ErrorKind kind) { return exit_code(kind) == 2 ? 400 : 422; }

// Runs a handler body and maps failures onto JSON error responses.
template <class F>
void guarded(httplib::Response& res, F f) {
  try {
    send(res, 200, f());
  } catch (const Error& e) {
    send(res, http_status(e.kind()), error_json(e));
  } catch (const std::exception& e) {
    send(res, 500,
         {{"error", e.what()}, {"kind", "Internal"}, {"path", nullptr}, {"version", engine_version()}});
  }
}

RunConfig body_config(const httplib::Request& req) {
  if (req.body.empty()) throw ConfigError("", "request body must be a RunConfig JSON document");
  return parse_config_text(req.body);
}

int query_int(const httplib::Request& req, const char* key, int fallback) {
  if (!req.has_param(key)) return fallback;
  const std::string v = req.get_param_value(key);
  try {
    std::size_t used = 0;
    const int n = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return n;
  } catch (const std::exception&) {
    throw ConfigError(key, "expected an integer, got \"" + v + "\"");
  }
}

}  // namespace

void install_routes(httplib::Server& server, const ServiceOptions& options) {
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
  server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
    send(res, 200, {{"status", "ok"}, {"version", engine_version()}});
  });

  auto sizing = [](ResultKind kind) {
    return [kind](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        RunConfig cfg = body_config(req);
        cfg.result = kind;
        if (kind != ResultKind::SampleSize && !cfg.SS)
          throw ConfigError("SS", "required for this endpoint");
        return sizing_report(cfg);
      });
    };
  };
  server.Post("/api/samplesize", sizing(ResultKind::SampleSize));
  server.Post("/api/power", sizing(ResultKind::Power));
  server.Post("/api/coverage", sizing(ResultKind::Coverage));

  server.Post("/api/simulate", [options](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      RunConfig cfg = body_config(req);
      if (cfg.replicates > options.max_replicates)
        throw ConfigError("replicates",
                          "at most " + std::to_string(options.max_replicates) + " per request");
      int cap = options.max_threads;
      if (cap <= 0) cap = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
      cfg.threads = std::min(cfg.threads, cap);
      return simulation_report(cfg);
    });
  });

  auto curve = [](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      RunConfig cfg = demo_config();
      if (!req.body.empty()) cfg = parse_config_text(req.body);
      else if (req.has_param("config")) cfg = parse_config_text(req.get_param_value("config"));
      const int nmin = query_int(req, "nmin", 1);
      const int nmax = query_int(req, "nmax", std::max(nmin, 100));
      return power_curve_report(cfg, nmin, nmax);
    });
  };
  server.Get("/api/power-curve", curve);
  server.Post("/api/power-curve", curve);

  server.Post("/api/analyze", [](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      if (!req.is_multipart_form_data())
        throw ConfigError("", "expected multipart/form-data with fields \"csv\" and \"config\"");
      if (!req.has_file("csv")) throw ConfigError("csv", "missing form field");
      if (!req.has_file("config")) throw ConfigError("config", "missing form field");
      const RunConfig cfg = parse_config_text(req.get_file_value("config").content);
      std::optional<RunConfig> followup;
      if (req.has_file("followup"))
        followup = parse_config_text(req.get_file_value("followup").content);
      std::istringstream csv(req.get_file_value("csv").content);
      return analysis_report(csv, cfg, followup);
    });
  });

  if (!options.static_dir.empty() && !server.set_mount_point("/", options.static_dir))
    throw ConfigError("static-dir", "not a directory: " + options.static_dir);
}

}  // namespace mlmrt
