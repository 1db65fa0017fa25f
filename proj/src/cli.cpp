#include "mlmrt/cli.hpp"

#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "mlmrt/kernels.hpp"
#include "mlmrt/report.hpp"
#include "mlmrt/service.hpp"
#include "mlmrt/tables.hpp"

#include <httplib.h>

namespace mlmrt {

namespace {

httplib::Server* g_server = nullptr;

void stop_server(int) {
  if (g_server) g_server->stop();
}

RunConfig read_config(const std::string& path) {
  if (path == "-") {
    std::stringstream ss;
    ss << std::cin.rdbuf();
    return parse_config_text(ss.str());
  }
  return load_config(path);
}

struct Output {
  bool json = false;
  std::string file;
};

void emit(const json& report, const Output& o, std::ostream& out) {
  if (!o.file.empty()) {
    std::ofstream f(o.file);
    if (!f) throw ConfigError("output", "cannot write " + o.file);
    f << report.dump(2) << '\n';
  }
  if (o.json) out << report.dump(2) << '\n';
  else out << report.value("sentence", "") << '\n';
}

void add_output(CLI::App* cmd, Output& o) {
  cmd->add_flag("--json", o.json, "Print the full JSON report");
  cmd->add_option("-o,--output", o.file, "Also write the JSON report to FILE");
}

int print_sweep(std::ostream& out) {
  out << "M";
  for (TestVariant v : {TestVariant::Chi, TestVariant::HotellingN, TestVariant::HotellingN1,
                        TestVariant::HotellingNq1})
    out << ',' << to_string(v);
  out << '\n';
  std::vector<std::vector<int>> cols;
  for (TestVariant v : {TestVariant::Chi, TestVariant::HotellingN, TestVariant::HotellingN1,
                        TestVariant::HotellingNq1})
    cols.push_back(level_sweep(v));
  for (std::size_t m = 0; m < cols[0].size(); ++m) {
    out << m + 1;
    for (const auto& c : cols) out << ',' << c[m];
    out << '\n';
  }
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sample size and power for multi-level micro-randomized trials", "mlmrt"};
  app.set_version_flag("--version", std::string(engine_version()));
  app.require_subcommand(1);

  std::string config_path;
  std::optional<int> n;
  Output output;
  std::function<int()> action;

  auto sizing_cmd = [&](const char* name, const char* help, ResultKind kind) {
    CLI::App* cmd = app.add_subcommand(name, help);
    cmd->add_option("config", config_path, "RunConfig JSON file ('-' for stdin)")->required();
    if (kind != ResultKind::SampleSize) cmd->add_option("-n,--n", n, "Sample size (overrides SS)");
    add_output(cmd, output);
    cmd->callback([&, kind] {
      action = [&, kind] {
        RunConfig cfg = read_config(config_path);
        cfg.result = kind;
        if (n) cfg.SS = *n;
        if (kind != ResultKind::SampleSize && !cfg.SS)
          throw ConfigError("SS", "required (set it in the config or pass --n)");
        emit(sizing_report(cfg), output, out);
        return 0;
      };
    });
  };
  sizing_cmd("samplesize", "Minimal N attaining the target power or coverage",
             ResultKind::SampleSize);
  sizing_cmd("power", "Power at a given N", ResultKind::Power);
  sizing_cmd("coverage", "Coverage probability at a given N", ResultKind::Coverage);

  std::optional<int> replicates, threads;
  std::optional<std::uint64_t> seed;
  CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo power or coverage");
  sim->add_option("config", config_path, "RunConfig JSON file ('-' for stdin)")->required();
  sim->add_option("-n,--n", n, "Sample size (default: SS, else the computed sample size)");
  sim->add_option("-r,--replicates", replicates, "Monte Carlo replicates");
  sim->add_option("--seed", seed, "Random seed");
  sim->add_option("-j,--threads", threads, "Worker threads");
  add_output(sim, output);
  sim->callback([&] {
    action = [&] {
      RunConfig cfg = read_config(config_path);
      if (replicates) {
        if (*replicates < 1) throw ConfigError("replicates", "must be >= 1");
        cfg.replicates = *replicates;
      }
      if (seed) cfg.seed = *seed;
      if (threads) {
        if (*threads < 1) throw ConfigError("threads", "must be >= 1");
        cfg.threads = *threads;
      }
      emit(simulation_report(cfg, n), output, out);
      return 0;
    };
  });

  std::string csv_path, followup_path;
  CLI::App* ana = app.add_subcommand("analyze", "Fit the working model to trial data");
  ana->add_option("csv", csv_path, "participant,day,occasion,available,level,outcome CSV")
      ->required();
  ana->add_option("-c,--config", config_path, "RunConfig describing the trial design")
      ->required();
  ana->add_option("--size-followup", followup_path,
                  "RunConfig for a follow-up trial sized from the estimated effects");
  add_output(ana, output);
  ana->callback([&] {
    action = [&] {
      const RunConfig cfg = read_config(config_path);
      std::optional<RunConfig> followup;
      if (!followup_path.empty()) followup = read_config(followup_path);
      std::ifstream csv(csv_path);
      if (!csv) throw Error(ErrorKind::CsvSchema, "cannot read " + csv_path);
      const json report = analysis_report(csv, cfg, followup);
      emit(report, output, out);
      if (!output.json && report.contains("followup"))
        out << report["followup"].value("sentence", "") << '\n';
      return 0;
    };
  });

  std::string table_id;
  bool mc = false;
  CLI::App* tab = app.add_subcommand("tables", "Reproduce a sizing table as CSV");
  tab->add_option("id", table_id, "1, 2, 3, 4, C5, C6, C7, C8, or fig3")->required();
  tab->add_flag("--mc", mc, "Add Monte Carlo columns");
  tab->add_option("-r,--replicates", replicates, "Monte Carlo replicates (default 1000)");
  tab->add_option("--seed", seed, "Random seed");
  tab->add_option("-j,--threads", threads, "Worker threads");
  tab->callback([&] {
    action = [&] {
      if (table_id == "fig3") return print_sweep(out);
      const TableSpec spec = table_spec(table_id);
      auto rows = compute_table(spec);
      if (mc) {
        McSettings s;
        if (replicates) s.replicates = *replicates;
        if (seed) s.seed = *seed;
        if (threads) s.threads = *threads;
        add_monte_carlo(spec, rows, s);
      }
      write_table_csv(out, spec, rows);
      return 0;
    };
  });

  int port = 8080;
  std::string host = "127.0.0.1", static_dir;
  CLI::App* srv = app.add_subcommand("serve", "Run the HTTP JSON API");
  srv->add_option("-p,--port", port, "Port");
  srv->add_option("--host", host, "Bind address");
  srv->add_option("--static-dir", static_dir, "Directory of UI assets served at /");
  srv->callback([&] {
    action = [&] {
      httplib::Server server;
      // httplib defaults to SO_REUSEPORT, which would let a second server
      // silently share a port that is already in use.
      server.set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
      });
      install_routes(server, {static_dir});
      if (!server.bind_to_port(host, port)) {
        err << "mlmrt: cannot bind " << host << ":" << port << '\n';
        return 4;
      }
      err << "mlmrt " << engine_version() << " (" << kernels::active_isa() << ") listening on "
          << host << ":" << port << '\n';
      g_server = &server;
      std::signal(SIGINT, stop_server);
      std::signal(SIGTERM, stop_server);
      server.listen_after_bind();
      g_server = nullptr;
      return 0;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    return action();
  } catch (const Error& e) {
    err << "mlmrt: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return exit_code(e.kind());
  }
}

}  // namespace mlmrt
