#pragma once

#include <string>

namespace httplib {
class Server;
}

namespace mlmrt {

struct ServiceOptions {
  std::string static_dir;  // served at "/" when non-empty
  int max_replicates = 10000;
  int max_threads = 0;     // simulation threads per request; 0 = hardware concurrency
};

// Installs the JSON API routes, CORS headers and error mapping on `server`.
// Handlers hold no state between requests.
void install_routes(httplib::Server& server, const ServiceOptions& options = {});

}  // namespace mlmrt
