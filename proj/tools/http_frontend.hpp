// Copyright 2026 The BCIE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#ifndef BCIE_TOOLS_HTTP_FRONTEND_HPP
#define BCIE_TOOLS_HTTP_FRONTEND_HPP

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "bcie/bcie.h"

namespace httplib {
class Server;
}

namespace bcie_tools {

struct FrontendOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::optional<std::filesystem::path> ui_dir;
};

// HTTP shell over a bcie_service handle: /health and /api/* go to the
// service, everything else to the static UI bundle when one is mounted.
class HttpFrontend {
 public:
  HttpFrontend(bcie_service* svc, FrontendOptions opts);
  ~HttpFrontend();

  // Binds the listening socket; false when the port is taken.
  bool bind();
  int port() const { return port_; }
  bool ui_mounted() const { return ui_mounted_; }

  // Serves until stop(); in-flight requests finish before it returns.
  void run();
  void stop();

 private:
  bcie_service* svc_;
  FrontendOptions opts_;
  std::unique_ptr<httplib::Server> server_;
  int port_ = -1;
  bool ui_mounted_ = false;
};

}  // namespace bcie_tools

#endif  // BCIE_TOOLS_HTTP_FRONTEND_HPP
