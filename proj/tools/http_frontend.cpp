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


#include "http_frontend.hpp"

#include "httplib.h"

namespace bcie_tools {

namespace {

constexpr const char* kJson = "application/json; charset=utf-8";

void forward(bcie_service* svc, const httplib::Request& req, httplib::Response& res) {
  int status = 500;
  char* body = nullptr;
  if (bcie_service_handle(svc, req.method.c_str(), req.path.c_str(), req.body.c_str(), &status,
                          &body) != BCIE_OK) {
    res.status = 500;
    res.set_content(std::string(R"({"error":{"code":"internal","message":"service failure"}})"),
                    kJson);
    return;
  }
  res.status = status;
  res.set_content(body, kJson);
  bcie_string_free(body);
}

}  // namespace

HttpFrontend::HttpFrontend(bcie_service* svc, FrontendOptions opts)
    : svc_(svc), opts_(std::move(opts)), server_(std::make_unique<httplib::Server>()) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    forward(svc_, req, res);
  };
  // SO_REUSEADDR only: the library default also sets SO_REUSEPORT, which
  // would let a second server silently share a busy port.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  });
  server_->Get("/health", handler);
  server_->Get(R"(/api/.*)", handler);
  server_->Post(R"(/api/.*)", handler);
  if (opts_.ui_dir && std::filesystem::is_directory(*opts_.ui_dir))
    ui_mounted_ = server_->set_mount_point("/", opts_.ui_dir->string());
}

HttpFrontend::~HttpFrontend() = default;

bool HttpFrontend::bind() {
  if (opts_.port == 0) {
    port_ = server_->bind_to_any_port(opts_.host);
    return port_ > 0;
  }
  if (!server_->bind_to_port(opts_.host, opts_.port)) return false;
  port_ = opts_.port;
  return true;
}

void HttpFrontend::run() { server_->listen_after_bind(); }

void HttpFrontend::stop() { server_->stop(); }

}  // namespace bcie_tools
