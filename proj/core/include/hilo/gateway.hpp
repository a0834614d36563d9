/* Copyright 2026 The hilo Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <memory>
#include <string>

namespace hilo {

struct GatewayOptions {
  std::string host = "127.0.0.1";
  /// 0 picks HILO_PORT from the environment, or 8080 when unset.
  int port = 0;
  /// Directory served at / (the annotator UI build), optional.
  std::string static_dir;
};

/// Port from HILO_PORT, or `fallback`.
int port_from_env(int fallback = 8080);

/// HTTP/JSON front end: datasets, experiments, the event stream, annotation
/// tasks and live controls.
class Gateway {
 public:
  explicit Gateway(GatewayOptions opts = {});
  ~Gateway();
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  /// Binds the socket and returns the bound port (useful with port -1,
  /// which binds any free port).
  int bind();
  /// Serves on the calling thread until stop().
  void serve();
  /// bind() plus serve() on a background thread.
  int start();
  void stop();
  int port() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace hilo
