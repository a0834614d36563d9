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

#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "hilo/dataset.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int status = -1;
  std::string out;
};

Result sh(const std::string& args) {
  const std::string cmd = std::string(HILO_CLI) + " " + args + " 2>&1";
  Result r;
  FILE* p = ::popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf{};
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), p)) r.out.append(buf.data(), n);
  const int rc = ::pclose(p);
  r.status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hilo_cli_" + std::to_string(::getpid()) + "_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

std::string config(const std::string& name) { return std::string(HILO_CONFIG_DIR) + "/" + name; }

int free_port() {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr);
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  ::close(fd);
  return ntohs(addr.sin_port);
}

}  // namespace

TEST_CASE("generate-dataset writes a loadable file") {
  const fs::path dir = scratch("gen");
  const Result r = sh("generate-dataset --out " + (dir / "d.jsonl").string() + " --seed 4 --scenes 2 --frames 60");
  CHECK(r.status == 0);
  const auto scenes = hilo::load_dataset((dir / "d.jsonl").string());
  CHECK(scenes.size() == 2);
  CHECK(scenes[0].frames.size() == 60);
  fs::remove_all(dir);
}

TEST_CASE("compare prints one row per strategy") {
  const fs::path dir = scratch("cmp");
  const Result r = sh("compare --config " + config("default.json") + " --out " + dir.string());
  REQUIRE(r.status == 0);
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  for (const char* col : {"strategy", "bandwidth", "f1", "cost", "p50_fresh"}) CHECK(line.find(col) != std::string::npos);
  int rows = 0;
  while (std::getline(lines, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == 5);
  const json all = read_json(dir / "compare.json");
  REQUIRE(all.size() == 5);
  for (const char* s : {"mpeg", "glimpse_like", "dds_like", "cloudseg_like", "vpaas"}) {
    CHECK(fs::exists(dir / s / "metrics.json"));
    CHECK(fs::exists(dir / s / "traces.jsonl"));
  }

  // report rebuilds the same table from the files.
  const Result rep = sh("report " + (dir / "compare.json").string());
  CHECK(rep.status == 0);
  CHECK(rep.out == r.out);
  fs::remove_all(dir);
}

TEST_CASE("run is deterministic for a fixed seed") {
  const fs::path a = scratch("run_a");
  const fs::path b = scratch("run_b");
  REQUIRE(sh("run --config " + config("outage.json") + " --seed 5 --out " + a.string()).status == 0);
  REQUIRE(sh("run --config " + config("outage.json") + " --seed 5 --out " + b.string()).status == 0);
  CHECK(read_json(a / "metrics.json") == read_json(b / "metrics.json"));
  std::ifstream ta(a / "traces.jsonl"), tb(b / "traces.jsonl");
  std::stringstream sa, sb;
  sa << ta.rdbuf();
  sb << tb.rdbuf();
  CHECK(sa.str() == sb.str());
  CHECK_FALSE(sa.str().empty());

  const fs::path c = scratch("run_c");
  REQUIRE(sh("run --config " + config("outage.json") + " --seed 6 --out " + c.string()).status == 0);
  CHECK(read_json(a / "metrics.json") != read_json(c / "metrics.json"));
  for (const auto& p : {a, b, c}) fs::remove_all(p);
}

TEST_CASE("config errors exit nonzero with the field") {
  const fs::path dir = scratch("bad");
  std::ofstream(dir / "bad.json") << R"({"strategy": "h264", "hitl": {"eta": -1}})";
  const Result r = sh("run --config " + (dir / "bad.json").string() + " --out " + dir.string());
  CHECK(r.status == 2);
  CHECK(r.out.find("strategy") != std::string::npos);
  CHECK(r.out.find("hitl.eta") != std::string::npos);
  CHECK(sh("run --config /nonexistent.json").status != 0);
  CHECK(sh("no-such-command").status != 0);
  fs::remove_all(dir);
}

TEST_CASE("serve accepts experiments") {
  const int port = free_port();
  const pid_t pid = ::fork();
  REQUIRE(pid >= 0);
  if (pid == 0) {
    ::execl(HILO_CLI, HILO_CLI, "serve", "--port", std::to_string(port).c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  httplib::Client client("127.0.0.1", port);
  httplib::Result res;
  for (int i = 0; i < 200 && !res; ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(25));
    res = client.Get("/policies");
  }
  REQUIRE(res);
  CHECK(res->status == 200);
  const json cfg = {{"dataset", {{"spec", {{"frames", 300}}}}}};
  auto created = client.Post("/experiments", cfg.dump(), "application/json");
  REQUIRE(created);
  CHECK(created->status == 201);
  ::kill(pid, SIGTERM);
  int status = 0;
  ::waitpid(pid, &status, 0);
  CHECK(WIFEXITED(status));
  CHECK(WEXITSTATUS(status) == 0);
}
