// crack-sim: experiment driver and environment server over the C API.

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "crack/crack.h"

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(crack_status s, const std::string& what) {
  if (s != CRACK_OK)
    throw Failure(what + ": " + crack_status_name(s) + ": " + crack_last_error());
}

struct CString {
  char* p = nullptr;
  ~CString() { crack_string_free(p); }
  std::string str() const { return p ? std::string(p) : std::string(); }
};

using ConfigPtr = std::unique_ptr<crack_config, decltype(&crack_config_free)>;

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<uint64_t> seed;
  std::optional<uint64_t> trials;
  std::string out;
};

ConfigPtr build_config(const Common& c) {
  crack_config* raw = nullptr;
  if (c.config_path.empty())
    check(crack_config_new(&raw), "default config");
  else
    check(crack_config_load(c.config_path.c_str(), &raw), "loading " + c.config_path);
  ConfigPtr cfg(raw, &crack_config_free);
  for (const auto& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw Failure("--set expects key=value, got '" + kv + "'");
    const std::string key = kv.substr(0, eq);
    const std::string value = kv.substr(eq + 1);
    check(crack_config_set(cfg.get(), key.c_str(), value.c_str()), "--set " + key);
  }
  check(crack_config_validate(cfg.get()), "config");
  return cfg;
}

void run_defaults(const crack_config* cfg, const Common& c, uint64_t& seed, uint64_t& trials) {
  check(crack_config_run_defaults(cfg, &seed, &trials), "config");
  if (c.seed) seed = *c.seed;
  if (c.trials) trials = *c.trials;
}

void emit(const Common& c, const std::string& text) {
  if (c.out.empty() || c.out == "-") {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream f(c.out, std::ios::binary);
  if (!f) throw Failure("cannot open " + c.out + " for writing");
  f << text;
  if (!f.flush()) throw Failure("write to " + c.out + " failed");
}

void add_common(CLI::App* sub, Common& c, bool with_out = true) {
  sub->add_option("-c,--config", c.config_path, "JSON scenario file (defaults built in)")
      ->check(CLI::ExistingFile);
  sub->add_option("--set", c.overrides, "Override a config field, key=value (repeatable)")
      ->take_all();
  sub->add_option("--seed", c.seed, "Master seed (default: run.seed)");
  sub->add_option("--trials", c.trials, "Monte Carlo trials (default: run.trials)")
      ->check(CLI::PositiveNumber);
  if (with_out) sub->add_option("-o,--out", c.out, "Output file (default: stdout)");
}

std::vector<const char*> c_strings(const std::vector<std::string>& v) {
  std::vector<const char*> out;
  for (const auto& s : v) out.push_back(s.c_str());
  return out;
}

std::string run_sweep(const Common& c, const std::string& variable, const std::vector<int>& values,
                      const std::vector<std::string>& strategies,
                      const std::vector<std::string>& precoders) {
  auto cfg = build_config(c);
  uint64_t seed = 0, trials = 0;
  run_defaults(cfg.get(), c, seed, trials);
  const auto s = c_strings(strategies);
  const auto p = c_strings(precoders);
  const crack_experiment spec{variable.c_str(), values.empty() ? nullptr : values.data(),
                              values.size(),    s.data(),
                              s.size(),         p.data(),
                              p.size(),         trials,
                              seed};
  CString csv;
  check(crack_sweep_csv(cfg.get(), &spec, &csv.p), "sweep");
  return csv.str();
}

// ---- serve-env -----------------------------------------------------------

void serve_stream(const crack_config* cfg, std::istream& in, std::ostream& out) {
  crack_session* raw = nullptr;
  check(crack_session_new(cfg, &raw), "session");
  std::unique_ptr<crack_session, decltype(&crack_session_free)> session(raw, &crack_session_free);
  std::string line;
  while (!crack_session_closed(session.get()) && std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    CString reply;
    check(crack_session_handle(session.get(), line.c_str(), &reply.p), "session");
    out << reply.str() << '\n' << std::flush;
  }
}

bool send_all(int fd, const std::string& data) {
  size_t sent = 0;
  while (sent < data.size()) {
    const ssize_t n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    sent += static_cast<size_t>(n);
  }
  return true;
}

void serve_connection(const crack_config* cfg, int fd) {
  crack_session* raw = nullptr;
  if (crack_session_new(cfg, &raw) != CRACK_OK) {
    ::close(fd);
    return;
  }
  std::unique_ptr<crack_session, decltype(&crack_session_free)> session(raw, &crack_session_free);
  std::string buffer;
  char chunk[4096];
  while (!crack_session_closed(session.get())) {
    const ssize_t n = ::recv(fd, chunk, sizeof(chunk), 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    buffer.append(chunk, static_cast<size_t>(n));
    size_t nl;
    bool alive = true;
    while (alive && !crack_session_closed(session.get()) &&
           (nl = buffer.find('\n')) != std::string::npos) {
      std::string line = buffer.substr(0, nl);
      buffer.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      CString reply;
      if (crack_session_handle(session.get(), line.c_str(), &reply.p) != CRACK_OK) {
        alive = false;
        break;
      }
      alive = send_all(fd, reply.str() + "\n");
    }
    if (!alive) break;
  }
  ::close(fd);
}

void serve_tcp(ConfigPtr cfg, const std::string& host, int port, bool once) {
  const int listener = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listener < 0) throw Failure(std::string("socket: ") + std::strerror(errno));
  const int yes = 1;
  ::setsockopt(listener, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<uint16_t>(port));
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
    throw Failure("invalid IPv4 address '" + host + "'");
  if (::bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0 ||
      ::listen(listener, 16) < 0) {
    const std::string err = std::strerror(errno);
    ::close(listener);
    throw Failure("bind " + host + ":" + std::to_string(port) + ": " + err);
  }
  socklen_t len = sizeof(addr);
  ::getsockname(listener, reinterpret_cast<sockaddr*>(&addr), &len);
  std::cerr << "listening on " << host << ':' << ntohs(addr.sin_port) << std::endl;

  // Sessions share the immutable config; each connection gets its own env.
  const std::shared_ptr<crack_config> shared(cfg.release(), &crack_config_free);
  for (;;) {
    const int fd = ::accept(listener, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      ::close(listener);
      throw Failure(std::string("accept: ") + std::strerror(errno));
    }
    if (once) {
      serve_connection(shared.get(), fd);
      break;
    }
    std::thread([shared, fd] { serve_connection(shared.get(), fd); }).detach();
  }
  ::close(listener);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TDD multi-user MISO simulator for NR-RIS channel-reciprocity attacks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(crack_version()));

  // sweep
  Common sweep_opts;
  std::string variable = "n";
  std::vector<int> values;
  std::vector<std::string> strategies{"nr-blind"};
  std::vector<std::string> precoders{"mrt", "zf"};
  auto* sweep = app.add_subcommand("sweep", "Ergodic metrics over a parameter grid (CSV)");
  add_common(sweep, sweep_opts);
  sweep->add_option("--variable", variable, "Swept parameter")
      ->check(CLI::IsMember({"n", "m", "l", "none"}));
  sweep->add_option("--values", values, "Grid values (default: reference grid)")
      ->delimiter(',');
  sweep->add_option("--strategies", strategies, "Attack strategies")->delimiter(',');
  sweep->add_option("--precoders", precoders, "Precoders")->delimiter(',');

  // compare
  Common compare_opts;
  std::vector<std::string> compare_strategies{"none", "nr-blind", "nr-ha", "nd-ris",
                                              "dris1", "dris2", "dris3", "jammer"};
  std::vector<std::string> compare_precoders{"mrt", "zf"};
  auto* compare = app.add_subcommand("compare", "All strategies at one operating point (CSV)");
  add_common(compare, compare_opts);
  compare->add_option("--strategies", compare_strategies, "Attack strategies")->delimiter(',');
  compare->add_option("--precoders", compare_precoders, "Precoders")->delimiter(',');

  // histogram
  Common hist_opts;
  int num_configs = 100;
  auto* histogram =
      app.add_subcommand("histogram", "Per-configuration metrics for fixed NR-RIS draws (CSV)");
  add_common(histogram, hist_opts);
  histogram->add_option("--configs", num_configs, "Number of sampled configurations")
      ->check(CLI::PositiveNumber);

  // schedule
  Common sched_opts;
  std::string sched_strategy = "nr-blind";
  uint64_t sched_block = 0;
  auto* schedule =
      app.add_subcommand("schedule", "Dump the scattering matrices a strategy uses in a block");
  add_common(schedule, sched_opts);
  schedule->add_option("--strategy", sched_strategy, "Attack strategy");
  schedule->add_option("--block", sched_block, "Coherence block index");

  // serve-env
  Common serve_opts;
  std::optional<int> port;
  std::string host = "127.0.0.1";
  bool once = false;
  auto* serve = app.add_subcommand("serve-env", "Serve the environment line protocol");
  add_common(serve, serve_opts, false);
  serve->add_option("--tcp", port, "Listen on this TCP port (0: ephemeral); default stdio")
      ->check(CLI::Range(0, 65535));
  serve->add_option("--host", host, "Bind address for --tcp");
  serve->add_flag("--once", once, "Exit after the first TCP connection closes");

  // selfcheck
  Common self_opts;
  auto* selfcheck = app.add_subcommand("selfcheck", "Run the invariant suite");
  add_common(selfcheck, self_opts);

  // show-config
  Common show_opts;
  auto* show = app.add_subcommand("show-config", "Print the effective configuration as JSON");
  add_common(show, show_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sweep->parsed()) {
      emit(sweep_opts, run_sweep(sweep_opts, variable, values, strategies, precoders));
    } else if (compare->parsed()) {
      emit(compare_opts,
           run_sweep(compare_opts, "none", {}, compare_strategies, compare_precoders));
    } else if (histogram->parsed()) {
      auto cfg = build_config(hist_opts);
      uint64_t seed = 0, trials = 0;
      run_defaults(cfg.get(), hist_opts, seed, trials);
      CString csv;
      check(crack_histogram_csv(cfg.get(), num_configs, trials, seed, &csv.p), "histogram");
      emit(hist_opts, csv.str());
    } else if (schedule->parsed()) {
      auto cfg = build_config(sched_opts);
      uint64_t seed = 0, trials = 0;
      run_defaults(cfg.get(), sched_opts, seed, trials);
      CString text;
      check(crack_schedule_text(cfg.get(), sched_strategy.c_str(), seed, sched_block, &text.p),
            "schedule");
      emit(sched_opts, text.str());
    } else if (serve->parsed()) {
      auto cfg = build_config(serve_opts);
      if (port)
        serve_tcp(std::move(cfg), host, *port, once);
      else
        serve_stream(cfg.get(), std::cin, std::cout);
    } else if (selfcheck->parsed()) {
      auto cfg = build_config(self_opts);
      if (self_opts.seed) {
        const std::string s = std::to_string(*self_opts.seed);
        check(crack_config_set(cfg.get(), "run.seed", s.c_str()), "--seed");
      }
      CString report;
      int ok = 0;
      check(crack_selfcheck(cfg.get(), &report.p, &ok), "selfcheck");
      emit(self_opts, report.str());
      return ok ? 0 : 1;
    } else if (show->parsed()) {
      auto cfg = build_config(show_opts);
      CString text;
      check(crack_config_to_json(cfg.get(), &text.p), "config");
      emit(show_opts, text.str() + "\n");
    }
  } catch (const Failure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
