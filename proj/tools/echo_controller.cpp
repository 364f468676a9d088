// Minimal external controller for protocol tests: answers the handshake and
// returns zero controls every tick.
//
//   echo_controller [--proto V] [--close-after N] [--garbage-at N] [--stall-at N]

#include <chrono>
#include <cstdint>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

int main(int argc, char** argv) {
  CLI::App app{"Zero-control controller speaking the tick protocol"};
  std::int64_t proto = 1, close_after = -1, garbage_at = -1, stall_at = -1;
  app.add_option("--proto", proto, "Protocol version to announce");
  app.add_option("--close-after", close_after, "Exit after answering this many ticks");
  app.add_option("--garbage-at", garbage_at, "Send a malformed frame at this tick");
  app.add_option("--stall-at", stall_at, "Stop answering at this tick");
  CLI11_PARSE(app, argc, argv);

  std::string line;
  if (!std::getline(std::cin, line)) return 1;
  std::cout << nlohmann::json{{"anticarla_proto", proto}}.dump() << std::endl;

  std::int64_t answered = 0;
  while (std::getline(std::cin, line)) {
    const auto frame = nlohmann::json::parse(line, nullptr, false);
    if (frame.is_discarded() || frame.contains("end")) break;
    const auto tick = frame.value("tick", std::int64_t{-1});
    if (tick == stall_at) std::this_thread::sleep_for(std::chrono::seconds(5));
    if (tick == garbage_at) {
      std::cout << "{\"controls\": oops" << std::endl;
      continue;
    }
    std::cout << R"({"controls":{"throttle":0,"brake":0,"steer":0}})" << std::endl;
    if (++answered == close_after) break;
  }
  return 0;
}
