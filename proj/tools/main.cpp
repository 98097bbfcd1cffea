#include <csignal>
#include <iostream>

#include "coinmath/cli.hpp"
#include "coinmath/util.hpp"

namespace {

extern "C" void on_interrupt(int) {
  coinmath::request_cancellation();
  // A second Ctrl-C terminates immediately.
  std::signal(SIGINT, SIG_DFL);
}

}  // namespace

int main(int argc, char** argv) {
  std::signal(SIGINT, on_interrupt);
  coinmath::set_log_sink([](coinmath::LogLevel level, std::string_view message) {
    if (level >= coinmath::LogLevel::warn) std::cerr << "warning: " << message << "\n";
  });
  return coinmath::cli::dispatch(argc, argv, std::cout, std::cerr);
}
