// Acceptance suite: runs every theory-versus-simulation criterion at its
// stated tolerance and exits nonzero if any criterion fails.
//
//   dynetrack_acceptance [--only 1,3,7] [--seed N] [--threads N]

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>

#include "dynetrack/validation.hpp"

int main(int argc, char** argv) {
  dynetrack::ValidationOptions options;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--only" && i + 1 < argc) {
      std::stringstream list(argv[++i]);
      for (std::string item; std::getline(list, item, ',');) options.criteria.push_back(std::stoi(item));
    } else if (arg == "--seed" && i + 1 < argc) {
      options.seed = std::stoull(argv[++i]);
    } else if (arg == "--threads" && i + 1 < argc) {
      options.threads = static_cast<unsigned>(std::stoul(argv[++i]));
    } else {
      std::cerr << "usage: dynetrack_acceptance [--only LIST] [--seed N] [--threads N]\n";
      return 2;
    }
  }
  options.progress = [](const std::string& msg) { std::cerr << "... " << msg << std::endl; };

  const auto results = dynetrack::run_validation_suite(options);
  dynetrack::print_validation_report(std::cout, results);
  for (const auto& s : dynetrack::summarize(results)) {
    if (!s.passed) return EXIT_FAILURE;
  }
  return EXIT_SUCCESS;
}
