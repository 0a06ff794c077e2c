#include <CLI11.hpp>

#include <iostream>

#include "d4gr/domains.hpp"

int main(int argc, char** argv) {
  CLI::App app{"TaskNet linter"};
  std::vector<std::string> paths;
  app.add_option("--domain", paths, "TaskNet file(s)")->required();
  CLI11_PARSE(app, argc, argv);
  int status = 0;
  for (const auto& path : paths) {
    try {
      const auto report = d4gr::lint_domain(d4gr::load_bundle_file(path));
      for (const auto& w : report.warnings) std::cout << path << ": warning: " << w << "\n";
      if (report.empty()) std::cout << path << ": ok\n";
      else status = std::max(status, 1);
    } catch (const std::exception& e) {
      std::cerr << path << ": error: " << e.what() << "\n";
      status = 2;
    }
  }
  return status;
}
