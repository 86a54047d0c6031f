// Writes the eight-pocket NC suite used by the synthetic experiment.

#include <cstdio>
#include <filesystem>

#include "cycletime/io.hpp"
#include "cycletime/pockets.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: make_pockets <output-dir>\n");
    return 2;
  }
  const std::filesystem::path dir = argv[1];
  try {
    std::filesystem::create_directories(dir);
    for (const auto& p : cycletime::pockets::standard_suite()) {
      cycletime::io::write_file_atomic(dir / (p.name + ".nc"), cycletime::pockets::pocket_program(p));
      std::printf("%s\n", (dir / (p.name + ".nc")).string().c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
