// Writes a procedurally generated infrared/visible dataset.
#include <cstdio>
#include <CLI11.hpp>
#include <fmt/format.h>

#include "sfd/core/error.hpp"
#include "sfd/imaging/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate a synthetic infrared/visible dataset (ir/, vis/, mask/)"};
  std::string out;
  int count = 8;
  std::int64_t height = 144, width = 144;
  std::uint64_t seed = 0;
  app.add_option("--out", out, "Dataset root")->required();
  app.add_option("-n,--count", count, "Number of pairs")->check(CLI::Range(1, 100000));
  app.add_option("--height", height, "Image height")->check(CLI::Range(8, 8192));
  app.add_option("--width", width, "Image width")->check(CLI::Range(8, 8192));
  app.add_option("--seed", seed, "Generator seed");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  try {
    sfd::imaging::write_synthetic_dataset(out, count, height, width, seed);
  } catch (const sfd::Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
  fmt::print("wrote {} pairs of {}x{} to {}\n", count, width, height, out);
  return 0;
}
