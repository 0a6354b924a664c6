#pragma once

#include <unistd.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "alphaforge/evaluation.hpp"
#include "alphaforge/executor.hpp"
#include "alphaforge/panel.hpp"
#include "alphaforge/program.hpp"
#include "alphaforge/text_format.hpp"

namespace testing {

using namespace alphaforge;

inline std::filesystem::path source_dir() { return ALPHAFORGE_SOURCE_DIR; }

/// Program from listing text; missing components get a harmless filler.
inline AlphaProgram program(const std::string& predict, const std::string& update = "  s9 = s9 + s9\n",
                            const std::string& setup = "  s8 = const(0.000000)\n") {
  return parse_alpha_text("def Setup():\n" + setup + "def Predict():\n" + predict + "def Update():\n" + update);
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("alphaforge_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Straightforward two-pass sample Pearson correlation.
inline double naive_pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

/// All predictions of a run (train, then valid, then test) for bitwise comparison.
inline std::vector<double> all_predictions(const AlphaRun& run) {
  std::vector<double> out = run.train.data;
  out.insert(out.end(), run.valid.data.begin(), run.valid.data.end());
  out.insert(out.end(), run.test.data.begin(), run.test.data.end());
  return out;
}

inline bool bit_identical(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
  }
  return true;
}

inline std::shared_ptr<const MarketPanel> synthetic(std::size_t k, std::size_t t, std::uint64_t seed,
                                                    SignalSpec signal = {}) {
  return std::make_shared<MarketPanel>(generate_synthetic_panel(k, t, signal, seed));
}

}  // namespace testing
