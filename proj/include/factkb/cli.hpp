#pragma once
// Command-line front end:
//
//   factkb stats --kb F
//   factkb synth entity-wiki|evidence|walk --kb F [--descriptions F] ...
//   factkb dataset prepare --format NAME --in F --out F [--drop-nei] ...
//   factkb dataset verify --train F --dev F --test F [--expected A,B,C]
//   factkb eval classify --gold F --pred F [--group-by subset]
//   factkb eval correlate --gold F --pred F [--binary] [--ablation]
//
// Exit status: 0 success, 1 domain error, 2 usage error.

#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "factkb/corpus.hpp"
#include "factkb/masking.hpp"

namespace CLI {
class App;
}

namespace factkb::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsage = 2;

struct RunConfig {
  std::vector<std::string> subcommand;
  std::string config_path;
  unsigned workers = 1;

  std::string kb_path;
  bool add_inverse = false;
  std::string descriptions_path;
  std::string output_path;

  SynthConfig synth;
  // Unset: a seed is drawn from std::random_device and reported.
  std::optional<std::uint64_t> seed;
  bool with_replacement = false;
  bool without_replacement = false;
  MaskOptions mask;

  std::string format;
  std::string input_path;
  std::string input_type = "auto";
  std::string manifest_path;
  bool drop_nei = false;
  std::string exclude_subset;
  std::string split = "all";

  std::string train_path;
  std::string dev_path;
  std::string test_path;
  std::string expected_counts;

  std::string gold_path;
  std::string pred_path;
  std::string group_by;
  bool binary_scores = false;
  bool ablation = false;
  std::string p_value = "t";
};

// Every long flag the CLI accepts, each bound to one RunConfig field.
const std::vector<std::string>& run_config_flags();

// Builds the parser with every option bound into `config`.
std::unique_ptr<CLI::App> build_app(RunConfig& config);

// Parses and executes. argv[0] is the program name.
int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace factkb::cli
