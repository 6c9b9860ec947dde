#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "factkb/kb_store.hpp"

namespace fixtures {

inline factkb::KnowledgeBase kb_from(const std::string& tsv, bool add_inverse = false) {
  std::istringstream in(tsv);
  factkb::LoadOptions options;
  options.add_inverse = add_inverse;
  return factkb::load_kb(in, options);
}

inline const char* kKepler =
    "Johannes Kepler\tborn in\tItaly\n"
    "Johannes Kepler\tauthor of\tAstronomia nova\n";

// Complete digraph on 4 nodes with a single relation.
inline std::string complete_digraph(int nodes, const std::string& relation = "links to") {
  std::string out;
  for (int i = 0; i < nodes; ++i) {
    for (int j = 0; j < nodes; ++j) {
      if (i != j) out += "n" + std::to_string(i) + "\t" + relation + "\tn" + std::to_string(j) + "\n";
    }
  }
  return out;
}

// Random multigraph with `triples` edges over `entities` names and `relations`
// relation names; deterministic for a seed.
inline std::string random_kb(std::size_t entities, std::size_t relations, std::size_t triples,
                             std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::string out;
  for (std::size_t t = 0; t < triples; ++t) {
    out += "entity " + std::to_string(gen() % entities) + "\trelation " +
           std::to_string(gen() % relations) + "\tentity " + std::to_string(gen() % entities) +
           "\n";
  }
  return out;
}

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("factkb-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name, const std::string& content) const {
    const auto p = path_ / name;
    std::ofstream(p, std::ios::binary) << content;
    return p.string();
  }
  std::string path(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace fixtures
