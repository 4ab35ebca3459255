#pragma once

// Run configuration: a flat text file of dotted keys (`section.key = value`,
// '#' comments), validated into a RunConfig, plus the canonical hash that
// stamps every CSV so outputs are traceable to their inputs.

#include <array>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "qkd/keyrate.hpp"
#include "qkd/protocol.hpp"

namespace qkd {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class PhaseModel { DeltaMix, WrappedNormal };

struct RunConfig {
  // Laser: exactly one of visibility / q is given in the file.  When
  // visibility is given, q is derived per phase model; when q is given
  // directly it applies to both models.
  bool has_visibility = false;
  double visibility = 0.0;
  bool has_q = false;
  double q = 1.0;

  ProtocolParams protocol;   // mu_signal, decoys, priors, attenuation, t_x
  KeyRateOptions keyrate;    // d, n_max, n_blocks, f_ec, FW options
  int d_oracle = 40;         // dense-diagonalisation cross-check cutoff

  std::vector<double> sweep_distances_km = {0, 25, 50, 75, 100};
  // q values swept; empty means "derive from the laser section": the
  // delta-mix q, the wrapped-normal q, and the ideal source q = 1.
  std::vector<double> sweep_q;

  std::string out_path;      // default output path; --out overrides

  std::string canonical;     // canonical key=value serialisation
  std::string hash;          // FNV-1a 64-bit hash of `canonical`, hex

  double q_for(PhaseModel m) const;      // resolves visibility/q per model
  std::vector<double> sweep_q_values() const;
};

// Parse a config file / pre-split key-value map.  Unknown keys, malformed
// values, and invariant violations throw ConfigError.
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

// Visibility -> q for each phase model (delta-mix: 1 - sqrt(V); wrapped
// normal: the q whose wrapped-normal visibility equals V).
double characterise_q(double visibility, PhaseModel model);

// FNV-1a 64-bit, lowercase hex.
std::string fnv1a_hex(const std::string& data);

// RFC-4180 CSV writer with a leading comment line carrying the config hash.
// All numbers are emitted with 17 significant digits.
class CsvWriter {
 public:
  CsvWriter(std::string path, const std::string& config_hash);
  void header(const std::vector<std::string>& columns);
  void row(const std::vector<std::string>& cells);
  void close();                 // flushes; throws on I/O error
  static std::string num(double v);
  static std::string quote(const std::string& s);

 private:
  std::string path_;
  std::string buf_;
};

}  // namespace qkd
