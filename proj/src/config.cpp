#include "qkd/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qkd/laser.hpp"

namespace qkd {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  size_t pos = 0;
  double x;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not a number: '" + v + "'");
  }
  if (pos != v.size())
    throw ConfigError("config key '" + key + "': trailing junk in '" + v + "'");
  return x;
}

int parse_int(const std::string& key, const std::string& v) {
  double x = parse_double(key, v);
  if (x != std::floor(x))
    throw ConfigError("config key '" + key + "': expected an integer");
  return static_cast<int>(x);
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_double(key, item));
  }
  return out;
}

}  // namespace

double characterise_q(double visibility, PhaseModel model) {
  if (model == PhaseModel::DeltaMix) return q_from_visibility(visibility);
  if (visibility <= 0.0) return 1.0;
  if (visibility >= 1.0) return 0.0;
  // Wrapped normal whose squared first circular moment reproduces the
  // visibility; its extractable uniform component sets q.
  double sigma = std::sqrt(-std::log(visibility));
  return PhaseDistribution::wrapped_normal(sigma).randomised_weight();
}

double RunConfig::q_for(PhaseModel m) const {
  if (has_q) return q;
  return characterise_q(visibility, m);
}

std::vector<double> RunConfig::sweep_q_values() const {
  if (!sweep_q.empty()) return sweep_q;
  if (has_q) return {q};
  return {q_for(PhaseModel::WrappedNormal), q_for(PhaseModel::DeltaMix), 1.0};
}

RunConfig parse_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": empty key");
    if (kv.count(key))
      throw ConfigError("config: duplicate key '" + key + "'");
    kv[key] = val;
  }

  RunConfig cfg;
  for (const auto& [key, val] : kv) {
    if (key == "laser.visibility") {
      cfg.has_visibility = true;
      cfg.visibility = parse_double(key, val);
    } else if (key == "laser.q") {
      cfg.has_q = true;
      cfg.q = parse_double(key, val);
    } else if (key == "protocol.mu_signal") {
      cfg.protocol.mu_signal = parse_double(key, val);
    } else if (key == "protocol.decoys") {
      cfg.protocol.decoys = parse_list(key, val);
    } else if (key == "protocol.priors") {
      auto pr = parse_list(key, val);
      if (pr.size() != 3)
        throw ConfigError("protocol.priors: expected 3 comma-separated values");
      std::copy(pr.begin(), pr.end(), cfg.protocol.priors.begin());
    } else if (key == "protocol.attenuation_db_per_km") {
      cfg.protocol.atten_db_per_km = parse_double(key, val);
    } else if (key == "protocol.t_x") {
      cfg.protocol.t_x = parse_double(key, val);
    } else if (key == "truncation.d") {
      cfg.keyrate.d = parse_int(key, val);
    } else if (key == "truncation.n") {
      cfg.keyrate.n_max = parse_int(key, val);
    } else if (key == "truncation.n_blocks") {
      cfg.keyrate.n_blocks = parse_int(key, val);
    } else if (key == "truncation.d_oracle") {
      cfg.d_oracle = parse_int(key, val);
    } else if (key == "keyrate.f_ec") {
      cfg.keyrate.f_ec = parse_double(key, val);
    } else if (key == "keyrate.entropy_blocks") {
      cfg.keyrate.entropy_blocks.clear();
      for (double b : parse_list(key, val)) {
        if (b != std::floor(b) || b < 0)
          throw ConfigError("keyrate.entropy_blocks: expected block indices");
        cfg.keyrate.entropy_blocks.push_back(static_cast<int>(b));
      }
    } else if (key == "solver.fw_max_iterations") {
      cfg.keyrate.fw.max_iterations = parse_int(key, val);
    } else if (key == "solver.fw_rel_tol") {
      cfg.keyrate.fw.rel_tol = parse_double(key, val);
    } else if (key == "sweep.distances_km") {
      cfg.sweep_distances_km = parse_list(key, val);
    } else if (key == "sweep.q_values") {
      cfg.sweep_q = parse_list(key, val);
    } else if (key == "output.path") {
      cfg.out_path = val;
    } else {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }

  if (cfg.has_visibility == cfg.has_q)
    throw ConfigError(
        "config: exactly one of laser.visibility / laser.q is required");
  if (cfg.has_visibility && (cfg.visibility < 0.0 || cfg.visibility > 1.0))
    throw ConfigError("laser.visibility outside [0,1]");
  if (cfg.has_q && (cfg.q < 0.0 || cfg.q > 1.0))
    throw ConfigError("laser.q outside [0,1]");
  if (cfg.protocol.mu_signal <= 0.0)
    throw ConfigError("protocol.mu_signal must be positive");
  if (cfg.protocol.decoys.empty())
    throw ConfigError("protocol.decoys must be non-empty");
  for (double m : cfg.protocol.decoys)
    if (m < 0.0) throw ConfigError("protocol.decoys must be non-negative");
  double prior_sum = 0.0;
  for (double p : cfg.protocol.priors) {
    if (p < 0.0) throw ConfigError("protocol.priors must be non-negative");
    prior_sum += p;
  }
  if (std::abs(prior_sum - 1.0) > 1e-9)
    throw ConfigError("protocol.priors must sum to 1");
  if (cfg.protocol.t_x <= 0.0 || cfg.protocol.t_x >= 1.0)
    throw ConfigError("protocol.t_x must lie in (0,1)");
  if (cfg.keyrate.n_max < 1 || cfg.keyrate.d < cfg.keyrate.n_max)
    throw ConfigError("truncation: require d >= n >= 1");
  if (cfg.keyrate.n_blocks < 1)
    throw ConfigError("truncation.n_blocks must be >= 1");
  if (cfg.keyrate.f_ec < 1.0)
    throw ConfigError("keyrate.f_ec must be >= 1");
  for (double dist : cfg.sweep_distances_km)
    if (dist < 0.0) throw ConfigError("sweep.distances_km must be >= 0");
  for (double qv : cfg.sweep_q)
    if (qv < 0.0 || qv > 1.0) throw ConfigError("sweep.q_values outside [0,1]");

  std::string canon;
  for (const auto& [key, val] : kv) canon += key + "=" + val + "\n";
  cfg.canonical = canon;
  cfg.hash = fnv1a_hex(canon);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string fnv1a_hex(const std::string& data) {
  unsigned long long h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", h);
  return buf;
}

CsvWriter::CsvWriter(std::string path, const std::string& config_hash)
    : path_(std::move(path)) {
  buf_ = "# config_hash=" + config_hash + "\n";
}

void CsvWriter::header(const std::vector<std::string>& columns) {
  row(columns);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) buf_ += ',';
    buf_ += quote(cells[i]);
  }
  buf_ += "\r\n";
}

void CsvWriter::close() {
  if (path_ == "-") {
    std::fwrite(buf_.data(), 1, buf_.size(), stdout);
    std::fflush(stdout);
    return;
  }
  std::ofstream out(path_, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path_);
  out.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path_);
}

std::string CsvWriter::num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string CsvWriter::quote(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace qkd
