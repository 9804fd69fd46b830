#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "apjac/jacobi.hpp"
#include "apjac/tower.hpp"

namespace apjac::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kNumericalError = 3, kVerificationFailed = 4 };

struct VerifyOptions {
  std::vector<std::string> checks;  // empty: all
  std::vector<double> z_samples;    // empty: -3 xi, -2 xi, 2 xi, 2.5 xi, 4 xi
  int blocks = 64;
  std::map<std::string, double> tolerances;
  std::vector<std::int64_t> translations{1, 2, 3};
};

struct BandsOptions {
  int level = -1;  // -1: tower depth
  std::optional<IndexRange> section;
};

struct MetricOptions {
  int l_max = -1;  // -1: tower depth
  std::vector<std::int64_t> ms{1};
  std::optional<IndexRange> section;
};

struct ProbeOptions {
  int trials = 20;
  std::uint64_t rng_seed = 1;
  int blocks = 32;
};

struct RunConfig {
  TowerConfig tower;
  VerifyOptions verify;
  BandsOptions bands;
  MetricOptions metric;
  ProbeOptions probe;
};

/// Parses and validates a JSON config document. Throws ValidationError.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

inline const std::vector<std::string> kAllChecks{"renorm_identity", "polynomial_forms", "wronskian", "chain",
                                                 "translation"};
std::vector<std::string> parse_check_list(std::string_view list);

/// "p:<site>:<delta>" or "q:<site>:<delta>".
struct Perturbation {
  char field = 'p';
  std::int64_t site = 0;
  double delta = 0.0;
};
Perturbation parse_perturbation(std::string_view spec);

/// coefficients.csv body for sites `range` of J (p_k couples k-1 and k).
std::string coefficients_csv(const JacobiWindow& J, const IndexRange& range);
/// Rows of a coefficients.csv as (k, p, q).
struct CoefficientRow {
  std::int64_t k;
  double p;
  double q;
};
std::vector<CoefficientRow> parse_coefficients_csv(std::string_view text);

/// Writes via a temporary file in the same directory and renames over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view contents);

struct VerifyRequest {
  std::optional<Perturbation> perturbation;
  std::optional<std::filesystem::path> coefficients;
};

int cmd_build(const RunConfig& config, const std::filesystem::path& out);
int cmd_verify(const RunConfig& config, const std::filesystem::path& out, const VerifyRequest& request);
int cmd_bands(const RunConfig& config, const std::filesystem::path& out);
int cmd_metric(const RunConfig& config, const std::filesystem::path& out);
int cmd_probe(const RunConfig& config, const std::filesystem::path& out);

/// Full command line entry point; returns the process exit code.
int run(int argc, char** argv);

}  // namespace apjac::cli
