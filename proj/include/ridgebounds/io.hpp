#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "ridgebounds/bounds.hpp"
#include "ridgebounds/experiments.hpp"

namespace ridgebounds::io {

inline constexpr const char* kToolVersion = "0.1.0";

/// Shortest decimal representation that round-trips the double exactly, so
/// golden CSV files are reproducible bit for bit.
std::string format_double(double value);

nlohmann::json spectrum_model_to_json(const SpectrumModel& model, int p);
/// Parses {"model": "explicit"|"exponential"|"spiked", ...}; returns the
/// model plus the ambient dimension.
std::pair<SpectrumModel, int> spectrum_model_from_json(const nlohmann::json& j);

nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& j);

nlohmann::json bound_report_to_json(const BoundReport& report);
std::string bound_report_csv_header();
std::string bound_report_csv_row(const BoundReport& report);

std::string sweep_csv(const SweepResult& sweep);
nlohmann::json sweep_summary_json(const SweepResult& sweep,
                                  const ExperimentConfig& config);

nlohmann::json audit_report_to_json(const AuditReport& report);

/// Standard output envelope wrapped around every CLI artifact.
nlohmann::json output_envelope(const nlohmann::json& config_echo,
                               nlohmann::json results, double wall_time_seconds,
                               std::uint64_t seed);

}  // namespace ridgebounds::io
