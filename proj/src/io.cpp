#include "ridgebounds/io.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "ridgebounds/errors.hpp"

namespace ridgebounds::io {

using nlohmann::json;

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

json spectrum_model_to_json(const SpectrumModel& model, int p) {
  json j;
  if (const auto* e = std::get_if<ExplicitModel>(&model)) {
    j["model"] = "explicit";
    j["values"] = e->values;
  } else if (const auto* e = std::get_if<ExponentialModel>(&model)) {
    j["model"] = "exponential";
    j["gamma"] = e->gamma;
    j["p"] = p;
  } else {
    const auto& s = std::get<SpikedModel>(model);
    j["model"] = "spiked";
    j["k_spikes"] = s.k_spikes;
    j["lambda_top"] = s.lambda_top;
    j["lambda_tail"] = s.lambda_tail;
    j["p"] = p;
  }
  return j;
}

std::pair<SpectrumModel, int> spectrum_model_from_json(const json& j) {
  const std::string model = j.at("model").get<std::string>();
  if (model == "explicit") {
    ExplicitModel e{j.at("values").get<std::vector<double>>()};
    const int p = static_cast<int>(e.values.size());
    return {std::move(e), p};
  }
  if (model == "exponential") {
    return {ExponentialModel{j.at("gamma").get<double>()}, j.at("p").get<int>()};
  }
  if (model == "spiked") {
    SpikedModel s;
    s.k_spikes = j.at("k_spikes").get<int>();
    s.lambda_top = j.at("lambda_top").get<double>();
    s.lambda_tail = j.at("lambda_tail").get<double>();
    return {s, j.at("p").get<int>()};
  }
  throw ValidationError("unknown spectrum model: " + model);
}

namespace {

json signal_to_json(const SignalDescriptor& signal) {
  json j;
  if (const auto* e = std::get_if<ExplicitSignal>(&signal)) {
    j["kind"] = "explicit";
    j["values"] = e->values;
  } else if (const auto* s = std::get_if<UnitEnergyOnSpikes>(&signal)) {
    j["kind"] = "unit_energy_on_spikes";
    j["k_spikes"] = s->k_spikes;
    j["snr"] = s->snr;
  } else {
    j["kind"] = "aligned_decay";
    j["scale"] = std::get<AlignedDecay>(signal).scale;
  }
  return j;
}

SignalDescriptor signal_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "explicit") {
    return ExplicitSignal{j.at("values").get<std::vector<double>>()};
  }
  if (kind == "unit_energy_on_spikes") {
    return UnitEnergyOnSpikes{j.at("k_spikes").get<int>(), j.at("snr").get<double>()};
  }
  if (kind == "aligned_decay") {
    return AlignedDecay{j.value("scale", 1.0)};
  }
  throw ValidationError("unknown signal kind: " + kind);
}

json k_policy_to_json(const KPolicy& policy) {
  json j;
  if (const auto* f = std::get_if<FixedK>(&policy)) {
    j["kind"] = "fixed";
    j["k"] = f->k;
  } else {
    j["kind"] = "kstar";
    j["b"] = std::get<KStarPolicy>(policy).b;
  }
  return j;
}

KPolicy k_policy_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "fixed") return FixedK{j.at("k").get<int>()};
  if (kind == "kstar") return KStarPolicy{j.value("b", 2.0)};
  throw ValidationError("unknown k policy: " + kind);
}

json constants_to_json(const BoundConstants& c) {
  return json{{"L", c.L},
              {"t", c.t},
              {"sigma_x", c.sigma_x},
              {"sigma_eps", c.sigma_eps},
              {"calibration_c", c.calibration_c}};
}

BoundConstants constants_from_json(const json& j) {
  BoundConstants c;
  c.L = j.value("L", 1.0);
  c.t = j.value("t", 1.0);
  c.sigma_x = j.value("sigma_x", 1.0);
  c.sigma_eps = j.value("sigma_eps", 1.0);
  c.calibration_c = j.value("calibration_c", 1.0);
  return c;
}

json optional_to_json(const std::optional<double>& v) {
  if (!v) return nullptr;
  return *v;
}

}  // namespace

json config_to_json(const ExperimentConfig& config) {
  json j;
  j["spectrum"] = spectrum_model_to_json(config.spectrum_model, config.p);
  j["n"] = config.n;
  j["design"] = to_string(config.family);
  j["signal"] = signal_to_json(config.signal);
  j["sigma_eps"] = config.sigma_eps;
  j["lambda_grid"] = config.lambda_grid;
  j["replicates"] = config.replicates;
  j["base_seed"] = config.base_seed;
  j["k_policy"] = k_policy_to_json(config.k_policy);
  j["constants"] = constants_to_json(config.constants);
  if (config.ratio_interval) {
    j["ratio_interval"] = json{{"a", config.ratio_interval->a},
                               {"b", config.ratio_interval->b}};
  }
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig config;
  auto [model, p] = spectrum_model_from_json(j.at("spectrum"));
  config.spectrum_model = std::move(model);
  config.p = p;
  config.n = j.at("n").get<int>();
  config.family = design_family_from_string(j.value("design", "gaussian"));
  if (j.contains("signal")) config.signal = signal_from_json(j.at("signal"));
  config.sigma_eps = j.value("sigma_eps", 1.0);
  config.lambda_grid = j.at("lambda_grid").get<std::vector<double>>();
  config.replicates = j.value("replicates", 100);
  config.base_seed = j.value("base_seed", std::uint64_t{1});
  if (j.contains("k_policy")) config.k_policy = k_policy_from_json(j.at("k_policy"));
  if (j.contains("constants")) config.constants = constants_from_json(j.at("constants"));
  if (j.contains("ratio_interval")) {
    config.ratio_interval = CapInterval{j.at("ratio_interval").at("a").get<double>(),
                                        j.at("ratio_interval").at("b").get<double>()};
  }
  config.validate();
  return config;
}

json bound_report_to_json(const BoundReport& report) {
  json j;
  j["lambda"] = report.lambda;
  j["k"] = report.k;
  j["rho_k"] = report.effective.rho_k;
  j["R_k"] = report.effective.big_R_k;
  j["tail_sum"] = report.effective.tail_sum;
  j["tail_sq_sum"] = report.effective.tail_sq_sum;
  j["B_upper"] = report.B_upper;
  j["V_upper"] = report.V_upper;
  j["B_lower"] = report.B_lower;
  j["V_lower"] = report.V_lower;
  j["B_ratio_cap"] = optional_to_json(report.B_ratio_cap);
  j["V_ratio_cap"] = optional_to_json(report.V_ratio_cap);
  j["constants"] = constants_to_json(report.constants);
  return j;
}

std::string bound_report_csv_header() {
  return "k,lambda,rho_k,R_k,B_upper,V_upper,B_lower,V_lower,B_ratio_cap,V_ratio_cap";
}

std::string bound_report_csv_row(const BoundReport& report) {
  std::ostringstream out;
  out << report.k << ',' << format_double(report.lambda) << ','
      << format_double(report.effective.rho_k) << ','
      << format_double(report.effective.big_R_k) << ','
      << format_double(report.B_upper) << ',' << format_double(report.V_upper) << ','
      << format_double(report.B_lower) << ',' << format_double(report.V_lower) << ','
      << (report.B_ratio_cap ? format_double(*report.B_ratio_cap) : "") << ','
      << (report.V_ratio_cap ? format_double(*report.V_ratio_cap) : "");
  return out.str();
}

std::string sweep_csv(const SweepResult& sweep) {
  std::ostringstream out;
  out << "lambda,replicate,bias,variance_expected,mse,pd_margin,cond_Ak,mu_max_Ak,mu_min_Ak\n";
  for (const ReplicateRow& row : sweep.rows) {
    out << format_double(row.lambda) << ',' << row.replicate << ','
        << format_double(row.bias) << ',' << format_double(row.variance_expected)
        << ',' << format_double(row.mse) << ',' << format_double(row.pd_margin) << ','
        << format_double(row.cond_Ak) << ',' << format_double(row.mu_max_Ak) << ','
        << format_double(row.mu_min_Ak) << '\n';
  }
  return out.str();
}

json sweep_summary_json(const SweepResult& sweep, const ExperimentConfig& config) {
  json per_lambda = json::array();
  for (const LambdaAggregate& agg : sweep.per_lambda) {
    json a;
    a["lambda"] = agg.lambda;
    a["available"] = agg.available;
    a["replicates_pd"] = agg.replicates_pd;
    if (agg.available) {
      a["mean_mse"] = agg.mean_mse;
      a["median_mse"] = agg.median_mse;
      a["q10_mse"] = agg.q10_mse;
      a["q90_mse"] = agg.q90_mse;
      a["se_mean_mse"] = agg.se_mean_mse;
      a["mean_bias"] = agg.mean_bias;
      a["mean_variance"] = agg.mean_variance;
    }
    per_lambda.push_back(std::move(a));
  }
  json overlay = json::array();
  for (const auto& report : sweep.bound_overlay) {
    overlay.push_back(report ? bound_report_to_json(*report) : json(nullptr));
  }
  json j;
  j["lambda_grid"] = config.lambda_grid;
  j["per_lambda"] = std::move(per_lambda);
  j["lambda_opt"] = optional_to_json(sweep.lambda_opt);
  j["lambda_opt_margin_se"] = optional_to_json(sweep.lambda_opt_margin_se);
  j["k_used"] = sweep.k_used;
  j["bound_overlay"] = std::move(overlay);
  return j;
}

json audit_report_to_json(const AuditReport& report) {
  json stats = json::array();
  for (const AuditStat& stat : report.stats) {
    json s;
    s["name"] = stat.name;
    s["samples"] = stat.samples;
    s["seed"] = stat.seed;
    s["scale"] = stat.scale;
    s["mean"] = stat.mean;
    s["hit_fraction"] = stat.hit_fraction;
    for (const auto& [name, value] : stat.quantiles) s[name] = value;
    stats.push_back(std::move(s));
  }
  return json{{"stats", std::move(stats)}};
}

json output_envelope(const json& config_echo, json results, double wall_time_seconds,
                     std::uint64_t seed) {
  json j;
  j["tool_version"] = kToolVersion;
  j["config_echo"] = config_echo;
  j["results"] = std::move(results);
  j["wall_time_seconds"] = wall_time_seconds;
  j["seed"] = seed;
  return j;
}

}  // namespace ridgebounds::io
