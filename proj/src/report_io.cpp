#include "gpi/report_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "gpi/errors.hpp"

namespace gpi {
namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorKind::InvalidConfig, what); }

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) invalid(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) invalid("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
T get_required(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) invalid("missing key '" + std::string(key) + "' in " + where);
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    invalid("bad value for '" + std::string(key) + "' in " + where + ": " + e.what());
  }
}

template <typename T>
T get_optional(const json& j, const char* key, T fallback, const std::string& where) {
  return j.contains(key) ? get_required<T>(j, key, where) : fallback;
}

std::uint64_t get_seed(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) invalid("missing key '" + std::string(key) + "' in " + where);
  const auto& v = j.at(key);
  const bool non_negative = v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
  if (!non_negative) invalid("'" + std::string(key) + "' in " + where + " must be a non-negative integer");
  return v.get<std::uint64_t>();
}

Eigen::VectorXd vector_from(const json& j, const char* key, const std::string& where) {
  const auto values = get_required<std::vector<double>>(j, key, where);
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

std::string method_key(Method m) {
  std::string s(to_string(m));
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return {buf, res.ptr};
}

std::string dump_canonical(const json& j) { return j.dump(2) + "\n"; }

json to_json(const PredictionInterval& pi) {
  json j;
  j["method"] = std::string(to_string(pi.method));
  j["center"] = pi.center;
  j["lower"] = pi.lower;
  j["upper"] = pi.upper;
  j["half_width"] = pi.half_width;
  j["nominal_alpha"] = pi.nominal_alpha;
  j["nominal_gamma"] = pi.nominal_gamma ? json(*pi.nominal_gamma) : json(nullptr);
  j["adjusted_level"] = pi.adjusted_level;
  j["d_hat"] = pi.d_hat ? json(*pi.d_hat) : json(nullptr);
  j["level_clipped"] = pi.level_clipped;
  return j;
}

json to_json(const FittedModel& model) {
  json j;
  j["n"] = model.n();
  j["p"] = model.p();
  j["beta_hat"] = vector_json(model.beta_hat);
  j["sigma_hat_sq"] = model.sigma_hat_sq;
  j["residual_mean"] = model.residual_mean;
  j["leverages"] = vector_json(model.leverages);
  j["centered_residuals"] = vector_json(model.centered_residuals);
  j["predictive_residuals"] = model.predictive ? vector_json(*model.predictive) : json(nullptr);
  j["condition_ratio"] = model.design->condition_ratio();
  return j;
}

json to_json(const ErrorDistribution& dist) {
  json j;
  j["kind"] = dist.kind_name();
  if (const auto* k = std::get_if<NormalErrors>(&dist.kind())) j["sigma"] = k->sigma;
  if (const auto* k = std::get_if<LaplaceErrors>(&dist.kind())) j["scale"] = k->scale;
  return j;
}

ErrorDistribution error_distribution_from_json(const json& j) {
  const std::string where = "dist";
  if (!j.is_object()) invalid("dist must be a JSON object");
  const auto kind = get_required<std::string>(j, "kind", where);
  try {
    if (kind == "normal") {
      reject_unknown_keys(j, {"kind", "sigma"}, where);
      return ErrorDistribution::normal(get_optional<double>(j, "sigma", 1.0, where));
    }
    if (kind == "laplace") {
      reject_unknown_keys(j, {"kind", "scale"}, where);
      return ErrorDistribution::laplace(get_optional<double>(j, "scale", 1.0 / std::sqrt(2.0), where));
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidConfig) throw;
    invalid(e.what());
  }
  invalid("dist.kind must be 'normal' or 'laplace', got '" + kind + "'");
}

json to_json(const SimConfig& cfg) {
  json j;
  j["n"] = cfg.n;
  j["beta"] = vector_json(cfg.beta);
  j["xf"] = vector_json(cfg.xf);
  json design;
  if (cfg.design.kind == DesignSpec::Kind::FromFile) {
    design["kind"] = "file";
    design["path"] = cfg.design.path.string();
  } else {
    design["kind"] = "standard_normal_iid";
    design["seed"] = cfg.design.seed;
    design["intercept_column"] = cfg.design.intercept_column;
  }
  j["design"] = design;
  j["dist"] = to_json(cfg.dist);
  json methods = json::array();
  for (Method m : cfg.methods) methods.push_back(method_key(m));
  j["methods"] = methods;
  j["alpha"] = cfg.alpha;
  j["gamma"] = cfg.gamma;
  j["replications"] = cfg.replications;
  j["bootstrap"] = {{"b", cfg.bootstrap.b_roots}, {"b1", cfg.bootstrap.b_adjust}, {"b2", cfg.bootstrap.b_mc}};
  j["coverage_quantile_probs"] = cfg.coverage_quantile_probs;
  j["master_seed"] = cfg.master_seed;
  return j;
}

SimConfig sim_config_from_json(const json& j, const std::filesystem::path& base_dir) {
  const std::string where = "config";
  reject_unknown_keys(j,
                      {"preset", "n", "beta", "xf", "design", "dist", "methods", "alpha", "gamma", "replications",
                       "bootstrap", "coverage_quantile_probs", "master_seed"},
                      where);
  SimConfig cfg;
  const auto preset = get_optional<std::string>(j, "preset", "", where);
  if (preset == "experiment") {
    cfg.beta = experiment_beta();
    cfg.xf = experiment_xf();
  } else if (!preset.empty()) {
    invalid("unknown preset '" + preset + "'");
  }
  if (j.contains("beta")) cfg.beta = vector_from(j, "beta", where);
  if (j.contains("xf")) cfg.xf = vector_from(j, "xf", where);
  if (cfg.beta.size() == 0) invalid("config needs 'beta' (or preset 'experiment')");
  if (cfg.xf.size() == 0) invalid("config needs 'xf' (or preset 'experiment')");

  const auto n = get_required<std::int64_t>(j, "n", where);
  if (n <= 0) invalid("n must be positive");
  cfg.n = static_cast<Eigen::Index>(n);

  if (!j.contains("design")) invalid("missing key 'design' in config");
  const auto& d = j.at("design");
  const auto kind = get_required<std::string>(d, "kind", "design");
  if (kind == "standard_normal_iid") {
    reject_unknown_keys(d, {"kind", "seed", "intercept_column"}, "design");
    cfg.design.kind = DesignSpec::Kind::StandardNormalIID;
    cfg.design.seed = get_seed(d, "seed", "design");
    cfg.design.intercept_column = get_optional<bool>(d, "intercept_column", false, "design");
  } else if (kind == "file") {
    reject_unknown_keys(d, {"kind", "path"}, "design");
    cfg.design.kind = DesignSpec::Kind::FromFile;
    std::filesystem::path path = get_required<std::string>(d, "path", "design");
    cfg.design.path = path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  } else {
    invalid("design.kind must be 'standard_normal_iid' or 'file'");
  }

  if (!j.contains("dist")) invalid("missing key 'dist' in config");
  cfg.dist = error_distribution_from_json(j.at("dist"));

  for (const auto& name : get_required<std::vector<std::string>>(j, "methods", where)) {
    const auto m = parse_method(name);
    if (!m) invalid("unknown method '" + name + "'");
    cfg.methods.push_back(*m);
  }
  cfg.alpha = get_optional<double>(j, "alpha", 0.05, where);
  cfg.gamma = get_optional<double>(j, "gamma", 0.15, where);
  const auto reps = get_required<std::int64_t>(j, "replications", where);
  if (reps < 1) invalid("replications must be >= 1");
  cfg.replications = static_cast<std::size_t>(reps);

  if (j.contains("bootstrap")) {
    const auto& b = j.at("bootstrap");
    reject_unknown_keys(b, {"b", "b1", "b2"}, "bootstrap");
    const auto count = [&](const char* key) {
      const auto v = get_optional<std::int64_t>(b, key, 2500, "bootstrap");
      if (v < 1) invalid(std::string("bootstrap.") + key + " must be positive");
      return static_cast<std::size_t>(v);
    };
    cfg.bootstrap.b_roots = count("b");
    cfg.bootstrap.b_adjust = count("b1");
    cfg.bootstrap.b_mc = count("b2");
  }
  if (j.contains("coverage_quantile_probs")) {
    cfg.coverage_quantile_probs = get_required<std::vector<double>>(j, "coverage_quantile_probs", where);
  }
  cfg.master_seed = get_seed(j, "master_seed", where);
  cfg.validate();
  return cfg;
}

SimConfig read_sim_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) invalid("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    invalid("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return sim_config_from_json(j, path.parent_path());
}

json to_json(const SimulationReport& report) {
  json methods = json::array();
  for (const auto& m : report.methods) {
    json jm;
    jm["method"] = std::string(to_string(m.method));
    jm["failure"] = m.failure ? json(*m.failure) : json(nullptr);
    jm["guarantee_level"] = m.guarantee_level;
    jm["mean_half_width"] = m.mean_half_width;
    jm["mean_d_hat"] = m.mean_d_hat ? json(*m.mean_d_hat) : json(nullptr);
    jm["level_clipped_count"] = m.level_clipped_count;
    json quantiles = json::array();
    for (std::size_t i = 0; i < m.coverage_quantiles.size(); ++i) {
      quantiles.push_back({{"prob", report.config.coverage_quantile_probs[i]}, {"value", m.coverage_quantiles[i]}});
    }
    jm["coverage_quantiles"] = quantiles;
    jm["coverages"] = m.coverages;
    methods.push_back(jm);
  }
  json j;
  j["config"] = to_json(report.config);
  j["methods"] = methods;
  j["metadata"] = {{"generator", report.generator}, {"wall_time_seconds", report.wall_time_seconds}};
  return j;
}

std::string report_csv(const SimulationReport& report) {
  std::ostringstream out;
  out << "method,metric,value\n";
  for (const auto& m : report.methods) {
    const std::string name(to_string(m.method));
    if (m.failure) {
      out << name << ",failed,1\n";
      continue;
    }
    out << name << ",guarantee_level," << format_double(m.guarantee_level) << "\n";
    out << name << ",mean_half_width," << format_double(m.mean_half_width) << "\n";
    for (std::size_t i = 0; i < m.coverage_quantiles.size(); ++i) {
      out << name << ",coverage_quantile_" << format_double(report.config.coverage_quantile_probs[i]) << ","
          << format_double(m.coverage_quantiles[i]) << "\n";
    }
    if (m.mean_d_hat) out << name << ",mean_d_hat," << format_double(*m.mean_d_hat) << "\n";
    if (is_guaranteed(m.method)) out << name << ",level_clipped_count," << m.level_clipped_count << "\n";
  }
  return out.str();
}

std::string histogram_csv(const std::vector<HistogramBin>& bins) {
  std::ostringstream out;
  out << "bin_low,bin_high,count\n";
  for (const auto& b : bins) out << format_double(b.low) << "," << format_double(b.high) << "," << b.count << "\n";
  return out.str();
}

std::string summary_table(const SimulationReport& report) {
  const auto& cfg = report.config;
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "errors=%s  n=%ld  R=%zu  nominal coverage=%.4f%%  nominal guarantee=%.4f%%\n",
                cfg.dist.kind_name().c_str(), static_cast<long>(cfg.n), cfg.replications, 100.0 * (1.0 - cfg.alpha),
                100.0 * (1.0 - cfg.gamma));
  out << line;
  out << "Algorithm ";
  for (double q : cfg.coverage_quantile_probs) {
    std::snprintf(line, sizeof line, " %11s", (format_double(100.0 * q) + "% q").c_str());
    out << line;
  }
  out << "   Guarantee\n";
  for (const auto& m : report.methods) {
    std::snprintf(line, sizeof line, "%-9s ", std::string(to_string(m.method)).c_str());
    out << line;
    if (m.failure) {
      out << " FAILED: " << *m.failure << "\n";
      continue;
    }
    for (double v : m.coverage_quantiles) {
      std::snprintf(line, sizeof line, " %10.4f%%", 100.0 * v);
      out << line;
    }
    std::snprintf(line, sizeof line, "  %9.4f%%\n", 100.0 * m.guarantee_level);
    out << line;
  }
  return out.str();
}

std::vector<std::filesystem::path> write_report_files(const SimulationReport& report,
                                                      const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  const auto write = [&](const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::DataError, "cannot write " + path.string());
    out << text;
    written.push_back(path);
  };
  write(out_dir / "report.json", dump_canonical(to_json(report)));
  write(out_dir / "report.csv", report_csv(report));
  for (const auto& m : report.methods) {
    if (m.failure) continue;
    write(out_dir / ("histogram_" + method_key(m.method) + ".csv"), histogram_csv(coverage_histogram(m.coverages)));
  }
  return written;
}

}  // namespace gpi
