#include "sfgof/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "sfgof/efficiency.hpp"
#include "sfgof/error.hpp"
#include "sfgof/io.hpp"

namespace sfgof::run {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

const std::set<std::string> kCommands{"fit", "test", "simulate", "efficiency", "replicate"};
const std::set<std::string> kTables{"T1", "T2", "T3", "T4", "T5"};

template <class T>
void read_key(const json& doc, const char* key, T& target) {
  if (doc.contains(key)) target = doc.at(key).get<T>();
}

template <class T>
void read_optional(const json& doc, const char* key, std::optional<T>& target) {
  if (doc.contains(key) && !doc.at(key).is_null()) target = doc.at(key).get<T>();
}

template <class T>
ordered_json optional_json(const std::optional<T>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

double number(const json& doc, const char* key) {
  if (!doc.contains(key) || !doc.at(key).is_number()) {
    throw ConfigError(std::string("generator field '") + key + "' must be a number");
  }
  return doc.at(key).get<double>();
}

io::Dataset load(const RunConfig& config) {
  io::IngestOptions options;
  options.cost = config.cost;
  options.add_intercept = config.intercept;
  return io::ingest_csv(config.data, io::ColumnMap::parse(config.columns), options);
}

rs::FitSettings fit_settings(const RunConfig& config) {
  rs::FitSettings s;
  s.family = parse_family(config.family);
  s.estimator = rs::parse_estimator(config.estimator);
  s.mle.fixed_alpha = config.fixed_alpha;
  s.mle.grid.n_points = config.grid_points;
  s.mle.grid.lower = config.grid_lower;
  s.mle.grid.upper = config.grid_upper;
  return s;
}

double data_gamma(const RunConfig& config) { return config.gamma.value_or(1.0); }

std::vector<double> simulation_gammas(const RunConfig& config) {
  if (!config.gammas.empty()) return config.gammas;
  return {config.gamma.value_or(4.0)};
}

double mc_se(double rate, std::size_t M) { return std::sqrt(rate * (1.0 - rate) / static_cast<double>(M)); }

ordered_json fit_json(const io::Dataset& data, const rs::NullFit& fit, const rs::FitSettings& settings,
                      double gamma) {
  ordered_json out;
  out["n"] = data.sample.n();
  out["k"] = data.sample.k();
  out["warnings"] = data.warnings;
  out["family"] = to_string(settings.family);
  out["estimator"] = rs::to_string(settings.estimator);
  ordered_json beta = ordered_json::object();
  for (std::size_t j = 0; j < data.regressors.size(); ++j) {
    beta[data.regressors[j]] = fit.model.beta(static_cast<Eigen::Index>(j));
  }
  out["beta"] = beta;
  out["errors"] = params_to_json(fit.model.errors);
  if (fit.cols) {
    out["converged"] = fit.cols->converged;
    out["sigma_v2_clamped"] = fit.cols->sigma_v2_clamped;
    out["sigma_v2_unrepaired"] = fit.cols->sigma_v2_unrepaired;
    out["p_clamped"] = fit.cols->p_clamped;
  }
  if (fit.mle) {
    out["log_likelihood"] = fit.mle->log_likelihood;
    out["converged"] = fit.mle->converged;
    out["iterations"] = fit.mle->iterations;
  }
  out["gamma"] = gamma;
  out["statistic"] = fit.statistics.front();
  return out;
}

ordered_json report_json(const rs::ExperimentReport& rep, std::size_t M, bool with_values) {
  ordered_json out;
  out["gamma"] = rep.gamma;
  out["rejection_rate"] = rep.rejection_rate;
  out["mc_se"] = mc_se(rep.rejection_rate, M);
  out["critical_point"] = rep.critical_point;
  if (with_values) {
    out["statistic_values"] = rep.statistic_values;
    out["bootstrap_values"] = rep.bootstrap_values;
  }
  return out;
}

NormalGammaParams ng(double sigma, double p, double c) { return {sigma * sigma, p, c}; }

// Stable/gamma designs in the simulation tables use a cheaper grid.
constexpr std::size_t kSimulationGrid = std::size_t{1} << 12;

}  // namespace

RunConfig RunConfig::from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
  static const std::set<std::string> known{
      "command", "data", "columns", "cost", "intercept", "family", "estimator", "gamma", "gammas",
      "fixed_alpha", "grid_points", "grid_lower", "grid_upper", "B", "M", "n", "level", "seed", "workers",
      "generator", "table", "scale", "only_param", "only_n", "csv"};
  for (const auto& [key, value] : doc.items()) {
    if (!known.count(key)) throw ConfigError("unknown configuration key '" + key + "'");
  }
  RunConfig c;
  try {
    read_key(doc, "command", c.command);
    read_key(doc, "data", c.data);
    read_key(doc, "columns", c.columns);
    read_key(doc, "cost", c.cost);
    read_key(doc, "intercept", c.intercept);
    read_key(doc, "family", c.family);
    read_key(doc, "estimator", c.estimator);
    read_optional(doc, "gamma", c.gamma);
    read_key(doc, "gammas", c.gammas);
    read_optional(doc, "fixed_alpha", c.fixed_alpha);
    read_key(doc, "grid_points", c.grid_points);
    read_optional(doc, "grid_lower", c.grid_lower);
    read_optional(doc, "grid_upper", c.grid_upper);
    read_key(doc, "B", c.B);
    read_key(doc, "M", c.M);
    read_key(doc, "n", c.n);
    read_key(doc, "level", c.level);
    read_optional(doc, "seed", c.seed);
    read_key(doc, "workers", c.workers);
    if (doc.contains("generator")) c.generator = doc.at("generator");
    read_key(doc, "table", c.table);
    read_key(doc, "scale", c.scale);
    read_key(doc, "only_param", c.only_param);
    read_key(doc, "only_n", c.only_n);
    read_key(doc, "csv", c.csv);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
  return c;
}

ordered_json RunConfig::to_json() const {
  ordered_json o;
  o["command"] = command;
  o["data"] = data;
  o["columns"] = columns;
  o["cost"] = cost;
  o["intercept"] = intercept;
  o["family"] = family;
  o["estimator"] = estimator;
  o["gamma"] = optional_json(gamma);
  o["gammas"] = gammas;
  o["fixed_alpha"] = optional_json(fixed_alpha);
  o["grid_points"] = grid_points;
  o["grid_lower"] = optional_json(grid_lower);
  o["grid_upper"] = optional_json(grid_upper);
  o["B"] = B;
  o["M"] = M;
  o["n"] = n;
  o["level"] = level;
  o["seed"] = optional_json(seed);
  o["workers"] = workers;
  o["generator"] = generator.is_null() ? ordered_json(nullptr) : ordered_json::parse(generator.dump());
  o["table"] = table;
  o["scale"] = scale;
  o["only_param"] = only_param;
  o["only_n"] = only_n;
  o["csv"] = csv;
  return o;
}

void RunConfig::validate() const {
  if (!kCommands.count(command)) throw ConfigError("unknown command '" + command + "'");
  const Family fam = parse_family(family);
  const rs::Estimator est = rs::parse_estimator(estimator);
  if (fam == Family::stable_gamma && est == rs::Estimator::cols) {
    throw ConfigError("the stable/gamma model is fitted by maximum likelihood only");
  }
  if (fixed_alpha && !(*fixed_alpha > 1.0 && *fixed_alpha <= 2.0)) throw ConfigError("fixed_alpha must lie in (1, 2]");
  if (grid_points < 4 || (grid_points & (grid_points - 1)) != 0) {
    throw ConfigError("grid_points must be a power of two >= 4");
  }
  if (gamma && !(*gamma > 0.0)) throw ConfigError("gamma must be positive");
  for (double g : gammas) {
    if (!(g > 0.0)) throw ConfigError("gammas must be positive");
  }
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("level must lie in (0, 1)");
  if (command == "fit" || command == "test" || command == "efficiency") {
    if (data.empty()) throw ConfigError("'" + command + "' needs a data file");
    io::ColumnMap::parse(columns);
  }
  if (command == "test" && B < 99) throw ConfigError("B must be at least 99");
  if (command == "simulate" || command == "replicate") {
    if (!seed) throw ConfigError("'" + command + "' requires an explicit seed");
  }
  if (command == "simulate") {
    if (generator.is_null()) throw ConfigError("'simulate' needs a generator");
    parse_generator(generator);
    if (n < 2) throw ConfigError("n must be at least 2");
    if (static_cast<double>(M) * level < 10.0) throw ConfigError("M * level must be at least 10");
  }
  if (command == "replicate") {
    if (!kTables.count(table)) throw ConfigError("table must be one of T1..T5");
    if (!(scale > 0.0 && scale <= 1.0)) throw ConfigError("scale must lie in (0, 1]");
  }
}

rs::DataGenerator parse_generator(const json& doc) {
  if (!doc.is_object() || !doc.contains("type")) throw ConfigError("generator needs a 'type'");
  const std::string type = doc.at("type").get<std::string>();
  rs::DataGenerator gen;
  if (type == "normal_gamma") {
    NormalGammaParams p{doc.contains("sigma_v") ? std::pow(number(doc, "sigma_v"), 2) : number(doc, "sigma_v2"),
                        number(doc, "p"), number(doc, "c")};
    gen = p;
  } else if (type == "stable_gamma") {
    gen = StableGammaParams{number(doc, "kappa"), number(doc, "alpha"), number(doc, "p"), number(doc, "c")};
  } else if (type == "mixture") {
    if (!doc.contains("first") || !doc.contains("second")) throw ConfigError("mixture needs 'first' and 'second'");
    const auto first = parse_generator(doc.at("first"));
    const auto second = parse_generator(doc.at("second"));
    const auto* a = std::get_if<NormalGammaParams>(&first);
    const auto* b = std::get_if<NormalGammaParams>(&second);
    if (a == nullptr || b == nullptr) throw ConfigError("mixture components must be normal_gamma");
    gen = rs::Mixture{number(doc, "weight"), *a, *b};
  } else if (type == "student_t_gamma") {
    gen = rs::StudentTGamma{number(doc, "nu"), number(doc, "p"), number(doc, "c")};
  } else {
    throw ConfigError("unknown generator type '" + type + "'");
  }
  if (const auto* p = std::get_if<NormalGammaParams>(&gen)) p->validate();
  if (const auto* p = std::get_if<StableGammaParams>(&gen)) p->validate();
  return gen;
}

ordered_json params_to_json(const ErrorParams& params) {
  ordered_json o;
  if (const auto* ng = std::get_if<NormalGammaParams>(&params)) {
    o["type"] = "normal_gamma";
    o["sigma_v"] = std::sqrt(ng->sigma_v2);
    o["sigma_v2"] = ng->sigma_v2;
    o["p"] = ng->p;
    o["c"] = ng->c;
    return o;
  }
  const auto& sg = std::get<StableGammaParams>(params);
  o["type"] = "stable_gamma";
  o["kappa"] = sg.kappa;
  o["alpha"] = sg.alpha;
  o["p"] = sg.p;
  o["c"] = sg.c;
  return o;
}

ordered_json generator_to_json(const rs::DataGenerator& gen) {
  if (const auto* ng = std::get_if<NormalGammaParams>(&gen)) return params_to_json(*ng);
  if (const auto* sg = std::get_if<StableGammaParams>(&gen)) return params_to_json(*sg);
  ordered_json o;
  if (const auto* mix = std::get_if<rs::Mixture>(&gen)) {
    o["type"] = "mixture";
    o["weight"] = mix->weight;
    o["first"] = params_to_json(mix->first);
    o["second"] = params_to_json(mix->second);
    return o;
  }
  const auto& tg = std::get<rs::StudentTGamma>(gen);
  o["type"] = "student_t_gamma";
  o["nu"] = tg.nu;
  o["p"] = tg.p;
  o["c"] = tg.c;
  return o;
}

ordered_json run_fit(const RunConfig& config) {
  const io::Dataset data = load(config);
  const rs::FitSettings settings = fit_settings(config);
  const rs::NullFit fit = rs::fit_null(data.sample, settings, {data_gamma(config)});
  return fit_json(data, fit, settings, data_gamma(config));
}

ordered_json run_test(const RunConfig& config) {
  const io::Dataset data = load(config);
  rs::BootstrapConfig bc;
  bc.B = config.B;
  bc.gamma = data_gamma(config);
  bc.seed = config.seed.value_or(0);
  bc.fit = fit_settings(config);
  bc.workers = config.workers;
  const rs::BootstrapResult res = rs::bootstrap_pvalue(data.sample, bc);
  ordered_json out = fit_json(data, res.fit, bc.fit, bc.gamma);
  out["B"] = bc.B;
  out["seed"] = bc.seed;
  out["p_value"] = res.p_value;
  out["bootstrap_failures"] = res.failures;
  out["bootstrap_statistics"] = res.bootstrap_statistics;
  return out;
}

ordered_json run_simulate(const RunConfig& config) {
  rs::WarpSpeedConfig ws;
  ws.M = config.M;
  ws.n = config.n;
  ws.level = config.level;
  ws.generator = parse_generator(config.generator);
  ws.fit = fit_settings(config);
  ws.gammas = simulation_gammas(config);
  ws.seed = *config.seed;
  ws.workers = config.workers;
  const rs::WarpSpeedResult res = rs::warp_speed(ws);
  ordered_json out;
  out["generator"] = generator_to_json(ws.generator);
  out["M"] = ws.M;
  out["n"] = ws.n;
  out["level"] = ws.level;
  out["failures"] = res.failures;
  out["bootstrap_redraws"] = res.bootstrap_redraws;
  ordered_json reports = ordered_json::array();
  for (const auto& rep : res.reports) reports.push_back(report_json(rep, ws.M, true));
  out["reports"] = reports;
  return out;
}

ordered_json run_efficiency(const RunConfig& config) {
  const io::Dataset data = load(config);
  const rs::FitSettings settings = fit_settings(config);
  const rs::NullFit fit = rs::fit_null(data.sample, settings, {data_gamma(config)});
  const eff::EfficiencyScores scores = eff::efficiency_scores(fit.model, data.sample, data.ids);
  ordered_json out = fit_json(data, fit, settings, data_gamma(config));
  out["ids"] = scores.firm_ids;
  out["bc"] = scores.bc;
  out["jlms"] = scores.jlms;
  double bc_mean = 0.0;
  double jlms_mean = 0.0;
  for (std::size_t i = 0; i < scores.bc.size(); ++i) {
    bc_mean += scores.bc[i];
    jlms_mean += scores.jlms[i];
  }
  out["bc_mean"] = bc_mean / static_cast<double>(scores.bc.size());
  out["jlms_mean"] = jlms_mean / static_cast<double>(scores.jlms.size());
  return out;
}

std::vector<ReplicateCell> replicate_cells(const std::string& table) {
  std::vector<ReplicateCell> cells;
  const auto add = [&](std::string label, double param, std::size_t n, rs::DataGenerator gen,
                       rs::FitSettings fit, std::vector<double> gammas, std::size_t M) {
    ReplicateCell cell;
    cell.label = std::move(label);
    cell.param = param;
    cell.n = n;
    cell.design.M = M;
    cell.design.n = n;
    cell.design.generator = gen;
    cell.design.fit = fit;
    cell.design.gammas = std::move(gammas);
    cells.push_back(std::move(cell));
  };
  rs::FitSettings ng_cols;
  rs::FitSettings sg_mle;
  sg_mle.family = Family::stable_gamma;
  sg_mle.estimator = rs::Estimator::mle;
  sg_mle.mle.grid.n_points = kSimulationGrid;
  const auto fmt = [](const char* name, double v) {
    std::ostringstream s;
    s << name << '=' << v;
    return s.str();
  };

  if (table == "T1") {
    for (double p : {0.25, 0.5, 1.0, 2.0, 3.0}) {
      for (std::size_t n : {50, 100, 200, 400}) add(fmt("p", p), p, n, ng(1, p, 1), ng_cols, {4, 6, 8}, 1000);
    }
  } else if (table == "T2") {
    for (double p : {0.25, 0.4, 0.5, 2.0, 3.0}) {
      for (std::size_t n : {50, 100, 200}) {
        add(fmt("p", p), p, n, rs::Mixture{0.7, ng(1, 1, 1), ng(1, p, 1)}, ng_cols, {4, 6, 8}, 1000);
      }
    }
  } else if (table == "T3") {
    for (double nu : {5.0, 6.0}) {
      for (std::size_t n : {50, 100, 200}) {
        add(fmt("nu", nu), nu, n, rs::StudentTGamma{nu, 3.0, 1.0}, ng_cols, {0.5, 1, 2, 4, 6, 8}, 1000);
      }
    }
  } else if (table == "T4") {
    for (double alpha : {1.8, 1.9, 1.95}) {
      for (std::size_t n : {200, 400, 500}) {
        add(fmt("alpha", alpha), alpha, n, StableGammaParams{1, alpha, 1, 1}, sg_mle, {2, 4, 6, 8}, 10000);
      }
    }
  } else if (table == "T5") {
    for (double alpha0 : {1.8, 1.95}) {
      rs::FitSettings fixed = sg_mle;
      fixed.mle.fixed_alpha = alpha0;
      for (std::size_t n : {200, 500}) {
        // The null cell comes first; it supplies the estimated size.
        add(fmt("alpha0", alpha0) + " size", alpha0, n, StableGammaParams{1, alpha0, 1, 1}, fixed, {6}, 10000);
        for (double alpha : {1.5, 1.7, 1.8, 1.9, 1.95}) {
          if (alpha == alpha0) continue;
          add(fmt("alpha0", alpha0) + " " + fmt("alpha", alpha), alpha, n, StableGammaParams{1, alpha, 1, 1},
              fixed, {6}, 10000);
        }
        add(fmt("alpha0", alpha0) + " t(2)/Gamma", 0.0, n, rs::StudentTGamma{2.0, 1.0, 1.0}, fixed, {6}, 10000);
      }
    }
  } else {
    throw ConfigError("unknown table '" + table + "'");
  }
  return cells;
}

ordered_json run_replicate(const RunConfig& config) {
  std::vector<ReplicateCell> cells = replicate_cells(config.table);
  const bool lloyd = config.table == "T5";
  ordered_json rows = ordered_json::array();
  double size_hat = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    ReplicateCell& cell = cells[i];
    const bool is_size_cell = lloyd && cell.label.ends_with(" size");
    const bool wanted =
        (config.only_param.empty() ||
         std::find(config.only_param.begin(), config.only_param.end(), cell.param) != config.only_param.end() ||
         is_size_cell) &&
        (config.only_n.empty() || std::find(config.only_n.begin(), config.only_n.end(), cell.n) != config.only_n.end());
    if (is_size_cell) size_hat = std::numeric_limits<double>::quiet_NaN();
    if (!wanted) continue;
    auto& d = cell.design;
    d.M = static_cast<std::size_t>(std::llround(config.scale * static_cast<double>(d.M)));
    d.level = config.level;
    d.seed = derive_seed(*config.seed, i);
    d.workers = config.workers;
    const rs::WarpSpeedResult res = rs::warp_speed(d);
    for (const auto& rep : res.reports) {
      ordered_json row;
      row["cell"] = cell.label;
      row["param"] = cell.param;
      row["n"] = cell.n;
      row["M"] = d.M;
      row["generator"] = generator_to_json(d.generator);
      row["failures"] = res.failures;
      row["bootstrap_redraws"] = res.bootstrap_redraws;
      const ordered_json summary = report_json(rep, d.M, false);
      for (const auto& [k, v] : summary.items()) row[k] = v;
      row["percent"] = 100.0 * rep.rejection_rate;
      if (lloyd) {
        if (is_size_cell) {
          size_hat = rep.rejection_rate;
          row["role"] = "size";
        } else {
          row["role"] = "power";
          row["size_hat"] = std::isnan(size_hat) ? ordered_json(nullptr) : ordered_json(size_hat);
          row["corrected_power"] = nullptr;
          // A rate of exactly 0 or 1 has no normal quantile and stays uncorrected.
          if (size_hat > 0.0 && size_hat < 1.0 && rep.rejection_rate > 0.0 && rep.rejection_rate < 1.0) {
            row["corrected_power"] = rs::lloyd_correction(rep.rejection_rate, size_hat, d.level);
          }
        }
      }
      rows.push_back(row);
    }
  }
  ordered_json out;
  out["table"] = config.table;
  out["scale"] = config.scale;
  out["level"] = config.level;
  out["rows"] = rows;
  return out;
}

ordered_json run(const RunConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  ordered_json results;
  if (config.command == "fit") {
    results = run_fit(config);
  } else if (config.command == "test") {
    results = run_test(config);
  } else if (config.command == "simulate") {
    results = run_simulate(config);
  } else if (config.command == "efficiency") {
    results = run_efficiency(config);
  } else {
    results = run_replicate(config);
  }
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  ordered_json report;
  report["software"] = {{"name", "sfgof"}, {"version", kVersion}};
  report["command"] = config.command;
  report["config"] = config.to_json();
  report["results"] = results;
  report["timing_seconds"] = elapsed.count();
  return report;
}

std::string replicate_csv(const ordered_json& report) {
  const ordered_json& res = report.contains("results") ? report.at("results") : report;
  std::ostringstream s;
  s.precision(17);
  s << "table,cell,param,n,M,gamma,rejection_rate,mc_se,critical_point,corrected_power\n";
  for (const auto& row : res.at("rows")) {
    s << res.at("table").get<std::string>() << ",\"" << row.at("cell").get<std::string>() << "\","
      << row.at("param").get<double>() << ',' << row.at("n").get<std::size_t>() << ','
      << row.at("M").get<std::size_t>() << ',' << row.at("gamma").get<double>() << ','
      << row.at("rejection_rate").get<double>() << ',' << row.at("mc_se").get<double>() << ','
      << row.at("critical_point").get<double>() << ',';
    if (row.contains("corrected_power") && !row.at("corrected_power").is_null()) {
      s << row.at("corrected_power").get<double>();
    }
    s << '\n';
  }
  return s.str();
}

}  // namespace sfgof::run
