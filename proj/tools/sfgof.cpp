// sfgof: goodness-of-fit tests, estimation and simulation for stochastic
// frontier models from the command line.
//
//   sfgof test --data firms.csv --col y=response --col x1=regressor --gamma 1 --B 100
//   sfgof replicate --table T1 --scale 0.5 --seed 7 --out t1.json
//
// Flags override the keys of an optional --config JSON document. Exit codes:
// 0 success, 2 invalid input, 3 numerical failure.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "sfgof/error.hpp"
#include "sfgof/runner.hpp"

namespace {

enum class Kind { text, real, count, flag, texts, reals, counts, document };

struct Flag {
  std::string key;
  Kind kind;
  std::string text;
  std::vector<std::string> list;
  bool set = false;
  CLI::Option* option = nullptr;
};

struct Command {
  CLI::App* app = nullptr;
  std::string config_path;
  std::string out_path;
  std::map<std::string, Flag> flags;
};

void add_flag(Command& cmd, const std::string& name, const std::string& key, Kind kind, const std::string& help) {
  Flag& f = cmd.flags[key];
  f.key = key;
  f.kind = kind;
  switch (kind) {
    case Kind::flag:
      f.option = cmd.app->add_flag(name, f.set, help);
      break;
    case Kind::texts:
    case Kind::reals:
    case Kind::counts:
      f.option = cmd.app->add_option(name, f.list, help);
      break;
    default:
      f.option = cmd.app->add_option(name, f.text, help);
  }
}

nlohmann::json flag_value(const Flag& f) {
  switch (f.kind) {
    case Kind::text:
      return f.text;
    case Kind::real:
      return std::stod(f.text);
    case Kind::count:
      return std::stoull(f.text);
    case Kind::flag:
      return f.set;
    case Kind::texts:
      return f.list;
    case Kind::reals: {
      nlohmann::json a = nlohmann::json::array();
      for (const auto& s : f.list) a.push_back(std::stod(s));
      return a;
    }
    case Kind::counts: {
      nlohmann::json a = nlohmann::json::array();
      for (const auto& s : f.list) a.push_back(std::stoull(s));
      return a;
    }
    case Kind::document:
      return nlohmann::json::parse(f.text);
  }
  return nullptr;
}

void add_common(Command& cmd) {
  cmd.app->add_option("--config", cmd.config_path, "JSON configuration file");
  cmd.app->add_option("--out", cmd.out_path, "write the JSON report here instead of stdout");
  add_flag(cmd, "--family", "family", Kind::text, "normal_gamma or stable_gamma");
  add_flag(cmd, "--estimator", "estimator", Kind::text, "cols or mle");
  add_flag(cmd, "--gamma", "gamma", Kind::real, "weight decay of the test statistic");
  add_flag(cmd, "--fixed-alpha", "fixed_alpha", Kind::real, "hold the stable index at this value");
  add_flag(cmd, "--grid-points", "grid_points", Kind::count, "FFT grid size for the likelihood");
  add_flag(cmd, "--grid-lower", "grid_lower", Kind::real, "lower end of the likelihood grid");
  add_flag(cmd, "--grid-upper", "grid_upper", Kind::real, "upper end of the likelihood grid");
  add_flag(cmd, "--seed", "seed", Kind::count, "random seed");
  add_flag(cmd, "--workers", "workers", Kind::count, "worker threads (0 = all cores)");
  add_flag(cmd, "--level", "level", Kind::real, "nominal level");
}

void add_data(Command& cmd) {
  add_flag(cmd, "--data", "data", Kind::text, "CSV file with a header row");
  add_flag(cmd, "--col", "columns", Kind::texts, "column mapping name=role (response, regressor, id)");
  add_flag(cmd, "--cost", "cost", Kind::flag, "cost frontier: negate response and regressors");
  add_flag(cmd, "--no-intercept", "no_intercept", Kind::flag, "do not prepend an intercept column");
}

int fail(int code, const std::string& kind, const std::string& message) {
  nlohmann::ordered_json err;
  err["error"] = kind;
  err["message"] = message;
  std::cerr << err.dump(2) << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Goodness-of-fit tests for stochastic frontier models"};
  app.require_subcommand(1);
  std::map<std::string, Command> commands;
  const std::map<std::string, std::string> descriptions{
      {"fit", "estimate a frontier model"},
      {"test", "goodness-of-fit test with a parametric bootstrap p-value"},
      {"simulate", "warp-speed Monte Carlo rejection rates"},
      {"efficiency", "firm-level efficiency scores"},
      {"replicate", "rerun a simulation table"}};
  for (const auto& [name, desc] : descriptions) {
    Command& cmd = commands[name];
    cmd.app = app.add_subcommand(name, desc);
    add_common(cmd);
    if (name == "fit" || name == "test" || name == "efficiency") add_data(cmd);
    if (name == "test") add_flag(cmd, "--B", "B", Kind::count, "bootstrap replicates");
    if (name == "simulate") {
      add_flag(cmd, "--M", "M", Kind::count, "Monte Carlo replications");
      add_flag(cmd, "--n", "n", Kind::count, "sample size");
      add_flag(cmd, "--gammas", "gammas", Kind::reals, "several gammas on the same draws");
      add_flag(cmd, "--generator", "generator", Kind::document, "data-generating law as JSON");
    }
    if (name == "replicate") {
      add_flag(cmd, "--table", "table", Kind::text, "T1, T2, T3, T4 or T5");
      add_flag(cmd, "--scale", "scale", Kind::real, "fraction of the table's Monte Carlo size");
      add_flag(cmd, "--only-param", "only_param", Kind::reals, "restrict to these p / alpha values");
      add_flag(cmd, "--only-n", "only_n", Kind::counts, "restrict to these sample sizes");
      add_flag(cmd, "--csv", "csv", Kind::text, "also write the table as CSV");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  for (auto& [name, cmd] : commands) {
    if (!cmd.app->parsed()) continue;
    try {
      nlohmann::json doc = nlohmann::json::object();
      if (!cmd.config_path.empty()) {
        std::ifstream in(cmd.config_path);
        if (!in) throw sfgof::ValidationError("cannot open config '" + cmd.config_path + "'");
        try {
          doc = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
          throw sfgof::ConfigError(std::string("config is not valid JSON: ") + e.what());
        }
      }
      doc["command"] = name;
      for (const auto& [key, flag] : cmd.flags) {
        if (flag.option->count() == 0) continue;
        try {
          if (key == "no_intercept") {
            doc["intercept"] = false;
          } else {
            doc[key] = flag_value(flag);
          }
        } catch (const std::exception& e) {
          throw sfgof::ConfigError("bad value for " + flag.option->get_name() + ": " + e.what());
        }
      }
      const auto config = sfgof::run::RunConfig::from_json(doc);
      const auto report = sfgof::run::run(config);
      if (cmd.out_path.empty()) {
        std::cout << report.dump(2) << '\n';
      } else {
        std::ofstream out(cmd.out_path);
        if (!out) throw sfgof::ValidationError("cannot write '" + cmd.out_path + "'");
        out << report.dump(2) << '\n';
      }
      if (name == "replicate" && !config.csv.empty()) {
        std::ofstream csv(config.csv);
        if (!csv) throw sfgof::ValidationError("cannot write '" + config.csv + "'");
        csv << sfgof::run::replicate_csv(report);
      }
      return 0;
    } catch (const sfgof::ParseError& e) {
      return fail(2, "parse", std::string(e.what()) + " (line " + std::to_string(e.line()) + ", column " +
                                  std::to_string(e.column()) + ")");
    } catch (const sfgof::ValidationError& e) {
      return fail(2, "validation", e.what());
    } catch (const sfgof::NumericalError& e) {
      return fail(3, "numerical", e.what());
    } catch (const std::exception& e) {
      return fail(1, "internal", e.what());
    }
  }
  return 2;
}
