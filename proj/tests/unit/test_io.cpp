#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "sfgof/error.hpp"
#include "sfgof/io.hpp"
#include "sfgof/runner.hpp"

namespace sfgof {
namespace {

const io::ColumnMap kColumns = io::ColumnMap::parse({"y=response", "x1=regressor", "x2=regressor", "name=id"});

TEST(Csv, FixtureShape) {
  const auto columns = io::ColumnMap::parse({"log_cost_pf=response", "log_q=regressor", "log_q_sq=regressor",
                                             "log_pl_pf=regressor", "log_pk_pf=regressor", "firm=id"});
  const auto data = io::ingest_csv(testing::data_path("christensen_greene_1970.csv"), columns);
  EXPECT_EQ(data.sample.n(), 123);
  EXPECT_EQ(data.sample.k(), 5);
  EXPECT_EQ(data.ids.front(), "1");
  EXPECT_EQ(data.regressors.front(), "(intercept)");
  EXPECT_EQ(data.regressors.back(), "log_pk_pf");
}

TEST(Csv, CostNegatesResponseAndDesign) {
  std::istringstream a("name,y,x1,x2\nf1,1.5,2,3\nf2,-1,0.5,\"4\"\n");
  std::istringstream b(a.str());
  const auto prod = io::read_csv(a, kColumns);
  const auto cost = io::read_csv(b, kColumns, {.cost = true});
  EXPECT_EQ(cost.sample.y, -prod.sample.y);
  EXPECT_EQ(cost.sample.x, -prod.sample.x);
  EXPECT_EQ(cost.sample.x(0, 0), -1.0);
  EXPECT_EQ(prod.ids[1], "f2");
}

TEST(Csv, EmptyInputIsAParseError) {
  std::istringstream in("");
  EXPECT_THROW(io::read_csv(in, kColumns), ParseError);
  std::istringstream header_only("name,y,x1,x2\n");
  EXPECT_THROW(io::read_csv(header_only, kColumns), ValidationError);
}

TEST(Csv, NonNumericCellReportsRowAndColumn) {
  std::ostringstream text;
  text << "name,y,x1,x2\n";
  for (int i = 1; i <= 8; ++i) text << "f" << i << ',' << i << ',' << (i == 7 ? "abc" : "1.5") << ',' << i * i << '\n';
  std::istringstream in(text.str());
  try {
    io::read_csv(in, kColumns);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("row 7"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("'x1'"), std::string::npos) << e.what();
    EXPECT_EQ(e.line(), 8u);
    EXPECT_EQ(e.column(), 3u);
  }
}

TEST(Csv, MissingColumnAndBadMapping) {
  std::istringstream in("name,y,x1\nf1,1,2\n");
  EXPECT_THROW(io::read_csv(in, kColumns), ValidationError);
  EXPECT_THROW(io::ColumnMap::parse({"y=response", "z=response"}), ConfigError);
  EXPECT_THROW(io::ColumnMap::parse({"x=regressor"}), ConfigError);
  EXPECT_THROW(io::ColumnMap::parse({"y=outcome"}), ConfigError);
}

TEST(RunConfig, JsonRoundTrip) {
  run::RunConfig c;
  c.command = "simulate";
  c.family = "stable_gamma";
  c.estimator = "mle";
  c.gamma = 6.0;
  c.fixed_alpha = 1.9;
  c.M = 400;
  c.n = 250;
  c.seed = 42;
  c.generator = {{"type", "stable_gamma"}, {"kappa", 1.0}, {"alpha", 1.9}, {"p", 1.0}, {"c", 1.0}};
  const auto back = run::RunConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
  EXPECT_EQ(back.fixed_alpha, 1.9);
  EXPECT_EQ(back.seed, 42u);
}

TEST(RunConfig, UnknownKeyRejected) {
  EXPECT_THROW(run::RunConfig::from_json({{"command", "fit"}, {"gama", 1.0}}), ConfigError);
}

TEST(RunConfig, GeneratorRoundTrip) {
  const nlohmann::json doc = {{"type", "mixture"},
                              {"weight", 0.7},
                              {"first", {{"type", "normal_gamma"}, {"sigma_v2", 1.0}, {"p", 1.0}, {"c", 1.0}}},
                              {"second", {{"type", "normal_gamma"}, {"sigma_v2", 1.0}, {"p", 3.0}, {"c", 1.0}}}};
  const auto gen = run::parse_generator(doc);
  const auto& mix = std::get<rs::Mixture>(gen);
  EXPECT_EQ(mix.second.p, 3.0);
  EXPECT_EQ(run::parse_generator(run::generator_to_json(gen)).index(), gen.index());
}

TEST(Replicate, CellsFollowTheTableDesigns) {
  EXPECT_EQ(run::replicate_cells("T1").size(), 5u * 4u);
  EXPECT_EQ(run::replicate_cells("T1").front().design.gammas, (std::vector<double>{4.0, 6.0, 8.0}));
  EXPECT_EQ(run::replicate_cells("T2").size(), 5u * 3u);
  EXPECT_EQ(run::replicate_cells("T4").size(), 3u * 3u);
  EXPECT_THROW(run::replicate_cells("T9"), ConfigError);
}

#ifdef SFGOF_CLI_PATH
int run_cli(const std::string& args) {
  const std::string cmd = std::string(SFGOF_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, ExitCodes) {
  const auto dir = std::filesystem::temp_directory_path() / "sfgof_cli_test";
  std::filesystem::create_directories(dir);
  const auto bad = dir / "bad.csv";
  {
    std::ofstream out(bad);
    out << "y,x\n1,2\n3,oops\n";
  }
  const std::string fixture = testing::data_path("christensen_greene_1970.csv");
  const std::string cols = "--col log_cost_pf=response --col log_q=regressor --col log_q_sq=regressor "
                           "--col log_pl_pf=regressor --col log_pk_pf=regressor --col firm=id --cost";
  EXPECT_EQ(run_cli("fit --data " + fixture + " " + cols), 0);
  EXPECT_EQ(run_cli("fit --data " + bad.string() + " --col y=response --col x=regressor"), 2);
  EXPECT_EQ(run_cli("fit --data " + fixture + " --col nope=response"), 2);
  EXPECT_EQ(run_cli("test --data " + fixture + " " + cols + " --B 10"), 2);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  std::filesystem::remove_all(dir);
}
#endif

}  // namespace
}  // namespace sfgof
