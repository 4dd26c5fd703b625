#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "cloudcache/config.hpp"
#include "cloudcache/experiments.hpp"

using namespace cloudcache;

TEST(Config, DefaultFileIsTheDefaultNetwork)
{
    const auto cfg = load_config(std::string(CLOUDCACHE_CONFIG_DIR) + "/table1.ini");
    const NetworkConfig ref;
    EXPECT_DOUBLE_EQ(cfg.radio.P, ref.radio.P);
    EXPECT_NEAR(cfg.radio.sigma2, ref.radio.sigma2, 1e-18);
    EXPECT_NEAR(cfg.radio.beta, ref.radio.beta, 1e-12);
    EXPECT_EQ(cfg.radio.M, ref.radio.M);
    EXPECT_EQ(cfg.N, ref.N);
    EXPECT_EQ(cfg.N_c, ref.N_c);
    EXPECT_DOUBLE_EQ(cfg.gamma, ref.gamma);
    EXPECT_DOUBLE_EQ(cfg.d_g, ref.d_g);
}

TEST(Config, RoundTrip)
{
    NetworkConfig cfg;
    cfg.radio.beta = 31.6;
    cfg.d = 12.5;
    std::istringstream in(format_config(cfg));
    const auto back = parse_config(in);
    EXPECT_NEAR(back.radio.beta, 31.6, 1e-9);
    EXPECT_DOUBLE_EQ(back.d, 12.5);
}

TEST(Config, Errors)
{
    auto parse = [](const std::string& text) {
        std::istringstream in(text);
        return parse_config(in);
    };
    std::string text = format_config(NetworkConfig{});
    EXPECT_THROW(parse(text.substr(0, text.find("[content]"))), ConfigError);
    std::string bad = text;
    bad.replace(bad.find("alpha_o = 3"), 11, "alpha_o = 2");
    EXPECT_THROW(parse(bad), ConfigError);
    EXPECT_THROW(parse("[radio]\nbeta_dB = 10\nbeta = 10\n"), ConfigError);
    EXPECT_THROW(parse("[radio\n"), ConfigError);
    EXPECT_THROW(load_config("/nonexistent/file.ini"), ConfigError);
    std::string wide = text;
    wide.replace(wide.find("d = 10"), 6, "d = 40");
    EXPECT_THROW(parse(wide), ConfigError);
}

TEST(SweepValue, Mapping)
{
    const NetworkConfig base;
    EXPECT_NEAR(apply_sweep_value(base, "beta_dB", 15).radio.beta, std::pow(10.0, 1.5), 1e-12);
    const auto a = apply_sweep_value(base, "alpha", 3.5);
    EXPECT_EQ(a.radio.alpha_i, 3.5);
    EXPECT_EQ(a.radio.alpha_o, 4.0);
    EXPECT_EQ(apply_sweep_value(base, "N_c", 4).N_c, 4);
    EXPECT_THROW(apply_sweep_value(base, "lambda", 1), std::domain_error);
    EXPECT_THROW(apply_sweep_value(base, "d", 45), std::exception);
}

TEST(Sweep, FigureGrids)
{
    EXPECT_EQ(figure_sweep(2).values, (std::vector<double>{0, 5, 10, 15}));
    EXPECT_EQ(figure_sweep(3).values.size(), 7u);
    EXPECT_EQ(figure_sweep(4).values.front(), 1.0);
    EXPECT_EQ(figure_sweep(4).values.back(), 20.0);
    EXPECT_EQ(figure_sweep(6).values, (std::vector<double>{2, 4, 6, 8, 10}));
    EXPECT_EQ(figure_sweep(7).values.front(), 2.0);
    EXPECT_EQ(figure_sweep(7).values.back(), 5.0);
    EXPECT_THROW(figure_sweep(8), std::domain_error);
}

TEST(Sweep, RowsAndCsvRoundTrip)
{
    SweepSpec s;
    s.variable = "beta_dB";
    s.values = {5, 10};
    s.methods = {EvalMethod::Exact, EvalMethod::Approximate, EvalMethod::MonteCarlo};
    s.trials = 1500;
    s.seed = 3;
    const auto curve = run_sweep(NetworkConfig{}, s);
    ASSERT_EQ(curve.rows.size(), 12u);
    EXPECT_EQ(curve.failures(), 0u);
    for (const auto& r : curve.rows)
    {
        EXPECT_GE(r.hit, 0.0);
        EXPECT_LE(r.hit, 1.0);
        EXPECT_EQ(r.runtime_ms, 0.0);
        EXPECT_EQ(r.ci_halfwidth > 0.0, r.method == "mc");
    }
    std::ostringstream out;
    emit_csv(curve, out);
    std::istringstream in(out.str());
    const auto back = read_csv(in);
    ASSERT_EQ(back.rows.size(), curve.rows.size());
    for (std::size_t k = 0; k < back.rows.size(); ++k)
        EXPECT_TRUE(back.rows[k] == curve.rows[k]);

    std::ostringstream again;
    emit_csv(run_sweep(NetworkConfig{}, s), again);
    EXPECT_EQ(out.str(), again.str());
}

TEST(Sweep, FailedPointsAreMarked)
{
    SweepSpec s;
    s.variable = "d";
    s.values = {10, 45};
    s.strategies = {Strategy::Closest};
    const auto curve = run_sweep(NetworkConfig{}, s);
    ASSERT_EQ(curve.rows.size(), 2u);
    EXPECT_TRUE(std::isfinite(curve.rows[0].hit));
    EXPECT_TRUE(std::isnan(curve.rows[1].hit));
    EXPECT_FALSE(curve.rows[1].error.empty());
    EXPECT_EQ(curve.failures(), 1u);
    std::ostringstream out;
    emit_csv(curve, out);
    EXPECT_NE(out.str().find(",nan,nan,"), std::string::npos);
}

TEST(Sweep, SpecValidation)
{
    SweepSpec s;
    s.variable = "nope";
    s.values = {1};
    EXPECT_THROW(run_sweep(NetworkConfig{}, s), std::domain_error);
    s.variable = "gamma";
    s.values = {1.0, 0.5};
    EXPECT_THROW(run_sweep(NetworkConfig{}, s), std::domain_error);
}

TEST(Csv, RejectsMalformedInput)
{
    std::istringstream no_header("a,b\n");
    EXPECT_THROW(read_csv(no_header), std::runtime_error);
    std::istringstream short_row(std::string(csv_header()) + "\nbeta_dB,1,closest\n");
    EXPECT_THROW(read_csv(short_row), std::runtime_error);
}
