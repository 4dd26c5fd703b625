// Copyright 2026 The cloudcache Authors
// SPDX-License-Identifier: Apache-2.0
//
// Network configuration and its INI representation.
//
//   [radio]     P_dB alpha_i alpha_o sigma2_dB beta_dB lambda lambda_p M
//   [geometry]  D d_g d
//   [content]   N N_c gamma
//
// Keys ending in _dB are converted to linear at load. A linear spelling
// (P, sigma2, beta) is accepted instead, but not both.

#pragma once

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "cloudcache/content.hpp"
#include "cloudcache/geometry.hpp"
#include "cloudcache/radio.hpp"

namespace cloudcache {

struct NetworkConfig
{
    RadioParams radio;
    double D = 30.0;
    double d_g = 2.0;
    double d = 10.0; // distance from the user to its cloud centre
    int N = 20;
    int N_c = 10;
    double gamma = 0.7;

    void validate() const
    {
        radio.validate();
        geometry().validate();
        std::ostringstream msg;
        if (d > D)
            msg << "d must be <= D (user inside its cloud); ";
        if (N < 1)
            msg << "N must be >= 1; ";
        if (N_c < 0 || N_c > N)
            msg << "N_c must lie in [0, N]; ";
        if (!(gamma >= 0.0))
            msg << "gamma must be >= 0; ";
        if (!msg.str().empty())
            throw std::domain_error("NetworkConfig: " + msg.str());
    }

    CloudGeometry geometry() const { return CloudGeometry{D, d_g, d}; }
    CloudGeometry centre_geometry() const { return CloudGeometry{D, d_g, 0.0}; }
    PopularityProfile profile() const { return zipf_profile(static_cast<std::size_t>(N), gamma); }
};

class ConfigError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline double read_number(const boost::property_tree::ptree& tree, const std::string& key)
{
    auto node = tree.get_optional<std::string>(key);
    if (!node)
        throw ConfigError("config: missing required key '" + key + "'");
    try
    {
        std::size_t used = 0;
        const double v = std::stod(*node, &used);
        if (used != node->size())
            throw std::invalid_argument("trailing characters");
        return v;
    }
    catch (const std::exception&)
    {
        throw ConfigError("config: key '" + key + "' is not a number: '" + *node + "'");
    }
}

inline int read_int(const boost::property_tree::ptree& tree, const std::string& key)
{
    const double v = read_number(tree, key);
    if (v != std::floor(v))
        throw ConfigError("config: key '" + key + "' must be an integer");
    return static_cast<int>(v);
}

// Either `<key>_dB` or the linear `<key>`, exactly one of them.
inline double read_power(const boost::property_tree::ptree& tree, const std::string& section, const std::string& key)
{
    const std::string db = section + "." + key + "_dB";
    const std::string lin = section + "." + key;
    const bool has_db = static_cast<bool>(tree.get_optional<std::string>(db));
    const bool has_lin = static_cast<bool>(tree.get_optional<std::string>(lin));
    if (has_db && has_lin)
        throw ConfigError("config: both '" + db + "' and '" + lin + "' given");
    if (has_db)
        return db_to_linear(read_number(tree, db));
    if (has_lin)
        return read_number(tree, lin);
    throw ConfigError("config: missing required key '" + db + "'");
}

} // namespace detail

inline NetworkConfig parse_config(std::istream& in)
{
    boost::property_tree::ptree tree;
    try
    {
        boost::property_tree::ini_parser::read_ini(in, tree);
    }
    catch (const boost::property_tree::ini_parser_error& e)
    {
        std::ostringstream msg;
        msg << "config: parse error at line " << e.line() << ": " << e.message();
        throw ConfigError(msg.str());
    }
    NetworkConfig cfg;
    cfg.radio.P = detail::read_power(tree, "radio", "P");
    cfg.radio.alpha_i = detail::read_number(tree, "radio.alpha_i");
    cfg.radio.alpha_o = detail::read_number(tree, "radio.alpha_o");
    cfg.radio.sigma2 = detail::read_power(tree, "radio", "sigma2");
    cfg.radio.beta = detail::read_power(tree, "radio", "beta");
    cfg.radio.lambda = detail::read_number(tree, "radio.lambda");
    cfg.radio.lambda_p = detail::read_number(tree, "radio.lambda_p");
    cfg.radio.M = detail::read_int(tree, "radio.M");
    cfg.D = detail::read_number(tree, "geometry.D");
    cfg.d_g = detail::read_number(tree, "geometry.d_g");
    cfg.d = detail::read_number(tree, "geometry.d");
    cfg.N = detail::read_int(tree, "content.N");
    cfg.N_c = detail::read_int(tree, "content.N_c");
    cfg.gamma = detail::read_number(tree, "content.gamma");
    try
    {
        cfg.validate();
    }
    catch (const std::domain_error& e)
    {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

inline NetworkConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("config: cannot open '" + path + "'");
    return parse_config(in);
}

/// INI text for cfg, dB keys for the power-like quantities.
inline std::string format_config(const NetworkConfig& cfg)
{
    std::ostringstream out;
    out << std::setprecision(17);
    out << "[radio]\n"
        << "P_dB = " << linear_to_db(cfg.radio.P) << "\n"
        << "alpha_i = " << cfg.radio.alpha_i << "\n"
        << "alpha_o = " << cfg.radio.alpha_o << "\n"
        << "sigma2_dB = " << linear_to_db(cfg.radio.sigma2) << "\n"
        << "beta_dB = " << linear_to_db(cfg.radio.beta) << "\n"
        << "lambda = " << cfg.radio.lambda << "\n"
        << "lambda_p = " << cfg.radio.lambda_p << "\n"
        << "M = " << cfg.radio.M << "\n\n"
        << "[geometry]\n"
        << "D = " << cfg.D << "\n"
        << "d_g = " << cfg.d_g << "\n"
        << "d = " << cfg.d << "\n\n"
        << "[content]\n"
        << "N = " << cfg.N << "\n"
        << "N_c = " << cfg.N_c << "\n"
        << "gamma = " << cfg.gamma << "\n";
    return out.str();
}

} // namespace cloudcache
