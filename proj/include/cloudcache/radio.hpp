// Copyright 2026 The cloudcache Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace cloudcache {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

/// Radio and spatial intensities, linear units throughout.
struct RadioParams
{
    double P = 1.0;          // transmit power
    double alpha_i = 2.5;    // pathloss exponent inside the user's cloud
    double alpha_o = 3.0;    // pathloss exponent from other clouds
    double sigma2 = 1e-3;    // noise power
    double beta = 10.0;      // SINR threshold
    double lambda = 0.1;     // RU intensity inside a cloud, 1/m^2
    double lambda_p = 1e-4;  // cloud centre intensity, 1/m^2
    int M = 10;              // antennas per RU

    void validate() const
    {
        std::ostringstream msg;
        if (!(P > 0.0))
            msg << "P must be > 0; ";
        if (!(sigma2 > 0.0))
            msg << "sigma2 must be > 0; ";
        if (!(beta > 0.0))
            msg << "beta must be > 0; ";
        if (!(lambda > 0.0))
            msg << "lambda must be > 0; ";
        if (!(lambda_p >= 0.0))
            msg << "lambda_p must be >= 0; ";
        if (!(alpha_o > 2.0))
            msg << "alpha_o must be > 2; ";
        if (!(alpha_i > 0.0))
            msg << "alpha_i must be > 0; ";
        if (!(alpha_i < alpha_o))
            msg << "alpha_i must be < alpha_o; ";
        if (M < 1)
            msg << "M must be >= 1; ";
        if (!msg.str().empty())
            throw std::domain_error("RadioParams: " + msg.str());
    }
};

} // namespace cloudcache
