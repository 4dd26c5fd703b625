// Copyright 2026 The cloudcache Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "cloudcache/quadrature.hpp"
#include "cloudcache/geometry.hpp"
#include "cloudcache/content.hpp"
#include "cloudcache/radio.hpp"
#include "cloudcache/interference.hpp"
#include "cloudcache/hitprob.hpp"
#include "cloudcache/config.hpp"
#include "cloudcache/stats.hpp"
#include "cloudcache/simulator.hpp"
#include "cloudcache/optimizer.hpp"
#include "cloudcache/experiments.hpp"
#include "cloudcache/validation.hpp"
