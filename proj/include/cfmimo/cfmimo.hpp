// SPDX-License-Identifier: Apache-2.0
//
// Umbrella header.

#pragma once

#include <cfmimo/channel_model.hpp>
#include <cfmimo/config.hpp>
#include <cfmimo/experiment.hpp>
#include <cfmimo/filter_design.hpp>
#include <cfmimo/metrics.hpp>
#include <cfmimo/monte_carlo.hpp>
#include <cfmimo/optimizer.hpp>
#include <cfmimo/power_gp.hpp>
#include <cfmimo/rng.hpp>
#include <cfmimo/sinr.hpp>
#include <cfmimo/validation.hpp>
