#pragma once

/// \file stein.hpp
/// Umbrella header.

#include "stein/catalog.hpp"
#include "stein/errors.hpp"
#include "stein/limit_bounds.hpp"
#include "stein/monte_carlo.hpp"
#include "stein/power_divergence.hpp"
#include "stein/quadrature.hpp"
#include "stein/selfcheck.hpp"
#include "stein/smooth_function.hpp"
#include "stein/special_functions.hpp"
#include "stein/stein_solution.hpp"
#include "stein/types.hpp"
