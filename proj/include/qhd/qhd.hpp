#pragma once

// Everything in one include.

#include "qhd/core.hpp"
#include "qhd/diagnostics.hpp"
#include "qhd/errors.hpp"
#include "qhd/hydro_solver.hpp"
#include "qhd/madelung.hpp"
#include "qhd/runner.hpp"
#include "qhd/scenario.hpp"
#include "qhd/stability.hpp"
#include "qhd/stationary.hpp"
#include "qhd/wavefn_solver.hpp"
