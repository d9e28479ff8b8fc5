#pragma once

// Umbrella header for the library.

#include "elof/config.hpp"
#include "elof/diagnostics.hpp"
#include "elof/errors.hpp"
#include "elof/frank_energy.hpp"
#include "elof/grid.hpp"
#include "elof/initial_data.hpp"
#include "elof/io.hpp"
#include "elof/operators.hpp"
#include "elof/run.hpp"
#include "elof/solver.hpp"
#include "elof/spectral.hpp"
