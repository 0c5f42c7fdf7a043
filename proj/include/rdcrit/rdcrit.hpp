#pragma once

// Umbrella header: rate-distortion quantities, criticality classification,
// and redundancy simulation for finite-alphabet memoryless sources.

#include "rdcrit/builtin.hpp"
#include "rdcrit/criticality.hpp"
#include "rdcrit/errors.hpp"
#include "rdcrit/io.hpp"
#include "rdcrit/lagrangian.hpp"
#include "rdcrit/model.hpp"
#include "rdcrit/numeric.hpp"
#include "rdcrit/rd_solver.hpp"
#include "rdcrit/rng.hpp"
#include "rdcrit/simulate.hpp"
