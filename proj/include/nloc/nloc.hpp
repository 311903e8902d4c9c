// Umbrella header.
#pragma once

#include "nloc/adjoint.hpp"
#include "nloc/field.hpp"
#include "nloc/io.hpp"
#include "nloc/kernel.hpp"
#include "nloc/model.hpp"
#include "nloc/ops.hpp"
#include "nloc/optimizer.hpp"
#include "nloc/potential.hpp"
#include "nloc/rng.hpp"
#include "nloc/scenario.hpp"
#include "nloc/state.hpp"
#include "nloc/state_solver.hpp"
#include "nloc/tangent.hpp"
