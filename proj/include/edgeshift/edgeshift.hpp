#pragma once

// Umbrella header.

#include "edgeshift/core.hpp"
#include "edgeshift/floquet.hpp"
#include "edgeshift/lattice.hpp"
#include "edgeshift/model.hpp"
#include "edgeshift/model_io.hpp"
#include "edgeshift/perturbation.hpp"
#include "edgeshift/pipeline.hpp"
#include "edgeshift/verification/box.hpp"
#include "edgeshift/verification/fiber_checks.hpp"
#include "edgeshift/verification/fit.hpp"
#include "edgeshift/verification/kirsch_simon.hpp"
#include "edgeshift/verification/lanczos.hpp"
#include "edgeshift/verification/quasiperiodic.hpp"
