#pragma once

// Umbrella header for the whole library.

#include "lrd/batch.hpp"
#include "lrd/core_ops.hpp"
#include "lrd/errors.hpp"
#include "lrd/image.hpp"
#include "lrd/manifold.hpp"
#include "lrd/matrix_io.hpp"
#include "lrd/metrics.hpp"
#include "lrd/png_io.hpp"
#include "lrd/result_io.hpp"
#include "lrd/rng.hpp"
#include "lrd/solver.hpp"
#include "lrd/synth.hpp"
#include "lrd/transform.hpp"
#include "lrd/warp.hpp"

