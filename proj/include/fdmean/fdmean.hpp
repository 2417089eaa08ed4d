#pragma once

// Umbrella header: mean-function estimation for discretely sampled
// random curves via Sobolev-space smoothing splines, plus the
// simulation and sweep machinery around it.

#include "fdmean/bernoulli.hpp"
#include "fdmean/csv.hpp"
#include "fdmean/dataset.hpp"
#include "fdmean/design.hpp"
#include "fdmean/errors.hpp"
#include "fdmean/estimate.hpp"
#include "fdmean/harness.hpp"
#include "fdmean/kernel.hpp"
#include "fdmean/metrics.hpp"
#include "fdmean/plan_file.hpp"
#include "fdmean/process.hpp"
#include "fdmean/rng.hpp"
#include "fdmean/solver.hpp"
#include "fdmean/tuning.hpp"
