#pragma once

#include "aoisim/error.hpp"
#include "aoisim/params.hpp"
#include "aoisim/random.hpp"
#include "aoisim/sim_core.hpp"
#include "aoisim/segments.hpp"
#include "aoisim/aoi_metrics.hpp"
#include "aoisim/failure_detector.hpp"
#include "aoisim/analytics.hpp"
#include "aoisim/stats.hpp"
#include "aoisim/metrics.hpp"
#include "aoisim/oracle.hpp"
#include "aoisim/experiment.hpp"
