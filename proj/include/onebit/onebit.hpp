#pragma once

#include "onebit/error.hpp"
#include "onebit/constellation.hpp"
#include "onebit/rng.hpp"
#include "onebit/channel.hpp"
#include "onebit/range_design.hpp"
#include "onebit/precoding.hpp"
#include "onebit/metrics.hpp"
#include "onebit/sim/config.hpp"
#include "onebit/sim/table.hpp"
#include "onebit/sim/harness.hpp"
#include "onebit/sim/analysis.hpp"
