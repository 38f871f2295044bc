#pragma once

#include "trp/experiments.hpp"
#include "trp/frame.hpp"
#include "trp/integrator.hpp"
#include "trp/io.hpp"
#include "trp/linalg.hpp"
#include "trp/metrics.hpp"
#include "trp/optimizer.hpp"
#include "trp/propagator.hpp"
#include "trp/sweep.hpp"
#include "trp/targets.hpp"

namespace trp {
inline constexpr const char* kVersion = "0.1.0";
}
