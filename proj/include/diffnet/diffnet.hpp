#pragma once

#include "diffnet/engine.hpp"
#include "diffnet/metrics.hpp"
#include "diffnet/rng.hpp"
#include "diffnet/runner.hpp"
#include "diffnet/sampling.hpp"
#include "diffnet/scenario.hpp"
#include "diffnet/shift.hpp"
#include "diffnet/signal.hpp"
#include "diffnet/theory.hpp"
#include "diffnet/topology.hpp"
#include "diffnet/weights.hpp"
