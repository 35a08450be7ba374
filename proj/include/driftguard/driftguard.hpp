#pragma once

#include "driftguard/density.hpp"
#include "driftguard/detector.hpp"
#include "driftguard/drift.hpp"
#include "driftguard/errors.hpp"
#include "driftguard/evalkit.hpp"
#include "driftguard/guard.hpp"
#include "driftguard/rng.hpp"
#include "driftguard/simenv.hpp"
#include "driftguard/stats.hpp"
#include "driftguard/trace_io.hpp"
