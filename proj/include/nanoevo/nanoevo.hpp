#pragma once

#include "nanoevo/config.hpp"
#include "nanoevo/error.hpp"
#include "nanoevo/evolution.hpp"
#include "nanoevo/kinetics.hpp"
#include "nanoevo/parallel.hpp"
#include "nanoevo/report.hpp"
#include "nanoevo/rng.hpp"
#include "nanoevo/runner.hpp"
#include "nanoevo/settings.hpp"
#include "nanoevo/ssa.hpp"
#include "nanoevo/types.hpp"
#include "nanoevo/unitmap.hpp"
#include "nanoevo/world.hpp"
