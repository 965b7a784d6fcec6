#pragma once

// Umbrella header: saturating growth laws, calibration, phase-plane
// analysis, integration, and file I/O.

#include "satgrowth/csv.hpp"
#include "satgrowth/errors.hpp"
#include "satgrowth/fit.hpp"
#include "satgrowth/growth.hpp"
#include "satgrowth/integrate.hpp"
#include "satgrowth/phase.hpp"
#include "satgrowth/random.hpp"
#include "satgrowth/report.hpp"
#include "satgrowth/synth.hpp"
#include "satgrowth/timeseries.hpp"
#include "satgrowth/version.hpp"
