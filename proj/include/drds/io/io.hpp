#pragma once

// Umbrella header for the file formats: scenarios, policies, disturbance
// sample dumps, and run reports.

#include <drds/io/digest.hpp>
#include <drds/io/noise_io.hpp>
#include <drds/io/policy.hpp>
#include <drds/io/report.hpp>
#include <drds/io/scenario.hpp>
#include <drds/io/text.hpp>
