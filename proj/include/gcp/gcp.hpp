#pragma once

#include "gcp/core.hpp"
#include "gcp/error.hpp"
#include "gcp/graph_build.hpp"
#include "gcp/inference.hpp"
#include "gcp/moments.hpp"
#include "gcp/pvalue.hpp"
#include "gcp/resampling.hpp"
#include "gcp/rng.hpp"
#include "gcp/scan.hpp"
