#pragma once

#include "epirt/core.hpp"
#include "epirt/csv.hpp"
#include "epirt/dates.hpp"
#include "epirt/estimator.hpp"
#include "epirt/gamma.hpp"
#include "epirt/ingest.hpp"
#include "epirt/parallel.hpp"
#include "epirt/report.hpp"
#include "epirt/rng.hpp"
#include "epirt/simulate.hpp"
#include "epirt/stats.hpp"
