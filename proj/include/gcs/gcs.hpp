#pragma once

#include "gcs/baselines.hpp"
#include "gcs/core.hpp"
#include "gcs/io.hpp"
#include "gcs/metrics.hpp"
#include "gcs/movement.hpp"
#include "gcs/parallel.hpp"
#include "gcs/report.hpp"
#include "gcs/scoring.hpp"
