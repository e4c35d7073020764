#pragma once

#include "trendagg/nowcast/evaluate.hpp"
#include "trendagg/nowcast/models.hpp"
#include "trendagg/nowcast/ols.hpp"
