#pragma once

#include "trendagg/tsanalysis/cluster.hpp"
#include "trendagg/tsanalysis/mds.hpp"
#include "trendagg/tsanalysis/series.hpp"
