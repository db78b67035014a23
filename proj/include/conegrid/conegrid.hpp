#pragma once

#include "causal.hpp"
#include "distance.hpp"
#include "formula.hpp"
#include "geometry.hpp"
#include "product.hpp"
#include "scenario.hpp"
#include "svg.hpp"
#include "timefn.hpp"
#include "util.hpp"
