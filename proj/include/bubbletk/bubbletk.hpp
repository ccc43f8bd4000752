#pragma once

#include "bubbletk/core.hpp"
#include "bubbletk/rng.hpp"
#include "bubbletk/minkowski.hpp"
#include "bubbletk/cluster.hpp"
#include "bubbletk/projections.hpp"
#include "bubbletk/measure.hpp"
#include "bubbletk/construct.hpp"
#include "bubbletk/combinatorics.hpp"
#include "bubbletk/variation.hpp"
#include "bubbletk/io.hpp"
#include "bubbletk/plot.hpp"
