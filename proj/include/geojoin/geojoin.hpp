#pragma once

#include "geojoin/bench.hpp"
#include "geojoin/datagen.hpp"
#include "geojoin/dataset_io.hpp"
#include "geojoin/engine.hpp"
#include "geojoin/grid.hpp"
#include "geojoin/join.hpp"
#include "geojoin/model.hpp"
#include "geojoin/oracle.hpp"
#include "geojoin/prefix_filter.hpp"
#include "geojoin/quadtree.hpp"
