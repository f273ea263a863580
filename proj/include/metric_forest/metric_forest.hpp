#pragma once

// Exact computational geometry on finite metric spaces: compressed cover
// trees, k-nearest neighbors, single-tree Boruvka minimum spanning trees,
// single-linkage dendrograms, mergegrams, 0D persistence, bottleneck
// distance, sigmoid-kernel density estimation, and tree skeletonization of
// noisy point clouds.

#include "metric_forest/common.hpp"
#include "metric_forest/metric_space.hpp"
#include "metric_forest/cover_tree.hpp"
#include "metric_forest/knn.hpp"
#include "metric_forest/union_find.hpp"
#include "metric_forest/mst.hpp"
#include "metric_forest/diagram.hpp"
#include "metric_forest/kde.hpp"
#include "metric_forest/geometry.hpp"
#include "metric_forest/graph.hpp"
#include "metric_forest/skeleton.hpp"
#include "metric_forest/datasets.hpp"
#include "metric_forest/io.hpp"
