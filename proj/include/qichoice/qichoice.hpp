#pragma once

#include "qichoice/rational.hpp"
#include "qichoice/error.hpp"
#include "qichoice/metric_graph.hpp"
#include "qichoice/coarse_maps.hpp"
#include "qichoice/gamma_spaces.hpp"
#include "qichoice/coarse_analysis.hpp"
#include "qichoice/tree_ops.hpp"
#include "qichoice/choice_pipeline.hpp"
#include "qichoice/io.hpp"
