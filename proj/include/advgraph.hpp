#pragma once

#include "advgraph/attacks.hpp"
#include "advgraph/attributes.hpp"
#include "advgraph/error.hpp"
#include "advgraph/forest.hpp"
#include "advgraph/generators.hpp"
#include "advgraph/graph.hpp"
#include "advgraph/metrics.hpp"
#include "advgraph/pipeline.hpp"
#include "advgraph/run_config.hpp"
#include "advgraph/surrogate.hpp"
