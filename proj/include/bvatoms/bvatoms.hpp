#pragma once
// Umbrella header.

#include "bvatoms/errors.hpp"
#include "bvatoms/grid.hpp"
#include "bvatoms/dyadic.hpp"
#include "bvatoms/coarea.hpp"
#include "bvatoms/boxing.hpp"
#include "bvatoms/heat.hpp"
#include "bvatoms/atoms.hpp"
#include "bvatoms/parallel.hpp"
#include "bvatoms/pipeline.hpp"
#include "bvatoms/io.hpp"
#include "bvatoms/serialize.hpp"
#include "bvatoms/diagnostics.hpp"
#include "bvatoms/corpus.hpp"
