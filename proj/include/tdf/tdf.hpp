#pragma once

#include "tdf/aes.hpp"
#include "tdf/aes_graph.hpp"
#include "tdf/composer.hpp"
#include "tdf/config_registers.hpp"
#include "tdf/energy.hpp"
#include "tdf/engine.hpp"
#include "tdf/errors.hpp"
#include "tdf/graph.hpp"
#include "tdf/graph_json.hpp"
#include "tdf/hex.hpp"
#include "tdf/kernels.hpp"
#include "tdf/perf.hpp"
#include "tdf/tagged_fifo.hpp"
#include "tdf/token.hpp"
#include "tdf/workload.hpp"
