#pragma once

// Umbrella header.

#include "balance/acquisition.hpp"
#include "balance/algorithms.hpp"
#include "balance/batch_state.hpp"
#include "balance/diagnostics.hpp"
#include "balance/ensemble.hpp"
#include "balance/error.hpp"
#include "balance/oracle.hpp"
#include "balance/parallel.hpp"
#include "balance/partition.hpp"
#include "balance/random.hpp"
#include "balance/report.hpp"
#include "balance/run_config.hpp"
#include "balance/sampling.hpp"
#include "balance/selection.hpp"
#include "balance/simulation.hpp"
#include "balance/synthetic.hpp"
#include "balance/tensor.hpp"
#include "balance/tensor_io.hpp"
