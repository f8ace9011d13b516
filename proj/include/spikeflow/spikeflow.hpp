#pragma once

// Umbrella header for the whole library.

#include "spikeflow/config.hpp"
#include "spikeflow/event_io.hpp"
#include "spikeflow/events.hpp"
#include "spikeflow/fileutil.hpp"
#include "spikeflow/flow.hpp"
#include "spikeflow/kernel_export.hpp"
#include "spikeflow/layers.hpp"
#include "spikeflow/network.hpp"
#include "spikeflow/neuron.hpp"
#include "spikeflow/plasticity.hpp"
#include "spikeflow/response.hpp"
#include "spikeflow/weights_io.hpp"
