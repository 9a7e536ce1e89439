#pragma once

#include "airdsgd/airsim.hpp"
#include "airdsgd/coloring.hpp"
#include "airdsgd/dataset.hpp"
#include "airdsgd/dsgd.hpp"
#include "airdsgd/errors.hpp"
#include "airdsgd/experiment.hpp"
#include "airdsgd/mixing.hpp"
#include "airdsgd/random.hpp"
#include "airdsgd/scheduling.hpp"
#include "airdsgd/tasks.hpp"
#include "airdsgd/topology.hpp"
