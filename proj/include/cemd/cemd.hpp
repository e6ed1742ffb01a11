#pragma once

// Umbrella header for the CEMD structured sparse recovery toolkit.

#include "cemd/flow.hpp"
#include "cemd/head.hpp"
#include "cemd/measurement.hpp"
#include "cemd/model.hpp"
#include "cemd/oracles.hpp"
#include "cemd/recovery.hpp"
#include "cemd/rng.hpp"
#include "cemd/signal.hpp"
