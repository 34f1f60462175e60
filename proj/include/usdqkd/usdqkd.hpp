// usdqkd.hpp
// Umbrella header.

#pragma once

#include "usdqkd/channel.hpp"
#include "usdqkd/common.hpp"
#include "usdqkd/decoy.hpp"
#include "usdqkd/montecarlo.hpp"
#include "usdqkd/optim.hpp"
#include "usdqkd/states.hpp"
#include "usdqkd/usd.hpp"
