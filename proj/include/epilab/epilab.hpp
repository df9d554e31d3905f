#pragma once

#include "epilab/error.hpp"
#include "epilab/grid.hpp"
#include "epilab/closed_set.hpp"
#include "epilab/carrier.hpp"
#include "epilab/hyperspace.hpp"
#include "epilab/format.hpp"
#include "epilab/lsc.hpp"
#include "epilab/verdict.hpp"
#include "epilab/argmin.hpp"
#include "epilab/stochastic/rng.hpp"
#include "epilab/stochastic/samplers.hpp"
#include "epilab/stochastic/capacity.hpp"
#include "epilab/stochastic/testers.hpp"
#include "epilab/stochastic/scenarios.hpp"
#include "epilab/config.hpp"
#include "epilab/io.hpp"
#include "epilab/experiment.hpp"
#include "epilab/verify.hpp"
