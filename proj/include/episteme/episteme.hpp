#pragma once

#include "episteme/closure.hpp"
#include "episteme/dot.hpp"
#include "episteme/epistemics.hpp"
#include "episteme/hierarchy.hpp"
#include "episteme/lp.hpp"
#include "episteme/model.hpp"
#include "episteme/model_io.hpp"
#include "episteme/priors.hpp"
#include "episteme/rational.hpp"
#include "episteme/trade.hpp"
