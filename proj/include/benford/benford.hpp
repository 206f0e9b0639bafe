#pragma once

#include "benford/asymptotics.hpp"
#include "benford/distributions.hpp"
#include "benford/errors.hpp"
#include "benford/generators.hpp"
#include "benford/null_cache.hpp"
#include "benford/null_engine.hpp"
#include "benford/random.hpp"
#include "benford/significand.hpp"
#include "benford/special_functions.hpp"
#include "benford/statistics.hpp"
#include "benford/test_runner.hpp"
