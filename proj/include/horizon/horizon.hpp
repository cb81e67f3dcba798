#pragma once

#include "horizon/bounds.hpp"
#include "horizon/consolidate.hpp"
#include "horizon/dp.hpp"
#include "horizon/enumerate.hpp"
#include "horizon/envgen.hpp"
#include "horizon/errors.hpp"
#include "horizon/gridworld.hpp"
#include "horizon/io.hpp"
#include "horizon/learners.hpp"
#include "horizon/mdp.hpp"
#include "horizon/metrics.hpp"
#include "horizon/parallel.hpp"
#include "horizon/policy.hpp"
#include "horizon/qtable.hpp"
#include "horizon/simulator.hpp"
#include "horizon/tight/choice.hpp"
#include "horizon/tight/failure.hpp"
#include "horizon/tight/lp.hpp"
#include "horizon/tight/stats.hpp"
