#pragma once

#include "rbcmarl/cli.hpp"
#include "rbcmarl/config.hpp"
#include "rbcmarl/config_io.hpp"
#include "rbcmarl/curriculum.hpp"
#include "rbcmarl/economy.hpp"
#include "rbcmarl/equilibrium.hpp"
#include "rbcmarl/errors.hpp"
#include "rbcmarl/io.hpp"
#include "rbcmarl/mlp.hpp"
#include "rbcmarl/observation.hpp"
#include "rbcmarl/parallel.hpp"
#include "rbcmarl/policy_update.hpp"
#include "rbcmarl/rl.hpp"
#include "rbcmarl/rng.hpp"
#include "rbcmarl/rollout.hpp"
#include "rbcmarl/run_state.hpp"
#include "rbcmarl/trainer.hpp"
