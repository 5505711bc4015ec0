#pragma once

#include "aoigame/channel.hpp"
#include "aoigame/config.hpp"
#include "aoigame/core_model.hpp"
#include "aoigame/game.hpp"
#include "aoigame/harness.hpp"
#include "aoigame/learning.hpp"
#include "aoigame/rng.hpp"
#include "aoigame/round_robin.hpp"
#include "aoigame/welfare.hpp"
