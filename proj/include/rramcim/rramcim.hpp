#pragma once

#include "rramcim/errors.hpp"
#include "rramcim/bitlinalg.hpp"
#include "rramcim/rng.hpp"
#include "rramcim/device.hpp"
#include "rramcim/cell.hpp"
#include "rramcim/array.hpp"
#include "rramcim/pcspc.hpp"
#include "rramcim/system.hpp"
#include "rramcim/protocol.hpp"
#include "rramcim/perfmodel.hpp"
#include "rramcim/config.hpp"
#include "rramcim/experiments.hpp"
