#pragma once

#include "netform/config.hpp"
#include "netform/dynamics.hpp"
#include "netform/errors.hpp"
#include "netform/game.hpp"
#include "netform/io.hpp"
#include "netform/meanfield.hpp"
#include "netform/motif.hpp"
#include "netform/network.hpp"
#include "netform/parallel.hpp"
#include "netform/rng.hpp"
#include "netform/trade.hpp"
#include "netform/typed.hpp"
#include "netform/version.hpp"
