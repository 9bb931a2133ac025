#pragma once

#include "nvsim/cavity.hpp"
#include "nvsim/config.hpp"
#include "nvsim/error.hpp"
#include "nvsim/model.hpp"
#include "nvsim/propagator.hpp"
#include "nvsim/readout.hpp"
#include "nvsim/sequence.hpp"
#include "nvsim/sweep.hpp"
#include "nvsim/units.hpp"
