#ifndef NOONSIM_NOONSIM_HPP
#define NOONSIM_NOONSIM_HPP

#include "analysis.hpp"
#include "config.hpp"
#include "constants.hpp"
#include "protocol.hpp"
#include "spin_model.hpp"
#include "thermometry.hpp"

#endif
