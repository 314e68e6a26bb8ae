#pragma once

#include "cip/core/contracts.hpp"
#include "cip/core/distribution.hpp"
#include "cip/core/error.hpp"
#include "cip/core/parallel.hpp"
#include "cip/core/rng.hpp"
#include "cip/core/types.hpp"
