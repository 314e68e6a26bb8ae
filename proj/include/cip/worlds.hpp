#pragma once

#include "cip/worlds/attribute_world.hpp"
#include "cip/worlds/csv.hpp"
#include "cip/worlds/instance_world.hpp"
#include "cip/worlds/predictors.hpp"
#include "cip/worlds/samplers.hpp"
