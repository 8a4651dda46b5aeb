#pragma once

#include "costing.hpp"
#include "csv.hpp"
#include "demand.hpp"
#include "dispatch.hpp"
#include "error.hpp"
#include "fleet.hpp"
#include "planner.hpp"
#include "profiles.hpp"
#include "rng.hpp"
#include "scenario.hpp"
#include "units.hpp"
