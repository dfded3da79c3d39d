#pragma once

#include "patrol/error.hpp"
#include "patrol/instance.hpp"
#include "patrol/schedule.hpp"
#include "patrol/mst.hpp"
#include "patrol/treecover.hpp"
#include "patrol/oracle.hpp"
#include "patrol/planner.hpp"
#include "patrol/security.hpp"
