#pragma once

#include "lifsync/bounds.hpp"
#include "lifsync/cascade.hpp"
#include "lifsync/experiment.hpp"
#include "lifsync/montecarlo.hpp"
#include "lifsync/ou.hpp"
#include "lifsync/params.hpp"
#include "lifsync/random.hpp"
#include "lifsync/simulator.hpp"
#include "lifsync/spec.hpp"
#include "lifsync/version.hpp"
