#pragma once

#include "mmfield/constructions.hpp"
#include "mmfield/curvature.hpp"
#include "mmfield/field.hpp"
#include "mmfield/filtrations.hpp"
#include "mmfield/gh.hpp"
#include "mmfield/gp.hpp"
#include "mmfield/gw.hpp"
#include "mmfield/miniball.hpp"
#include "mmfield/relation.hpp"
#include "mmfield/target_space.hpp"
#include "mmfield/transport.hpp"
