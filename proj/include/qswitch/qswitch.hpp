#pragma once

#include "qswitch/config.hpp"
#include "qswitch/link_formulas.hpp"
#include "qswitch/linkgen.hpp"
#include "qswitch/model.hpp"
#include "qswitch/plot.hpp"
#include "qswitch/region.hpp"
#include "qswitch/report.hpp"
#include "qswitch/scheduler.hpp"
#include "qswitch/simulator.hpp"
#include "qswitch/stability.hpp"
#include "qswitch/sweep.hpp"
