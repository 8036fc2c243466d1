#pragma once

#include "duelsim/config.hpp"
#include "duelsim/engine.hpp"
#include "duelsim/errors.hpp"
#include "duelsim/ltr.hpp"
#include "duelsim/policies.hpp"
#include "duelsim/preference.hpp"
#include "duelsim/random.hpp"
#include "duelsim/report.hpp"
#include "duelsim/runner.hpp"
#include "duelsim/stats.hpp"
