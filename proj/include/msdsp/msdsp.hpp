#pragma once

#include "msdsp/error.hpp"
#include "msdsp/rng.hpp"
#include "msdsp/distributions.hpp"
#include "msdsp/model.hpp"
#include "msdsp/banded.hpp"
#include "msdsp/hmm.hpp"
#include "msdsp/samplers.hpp"
#include "msdsp/fingerprint.hpp"
#include "msdsp/engine.hpp"
#include "msdsp/forecast.hpp"
#include "msdsp/metrics.hpp"
#include "msdsp/dgp.hpp"
#include "msdsp/econdata.hpp"
#include "msdsp/parallel.hpp"
#include "msdsp/backtest.hpp"
#include "msdsp/assembly.hpp"
#include "msdsp/config_io.hpp"
#include "msdsp/io.hpp"
