#pragma once

#include "byzrep/analysis.hpp"
#include "byzrep/bit_window.hpp"
#include "byzrep/clustering.hpp"
#include "byzrep/config_io.hpp"
#include "byzrep/experiments.hpp"
#include "byzrep/fusion.hpp"
#include "byzrep/model.hpp"
#include "byzrep/pam.hpp"
#include "byzrep/pipeline.hpp"
#include "byzrep/random.hpp"
#include "byzrep/reputation.hpp"
#include "byzrep/sim.hpp"
