#pragma once

#include "bandit2p/conclab.hpp"
#include "bandit2p/engine.hpp"
#include "bandit2p/errors.hpp"
#include "bandit2p/estimator.hpp"
#include "bandit2p/geometry.hpp"
#include "bandit2p/io.hpp"
#include "bandit2p/losses.hpp"
#include "bandit2p/sampling.hpp"
#include "bandit2p/stats.hpp"
#include "bandit2p/vec.hpp"
