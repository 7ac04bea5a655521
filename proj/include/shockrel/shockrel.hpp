#pragma once

#include "shockrel/catastrophic.hpp"
#include "shockrel/cumulative.hpp"
#include "shockrel/distributions.hpp"
#include "shockrel/errors.hpp"
#include "shockrel/gamma_convolution.hpp"
#include "shockrel/montecarlo.hpp"
#include "shockrel/quadrature.hpp"
#include "shockrel/rng.hpp"
