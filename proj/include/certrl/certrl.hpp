// Umbrella header.

#pragma once

#include "bounds.hpp"
#include "box_simplex.hpp"
#include "confidence.hpp"
#include "contextual.hpp"
#include "experiment.hpp"
#include "generators.hpp"
#include "ipoc.hpp"
#include "mdp.hpp"
#include "orlc.hpp"
#include "orlc_si.hpp"
#include "rng.hpp"
#include "serialize.hpp"
