#pragma once

// Umbrella header.

#include "rpf/errors.hpp"
#include "rpf/numeric.hpp"
#include "rpf/distributions.hpp"
#include "rpf/measures.hpp"
#include "rpf/engine.hpp"
#include "rpf/verdict.hpp"
#include "rpf/axioms.hpp"
#include "rpf/equilibrium.hpp"
#include "rpf/design.hpp"
#include "rpf/monte_carlo.hpp"
#include "rpf/io.hpp"
