#pragma once

#include "rholab/derivatives.hpp"
#include "rholab/error.hpp"
#include "rholab/examples.hpp"
#include "rholab/fixtures.hpp"
#include "rholab/geometry.hpp"
#include "rholab/harness.hpp"
#include "rholab/mappings.hpp"
#include "rholab/norm.hpp"
#include "rholab/norm_json.hpp"
#include "rholab/orthogonality.hpp"
#include "rholab/plot.hpp"
#include "rholab/random.hpp"
#include "rholab/rational.hpp"
#include "rholab/vector.hpp"
