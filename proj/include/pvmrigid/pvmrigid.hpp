#pragma once

#include "pvmrigid/common.hpp"
#include "pvmrigid/rng.hpp"
#include "pvmrigid/simplex.hpp"
#include "pvmrigid/projective.hpp"
#include "pvmrigid/witness.hpp"
#include "pvmrigid/readout.hpp"
#include "pvmrigid/admissibility.hpp"
#include "pvmrigid/rigidity.hpp"
#include "pvmrigid/escort_markov.hpp"
#include "pvmrigid/harness.hpp"
