#pragma once

#include "fsbcp/cusum.hpp"
#include "fsbcp/curve_io.hpp"
#include "fsbcp/dgp.hpp"
#include "fsbcp/errors.hpp"
#include "fsbcp/funspace.hpp"
#include "fsbcp/outcome_io.hpp"
#include "fsbcp/parallel.hpp"
#include "fsbcp/resample.hpp"
#include "fsbcp/rng.hpp"
#include "fsbcp/varsieve.hpp"
