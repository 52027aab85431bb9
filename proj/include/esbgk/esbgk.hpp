#pragma once

#include "esbgk/errors.hpp"
#include "esbgk/grid.hpp"
#include "esbgk/linalg.hpp"
#include "esbgk/moments.hpp"
#include "esbgk/nse.hpp"
#include "esbgk/problems.hpp"
#include "esbgk/projection.hpp"
#include "esbgk/reconstruction.hpp"
#include "esbgk/relaxation.hpp"
#include "esbgk/time_integration.hpp"
