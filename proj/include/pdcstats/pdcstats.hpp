#pragma once

#include "pdcstats/coupling.hpp"
#include "pdcstats/errors.hpp"
#include "pdcstats/format.hpp"
#include "pdcstats/io.hpp"
#include "pdcstats/kernel_io.hpp"
#include "pdcstats/loss.hpp"
#include "pdcstats/nnls.hpp"
#include "pdcstats/schmidt.hpp"
#include "pdcstats/sdf.hpp"
#include "pdcstats/stats.hpp"
#include "pdcstats/sweep.hpp"
