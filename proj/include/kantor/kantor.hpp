#pragma once

// Core library. io.hpp and cli.hpp are left out: they pull in the vendored JSON and CLI headers.

#include "kantor/errors.hpp"
#include "kantor/numeric.hpp"
#include "kantor/special.hpp"
#include "kantor/metric.hpp"
#include "kantor/costs.hpp"
#include "kantor/measures.hpp"
#include "kantor/ot_exact.hpp"
#include "kantor/ot_lp.hpp"
#include "kantor/convergence.hpp"
#include "kantor/random.hpp"
#include "kantor/clt_lab.hpp"
