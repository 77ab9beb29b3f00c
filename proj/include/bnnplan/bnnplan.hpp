#pragma once

// Umbrella header: compilation of fixed-horizon planning problems with
// binarized-network transition models into weighted partial MaxSAT.

#include "bnnplan/bnn.hpp"
#include "bnnplan/cardinality.hpp"
#include "bnnplan/cnf.hpp"
#include "bnnplan/domains.hpp"
#include "bnnplan/driver.hpp"
#include "bnnplan/encoder.hpp"
#include "bnnplan/errors.hpp"
#include "bnnplan/io.hpp"
#include "bnnplan/minisolver.hpp"
#include "bnnplan/problem.hpp"
#include "bnnplan/rational.hpp"
