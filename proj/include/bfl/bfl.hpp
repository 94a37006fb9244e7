#ifndef BFL_BFL_HPP
#define BFL_BFL_HPP

#include "errors.hpp"
#include "rng.hpp"
#include "distributions.hpp"
#include "banded_linalg.hpp"
#include "dataset.hpp"
#include "gibbs.hpp"
#include "posterior_summary.hpp"
#include "metrics.hpp"
#include "simulation.hpp"
#include "io.hpp"

#endif
