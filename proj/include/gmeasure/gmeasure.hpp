#ifndef GMEASURE_GMEASURE_HPP
#define GMEASURE_GMEASURE_HPP

#include "gmeasure/core.hpp"
#include "gmeasure/json_io.hpp"
#include "gmeasure/kernels.hpp"
#include "gmeasure/pressure.hpp"
#include "gmeasure/sequences.hpp"
#include "gmeasure/simulate.hpp"
#include "gmeasure/stationary.hpp"
#include "gmeasure/trees.hpp"
#include "gmeasure/version.hpp"

#endif  // GMEASURE_GMEASURE_HPP
