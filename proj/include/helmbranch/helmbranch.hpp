#pragma once

#include "helmbranch/bessel.hpp"
#include "helmbranch/config.hpp"
#include "helmbranch/continuation.hpp"
#include "helmbranch/error.hpp"
#include "helmbranch/extension.hpp"
#include "helmbranch/fundamental.hpp"
#include "helmbranch/grid.hpp"
#include "helmbranch/io.hpp"
#include "helmbranch/kernel_check.hpp"
#include "helmbranch/operator.hpp"
#include "helmbranch/oracle.hpp"
#include "helmbranch/quadrature.hpp"
#include "helmbranch/rays.hpp"
#include "helmbranch/solver.hpp"
#include "helmbranch/spectral.hpp"
#include "helmbranch/weight.hpp"
