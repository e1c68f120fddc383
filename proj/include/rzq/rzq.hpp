#pragma once

#include "rzq/errors.hpp"
#include "rzq/grid.hpp"
#include "rzq/field.hpp"
#include "rzq/spectral.hpp"
#include "rzq/random_field.hpp"
#include "rzq/fit.hpp"
#include "rzq/parallel.hpp"
#include "rzq/bump.hpp"
#include "rzq/quadrature.hpp"
#include "rzq/operators.hpp"
#include "rzq/dynamics.hpp"
#include "rzq/peakons.hpp"
#include "rzq/report.hpp"
#include "rzq/experiments.hpp"
