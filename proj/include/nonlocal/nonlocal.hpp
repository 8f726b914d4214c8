#pragma once

#include "nonlocal/coefficients.hpp"
#include "nonlocal/csv.hpp"
#include "nonlocal/diagnostics.hpp"
#include "nonlocal/errors.hpp"
#include "nonlocal/experiments.hpp"
#include "nonlocal/fem.hpp"
#include "nonlocal/fixed_point.hpp"
#include "nonlocal/functionals.hpp"
#include "nonlocal/mesh.hpp"
#include "nonlocal/solver.hpp"
